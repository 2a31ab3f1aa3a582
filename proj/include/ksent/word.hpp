#ifndef KSENT_WORD_HPP
#define KSENT_WORD_HPP

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "ksent/errors.hpp"

namespace ksent {

/// Alphabet index in [0, K). One-based symbol labels 1, 2, ... map to index = label - 1.
using Symbol = std::uint32_t;

/// Finite word, earliest symbol first.
using Word = std::vector<Symbol>;

/// Dense word index. The leftmost (earliest) symbol is the most significant digit.
using WordIndex = std::uint64_t;

/// K^n, or nullopt on 64-bit overflow.
inline std::optional<std::uint64_t> checked_pow(std::uint64_t base, std::size_t exp) {
    std::uint64_t r = 1;
    for (std::size_t i = 0; i < exp; ++i) {
        if (base != 0 && r > std::numeric_limits<std::uint64_t>::max() / base) return std::nullopt;
        r *= base;
    }
    return r;
}

/// Number of words of length n over K symbols, throwing BudgetExceeded past the limit.
inline std::uint64_t word_count(std::size_t alphabet_size, std::size_t n, const Limits& limits,
                                const char* context = "block enumeration") {
    const auto count = checked_pow(alphabet_size, n);
    if (!count || *count > limits.max_words) {
        throw BudgetExceeded(std::string(context) + " over " + std::to_string(alphabet_size) +
                                 " symbols at length " + std::to_string(n),
                             count.value_or(std::numeric_limits<std::uint64_t>::max()),
                             limits.max_words);
    }
    return *count;
}

inline WordIndex encode_word(const Word& w, std::size_t alphabet_size) {
    WordIndex idx = 0;
    for (Symbol s : w) {
        require(s < alphabet_size, "symbol " + std::to_string(s) + " outside alphabet of size " +
                                       std::to_string(alphabet_size));
        idx = idx * alphabet_size + s;
    }
    return idx;
}

inline Word decode_word(WordIndex idx, std::size_t alphabet_size, std::size_t length) {
    Word w(length);
    for (std::size_t i = length; i-- > 0;) {
        w[i] = static_cast<Symbol>(idx % alphabet_size);
        idx /= alphabet_size;
    }
    return w;
}

inline std::string word_to_string(const Word& w) {
    std::string s;
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (i) s += '.';
        s += std::to_string(w[i]);
    }
    return s;
}

}  // namespace ksent

#endif
