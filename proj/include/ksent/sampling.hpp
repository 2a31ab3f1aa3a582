#ifndef KSENT_SAMPLING_HPP
#define KSENT_SAMPLING_HPP

#include <algorithm>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "ksent/measure.hpp"
#include "ksent/word.hpp"

namespace ksent {

/// SplitMix64: derives independent child seeds from one experiment seed.
class SeedSplitter {
public:
    explicit SeedSplitter(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() noexcept {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

private:
    std::uint64_t state_;
};

/// Uniform double in [0, 1) built from the top 53 bits; identical on every platform.
inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

namespace detail {

inline std::size_t draw_index(std::span<const double> probs, std::mt19937_64& rng) {
    const double u = uniform01(rng);
    double acc = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        if (probs[i] <= 0.0) continue;
        last_positive = i;
        acc += probs[i];
        if (u < acc) return i;
    }
    return last_positive;
}

inline Word sample_base(const StationaryMeasure& m, std::size_t length, std::mt19937_64& rng) {
    Word out;
    out.reserve(length);
    if (const auto* b = m.as_bernoulli()) {
        for (std::size_t i = 0; i < length; ++i) out.push_back(static_cast<Symbol>(draw_index(b->weights(), rng)));
        return out;
    }
    if (const auto* mk = m.as_markov()) {
        const std::size_t k = mk->alphabet_size();
        WordIndex memory = draw_index(mk->stationary().probs(), rng);
        const Word start = decode_word(memory, k, mk->order());
        for (std::size_t i = 0; i < std::min(length, start.size()); ++i) out.push_back(start[i]);
        while (out.size() < length) {
            const auto a = static_cast<Symbol>(draw_index(mk->row(memory), rng));
            out.push_back(a);
            memory = mk->next_memory(memory, a);
        }
        return out;
    }
    const auto* f = m.as_factor();
    Word src = sample_base(f->source(), length, rng);
    for (auto& s : src) s = f->coding()[s];
    return src;
}

}  // namespace detail

/// Stationary sample path of the given length. Deterministic in `seed`.
inline Word sample_path(const StationaryMeasure& m, std::size_t length, std::uint64_t seed) {
    require(length >= 1, "sample length must be at least 1");
    std::mt19937_64 rng(seed);
    return detail::sample_base(m, length, rng);
}

}  // namespace ksent

#endif
