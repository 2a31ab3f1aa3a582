#ifndef KSENT_TRUNCATION_HPP
#define KSENT_TRUNCATION_HPP

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ksent/detail/summation.hpp"
#include "ksent/errors.hpp"

namespace ksent {

/// Weight rule on the labels 1, 2, 3, ... of a countable alphabet.
struct CountableWeights {
    std::function<double(std::size_t label)> weight;
    /// Closed-form tail mass sum_{j >= label} weight(j), when known.
    std::function<std::optional<double>(std::size_t label)> tail;
    std::string name;
};

/// The rule weight(k) = 2^-k with tail 2^-(k-1).
inline CountableWeights geometric_half() {
    return {[](std::size_t k) { return std::ldexp(1.0, -static_cast<int>(k)); },
            [](std::size_t k) -> std::optional<double> { return std::ldexp(1.0, 1 - static_cast<int>(k)); },
            "2^-k"};
}

enum class TailPolicy {
    MergeTail,   ///< labels >= K pooled into the last symbol
    Renormalize  ///< labels >= K dropped, remainder rescaled
};

struct TailTruncation {
    std::size_t cutoff = 1;
    TailPolicy policy = TailPolicy::MergeTail;
};

/// Finite probability vector of length `cutoff`; index i carries label i + 1.
inline std::vector<double> truncate_countable(const CountableWeights& rule, const TailTruncation& trunc) {
    require(trunc.cutoff >= 1, "truncation cutoff must be at least 1");
    const std::size_t k = trunc.cutoff;
    std::vector<double> w(k);
    for (std::size_t i = 0; i + 1 < k; ++i) {
        w[i] = rule.weight(i + 1);
        require(w[i] >= 0.0 && std::isfinite(w[i]), "weight rule produced an invalid weight");
    }
    if (trunc.policy == TailPolicy::MergeTail) {
        const auto tail = rule.tail ? rule.tail(k) : std::nullopt;
        require(tail.has_value(), "MergeTail needs a closed-form tail mass for rule " + rule.name);
        w[k - 1] = *tail;
    } else {
        w[k - 1] = rule.weight(k);
    }
    const double total = detail::compensated_total(w);
    require(total > 0.0, "truncated weights have zero mass");
    for (double& x : w) x /= total;
    return w;
}

}  // namespace ksent

#endif
