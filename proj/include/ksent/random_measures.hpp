#ifndef KSENT_RANDOM_MEASURES_HPP
#define KSENT_RANDOM_MEASURES_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "ksent/measure.hpp"
#include "ksent/sampling.hpp"

namespace ksent {

/// Random probability row from exponential draws; entries are zeroed with probability
/// `zero_fraction` (at least one entry stays positive).
inline std::vector<double> random_row(std::mt19937_64& rng, std::size_t k, double zero_fraction = 0.0) {
    std::vector<double> row(k);
    for (auto& x : row) {
        x = -std::log(1.0 - uniform01(rng));
        if (uniform01(rng) < zero_fraction) x = 0.0;
    }
    bool any = false;
    for (double x : row) any = any || x > 0.0;
    if (!any) row[static_cast<std::size_t>(uniform01(rng) * static_cast<double>(k)) % k] = 1.0;
    detail::normalize(row);
    return row;
}

inline StationaryMeasure random_markov(std::size_t k, std::size_t order, std::uint64_t seed,
                                       double zero_fraction = 0.0) {
    std::mt19937_64 rng(SeedSplitter(seed).next());
    const auto rows = checked_pow(k, order);
    require(rows.has_value(), "kernel too large");
    std::vector<double> kernel;
    kernel.reserve(*rows * k);
    for (std::size_t w = 0; w < *rows; ++w) {
        const auto row = random_row(rng, k, zero_fraction);
        kernel.insert(kernel.end(), row.begin(), row.end());
    }
    return markov_from_kernel(k, order, std::move(kernel));
}

inline StationaryMeasure random_bernoulli(std::size_t k, std::uint64_t seed) {
    std::mt19937_64 rng(SeedSplitter(seed).next());
    return bernoulli_from_weights(random_row(rng, k));
}

}  // namespace ksent

#endif
