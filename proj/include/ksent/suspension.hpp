#ifndef KSENT_SUSPENSION_HPP
#define KSENT_SUSPENSION_HPP

#include <algorithm>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ksent/detail/summation.hpp"
#include "ksent/entropy.hpp"
#include "ksent/measure.hpp"

namespace ksent {

/// Integer ceiling f_i >= 0, constant on each base symbol i.
using CeilingFunction = std::vector<std::uint64_t>;

/// Discrete suspension (tower) over a Bernoulli or order-1 Markov base.
///
/// Tower symbols are the pairs (i, k), 0 <= k <= f_i, numbered with i major and k minor.
/// The tower climbs (i, k) -> (i, k+1) deterministically and, from the top (i, f_i),
/// drops to (j, 0) with the base transition probability i -> j.
struct SuspensionSystem {
    StationaryMeasure base;
    CeilingFunction f;
    std::vector<std::pair<Symbol, std::uint64_t>> tower_symbols;
    std::vector<Symbol> column_start;  ///< tower index of (i, 0)
    double mean_ceiling = 0.0;         ///< nu(f) = sum_i f_i nu(C_i)
    StationaryMeasure measure;         ///< order-1 Markov measure on the tower alphabet

    std::size_t tower_size() const noexcept { return tower_symbols.size(); }
    Symbol tower_index(Symbol i, std::uint64_t k) const {
        require(i < f.size() && k <= f[i], "tower coordinate out of range");
        return column_start[i] + static_cast<Symbol>(k);
    }
};

inline SuspensionSystem build_suspension(const StationaryMeasure& base, const CeilingFunction& f,
                                         const Limits& limits = {}) {
    const std::size_t k = base.alphabet_size();
    require(f.size() == k, "ceiling function needs one value per base symbol");
    const MarkovChain* chain = base.as_markov();
    const Bernoulli* iid = base.as_bernoulli();
    require(iid != nullptr || (chain != nullptr && chain->order() == 1),
            "suspension base must be Bernoulli or order-1 Markov");

    auto one_symbol = [&](Symbol i) { return iid ? iid->weights()[i] : chain->stationary()[i]; };
    auto base_step = [&](Symbol i, Symbol j) { return iid ? iid->weights()[j] : chain->transition(i, j); };

    std::vector<std::pair<Symbol, std::uint64_t>> symbols;
    std::vector<Symbol> start(k);
    detail::CompensatedSum mean;
    for (Symbol i = 0; i < k; ++i) {
        start[i] = static_cast<Symbol>(symbols.size());
        for (std::uint64_t h = 0; h <= f[i]; ++h) {
            symbols.emplace_back(i, h);
            if (symbols.size() > limits.max_words)
                throw BudgetExceeded("tower alphabet", symbols.size(), limits.max_words);
        }
        mean.add(static_cast<double>(f[i]) * one_symbol(i));
    }
    const std::size_t t = symbols.size();
    const auto kernel_size = checked_pow(t, 2);
    if (!kernel_size || *kernel_size > limits.max_words)
        throw BudgetExceeded("tower kernel", kernel_size.value_or(UINT64_MAX), limits.max_words);

    const double norm = mean.value() + 1.0;
    std::vector<double> kernel(*kernel_size, 0.0);
    std::vector<double> stationary(t);
    for (Symbol s = 0; s < t; ++s) {
        const auto [i, h] = symbols[s];
        stationary[s] = one_symbol(i) / norm;
        if (h < f[i]) {
            kernel[s * t + s + 1] = 1.0;
        } else {
            for (Symbol j = 0; j < k; ++j) kernel[s * t + start[j]] = base_step(i, j);
        }
    }
    auto measure = markov_with_stationary(t, 1, std::move(kernel), BlockDistribution(t, 1, std::move(stationary)));
    return {base, f, std::move(symbols), std::move(start), mean.value(), std::move(measure)};
}

/// Abramov's formula: rate of the tower = base rate / (nu(f) + 1).
inline double abramov_rate(const SuspensionSystem& s) {
    return entropy_rate(s.base, 1).value.nats / (s.mean_ceiling + 1.0);
}

/// Entropy of the tower partition itself (the one-symbol marginal of the tower measure).
inline EntropyValue tower_partition_entropy(const SuspensionSystem& s) {
    return shannon(s.measure.as_markov()->stationary().probs());
}

/// Same quantity from base weights and ceilings without building the tower:
/// each of the f_i + 1 levels over symbol i carries weight nu_i / (nu(f) + 1).
inline EntropyValue tower_partition_entropy(std::span<const double> base_weights, const CeilingFunction& f) {
    require(base_weights.size() == f.size(), "ceiling function needs one value per base symbol");
    detail::CompensatedSum mean;
    for (std::size_t i = 0; i < f.size(); ++i) mean.add(static_cast<double>(f[i]) * base_weights[i]);
    const double norm = mean.value() + 1.0;
    detail::CompensatedSum h;
    for (std::size_t i = 0; i < f.size(); ++i)
        h.add((static_cast<double>(f[i]) + 1.0) * detail::neg_plogp(base_weights[i] / norm));
    return {h.value()};
}

/// Partition that keeps labels < q-1 and merges every label >= q-1 into class q-1.
struct TruncatedPartition {
    std::size_t q = 1;
    std::vector<Symbol> coding;

    std::size_t classes() const {
        return coding.empty() ? 0 : static_cast<std::size_t>(*std::max_element(coding.begin(), coding.end())) + 1;
    }
};

inline TruncatedPartition truncated_partition(std::size_t alphabet_size, std::size_t q) {
    require(q >= 1, "q must be at least 1");
    require(alphabet_size >= 1, "alphabet must be non-empty");
    TruncatedPartition t{q, std::vector<Symbol>(alphabet_size)};
    for (Symbol a = 0; a < alphabet_size; ++a) t.coding[a] = static_cast<Symbol>(std::min<std::size_t>(a, q - 1));
    return t;
}

/// The coded process psi_m(x): symbols >= q-1 become one.
inline StationaryMeasure factor_process(const StationaryMeasure& m, const TruncatedPartition& t) {
    require(t.coding.size() == m.alphabet_size(), "partition coding does not match the measure's alphabet");
    return factor_of(m, t.coding);
}

/// Bracket for h(T, xi_m): the entropy rate of the coded process.
inline EntropyBracket factor_entropy_bracket(const StationaryMeasure& m, const TruncatedPartition& t,
                                             std::size_t n_max, const Limits& limits = {}) {
    return rate_bracket(factor_process(m, t), n_max, limits);
}

/// Block lengths r_m = sum_{i<=m} (f_i + 1) for m = 1..f.size(): the tower steps spent
/// crossing the first m columns.
inline std::vector<std::size_t> block_length_schedule(const CeilingFunction& f) {
    std::vector<std::size_t> r;
    std::size_t acc = 0;
    for (auto fi : f) r.push_back(acc += static_cast<std::size_t>(fi) + 1);
    return r;
}

/// Ceilings f_i = floor(2^i / i^2) on labels i = 1..K: sum f_i 2^-i converges while
/// sum f_i 2^-i |log 2^-i| diverges, so the tower partition entropy grows without bound in K.
inline CeilingFunction divergent_ceiling(std::size_t K) {
    require(K >= 1 && K <= 62, "divergent ceiling supports 1 <= K <= 62");
    CeilingFunction f(K);
    for (std::size_t i = 1; i <= K; ++i) f[i - 1] = (std::uint64_t{1} << i) / (i * i);
    return f;
}

}  // namespace ksent

#endif
