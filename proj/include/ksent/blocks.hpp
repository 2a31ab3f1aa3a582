#ifndef KSENT_BLOCKS_HPP
#define KSENT_BLOCKS_HPP

#include <vector>

#include "ksent/block_distribution.hpp"
#include "ksent/detail/hidden_forward.hpp"
#include "ksent/measure.hpp"

namespace ksent {

/// Distribution of the length-n words of a stationary measure.
/// Throws BudgetExceeded when K^n exceeds the enumeration budget.
inline BlockDistribution block_marginal(const StationaryMeasure& m, std::size_t n, const Limits& limits = {}) {
    require(n >= 1, "block length must be at least 1");
    const std::size_t k = m.alphabet_size();
    word_count(k, n, limits);

    if (const auto* b = m.as_bernoulli()) {
        std::vector<double> probs{1.0};
        for (std::size_t len = 0; len < n; ++len) {
            std::vector<double> next(probs.size() * k);
            for (std::size_t w = 0; w < probs.size(); ++w)
                for (std::size_t a = 0; a < k; ++a) next[w * k + a] = probs[w] * b->weights()[a];
            probs = std::move(next);
        }
        return {k, n, std::move(probs)};
    }

    if (const auto* mk = m.as_markov()) {
        if (n <= mk->order()) return mk->stationary().prefix_marginal(n);
        std::vector<double> probs(mk->stationary().probs().begin(), mk->stationary().probs().end());
        const std::size_t states = mk->memory_words();
        for (std::size_t len = mk->order(); len < n; ++len) {
            std::vector<double> next(probs.size() * k);
            for (std::size_t w = 0; w < probs.size(); ++w) {
                const double pw = probs[w];
                const WordIndex memory = w % states;
                for (Symbol a = 0; a < k; ++a) next[w * k + a] = pw * mk->transition(memory, a);
            }
            probs = std::move(next);
        }
        return {k, n, std::move(probs)};
    }

    detail::HiddenForward fwd(m, false, limits);
    fwd.extend_to(n);
    return fwd.output_distribution();
}

}  // namespace ksent

#endif
