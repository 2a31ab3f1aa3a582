#ifndef KSENT_MARKOV_HULL_HPP
#define KSENT_MARKOV_HULL_HPP

#include <string>
#include <vector>

#include "ksent/blocks.hpp"
#include "ksent/entropy.hpp"
#include "ksent/measure.hpp"

namespace ksent {

/// Order-n Markov measure that agrees with its source on all blocks of length <= n+1.
struct MarkovHull {
    std::size_t order = 0;
    StationaryMeasure hull;
    std::string source_id;
    /// Memory words (indices into the K^n rows) with zero source probability; their rows are uniform.
    std::vector<WordIndex> flagged_rows;
};

/// n-Markov hull: row for memory word w is mu(w a) / mu(w); the stationary law is the
/// source's n-block marginal.
inline MarkovHull markov_hull(const StationaryMeasure& m, std::size_t n, std::string source_id = {},
                              const Limits& limits = {}) {
    require(n >= 1, "hull order must be at least 1");
    const BlockDistribution joint = block_marginal(m, n + 1, limits);
    const BlockDistribution memory = joint.drop_last();
    const std::size_t k = m.alphabet_size();
    std::vector<double> kernel(joint.size());
    std::vector<WordIndex> flagged;
    for (WordIndex w = 0; w < memory.size(); ++w) {
        const double pw = memory[w];
        if (pw > 0.0) {
            for (Symbol a = 0; a < k; ++a) kernel[w * k + a] = joint[w * k + a] / pw;
        } else {
            for (Symbol a = 0; a < k; ++a) kernel[w * k + a] = 1.0 / static_cast<double>(k);
            flagged.push_back(w);
        }
    }
    // Stationary law = drop_first of the (n+1)-block, which equals drop_last up to rounding
    // and is exactly what the kernel transports the memory law onto.
    BlockDistribution stationary = joint.drop_first();
    return {n, markov_with_stationary(k, n, std::move(kernel), std::move(stationary)), std::move(source_id),
            std::move(flagged)};
}

/// Exact entropy rate of the hull; equals the source's order-n conditional block entropy.
inline EntropyValue hull_entropy_rate(const MarkovHull& h) {
    return markov_entropy_rate(*h.hull.as_markov());
}

}  // namespace ksent

#endif
