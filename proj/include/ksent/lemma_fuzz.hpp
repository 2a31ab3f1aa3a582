#ifndef KSENT_LEMMA_FUZZ_HPP
#define KSENT_LEMMA_FUZZ_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "ksent/entropy.hpp"
#include "ksent/sampling.hpp"

namespace ksent {

struct LemmaFuzzReport {
    std::size_t trials = 0;      ///< accepted triples (hypothesis holds)
    std::size_t attempts = 0;    ///< generated triples, including rejected ones
    std::size_t violations = 0;  ///< accepted triples with H(p) > bound + tolerance
    double min_slack = std::numeric_limits<double>::infinity();
    double worst_c = 0.0;
};

namespace detail {

// Random q over [1, max_atoms] atoms with a spread of shapes: flat, skewed, with zero atoms.
inline std::vector<double> random_reference(std::mt19937_64& rng, std::size_t max_atoms) {
    const std::size_t atoms = 1 + static_cast<std::size_t>(uniform01(rng) * static_cast<double>(max_atoms));
    const double skew = 0.25 + 4.0 * uniform01(rng);
    const bool with_zeros = uniform01(rng) < 0.2;
    std::vector<double> q(std::min(atoms, max_atoms));
    for (auto& x : q) {
        x = std::pow(-std::log(1.0 - uniform01(rng)), skew);
        if (with_zeros && uniform01(rng) < 0.3) x = 0.0;
    }
    if (std::all_of(q.begin(), q.end(), [](double x) { return x == 0.0; })) q[0] = 1.0;
    normalize(q);
    return q;
}

}  // namespace detail

/// Randomized check of H(p) <= (1+c) H(q) + c ln 3 over triples satisfying |p_i - q_i| <= c q_i.
///
/// p multiplies each q_i by a factor in [1-c, 1+c] and renormalizes, keeping the triple
/// only if the hypothesis survives renormalization. Half the triples instead move mass
/// between atom pairs at the largest admissible ratio, which stays exactly normalized.
inline LemmaFuzzReport lemma_fuzz(std::size_t trials, std::uint64_t seed, std::size_t max_atoms,
                                  double tolerance = 1e-10) {
    require(max_atoms >= 1, "max_atoms must be at least 1");
    std::mt19937_64 rng(SeedSplitter(seed).next());
    LemmaFuzzReport rep;
    const std::size_t max_attempts = 1000 * std::max<std::size_t>(trials, 1);
    while (rep.trials < trials && rep.attempts < max_attempts) {
        ++rep.attempts;
        const auto q = detail::random_reference(rng, max_atoms);
        double c = uniform01(rng) / 3.0;
        if (c <= 0.0) continue;
        std::vector<double> p(q);
        if (uniform01(rng) < 0.5) {
            for (std::size_t i = 0; i < q.size(); ++i) p[i] = q[i] * (1.0 - c + 2.0 * c * uniform01(rng));
            detail::normalize(p);
        } else {
            std::vector<std::size_t> order(q.size());
            for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
            std::shuffle(order.begin(), order.end(), rng);
            for (std::size_t i = 0; i + 1 < order.size(); i += 2) {
                const std::size_t from = order[i], to = order[i + 1];
                const double delta = c * std::min(q[from], q[to]) * uniform01(rng);
                p[from] -= delta;
                p[to] += delta;
            }
        }
        const auto report = lemma_bound_check(p, q, c);
        if (!report.hypothesis_holds) continue;
        ++rep.trials;
        if (report.slack < rep.min_slack) {
            rep.min_slack = report.slack;
            rep.worst_c = c;
        }
        if (report.H_p.nats > report.bound + tolerance) ++rep.violations;
    }
    return rep;
}

}  // namespace ksent

#endif
