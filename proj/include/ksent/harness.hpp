#ifndef KSENT_HARNESS_HPP
#define KSENT_HARNESS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "ksent/blocks.hpp"
#include "ksent/entropy.hpp"
#include "ksent/markov_hull.hpp"
#include "ksent/sampling.hpp"
#include "ksent/suspension.hpp"

namespace ksent {

/// Target mu, approximants mu_n with block-length schedule r_n and ratio schedule eps_n.
struct ApproximationFamily {
    StationaryMeasure target;
    std::vector<StationaryMeasure> approximants;
    std::vector<std::size_t> index;  ///< the n of each approximant
    std::vector<std::size_t> r;
    std::vector<double> eps;
    bool hulls = false;              ///< approximants are the n-Markov hulls of the target

    std::size_t size() const noexcept { return approximants.size(); }

    void validate() const {
        require(!approximants.empty(), "approximation family is empty");
        require(index.size() == approximants.size() && r.size() == approximants.size() &&
                    eps.size() == approximants.size(),
                "family schedules must have one entry per approximant");
        for (const auto& a : approximants)
            require(a.alphabet_size() == target.alphabet_size(), "approximants must share the target's alphabet");
        for (double e : eps) require(e > 0.0, "eps_n must be positive");
    }
};

/// Hull family mu_n = n-Markov hull of the target for n in [n_lo, n_hi], r_n = n, eps_n = eps_scale / n.
inline ApproximationFamily hull_family(const StationaryMeasure& target, std::size_t n_lo, std::size_t n_hi,
                                       double eps_scale = 0.1, const Limits& limits = {}) {
    require(n_lo >= 1 && n_lo <= n_hi, "hull orders must satisfy 1 <= lo <= hi");
    ApproximationFamily fam{target, {}, {}, {}, {}, true};
    for (std::size_t n = n_lo; n <= n_hi; ++n) {
        fam.approximants.push_back(markov_hull(target, n, {}, limits).hull);
        fam.index.push_back(n);
        fam.r.push_back(n);
        fam.eps.push_back(eps_scale / static_cast<double>(n));
    }
    return fam;
}

/// Replay of the proof's central inequality on blocks of length r_n.
struct LemmaReplay {
    bool applicable = false;  ///< hypothesis held and c = 2 eps_n < 1/3
    double c = 0.0;
    double H_approx = 0.0;
    double H_target = 0.0;
    double bound = 0.0;
    bool holds = true;
};

struct HypothesisReport {
    std::size_t n = 0;
    std::size_t r = 0;
    double eps = 0.0;
    /// max over words A of length <= r_n + 1 with mu_n(A) > 0 of |mu(A) - mu_n(A)| / mu_n(A)
    double max_ratio = 0.0;
    Word worst_word;
    std::vector<double> max_ratio_by_length;  ///< entry j-1 for length j
    bool holds = false;
    std::size_t zero_mismatch_count = 0;
    std::vector<Word> zero_mismatch;          ///< first few words with mu_n(A) = 0 < mu(A)
    bool flip_checked = false;
    bool flip_holds = true;                   ///< |mu - mu_n| <= 2 eps mu on all blocks
    LemmaReplay replay;
};

inline constexpr std::size_t kMaxListedMismatches = 16;

/// Checks |mu(A) - mu_n(A)| <= eps_n mu_n(A) on every word of length 1..r_n+1.
inline HypothesisReport check_condition(const ApproximationFamily& fam, std::size_t i, const Limits& limits = {}) {
    fam.validate();
    require(i < fam.size(), "approximant index out of range");
    HypothesisReport rep;
    rep.n = fam.index[i];
    rep.r = fam.r[i];
    rep.eps = fam.eps[i];
    const std::size_t top = rep.r + 1;
    const std::size_t k = fam.target.alphabet_size();

    std::vector<BlockDistribution> target_blocks, approx_blocks;
    target_blocks.push_back(block_marginal(fam.target, top, limits));
    approx_blocks.push_back(block_marginal(fam.approximants[i], top, limits));
    while (target_blocks.back().block_length() > 1) {
        target_blocks.push_back(target_blocks.back().drop_last());
        approx_blocks.push_back(approx_blocks.back().drop_last());
    }
    std::reverse(target_blocks.begin(), target_blocks.end());
    std::reverse(approx_blocks.begin(), approx_blocks.end());

    rep.flip_checked = rep.eps <= 0.5;
    for (std::size_t j = 0; j < top; ++j) {
        const auto& mu = target_blocks[j];
        const auto& mun = approx_blocks[j];
        double worst = 0.0;
        for (WordIndex w = 0; w < mu.size(); ++w) {
            const double a = mu[w], b = mun[w];
            if (b > 0.0) {
                const double ratio = std::fabs(a - b) / b;
                if (ratio > worst) worst = ratio;
                if (ratio > rep.max_ratio) {
                    rep.max_ratio = ratio;
                    rep.worst_word = decode_word(w, k, j + 1);
                }
            } else if (a > 0.0) {
                ++rep.zero_mismatch_count;
                if (rep.zero_mismatch.size() < kMaxListedMismatches) rep.zero_mismatch.push_back(decode_word(w, k, j + 1));
            }
        }
        rep.max_ratio_by_length.push_back(worst);
    }
    rep.holds = rep.zero_mismatch_count == 0 && rep.max_ratio <= rep.eps;

    if (rep.holds && rep.flip_checked) {
        for (std::size_t j = 0; j < top && rep.flip_holds; ++j)
            for (WordIndex w = 0; w < target_blocks[j].size(); ++w)
                if (!ratio_flip_check(target_blocks[j][w], approx_blocks[j][w], rep.eps)) {
                    rep.flip_holds = false;
                    break;
                }
    }

    rep.replay.c = 2.0 * rep.eps;
    if (rep.holds && rep.replay.c < 1.0 / 3.0 && rep.r >= 1) {
        const auto& q = target_blocks[rep.r - 1];
        const auto& p = approx_blocks[rep.r - 1];
        const auto lemma = lemma_bound_check(p.probs(), q.probs(), rep.replay.c);
        rep.replay.applicable = lemma.hypothesis_holds;
        rep.replay.H_approx = lemma.H_p.nats;
        rep.replay.H_target = lemma.H_q.nats;
        rep.replay.bound = lemma.bound;
        rep.replay.holds = lemma.H_p.nats <= lemma.bound + 1e-10;
    }
    return rep;
}

struct UnionStabilityReport {
    std::size_t unions_tested = 0;
    std::size_t violations = 0;
    double worst_excess = 0.0;  ///< max of |mu(B) - nu(B)| - eps nu(B)
    bool ok() const noexcept { return violations == 0; }
};

/// Tests |mu(B) - nu(B)| <= eps nu(B) on every singleton and on `trials` random unions of atoms.
inline UnionStabilityReport union_stability_report(std::span<const double> mu, std::span<const double> nu,
                                                   double eps, std::size_t trials, std::uint64_t seed) {
    require(mu.size() == nu.size() && !mu.empty(), "atom vectors must be non-empty and equally long");
    constexpr double kSlack = 1e-12;
    UnionStabilityReport rep;
    auto test = [&](double a, double b) {
        ++rep.unions_tested;
        const double excess = std::fabs(a - b) - eps * b;
        rep.worst_excess = std::max(rep.worst_excess, excess);
        if (excess > kSlack) ++rep.violations;
    };
    for (std::size_t i = 0; i < mu.size(); ++i) test(mu[i], nu[i]);
    std::mt19937_64 rng(SeedSplitter(seed).next());
    for (std::size_t t = 0; t < trials; ++t) {
        const double density = uniform01(rng);
        detail::CompensatedSum a, b;
        for (std::size_t i = 0; i < mu.size(); ++i)
            if (uniform01(rng) < density) {
                a.add(mu[i]);
                b.add(nu[i]);
            }
        test(a.value(), b.value());
    }
    return rep;
}

inline bool union_stability_check(std::span<const double> mu, std::span<const double> nu, double eps,
                                  std::size_t trials, std::uint64_t seed) {
    return union_stability_report(mu, nu, eps, trials, seed).ok();
}

enum class Verdict { Holds, Violated, Inconclusive };

inline const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::Holds: return "holds";
        case Verdict::Violated: return "violated";
        case Verdict::Inconclusive: return "inconclusive";
    }
    return "?";
}

/// Compares a target bracket against the lower bound of the right-hand side, in the
/// certified direction: "violated" needs target.upper below the RHS lower bound.
inline Verdict certified_verdict(const EntropyBracket& target, double rhs_lower, double tol) {
    if (target.lower.nats + tol >= rhs_lower) return Verdict::Holds;
    if (target.upper.nats + tol < rhs_lower) return Verdict::Violated;
    return Verdict::Inconclusive;
}

struct ExperimentOptions {
    double tolerance = 1e-8;
    std::optional<std::size_t> tail_start;  ///< first family position in the limsup tail
    std::size_t bracket_depth = 6;          ///< memory depth for rate brackets of factors
    Limits limits;

    std::size_t tail_from(std::size_t size) const { return std::min(tail_start.value_or(size / 2), size - 1); }
};

struct ApproximantRate {
    std::size_t n = 0;
    EntropyBracket rate;
    HypothesisReport hypothesis;
};

struct Theorem1Report {
    EntropyBracket target_rate;
    std::vector<ApproximantRate> approximants;
    std::size_t tail_start = 0;  ///< position in the family where the tail begins
    double tail_max_lower = 0.0;
    double tail_max_upper = 0.0;
    bool hypotheses_hold = true;
    bool hull_monotone = true;     ///< hull families only: rates non-increasing and >= target
    Verdict verdict = Verdict::Inconclusive;
    std::vector<std::string> warnings;
};

/// h_mu(T) >= limsup_n h_{mu_n}(T), with the limsup rendered as the max over the computed tail.
inline Theorem1Report theorem1_experiment(const ApproximationFamily& fam, const ExperimentOptions& opt = {}) {
    fam.validate();
    Theorem1Report rep;
    rep.target_rate = rate_bracket(fam.target, opt.bracket_depth, opt.limits);
    for (std::size_t i = 0; i < fam.size(); ++i) {
        ApproximantRate a;
        a.n = fam.index[i];
        a.rate = rate_bracket(fam.approximants[i], opt.bracket_depth, opt.limits);
        try {
            a.hypothesis = check_condition(fam, i, opt.limits);
            if (!a.hypothesis.holds) {
                rep.hypotheses_hold = false;
                rep.warnings.push_back("ratio condition fails at n = " + std::to_string(a.n));
            }
        } catch (const BudgetExceeded& e) {
            rep.hypotheses_hold = false;
            rep.warnings.push_back("ratio condition not checked at n = " + std::to_string(a.n) + ": " + e.what());
        }
        rep.approximants.push_back(std::move(a));
    }
    rep.tail_start = opt.tail_from(fam.size());
    rep.tail_max_lower = -std::numeric_limits<double>::infinity();
    rep.tail_max_upper = -std::numeric_limits<double>::infinity();
    for (std::size_t i = rep.tail_start; i < fam.size(); ++i) {
        rep.tail_max_lower = std::max(rep.tail_max_lower, rep.approximants[i].rate.lower.nats);
        rep.tail_max_upper = std::max(rep.tail_max_upper, rep.approximants[i].rate.upper.nats);
    }
    if (fam.hulls) {
        for (std::size_t i = 0; i < fam.size(); ++i) {
            if (rep.approximants[i].rate.lower.nats < rep.target_rate.lower.nats - opt.tolerance)
                rep.hull_monotone = false;
            if (i > 0 && rep.approximants[i].rate.upper.nats > rep.approximants[i - 1].rate.upper.nats + 1e-10)
                rep.hull_monotone = false;
        }
        if (!rep.hull_monotone) rep.warnings.push_back("hull rates are not non-increasing down to the target rate");
    }
    rep.verdict = certified_verdict(rep.target_rate, rep.tail_max_lower, opt.tolerance);
    return rep;
}

struct Theorem2Row {
    std::size_t m = 0;
    std::size_t q = 0;
    std::vector<EntropyBracket> brackets;  ///< h_{mu_n}(T, xi_m), one per approximant
    double tail_max_lower = 0.0;
    double tail_max_upper = 0.0;
};

struct Theorem2Report {
    EntropyBracket target_rate;
    std::vector<std::size_t> approximant_index;
    std::vector<Theorem2Row> rows;
    std::size_t tail_start = 0;
    double rhs_lower = 0.0;  ///< max over m of the tail max of lower brackets
    std::vector<HypothesisReport> hypotheses;
    Verdict verdict = Verdict::Inconclusive;
    std::vector<std::string> warnings;
};

/// h_mu(T) >= limsup_m limsup_n h_{mu_n}(T, xi_m) for truncated partitions xi_m with q(m) classes.
inline Theorem2Report theorem2_experiment(const ApproximationFamily& fam, const std::vector<std::size_t>& q_schedule,
                                          const ExperimentOptions& opt = {}) {
    fam.validate();
    require(!q_schedule.empty(), "q schedule is empty");
    Theorem2Report rep;
    rep.target_rate = rate_bracket(fam.target, opt.bracket_depth, opt.limits);
    rep.approximant_index = fam.index;
    rep.tail_start = opt.tail_from(fam.size());
    for (std::size_t i = 0; i < fam.size(); ++i) {
        try {
            rep.hypotheses.push_back(check_condition(fam, i, opt.limits));
        } catch (const BudgetExceeded& e) {
            rep.warnings.push_back("ratio condition not checked at n = " + std::to_string(fam.index[i]) + ": " +
                                   e.what());
        }
    }
    rep.rhs_lower = -std::numeric_limits<double>::infinity();
    for (std::size_t m = 0; m < q_schedule.size(); ++m) {
        Theorem2Row row;
        row.m = m + 1;
        row.q = q_schedule[m];
        const auto part = truncated_partition(fam.target.alphabet_size(), row.q);
        row.tail_max_lower = -std::numeric_limits<double>::infinity();
        row.tail_max_upper = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < fam.size(); ++i) {
            row.brackets.push_back(factor_entropy_bracket(fam.approximants[i], part, opt.bracket_depth, opt.limits));
            if (i >= rep.tail_start) {
                row.tail_max_lower = std::max(row.tail_max_lower, row.brackets.back().lower.nats);
                row.tail_max_upper = std::max(row.tail_max_upper, row.brackets.back().upper.nats);
            }
        }
        rep.rhs_lower = std::max(rep.rhs_lower, row.tail_max_lower);
        rep.rows.push_back(std::move(row));
    }
    rep.verdict = certified_verdict(rep.target_rate, rep.rhs_lower, opt.tolerance);
    return rep;
}

}  // namespace ksent

#endif
