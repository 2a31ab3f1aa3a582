#ifndef KSENT_ENTROPY_HPP
#define KSENT_ENTROPY_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include "ksent/blocks.hpp"
#include "ksent/detail/hidden_forward.hpp"
#include "ksent/detail/summation.hpp"
#include "ksent/measure.hpp"

namespace ksent {

/// Entropy in nats.
struct EntropyValue {
    double nats = 0.0;
};

/// H(p) = -sum p_i ln p_i with 0 ln 0 = 0.
inline EntropyValue shannon(std::span<const double> p) {
    detail::CompensatedSum h;
    detail::CompensatedSum total;
    for (double x : p) {
        require(x >= 0.0, "probability vector has a negative entry");
        total.add(x);
        h.add(detail::neg_plogp(x));
    }
    require(std::fabs(total.value() - 1.0) <= kInputSumTolerance, "probabilities do not sum to 1");
    return {std::max(0.0, h.value())};
}

/// H_n: entropy of the length-n word distribution. Falls back to a sparse
/// hidden-state enumeration when K^n is past the dense budget.
inline EntropyValue block_entropy(const StationaryMeasure& m, std::size_t n, const Limits& limits = {}) {
    if (n == 0) return {0.0};
    const auto dense = checked_pow(m.alphabet_size(), n);
    if (m.kind() != MeasureKind::Factor && dense && *dense <= limits.max_words)
        return shannon(block_marginal(m, n, limits).probs());
    detail::HiddenForward fwd(m, false, limits);
    fwd.extend_to(n);
    return {std::max(0.0, fwd.output_entropy())};
}

/// H_{n+1} - H_n: entropy of the next symbol given n past symbols. n = 0 gives H_1.
inline EntropyValue conditional_block_entropy(const StationaryMeasure& m, std::size_t n,
                                              const Limits& limits = {}) {
    return {block_entropy(m, n + 1, limits).nats - block_entropy(m, n, limits).nats};
}

/// Exact entropy rate of a Markov chain: stationary-weighted row entropies.
inline EntropyValue markov_entropy_rate(const MarkovChain& chain) {
    detail::CompensatedSum h;
    for (WordIndex w = 0; w < chain.memory_words(); ++w) {
        const double pw = chain.stationary()[w];
        if (pw == 0.0) continue;
        detail::CompensatedSum row;
        for (double x : chain.row(w)) row.add(detail::neg_plogp(x));
        h.add(pw * row.value());
    }
    return {std::max(0.0, h.value())};
}

/// Certified interval containing an entropy rate.
struct EntropyBracket {
    EntropyValue lower;
    EntropyValue upper;
    double width() const noexcept { return upper.nats - lower.nats; }
    double midpoint() const noexcept { return 0.5 * (upper.nats + lower.nats); }
    bool contains(double x, double tol = 0.0) const noexcept {
        return lower.nats - tol <= x && x <= upper.nats + tol;
    }
};

/// Entropy-rate bracket at memory depth n.
///
/// upper = H(Y_{n+1} | Y_1..Y_n); lower = H(Y_{n+1} | Y_1..Y_n, S_0) where S_0 is the
/// hidden base state just before the window. For Bernoulli and Markov measures both
/// collapse to the exact rate.
inline EntropyBracket rate_bracket(const StationaryMeasure& m, std::size_t n, const Limits& limits = {}) {
    if (const auto* b = m.as_bernoulli()) {
        const auto h = shannon(b->weights());
        return {h, h};
    }
    if (const auto* mk = m.as_markov()) {
        const auto h = markov_entropy_rate(*mk);
        return {h, h};
    }
    detail::HiddenForward fwd(m, true, limits);
    fwd.extend_to(n);
    const double out_n = fwd.output_entropy();
    const double joint_n = fwd.joint_entropy();
    fwd.extend();
    const double upper = std::max(0.0, fwd.output_entropy() - out_n);
    const double lower = std::clamp(fwd.joint_entropy() - joint_n, 0.0, upper);
    return {{lower}, {upper}};
}

struct RateEstimate {
    EntropyValue value;  ///< exact rate, or the finite-memory upper bound
    bool exact = false;
    EntropyBracket bracket;
};

/// Entropy rate. Exact for Bernoulli/Markov measures; for factors the value is
/// H_{max_n+1} - H_{max_n} (an upper bound) and the bracket carries the lower bound.
inline RateEstimate entropy_rate(const StationaryMeasure& m, std::size_t max_n, const Limits& limits = {}) {
    require(max_n >= 1, "max_n must be at least 1");
    const auto bracket = rate_bracket(m, max_n, limits);
    if (m.has_exact_rate()) return {bracket.upper, true, bracket};
    return {bracket.upper, false, bracket};
}

/// Outcome of evaluating the perturbation bound H(p) <= (1+c) H(q) + c ln 3.
struct LemmaReport {
    double c = 0.0;
    bool hypothesis_holds = false;
    EntropyValue H_p;
    EntropyValue H_q;
    double bound = 0.0;
    bool conclusion_holds = false;
    double slack = 0.0;
};

inline constexpr double kLemmaAtomSlack = 1e-15;

/// Checks |p_i - q_i| <= c q_i for every atom and evaluates the entropy bound,
/// regardless of whether the hypothesis holds.
inline LemmaReport lemma_bound_check(std::span<const double> p, std::span<const double> q, double c) {
    require(c > 0.0 && c < 1.0 / 3.0, "c must lie in (0, 1/3)");
    require(p.size() == q.size(), "p and q must have the same length");
    LemmaReport r;
    r.c = c;
    r.hypothesis_holds = true;
    for (std::size_t i = 0; i < p.size(); ++i)
        if (std::fabs(p[i] - q[i]) > c * q[i] + kLemmaAtomSlack) r.hypothesis_holds = false;
    r.H_p = shannon(p);
    r.H_q = shannon(q);
    r.bound = (1.0 + c) * r.H_q.nats + c * std::log(3.0);
    r.slack = r.bound - r.H_p.nats;
    r.conclusion_holds = r.slack >= -1e-12;
    return r;
}

/// For eps <= 1/2: |a - b| <= eps b implies |a - b| <= 2 eps a.
/// Returns false only when the hypothesis holds and the conclusion fails.
inline bool ratio_flip_check(double a, double b, double eps) {
    require(a >= 0.0 && b >= 0.0, "ratio flip needs nonnegative arguments");
    require(eps > 0.0 && eps <= 0.5, "eps must lie in (0, 1/2]");
    const double gap = std::fabs(a - b);
    if (!(gap <= eps * b)) return true;
    // one rounding step of slack on each side of the comparison
    const double rounding = 4.0 * std::numeric_limits<double>::epsilon() * std::max(a, b);
    return gap <= 2.0 * eps * a + rounding;
}

}  // namespace ksent

#endif
