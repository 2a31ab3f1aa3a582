#ifndef KSENT_PITSKEL_HPP
#define KSENT_PITSKEL_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include "ksent/blocks.hpp"
#include "ksent/detail/summation.hpp"
#include "ksent/entropy.hpp"
#include "ksent/markov_hull.hpp"
#include "ksent/measure.hpp"
#include "ksent/truncation.hpp"

namespace ksent::pitskel {

/// Finite rendering of the refined partition over the Bernoulli shift with weights 2^-k.
///
/// Base symbol index i carries label k = i + 1 and weight 2^-k (truncated at K).
/// An atom of the refinement inside {y_0 = k} pins y_0 and the window(k) coordinates
/// y_{-1}, ..., y_{-window(k)}, where window(k) = min(2^k, W) (W = 0 means no cap).
struct Config {
    std::size_t K = 1;
    std::size_t window_cap = 8;
    TailPolicy policy = TailPolicy::MergeTail;

    void validate() const {
        require(K >= 1, "K must be at least 1");
        require(window_cap > 0 || K <= 60, "uncapped windows need K <= 60");
    }

    std::vector<double> base_weights() const { return truncate_countable(geometric_half(), {K, policy}); }

    std::uint64_t window(Symbol index) const {
        const std::uint64_t full = std::uint64_t{1} << (index + 1);
        return window_cap == 0 ? full : std::min<std::uint64_t>(full, window_cap);
    }

    std::uint64_t max_window() const {
        std::uint64_t w = 0;
        for (Symbol i = 0; i < K; ++i) w = std::max(w, window(i));
        return w;
    }
};

/// H(eta): entropy of the truncated base partition; also the base entropy rate.
inline EntropyValue base_entropy(const Config& cfg) { return shannon(cfg.base_weights()); }

/// l(A) = max_i (i + window(k_i)) for heads k_1..k_n at positions -1..-n.
inline std::uint64_t conditioning_depth(const Config& cfg, const Word& heads) {
    std::uint64_t l = 0;
    for (std::size_t i = 0; i < heads.size(); ++i) l = std::max<std::uint64_t>(l, i + 1 + cfg.window(heads[i]));
    return l;
}

namespace detail {

// Sum over head tuples of nu(tuple) * sum_k nu(C_k) max(0, window(k) - l(tuple)).
inline double expected_unpinned(const Config& cfg, std::size_t n, const Limits& limits) {
    const auto w = cfg.base_weights();
    const std::uint64_t tuples = word_count(cfg.K, n, limits, "head-tuple enumeration");
    ksent::detail::CompensatedSum total;
    for (WordIndex t = 0; t < tuples; ++t) {
        const Word heads = decode_word(t, cfg.K, n);
        double prob = 1.0;
        for (Symbol h : heads) prob *= w[h];
        if (prob == 0.0) continue;
        const std::uint64_t l = conditioning_depth(cfg, heads);
        ksent::detail::CompensatedSum inner;
        for (Symbol k = 0; k < cfg.K; ++k) {
            const std::uint64_t wk = cfg.window(k);
            if (wk > l) inner.add(w[k] * static_cast<double>(wk - l));
        }
        total.add(prob * inner.value());
    }
    return total.value();
}

}  // namespace detail

/// H(zeta | zeta_{-n}^{-1}) from the cylinder structure: the head symbol contributes H(eta),
/// and every coordinate of the next atom's window not pinned by the conditioning cylinder
/// contributes another independent H(eta).
inline EntropyValue zeta_conditional_entropy_exact(const Config& cfg, std::size_t n, const Limits& limits = {}) {
    cfg.validate();
    require(n >= 1, "memory n must be at least 1");
    const double h = base_entropy(cfg).nats;
    return {h * (1.0 + detail::expected_unpinned(cfg, n, limits))};
}

/// The part of the exact value coming from unpinned window coordinates only (the head
/// term dropped); a lower bound for the exact value.
inline EntropyValue zeta_conditional_entropy_lower_bound(const Config& cfg, std::size_t n,
                                                         const Limits& limits = {}) {
    cfg.validate();
    require(n >= 1, "memory n must be at least 1");
    return {base_entropy(cfg).nats * detail::expected_unpinned(cfg, n, limits)};
}

/// Atom of the refinement: head symbol plus the window(head) symbols before it,
/// nearest first (tail[0] is y_{-1}).
struct ZetaAtom {
    Symbol head = 0;
    Word tail;
};

/// Lexicographic labeling of atoms by (head, tail).
class Labeling {
public:
    explicit Labeling(const Config& cfg) : cfg_(cfg) {
        cfg.validate();
        offsets_.resize(cfg.K + 1, 0);
        for (Symbol k = 0; k < cfg.K; ++k) {
            const auto block = checked_pow(cfg.K, cfg.window(k));
            constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
            if (!block) throw BudgetExceeded("label alphabet (overflows 64 bits)", kMax, kMax);
            offsets_[k + 1] = offsets_[k] + *block;
        }
    }

    std::uint64_t label_count() const noexcept { return offsets_.back(); }

    std::uint64_t label(const ZetaAtom& atom) const {
        require(atom.head < cfg_.K && atom.tail.size() == cfg_.window(atom.head), "malformed atom");
        return offsets_[atom.head] + encode_word(atom.tail, cfg_.K);
    }

    ZetaAtom atom(std::uint64_t label) const {
        require(label < label_count(), "label out of range");
        const auto it = std::upper_bound(offsets_.begin(), offsets_.end(), label);
        const auto head = static_cast<Symbol>(std::distance(offsets_.begin(), it) - 1);
        return {head, decode_word(label - offsets_[head], cfg_.K, cfg_.window(head))};
    }

    Symbol head(std::uint64_t label) const { return atom(label).head; }

    /// Label of the atom at position t of y (earliest-first), which needs y[t - window(y[t])].
    std::uint64_t label_at(const Word& y, std::size_t t) const {
        const Symbol h = y[t];
        const std::uint64_t w = cfg_.window(h);
        require(t >= w, "insufficient context at the boundary");
        std::uint64_t idx = 0;
        for (std::uint64_t j = 1; j <= w; ++j) idx = idx * cfg_.K + y[t - j];
        return offsets_[h] + idx;
    }

private:
    Config cfg_;
    std::vector<std::uint64_t> offsets_;
};

/// Brute-force sum over conditioning atoms A of nu(A) H(zeta | A), from raw cylinder
/// probabilities over every base word on positions -(n + W_max)..0.
inline EntropyValue zeta_conditional_entropy_bruteforce(const Config& cfg, std::size_t n,
                                                        std::uint64_t max_cylinders = 10'000'000) {
    cfg.validate();
    require(n >= 1, "memory n must be at least 1");
    const Labeling labels(cfg);
    const auto w = cfg.base_weights();
    const std::size_t span_len = static_cast<std::size_t>(n + cfg.max_window() + 1);
    const std::uint64_t count = word_count(cfg.K, span_len, Limits{max_cylinders}, "cylinder enumeration");

    // key: labels at times -n..-1 followed by the label at time 0
    std::map<std::vector<std::uint64_t>, ksent::detail::CompensatedSum> joint;
    for (WordIndex idx = 0; idx < count; ++idx) {
        const Word y = decode_word(idx, cfg.K, span_len);
        double prob = 1.0;
        for (Symbol s : y) prob *= w[s];
        if (prob == 0.0) continue;
        std::vector<std::uint64_t> key;
        key.reserve(n + 1);
        for (std::size_t t = span_len - 1 - n; t < span_len; ++t) key.push_back(labels.label_at(y, t));
        joint[key].add(prob);
    }
    std::map<std::vector<std::uint64_t>, ksent::detail::CompensatedSum> past;
    ksent::detail::CompensatedSum h_joint;
    for (const auto& [key, p] : joint) {
        h_joint.add(ksent::detail::neg_plogp(p.value()));
        past[std::vector<std::uint64_t>(key.begin(), key.end() - 1)].add(p.value());
    }
    ksent::detail::CompensatedSum h_past;
    for (const auto& [key, p] : past) h_past.add(ksent::detail::neg_plogp(p.value()));
    return {std::max(0.0, h_joint.value() - h_past.value())};
}

/// The image process X = phi(Y) over atom labels.
struct ZetaLabelProcess {
    Config cfg;
    std::uint64_t label_count = 0;
    /// Factor of the order-1 higher-block chain on (W_max + 1)-words of the base process.
    StationaryMeasure process;
};

/// Builds the label process as a coding of the higher-block presentation of the base shift.
inline ZetaLabelProcess build_label_process(const Config& cfg, const Limits& limits = {}) {
    cfg.validate();
    const Labeling labels(cfg);
    const auto w = cfg.base_weights();
    const std::size_t span_len = static_cast<std::size_t>(cfg.max_window() + 1);
    const std::uint64_t states = word_count(cfg.K, span_len, limits, "higher-block alphabet");
    const auto kernel_size = checked_pow(states, 2);
    if (!kernel_size || *kernel_size > limits.max_words)
        throw BudgetExceeded("higher-block kernel", kernel_size.value_or(UINT64_MAX), limits.max_words);

    std::vector<double> kernel(*kernel_size, 0.0);
    std::vector<double> stationary(states);
    std::vector<Symbol> coding(states);
    for (WordIndex s = 0; s < states; ++s) {
        const Word y = decode_word(s, cfg.K, span_len);
        double prob = 1.0;
        for (Symbol c : y) prob *= w[c];
        stationary[s] = prob;
        for (Symbol a = 0; a < cfg.K; ++a) kernel[s * states + (s * cfg.K + a) % states] = w[a];
        coding[s] = static_cast<Symbol>(labels.label_at(y, span_len - 1));
    }
    auto chain = markov_with_stationary(states, 1, std::move(kernel),
                                        BlockDistribution(states, 1, std::move(stationary)));
    return {cfg, labels.label_count(), factor_of(chain, std::move(coding))};
}

/// Labels of a base path, starting at the first position where every window fits.
struct EncodedPath {
    std::size_t offset = 0;  ///< base position of labels[0]
    std::vector<std::uint64_t> labels;
};

inline EncodedPath encode_path(const Config& cfg, const Word& y) {
    cfg.validate();
    const Labeling labels(cfg);
    const auto offset = static_cast<std::size_t>(cfg.max_window());
    require(y.size() > offset, "insufficient context at the boundary: path shorter than max window + 1");
    for (Symbol s : y) require(s < cfg.K, "path symbol outside the base alphabet");
    EncodedPath out{offset, {}};
    out.labels.reserve(y.size() - offset);
    for (std::size_t t = offset; t < y.size(); ++t) out.labels.push_back(labels.label_at(y, t));
    return out;
}

inline Word decode_heads(const Config& cfg, const std::vector<std::uint64_t>& encoded) {
    const Labeling labels(cfg);
    Word heads;
    heads.reserve(encoded.size());
    for (auto l : encoded) heads.push_back(labels.head(l));
    return heads;
}

struct SweepRow {
    std::size_t K = 0;
    std::size_t n = 0;
    double h_mu = 0.0;       ///< base (and label-process) entropy rate
    double h_hull = 0.0;     ///< rate of the n-Markov hull of the label process
    double gap = 0.0;
};

struct SweepReport {
    std::size_t window_cap = 0;
    std::vector<SweepRow> rows;
    /// Largest block-marginal mismatch between label process and its hulls, over the
    /// instances small enough to enumerate; negative when none was.
    double max_marginal_error = -1.0;
    std::size_t marginal_checks = 0;
    bool base_rate_bounded = true;     ///< h_mu <= 2 ln 2 throughout
    bool hull_rate_increasing = true;  ///< h_hull strictly increasing in K for each n
    bool gap_increasing = true;        ///< gap strictly increasing in K for each n
    bool hull_dominates = true;        ///< h_hull >= h_mu everywhere

    bool divergence_trend() const {
        return base_rate_bounded && hull_rate_increasing && gap_increasing && hull_dominates;
    }
};

/// Sweep over truncations K in [k_lo, k_hi] and memories n in [1, n_max].
inline SweepReport counterexample_sweep(std::size_t k_lo, std::size_t k_hi, std::size_t window_cap,
                                        std::size_t n_max, TailPolicy policy = TailPolicy::MergeTail,
                                        const Limits& limits = {}) {
    require(k_lo >= 1 && k_lo <= k_hi, "sweep range must satisfy 1 <= lo <= hi");
    require(n_max >= 1, "n_max must be at least 1");
    SweepReport rep;
    rep.window_cap = window_cap;
    const double bound = 2.0 * std::numbers::ln2 + 1e-9;
    std::vector<SweepRow> prev;
    for (std::size_t K = k_lo; K <= k_hi; ++K) {
        const Config cfg{K, window_cap, policy};
        const double h_mu = base_entropy(cfg).nats;
        if (h_mu > bound) rep.base_rate_bounded = false;

        std::optional<ZetaLabelProcess> labels;
        try {
            labels = build_label_process(cfg, limits);
        } catch (const BudgetExceeded&) {
        }

        std::vector<SweepRow> current;
        for (std::size_t n = 1; n <= n_max; ++n) {
            const double h_hull = zeta_conditional_entropy_exact(cfg, n, limits).nats;
            current.push_back({K, n, h_mu, h_hull, h_hull - h_mu});
            if (h_hull < h_mu - 1e-12) rep.hull_dominates = false;

            if (labels) {
                const auto joint = checked_pow(labels->label_count, n + 1);
                if (joint && *joint <= limits.max_words) {
                    const auto hull = markov_hull(labels->process, n, {}, limits);
                    double err = 0.0;
                    for (std::size_t j = 1; j <= n + 1; ++j)
                        err = std::max(err, block_marginal(hull.hull, j, limits)
                                                .max_abs_diff(block_marginal(labels->process, j, limits)));
                    rep.max_marginal_error = std::max(rep.max_marginal_error, err);
                    ++rep.marginal_checks;
                }
            }
        }
        if (!prev.empty()) {
            for (std::size_t i = 0; i < current.size(); ++i) {
                if (!(current[i].h_hull > prev[i].h_hull)) rep.hull_rate_increasing = false;
                if (!(current[i].gap > prev[i].gap)) rep.gap_increasing = false;
            }
        }
        rep.rows.insert(rep.rows.end(), current.begin(), current.end());
        prev = std::move(current);
    }
    return rep;
}

}  // namespace ksent::pitskel

#endif
