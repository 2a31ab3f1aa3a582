#ifndef KSENT_MEASURE_HPP
#define KSENT_MEASURE_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "ksent/block_distribution.hpp"
#include "ksent/detail/summation.hpp"
#include "ksent/errors.hpp"
#include "ksent/word.hpp"

namespace ksent {

/// Tolerance on user-supplied probability vectors (weights and kernel rows).
inline constexpr double kInputSumTolerance = 1e-9;

namespace detail {

inline void check_probability_vector(std::span<const double> p, const std::string& what) {
    require(!p.empty(), what + " is empty");
    for (double x : p) {
        require(std::isfinite(x), what + " has a non-finite entry");
        require(x >= 0.0, what + " has a negative entry");
    }
    const double total = compensated_total(p);
    require(std::fabs(total - 1.0) <= kInputSumTolerance,
            what + " sums to " + std::to_string(total) + ", not 1");
}

}  // namespace detail

/// i.i.d. process with the given one-symbol weights.
class Bernoulli {
public:
    explicit Bernoulli(std::vector<double> weights) : weights_(std::move(weights)) {
        detail::check_probability_vector(weights_, "Bernoulli weights");
    }

    std::size_t alphabet_size() const noexcept { return weights_.size(); }
    std::span<const double> weights() const noexcept { return weights_; }

private:
    std::vector<double> weights_;
};

/// Stationary Markov process of order r >= 1.
///
/// The kernel is stored densely: K^r rows of K entries, row index = memory word index
/// (earliest symbol most significant). The stationary distribution lives on length-r words.
class MarkovChain {
public:
    MarkovChain(std::size_t alphabet_size, std::size_t order, std::vector<double> kernel,
                BlockDistribution stationary, bool reducible)
        : alphabet_size_(alphabet_size), order_(order), kernel_(std::move(kernel)),
          stationary_(std::move(stationary)), reducible_(reducible) {}

    std::size_t alphabet_size() const noexcept { return alphabet_size_; }
    std::size_t order() const noexcept { return order_; }
    std::size_t memory_words() const noexcept { return kernel_.size() / alphabet_size_; }
    std::span<const double> kernel() const noexcept { return kernel_; }
    std::span<const double> row(WordIndex memory) const {
        return std::span<const double>(kernel_).subspan(memory * alphabet_size_, alphabet_size_);
    }
    double transition(WordIndex memory, Symbol a) const { return kernel_[memory * alphabet_size_ + a]; }
    WordIndex next_memory(WordIndex memory, Symbol a) const {
        return (memory * alphabet_size_ + a) % memory_words();
    }
    const BlockDistribution& stationary() const noexcept { return stationary_; }

    /// True when the positive-transition graph on memory words is not strongly connected.
    bool reducible() const noexcept { return reducible_; }

private:
    std::size_t alphabet_size_;
    std::size_t order_;
    std::vector<double> kernel_;
    BlockDistribution stationary_;
    bool reducible_;
};

class StationaryMeasure;

/// Image of a source process under a symbol-to-symbol coding.
class CodedFactor {
public:
    CodedFactor(std::shared_ptr<const StationaryMeasure> source, std::vector<Symbol> coding,
                std::size_t alphabet_size);

    const StationaryMeasure& source() const noexcept { return *source_; }
    std::shared_ptr<const StationaryMeasure> source_ptr() const noexcept { return source_; }
    std::span<const Symbol> coding() const noexcept { return coding_; }
    std::size_t alphabet_size() const noexcept { return alphabet_size_; }

private:
    std::shared_ptr<const StationaryMeasure> source_;
    std::vector<Symbol> coding_;
    std::size_t alphabet_size_;
};

enum class MeasureKind { Bernoulli, Markov, Factor };

inline const char* to_string(MeasureKind k) {
    switch (k) {
        case MeasureKind::Bernoulli: return "bernoulli";
        case MeasureKind::Markov: return "markov";
        case MeasureKind::Factor: return "factor";
    }
    return "?";
}

/// A shift-invariant probability measure on a finite-alphabet sequence space.
/// Immutable; cheap to copy (factors share their source).
class StationaryMeasure {
public:
    using Rep = std::variant<Bernoulli, MarkovChain, CodedFactor>;

    explicit StationaryMeasure(Rep rep) : rep_(std::move(rep)) {}

    MeasureKind kind() const noexcept { return static_cast<MeasureKind>(rep_.index()); }

    std::size_t alphabet_size() const {
        return std::visit([](const auto& r) { return r.alphabet_size(); }, rep_);
    }

    const Bernoulli* as_bernoulli() const noexcept { return std::get_if<Bernoulli>(&rep_); }
    const MarkovChain* as_markov() const noexcept { return std::get_if<MarkovChain>(&rep_); }
    const CodedFactor* as_factor() const noexcept { return std::get_if<CodedFactor>(&rep_); }

    /// Markov order: 0 for Bernoulli, r for Markov, that of the source for factors.
    std::size_t order() const {
        if (as_bernoulli()) return 0;
        if (const auto* m = as_markov()) return m->order();
        return as_factor()->source().order();
    }

    /// Bernoulli and Markov measures have exact entropy rates; factors in general do not.
    bool has_exact_rate() const noexcept { return kind() != MeasureKind::Factor; }

    const Rep& rep() const noexcept { return rep_; }

private:
    Rep rep_;
};

inline CodedFactor::CodedFactor(std::shared_ptr<const StationaryMeasure> source,
                                std::vector<Symbol> coding, std::size_t alphabet_size)
    : source_(std::move(source)), coding_(std::move(coding)), alphabet_size_(alphabet_size) {
    require(source_ != nullptr, "factor needs a source measure");
    require(alphabet_size_ >= 1, "factor alphabet must be non-empty");
    require(coding_.size() == source_->alphabet_size(),
            "coding must be total: one target per source symbol");
    std::vector<bool> hit(alphabet_size_, false);
    for (Symbol s : coding_) {
        require(s < alphabet_size_, "coding maps outside the target alphabet");
        hit[s] = true;
    }
    require(std::all_of(hit.begin(), hit.end(), [](bool b) { return b; }),
            "coding must be surjective onto the target alphabet");
}

namespace detail {

// Transfer operator on length-r memory words: (T pi)(w[1:] a) += pi(w) P(w, a).
inline std::vector<double> transfer(const MarkovChain& chain, std::span<const double> pi) {
    const std::size_t states = chain.memory_words();
    const std::size_t k = chain.alphabet_size();
    std::vector<detail::CompensatedSum> acc(states);
    for (WordIndex w = 0; w < states; ++w) {
        if (pi[w] == 0.0) continue;
        for (Symbol a = 0; a < k; ++a) {
            const double p = chain.transition(w, a);
            if (p != 0.0) acc[chain.next_memory(w, a)].add(pi[w] * p);
        }
    }
    std::vector<double> out(states);
    for (std::size_t i = 0; i < states; ++i) out[i] = acc[i].value();
    return out;
}

inline double l1_distance(std::span<const double> a, std::span<const double> b) {
    CompensatedSum s;
    for (std::size_t i = 0; i < a.size(); ++i) s.add(std::fabs(a[i] - b[i]));
    return s.value();
}

inline double stationary_residual(const MarkovChain& chain, std::span<const double> pi) {
    const auto next = transfer(chain, pi);
    return l1_distance(next, pi);
}

// Edges w -> (w K + a) mod S for positive P(w, a); predecessors of v are b S/K + v/K.
inline bool strongly_connected(std::size_t states, std::size_t k, std::span<const double> kernel) {
    const std::size_t stride = states / k;
    auto reach = [&](bool reverse) {
        std::vector<bool> seen(states, false);
        std::vector<std::size_t> stack{0};
        seen[0] = true;
        std::size_t count = 1;
        auto visit = [&](std::size_t v) {
            if (!seen[v]) { seen[v] = true; ++count; stack.push_back(v); }
        };
        while (!stack.empty()) {
            const std::size_t u = stack.back();
            stack.pop_back();
            if (!reverse) {
                for (std::size_t a = 0; a < k; ++a)
                    if (kernel[u * k + a] > 0.0) visit((u * k + a) % states);
            } else if (states == 1) {
                visit(0);
            } else {
                const std::size_t a = u % k;
                for (std::size_t b = 0; b < k; ++b) {
                    const std::size_t w = b * stride + u / k;
                    if (kernel[w * k + a] > 0.0) visit(w);
                }
            }
        }
        return count == states;
    };
    return reach(false) && reach(true);
}

// States outside every closed communicating class carry no stationary mass.
inline std::vector<bool> transient_states(std::size_t states, std::size_t k, std::span<const double> kernel) {
    constexpr std::size_t kUnset = std::numeric_limits<std::size_t>::max();
    std::vector<std::size_t> index(states, kUnset), low(states, 0), comp(states, kUnset);
    std::vector<bool> on_stack(states, false);
    std::vector<std::size_t> stack;
    std::vector<std::pair<std::size_t, std::size_t>> call;  // (vertex, next symbol to try)
    std::size_t counter = 0, components = 0;
    for (std::size_t root = 0; root < states; ++root) {
        if (index[root] != kUnset) continue;
        call.emplace_back(root, 0);
        while (!call.empty()) {
            auto& [u, a] = call.back();
            if (a == 0 && index[u] == kUnset) {
                index[u] = low[u] = counter++;
                stack.push_back(u);
                on_stack[u] = true;
            }
            bool descended = false;
            while (a < k) {
                const std::size_t sym = a++;
                if (!(kernel[u * k + sym] > 0.0)) continue;
                const std::size_t v = (u * k + sym) % states;
                if (index[v] == kUnset) {
                    call.emplace_back(v, 0);
                    descended = true;
                    break;
                }
                if (on_stack[v]) low[u] = std::min(low[u], index[v]);
            }
            if (descended) continue;
            const std::size_t done = u;
            if (low[done] == index[done]) {
                std::size_t v;
                do {
                    v = stack.back();
                    stack.pop_back();
                    on_stack[v] = false;
                    comp[v] = components;
                } while (v != done);
                ++components;
            }
            call.pop_back();
            if (!call.empty()) low[call.back().first] = std::min(low[call.back().first], low[done]);
        }
    }
    std::vector<bool> leaves(components, false);
    for (std::size_t u = 0; u < states; ++u)
        for (std::size_t a = 0; a < k; ++a)
            if (kernel[u * k + a] > 0.0 && comp[(u * k + a) % states] != comp[u]) leaves[comp[u]] = true;
    std::vector<bool> out(states);
    for (std::size_t u = 0; u < states; ++u) out[u] = leaves[comp[u]];
    return out;
}

// Dense lazy transition matrix on memory words, squared until it stops moving.
// Used for small state spaces, where slow mixing would stall plain power iteration.
inline std::vector<double> stationary_by_squaring(const MarkovChain& chain) {
    const std::size_t n = chain.memory_words();
    const std::size_t k = chain.alphabet_size();
    std::vector<double> m(n * n, 0.0);
    for (std::size_t w = 0; w < n; ++w) {
        m[w * n + w] += 0.5;
        for (Symbol a = 0; a < k; ++a) m[w * n + chain.next_memory(w, a)] += 0.5 * chain.transition(w, a);
    }
    std::vector<double> sq(n * n);
    for (int iter = 0; iter < 200; ++iter) {
        std::fill(sq.begin(), sq.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                const double mij = m[i * n + j];
                if (mij == 0.0) continue;
                for (std::size_t l = 0; l < n; ++l) sq[i * n + l] += mij * m[j * n + l];
            }
        for (std::size_t i = 0; i < n; ++i) {
            CompensatedSum s;
            for (std::size_t l = 0; l < n; ++l) s.add(sq[i * n + l]);
            const double total = s.value();
            for (std::size_t l = 0; l < n; ++l) sq[i * n + l] /= total;
        }
        double diff = 0.0;
        for (std::size_t i = 0; i < n * n; ++i) diff = std::max(diff, std::fabs(sq[i] - m[i]));
        std::swap(m, sq);
        if (diff < 1e-17) break;
    }
    std::vector<double> pi(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        CompensatedSum s;
        for (std::size_t i = 0; i < n; ++i) s.add(m[i * n + j]);
        pi[j] = s.value() / static_cast<double>(n);
    }
    return pi;
}

inline void normalize(std::vector<double>& v) {
    const double total = compensated_total(v);
    for (double& x : v) x /= total;
}

// Fixed point of the lazy transfer operator reached from the uniform start.
inline std::vector<double> stationary_from_uniform(const MarkovChain& chain) {
    const std::size_t n = chain.memory_words();
    std::vector<double> pi;
    if (n <= 128) {
        pi = stationary_by_squaring(chain);
    } else {
        pi.assign(n, 1.0 / static_cast<double>(n));
    }
    // Power iteration (polishes the squared result, or does the whole job for large chains).
    constexpr std::size_t kMaxIterations = 2'000'000;
    for (std::size_t it = 0; it < kMaxIterations; ++it) {
        auto next = transfer(chain, pi);
        for (std::size_t i = 0; i < n; ++i) next[i] = 0.5 * (next[i] + pi[i]);
        normalize(next);
        const double change = l1_distance(next, pi);
        pi = std::move(next);
        if (change < 1e-15) break;
    }
    return pi;
}

}  // namespace detail

/// Bernoulli (i.i.d.) measure.
inline StationaryMeasure bernoulli_from_weights(std::vector<double> weights) {
    return StationaryMeasure(Bernoulli(std::move(weights)));
}

/// Order-r Markov measure from its kernel rows (K^r rows of K entries, flattened row-major).
/// The stationary law is the fixed point reached from the uniform start; reducible chains
/// are accepted and flagged.
inline StationaryMeasure markov_from_kernel(std::size_t alphabet_size, std::size_t order,
                                            std::vector<double> kernel) {
    require(alphabet_size >= 1, "alphabet size must be positive");
    require(order >= 1, "Markov order must be at least 1");
    const auto rows = checked_pow(alphabet_size, order);
    require(rows && *rows * alphabet_size == kernel.size(),
            "kernel must have alphabet_size^order rows of alphabet_size entries");
    for (std::size_t w = 0; w < *rows; ++w)
        detail::check_probability_vector(
            std::span<const double>(kernel).subspan(w * alphabet_size, alphabet_size),
            "kernel row " + std::to_string(w));
    const bool reducible = !detail::strongly_connected(*rows, alphabet_size, kernel);
    MarkovChain provisional(alphabet_size, order, kernel,
                            BlockDistribution(alphabet_size, order, std::vector<double>(*rows, 0.0)),
                            reducible);
    auto pi = detail::stationary_from_uniform(provisional);
    if (reducible) {
        // iteration leaves geometrically small residue on transient words; their exact mass is 0
        const auto transient = detail::transient_states(*rows, alphabet_size, kernel);
        for (std::size_t w = 0; w < *rows; ++w)
            if (transient[w]) pi[w] = 0.0;
        detail::normalize(pi);
    }
    const double residual = detail::stationary_residual(provisional, pi);
    if (!(residual < kFixedPointTolerance))
        throw std::runtime_error("stationary distribution did not converge (residual " +
                                 std::to_string(residual) + ")");
    return StationaryMeasure(MarkovChain(alphabet_size, order, std::move(kernel),
                                         BlockDistribution(alphabet_size, order, std::move(pi)),
                                         reducible));
}

/// Order-r Markov measure with a caller-supplied stationary law on length-r words,
/// which must be invariant under the kernel (residual below 1e-10).
inline StationaryMeasure markov_with_stationary(std::size_t alphabet_size, std::size_t order,
                                                std::vector<double> kernel,
                                                BlockDistribution stationary) {
    require(order >= 1, "Markov order must be at least 1");
    require(stationary.alphabet_size() == alphabet_size && stationary.block_length() == order,
            "stationary law must live on words of length order");
    const auto rows = checked_pow(alphabet_size, order);
    require(rows && *rows * alphabet_size == kernel.size(),
            "kernel must have alphabet_size^order rows of alphabet_size entries");
    for (std::size_t w = 0; w < *rows; ++w)
        detail::check_probability_vector(
            std::span<const double>(kernel).subspan(w * alphabet_size, alphabet_size),
            "kernel row " + std::to_string(w));
    require(stationary.is_normalized(kInputSumTolerance), "stationary law is not a probability vector");
    const bool reducible = !detail::strongly_connected(*rows, alphabet_size, kernel);
    MarkovChain chain(alphabet_size, order, std::move(kernel), std::move(stationary), reducible);
    const double residual = detail::stationary_residual(chain, chain.stationary().probs());
    require(residual < kFixedPointTolerance,
            "supplied stationary law is not invariant (residual " + std::to_string(residual) + ")");
    return StationaryMeasure(std::move(chain));
}

/// Image of `source` under `coding`; the target alphabet is 1 + max(coding).
inline StationaryMeasure factor_of(const StationaryMeasure& source, std::vector<Symbol> coding) {
    require(!coding.empty(), "coding must not be empty");
    const std::size_t q = static_cast<std::size_t>(*std::max_element(coding.begin(), coding.end())) + 1;
    return StationaryMeasure(
        CodedFactor(std::make_shared<const StationaryMeasure>(source), std::move(coding), q));
}

}  // namespace ksent

#endif
