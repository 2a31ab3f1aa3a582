#ifndef KSENT_DETAIL_HIDDEN_FORWARD_HPP
#define KSENT_DETAIL_HIDDEN_FORWARD_HPP

#include <algorithm>
#include <cstdint>
#include <tuple>
#include <vector>

#include "ksent/block_distribution.hpp"
#include "ksent/detail/summation.hpp"
#include "ksent/errors.hpp"
#include "ksent/measure.hpp"

namespace ksent::detail {

// Any constructible measure is a coding of a Bernoulli or Markov base process. The hidden
// state is the base memory word (a single dummy state for Bernoulli bases).
class HiddenChain {
public:
    explicit HiddenChain(const StationaryMeasure& m) {
        const StationaryMeasure* cur = &m;
        std::vector<const CodedFactor*> layers;
        while (const auto* f = cur->as_factor()) {
            layers.push_back(f);
            cur = &f->source();
        }
        base_ = cur;
        const std::size_t k = base_->alphabet_size();
        coding_.resize(k);
        for (Symbol a = 0; a < k; ++a) coding_[a] = a;
        output_alphabet_ = k;
        for (auto it = layers.rbegin(); it != layers.rend(); ++it) {
            for (auto& c : coding_) c = (*it)->coding()[c];
            output_alphabet_ = (*it)->alphabet_size();
        }
        if (const auto* mk = base_->as_markov()) {
            markov_ = mk;
            states_ = mk->memory_words();
        } else {
            bernoulli_ = base_->as_bernoulli();
            states_ = 1;
        }
    }

    std::size_t states() const noexcept { return states_; }
    std::size_t output_alphabet() const noexcept { return output_alphabet_; }
    std::size_t base_alphabet() const noexcept { return coding_.size(); }
    Symbol code(Symbol a) const { return coding_[a]; }

    double initial(std::uint64_t s) const {
        return markov_ ? markov_->stationary()[s] : 1.0;
    }

    template <class F>
    void for_each_transition(std::uint64_t s, F&& f) const {
        const std::size_t k = coding_.size();
        for (Symbol a = 0; a < k; ++a) {
            const double p = markov_ ? markov_->transition(s, a) : bernoulli_->weights()[a];
            if (p > 0.0) f(a, markov_ ? markov_->next_memory(s, a) : std::uint64_t{0}, p);
        }
    }

private:
    const StationaryMeasure* base_ = nullptr;
    const MarkovChain* markov_ = nullptr;
    const Bernoulli* bernoulli_ = nullptr;
    std::vector<Symbol> coding_;
    std::size_t output_alphabet_ = 0;
    std::size_t states_ = 0;
};

// Sparse forward recursion over (output word, start state, current state).
// The start state is the hidden state immediately before the first emitted symbol.
// With track_start = false all start states are merged, which is enough for H(Y_1..n).
class HiddenForward {
public:
    struct Entry {
        WordIndex word;
        std::uint64_t start;
        std::uint64_t current;
        double p;
    };

    HiddenForward(const StationaryMeasure& m, bool track_start, Limits limits)
        : chain_(m), track_start_(track_start), limits_(limits) {
        for (std::uint64_t s = 0; s < chain_.states(); ++s) {
            const double p = chain_.initial(s);
            if (p > 0.0) entries_.push_back({0, track_start_ ? s : 0, s, p});
        }
        merge();
    }

    std::size_t length() const noexcept { return length_; }
    std::size_t output_alphabet() const noexcept { return chain_.output_alphabet(); }
    const std::vector<Entry>& entries() const noexcept { return entries_; }

    void extend() {
        if (!checked_pow(chain_.output_alphabet(), length_ + 1))
            throw BudgetExceeded("word index overflow in hidden-state forward pass", UINT64_MAX,
                                 limits_.max_words);
        const std::uint64_t q = chain_.output_alphabet();
        std::vector<Entry> next;
        next.reserve(entries_.size() * 2);
        for (const Entry& e : entries_) {
            chain_.for_each_transition(e.current, [&](Symbol a, std::uint64_t to, double pa) {
                next.push_back({e.word * q + chain_.code(a), e.start, to, e.p * pa});
            });
            if (next.size() > 2 * limits_.max_words)
                throw BudgetExceeded("hidden-state forward pass", next.size(), limits_.max_words);
        }
        entries_ = std::move(next);
        ++length_;
        merge();
    }

    void extend_to(std::size_t n) {
        while (length_ < n) extend();
    }

    /// H(Y_1..Y_n) in nats.
    double output_entropy() const {
        return grouped_entropy([](const Entry& a, const Entry& b) { return a.word == b.word; });
    }

    /// H(S_0, Y_1..Y_n) in nats, S_0 the hidden state before the window.
    double joint_entropy() const {
        require(track_start_, "joint entropy needs start-state tracking");
        return grouped_entropy(
            [](const Entry& a, const Entry& b) { return a.word == b.word && a.start == b.start; });
    }

    BlockDistribution output_distribution() const {
        const auto size = word_count(chain_.output_alphabet(), length_, limits_, "factor block marginal");
        std::vector<CompensatedSum> acc(size);
        for (const Entry& e : entries_) acc[e.word].add(e.p);
        std::vector<double> probs(size);
        for (std::size_t i = 0; i < size; ++i) probs[i] = acc[i].value();
        return {chain_.output_alphabet(), length_, std::move(probs)};
    }

private:
    void merge() {
        std::stable_sort(entries_.begin(), entries_.end(), [](const Entry& a, const Entry& b) {
            return std::tie(a.word, a.start, a.current) < std::tie(b.word, b.start, b.current);
        });
        std::vector<Entry> merged;
        merged.reserve(entries_.size());
        std::size_t i = 0;
        while (i < entries_.size()) {
            Entry e = entries_[i];
            CompensatedSum s;
            std::size_t j = i;
            for (; j < entries_.size() && entries_[j].word == e.word && entries_[j].start == e.start &&
                   entries_[j].current == e.current;
                 ++j)
                s.add(entries_[j].p);
            e.p = s.value();
            merged.push_back(e);
            i = j;
        }
        entries_ = std::move(merged);
        if (entries_.size() > limits_.max_words)
            throw BudgetExceeded("hidden-state forward pass", entries_.size(), limits_.max_words);
    }

    template <class SameGroup>
    double grouped_entropy(SameGroup same) const {
        CompensatedSum h;
        std::size_t i = 0;
        while (i < entries_.size()) {
            CompensatedSum g;
            std::size_t j = i;
            for (; j < entries_.size() && same(entries_[i], entries_[j]); ++j) g.add(entries_[j].p);
            h.add(neg_plogp(g.value()));
            i = j;
        }
        return h.value();
    }

    HiddenChain chain_;
    bool track_start_;
    Limits limits_;
    std::size_t length_ = 0;
    std::vector<Entry> entries_;
};

}  // namespace ksent::detail

#endif
