#ifndef KSENT_BLOCK_DISTRIBUTION_HPP
#define KSENT_BLOCK_DISTRIBUTION_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "ksent/detail/summation.hpp"
#include "ksent/errors.hpp"
#include "ksent/word.hpp"

namespace ksent {

inline constexpr double kNormalizationTolerance = 1e-12;
inline constexpr double kFixedPointTolerance = 1e-10;

/// Probability vector over all K^n words of one length, lexicographically indexed.
class BlockDistribution {
public:
    BlockDistribution(std::size_t alphabet_size, std::size_t block_length, std::vector<double> probs)
        : alphabet_size_(alphabet_size), block_length_(block_length), probs_(std::move(probs)) {
        require(alphabet_size_ >= 1, "alphabet size must be positive");
        const auto expected = checked_pow(alphabet_size_, block_length_);
        require(expected && *expected == probs_.size(),
                "block distribution size does not match alphabet_size^block_length");
    }

    std::size_t alphabet_size() const noexcept { return alphabet_size_; }
    std::size_t block_length() const noexcept { return block_length_; }
    std::size_t size() const noexcept { return probs_.size(); }
    std::span<const double> probs() const noexcept { return probs_; }
    double operator[](WordIndex i) const { return probs_[i]; }
    double prob(const Word& w) const { return probs_[encode_word(w, alphabet_size_)]; }

    double total() const { return detail::compensated_total(probs_); }

    bool is_normalized(double tol = kNormalizationTolerance) const {
        return std::all_of(probs_.begin(), probs_.end(), [](double p) { return p >= 0.0; }) &&
               std::fabs(total() - 1.0) <= tol;
    }

    /// Marginal on the last n-1 coordinates.
    BlockDistribution drop_first() const {
        require(block_length_ >= 1, "cannot marginalize a length-0 block");
        const std::size_t stride = probs_.size() / alphabet_size_;
        std::vector<double> out(stride);
        for (std::size_t j = 0; j < stride; ++j) {
            detail::CompensatedSum s;
            for (std::size_t a = 0; a < alphabet_size_; ++a) s.add(probs_[a * stride + j]);
            out[j] = s.value();
        }
        return {alphabet_size_, block_length_ - 1, std::move(out)};
    }

    /// Marginal on the first n-1 coordinates.
    BlockDistribution drop_last() const {
        require(block_length_ >= 1, "cannot marginalize a length-0 block");
        const std::size_t rows = probs_.size() / alphabet_size_;
        std::vector<double> out(rows);
        for (std::size_t i = 0; i < rows; ++i) {
            detail::CompensatedSum s;
            for (std::size_t a = 0; a < alphabet_size_; ++a) s.add(probs_[i * alphabet_size_ + a]);
            out[i] = s.value();
        }
        return {alphabet_size_, block_length_ - 1, std::move(out)};
    }

    /// Keeps the first `length` coordinates.
    BlockDistribution prefix_marginal(std::size_t length) const {
        require(length <= block_length_, "prefix longer than block");
        BlockDistribution d = *this;
        while (d.block_length() > length) d = d.drop_last();
        return d;
    }

    /// Largest entrywise difference; both distributions must share shape.
    double max_abs_diff(const BlockDistribution& other) const {
        require(other.alphabet_size_ == alphabet_size_ && other.block_length_ == block_length_,
                "block distributions have different shapes");
        double m = 0.0;
        for (std::size_t i = 0; i < probs_.size(); ++i)
            m = std::max(m, std::fabs(probs_[i] - other.probs_[i]));
        return m;
    }

private:
    std::size_t alphabet_size_;
    std::size_t block_length_;
    std::vector<double> probs_;
};

}  // namespace ksent

#endif
