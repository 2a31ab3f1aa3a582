#ifndef KSENT_DETAIL_SUMMATION_HPP
#define KSENT_DETAIL_SUMMATION_HPP

#include <cmath>
#include <span>

namespace ksent::detail {

// Neumaier's variant of Kahan summation. Order of add() calls fixes the result.
class CompensatedSum {
public:
    CompensatedSum& add(double x) noexcept {
        const double t = sum_ + x;
        if (std::fabs(sum_) >= std::fabs(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
        return *this;
    }

    CompensatedSum& operator+=(double x) noexcept { return add(x); }

    double value() const noexcept { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

inline double compensated_total(std::span<const double> xs) noexcept {
    CompensatedSum s;
    for (double x : xs) s.add(x);
    return s.value();
}

// -p ln p with the 0 ln 0 = 0 convention.
inline double neg_plogp(double p) noexcept {
    return p > 0.0 ? -p * std::log(p) : 0.0;
}

}  // namespace ksent::detail

#endif
