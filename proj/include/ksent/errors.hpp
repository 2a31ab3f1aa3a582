#ifndef KSENT_ERRORS_HPP
#define KSENT_ERRORS_HPP

#include <cstdint>
#include <stdexcept>
#include <string>

namespace ksent {

/// Raised for malformed inputs: non-stochastic rows, bad parameters, bad documents.
class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Raised when an enumeration would exceed the configured word budget.
class BudgetExceeded : public std::runtime_error {
public:
    BudgetExceeded(const std::string& what, std::uint64_t requested, std::uint64_t budget)
        : std::runtime_error(what + ": needs " + std::to_string(requested) +
                             " entries, enumeration budget is " + std::to_string(budget)),
          requested_(requested), budget_(budget) {}

    std::uint64_t requested() const noexcept { return requested_; }
    std::uint64_t budget() const noexcept { return budget_; }

private:
    std::uint64_t requested_;
    std::uint64_t budget_;
};

/// Enumeration limits shared by every operation that materializes words.
struct Limits {
    static constexpr std::uint64_t kDefaultMaxWords = std::uint64_t{1} << 24;
    std::uint64_t max_words = kDefaultMaxWords;
};

inline void require(bool ok, const std::string& message) {
    if (!ok) throw InvalidInput(message);
}

}  // namespace ksent

#endif
