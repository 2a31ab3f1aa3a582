// Builds the n-Markov hulls of a lumped chain and prints how their rates
// close in on the bracket of the hidden process.

#include <cstdio>

#include "ksent/ksent.hpp"

int main() {
    using namespace ksent;
    const auto source = markov_from_kernel(3, 1, {0.5, 0.3, 0.2, 0.1, 0.6, 0.3, 0.4, 0.1, 0.5});
    const auto lumped = factor_of(source, {0, 0, 1});

    const auto bracket = rate_bracket(lumped, 8);
    std::printf("factor rate in [%.12f, %.12f]\n", bracket.lower.nats, bracket.upper.nats);

    std::printf("n  hull_rate       H_{n+1}-H_n\n");
    for (std::size_t n = 1; n <= 6; ++n) {
        const auto hull = markov_hull(lumped, n);
        std::printf("%zu  %.12f  %.12f\n", n, hull_entropy_rate(hull).nats,
                    conditional_block_entropy(lumped, n).nats);
    }
}
