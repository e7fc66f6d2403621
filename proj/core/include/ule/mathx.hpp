#pragma once

#include <cstdint>

namespace ule {

// Regularized incomplete beta I_x(a, b), continued-fraction expansion
// (modified Lentz), converged to 1e-12.
double regularized_incomplete_beta(double a, double b, double x);

// Two-sided p-value of Student's t with df degrees of freedom.
double student_t_two_sided(double t, double df);

// log n-choose-k via lgamma.
double log_binomial_coefficient(std::uint64_t n, std::uint64_t k);

// Exact binomial CDF P(X <= k) for X ~ Binomial(n, p).
double binomial_cdf(std::uint64_t k, std::uint64_t n, double p);

// Central [lo, hi] such that P(lo <= X <= hi) >= level for X ~ Binomial(n, p),
// built from equal tail probabilities.
struct BinomialInterval {
    std::uint64_t lo;
    std::uint64_t hi;
};
BinomialInterval binomial_central_interval(std::uint64_t n, double p, double level);

}  // namespace ule
