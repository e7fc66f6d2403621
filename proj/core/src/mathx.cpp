#include "ule/mathx.hpp"

#include <cmath>
#include <stdexcept>

namespace ule {

namespace {

constexpr double LENTZ_TINY = 1e-300;
constexpr double CF_TOLERANCE = 1e-12;
constexpr int CF_MAX_TERMS = 500;

// Continued fraction for I_x(a,b), Numerical-Recipes style even/odd terms,
// evaluated with the modified Lentz algorithm.
double beta_continued_fraction(double a, double b, double x) {
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < LENTZ_TINY) d = LENTZ_TINY;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= CF_MAX_TERMS; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < LENTZ_TINY) d = LENTZ_TINY;
        c = 1.0 + aa / c;
        if (std::fabs(c) < LENTZ_TINY) c = LENTZ_TINY;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < LENTZ_TINY) d = LENTZ_TINY;
        c = 1.0 + aa / c;
        if (std::fabs(c) < LENTZ_TINY) c = LENTZ_TINY;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < CF_TOLERANCE) return h;
    }
    throw std::runtime_error("incomplete beta continued fraction did not converge");
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0)) throw std::runtime_error("incomplete beta requires a, b > 0");
    if (!(x >= 0.0 && x <= 1.0)) throw std::runtime_error("incomplete beta requires x in [0,1]");
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;
    const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                             a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(log_front);
    // Use the expansion on the side where it converges fast.
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * beta_continued_fraction(a, b, x) / a;
    }
    return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_two_sided(double t, double df) {
    if (!(df > 0.0)) throw std::runtime_error("t distribution requires df > 0");
    if (std::isinf(t)) return 0.0;
    const double x = df / (df + t * t);
    return regularized_incomplete_beta(df / 2.0, 0.5, x);
}

double log_binomial_coefficient(std::uint64_t n, std::uint64_t k) {
    if (k > n) throw std::runtime_error("binomial coefficient requires k <= n");
    return std::lgamma(static_cast<double>(n) + 1.0) -
           std::lgamma(static_cast<double>(k) + 1.0) -
           std::lgamma(static_cast<double>(n - k) + 1.0);
}

double binomial_cdf(std::uint64_t k, std::uint64_t n, double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::runtime_error("binomial cdf requires p in [0,1]");
    if (k >= n) return 1.0;
    if (p == 0.0) return 1.0;
    if (p == 1.0) return 0.0;
    // P(X <= k) = I_{1-p}(n-k, k+1)
    return regularized_incomplete_beta(static_cast<double>(n - k), static_cast<double>(k) + 1.0,
                                       1.0 - p);
}

BinomialInterval binomial_central_interval(std::uint64_t n, double p, double level) {
    const double tail = (1.0 - level) / 2.0;
    // lo = smallest k with CDF(k) > tail, so P(X < lo) <= tail.
    std::uint64_t lo = 0;
    while (lo < n && binomial_cdf(lo, n, p) <= tail) ++lo;
    // hi = smallest k >= lo with P(X > k) <= tail.
    std::uint64_t hi = lo;
    while (hi < n && 1.0 - binomial_cdf(hi, n, p) > tail) ++hi;
    return {lo, hi};
}

}  // namespace ule
