#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>
#include <vector>

#include "ule/error.hpp"
#include "ule/predict.hpp"

namespace ule {

namespace {

double rbf(std::span<const double> a, std::span<const double> b, double gamma) {
    double sq = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        const double d = a[j] - b[j];
        sq += d * d;
    }
    return std::exp(-gamma * sq);
}

// Dual of epsilon-SVR in the 2n-variable form: t < n are the alpha side
// (sign +1), t >= n the alpha* side (sign -1).
//   min (1/2) a^T Q a + p^T a,  Q_tu = s_t s_u K(t,u),
//   p_t = epsilon - s_t y_t,  s^T a = 0,  0 <= a <= C.
class SmoSolver {
  public:
    SmoSolver(const FeatureMatrix& x, std::span<const double> y, double c, double epsilon,
              double gamma, double tol, std::uint64_t max_iterations, bool check_every_step)
        : n_(x.rows),
          c_(c),
          tol_(tol),
          max_iterations_(max_iterations),
          check_(check_every_step) {
        kernel_.resize(n_ * n_);
        for (std::size_t i = 0; i < n_; ++i) {
            for (std::size_t j = i; j < n_; ++j) {
                const double k = rbf(x.row(i), x.row(j), gamma);
                kernel_[i * n_ + j] = k;
                kernel_[j * n_ + i] = k;
            }
        }
        alpha_.assign(2 * n_, 0.0);
        gradient_.resize(2 * n_);
        for (std::size_t t = 0; t < 2 * n_; ++t)
            gradient_[t] = epsilon - sign(t) * y[point(t)];
    }

    // Maximal-violating-pair SMO.
    void solve() {
        std::uint64_t iterations = 0;
        while (true) {
            const auto [i, j, violation] = select_pair();
            final_violation_ = violation;
            if (violation < tol_) break;
            if (++iterations > max_iterations_)
                throw ConvergenceError("svr did not converge after " +
                                       std::to_string(max_iterations_) +
                                       " iterations, violation " + std::to_string(violation));
            update_pair(i, j);
            if (check_) check_feasibility();
        }
    }

    std::vector<double> beta() const {
        std::vector<double> b(n_, 0.0);
        for (std::size_t i = 0; i < n_; ++i) b[i] = alpha_[i] - alpha_[n_ + i];
        return b;
    }

    double bias() const {
        // KKT with multiplier b: free variables pin b = -s_t G_t exactly;
        // {s=+1, a=0} and {s=-1, a=C} bound it from below, the other two
        // corner states from above.
        double sum = 0.0;
        std::size_t free_count = 0;
        double upper = std::numeric_limits<double>::infinity();
        double lower = -std::numeric_limits<double>::infinity();
        for (std::size_t t = 0; t < 2 * n_; ++t) {
            const double value = -sign(t) * gradient_[t];
            if (alpha_[t] > 0.0 && alpha_[t] < c_) {
                sum += value;
                ++free_count;
            } else if ((sign(t) > 0 && alpha_[t] == 0.0) || (sign(t) < 0 && alpha_[t] == c_)) {
                lower = std::max(lower, value);
            } else {
                upper = std::min(upper, value);
            }
        }
        if (free_count > 0) return sum / static_cast<double>(free_count);
        if (std::isfinite(upper) && std::isfinite(lower)) return (upper + lower) / 2.0;
        return std::isfinite(upper) ? upper : (std::isfinite(lower) ? lower : 0.0);
    }

    double final_violation() const { return final_violation_; }

  private:
    static double clamp_box(double v, double lo, double hi) { return std::min(hi, std::max(lo, v)); }
    double sign(std::size_t t) const { return t < n_ ? 1.0 : -1.0; }
    std::size_t point(std::size_t t) const { return t < n_ ? t : t - n_; }
    double q(std::size_t t, std::size_t u) const {
        return sign(t) * sign(u) * kernel_[point(t) * n_ + point(u)];
    }

    // i maximizes -s_t G_t over variables that can grow along +s direction,
    // j minimizes it over those that can shrink; the gap is the KKT violation.
    std::tuple<std::size_t, std::size_t, double> select_pair() const {
        double best_up = -std::numeric_limits<double>::infinity();
        double best_low = std::numeric_limits<double>::infinity();
        std::size_t i = 2 * n_, j = 2 * n_;
        for (std::size_t t = 0; t < 2 * n_; ++t) {
            const bool in_up = sign(t) > 0 ? alpha_[t] < c_ : alpha_[t] > 0.0;
            const bool in_low = sign(t) > 0 ? alpha_[t] > 0.0 : alpha_[t] < c_;
            const double value = -sign(t) * gradient_[t];
            if (in_up && value > best_up) {
                best_up = value;
                i = t;
            }
            if (in_low && value < best_low) {
                best_low = value;
                j = t;
            }
        }
        if (i == 2 * n_ || j == 2 * n_) return {0, 0, 0.0};
        return {i, j, best_up - best_low};
    }

    void update_pair(std::size_t i, std::size_t j) {
        const double si = sign(i), sj = sign(j);
        const double old_ai = alpha_[i], old_aj = alpha_[j];
        // Direction d_i = si * delta, d_j = -sj * delta keeps s^T alpha = 0;
        // curvature along it collapses to eta = K_ii + K_jj - 2 K_ij.
        double quad = kernel_[point(i) * n_ + point(i)] + kernel_[point(j) * n_ + point(j)] -
                      2.0 * kernel_[point(i) * n_ + point(j)];
        if (quad <= 0.0) quad = 1e-12;
        // Unconstrained step (m - M) / eta, always positive for the selected
        // violating pair.
        double delta = ((-si * gradient_[i]) - (-sj * gradient_[j])) / quad;
        double hi = std::numeric_limits<double>::infinity();
        hi = std::min(hi, si > 0 ? c_ - old_ai : old_ai);
        hi = std::min(hi, sj > 0 ? old_aj : c_ - old_aj);
        delta = clamp_box(delta, 0.0, hi);
        alpha_[i] = clamp_box(old_ai + si * delta, 0.0, c_);
        alpha_[j] = clamp_box(old_aj - sj * delta, 0.0, c_);

        const double dai = alpha_[i] - old_ai;
        const double daj = alpha_[j] - old_aj;
        for (std::size_t t = 0; t < 2 * n_; ++t)
            gradient_[t] += q(t, i) * dai + q(t, j) * daj;
    }

    void check_feasibility() const {
        double s_dot = 0.0;
        for (std::size_t t = 0; t < 2 * n_; ++t) {
            if (alpha_[t] < -1e-12 || alpha_[t] > c_ + 1e-12)
                throw DivergenceError("svr: box constraint violated during optimization");
            s_dot += sign(t) * alpha_[t];
        }
        if (std::fabs(s_dot) > 1e-9 * std::max(1.0, c_))
            throw DivergenceError("svr: equality constraint violated during optimization");
    }

    std::size_t n_;
    double c_;
    double tol_;
    std::uint64_t max_iterations_;
    bool check_;
    std::vector<double> kernel_;
    std::vector<double> alpha_;
    std::vector<double> gradient_;
    double final_violation_ = 0.0;
};

}  // namespace

SvrModel train_svr(const FeatureMatrix& x, std::span<const double> y, double c, double epsilon,
                   double gamma, double tol, std::uint64_t max_iterations, bool check_every_step) {
    if (x.rows == 0) throw InputError("svr: empty training set");
    if (x.rows != y.size()) throw InputError("svr: feature/target row mismatch");
    if (c <= 0.0) throw InputError("svr: C must be positive");
    if (epsilon < 0.0) throw InputError("svr: epsilon must be nonnegative");
    if (gamma <= 0.0) throw InputError("svr: gamma must be positive");
    for (double v : x.values)
        if (!std::isfinite(v)) throw InputError("svr: non-finite feature value");

    SmoSolver solver(x, y, c, epsilon, gamma, tol, max_iterations, check_every_step);
    solver.solve();

    SvrModel model;
    model.beta = solver.beta();
    model.bias = solver.bias();
    model.c = c;
    model.epsilon = epsilon;
    model.gamma = gamma;
    model.cols = x.cols;
    model.final_kkt_violation = solver.final_violation();
    for (std::size_t i = 0; i < x.rows; ++i) {
        if (model.beta[i] == 0.0) continue;
        auto row = x.row(i);
        model.support_rows.insert(model.support_rows.end(), row.begin(), row.end());
        model.support_beta.push_back(model.beta[i]);
    }
    return model;
}

double svr_predict(const SvrModel& m, std::span<const double> row) {
    double out = m.bias;
    for (std::size_t s = 0; s < m.support_beta.size(); ++s) {
        std::span<const double> sv{m.support_rows.data() + s * m.cols, m.cols};
        out += m.support_beta[s] * rbf(sv, row, m.gamma);
    }
    return out;
}

double svr_dual_objective(const FeatureMatrix& x, std::span<const double> y, const SvrModel& m) {
    // (1/2) beta^T K beta + epsilon * sum |beta| - y^T beta; |beta_i| equals
    // alpha_i + alpha*_i whenever the two sides are complementary, which SMO
    // maintains.
    const std::size_t n = x.rows;
    double quad = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (m.beta[i] == 0.0) continue;
        for (std::size_t j = 0; j < n; ++j) {
            if (m.beta[j] == 0.0) continue;
            quad += m.beta[i] * m.beta[j] * rbf(x.row(i), x.row(j), m.gamma);
        }
    }
    double linear = 0.0, l1 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        linear += y[i] * m.beta[i];
        l1 += std::fabs(m.beta[i]);
    }
    return 0.5 * quad + m.epsilon * l1 - linear;
}

}  // namespace ule
