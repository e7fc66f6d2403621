#include <algorithm>
#include <cmath>
#include <vector>

#include "ule/error.hpp"
#include "ule/predict.hpp"

namespace ule {

namespace {

void check_finite(const FeatureMatrix& x, std::span<const double> y) {
    if (x.rows != y.size()) throw InputError("lasso: feature/target row mismatch");
    if (x.rows < 2) throw InputError("lasso: need at least two rows");
    for (double v : x.values)
        if (!std::isfinite(v)) throw InputError("lasso: non-finite feature value");
    for (double v : y)
        if (!std::isfinite(v)) throw InputError("lasso: non-finite target value");
}

}  // namespace

double lasso_lambda_max(const FeatureMatrix& x, std::span<const double> y) {
    const std::size_t n = x.rows;
    double mean_y = 0.0;
    for (double v : y) mean_y += v;
    mean_y /= static_cast<double>(n);
    std::vector<double> col_mean(x.cols, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < x.cols; ++j) col_mean[j] += x.values[i * x.cols + j];
    for (double& m : col_mean) m /= static_cast<double>(n);
    double best = 0.0;
    for (std::size_t j = 0; j < x.cols; ++j) {
        double dot = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            dot += (x.values[i * x.cols + j] - col_mean[j]) * (y[i] - mean_y);
        best = std::max(best, std::fabs(dot) / static_cast<double>(n));
    }
    return best;
}

LassoModel train_lasso(const FeatureMatrix& x, std::span<const double> y, double lambda,
                       int max_sweeps, double tol) {
    check_finite(x, y);
    if (lambda < 0.0) throw InputError("lasso: lambda must be nonnegative");
    const std::size_t n = x.rows;
    const std::size_t p = x.cols;

    // Work on centered copies so the intercept drops out of the descent.
    std::vector<double> col_mean(p, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < p; ++j) col_mean[j] += x.values[i * p + j];
    for (double& m : col_mean) m /= static_cast<double>(n);
    double mean_y = 0.0;
    for (double v : y) mean_y += v;
    mean_y /= static_cast<double>(n);

    // Column-major centered X for cache-friendly coordinate sweeps.
    std::vector<double> xc(n * p);
    std::vector<double> col_sq(p, 0.0);  // (1/n) sum x_ij^2
    for (std::size_t j = 0; j < p; ++j) {
        double sq = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double v = x.values[i * p + j] - col_mean[j];
            xc[j * n + i] = v;
            sq += v * v;
        }
        col_sq[j] = sq / static_cast<double>(n);
    }
    std::vector<double> residual(n);
    for (std::size_t i = 0; i < n; ++i) residual[i] = y[i] - mean_y;

    LassoModel model;
    model.lambda = lambda;
    model.weights.assign(p, 0.0);

    auto objective = [&]() {
        double sq = 0.0;
        for (double r : residual) sq += r * r;
        double l1 = 0.0;
        for (double w : model.weights) l1 += std::fabs(w);
        return sq / (2.0 * static_cast<double>(n)) + lambda * l1;
    };
    model.objective_trace.push_back(objective());

    bool converged = false;
    double max_delta = 0.0;
    for (int sweep = 0; sweep < max_sweeps && !converged; ++sweep) {
        max_delta = 0.0;
        for (std::size_t j = 0; j < p; ++j) {
            if (col_sq[j] == 0.0) continue;  // constant column stays at zero
            const double* cx = xc.data() + j * n;
            double rho = 0.0;
            for (std::size_t i = 0; i < n; ++i) rho += cx[i] * residual[i];
            rho = rho / static_cast<double>(n) + col_sq[j] * model.weights[j];
            const double soft = std::fabs(rho) <= lambda
                                    ? 0.0
                                    : (rho > 0.0 ? rho - lambda : rho + lambda) / col_sq[j];
            const double delta = soft - model.weights[j];
            if (delta != 0.0) {
                for (std::size_t i = 0; i < n; ++i) residual[i] -= delta * cx[i];
                model.weights[j] = soft;
            }
            max_delta = std::max(max_delta, std::fabs(delta));
        }
        model.objective_trace.push_back(objective());
        converged = max_delta < tol;
    }
    if (!converged)
        throw ConvergenceError("lasso did not converge: last max coordinate change " +
                               std::to_string(max_delta) + " after " +
                               std::to_string(max_sweeps) + " sweeps");

    model.intercept = mean_y;
    for (std::size_t j = 0; j < p; ++j) model.intercept -= model.weights[j] * col_mean[j];
    return model;
}

double lasso_predict(const LassoModel& m, std::span<const double> row) {
    double out = m.intercept;
    for (std::size_t j = 0; j < row.size(); ++j) out += m.weights[j] * row[j];
    return out;
}

double lasso_kkt_residual(const FeatureMatrix& x, std::span<const double> y, const LassoModel& m) {
    const std::size_t n = x.rows;
    const std::size_t p = x.cols;
    std::vector<double> residual(n);
    for (std::size_t i = 0; i < n; ++i) residual[i] = y[i] - lasso_predict(m, x.row(i));
    double worst = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
        double g = 0.0;
        for (std::size_t i = 0; i < n; ++i) g += x.values[i * p + j] * residual[i];
        g /= static_cast<double>(n);
        if (m.weights[j] > 0.0)
            worst = std::max(worst, std::fabs(g - m.lambda));
        else if (m.weights[j] < 0.0)
            worst = std::max(worst, std::fabs(g + m.lambda));
        else
            worst = std::max(worst, std::max(0.0, std::fabs(g) - m.lambda));
    }
    return worst;
}

}  // namespace ule
