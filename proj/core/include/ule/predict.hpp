#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ule/corpus.hpp"
#include "ule/embedding.hpp"

namespace ule {

// Dense feature rows for the labeled users, plus the target vector.
struct FeatureMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values;  // row-major
    std::vector<double> y;       // ddr per row
    std::vector<std::string> row_ids;
    std::string source;  // "baseline-raw" or the embedding method tag

    std::span<const double> row(std::size_t i) const { return {values.data() + i * cols, cols}; }
    std::span<double> row(std::size_t i) { return {values.data() + i * cols, cols}; }
};

// Per-column standardization fitted on training rows only.
struct StandardScaler {
    std::vector<double> mean;
    std::vector<double> stddev;  // population sigma; constant columns keep 1

    void fit(const FeatureMatrix& x, std::span<const std::size_t> train_rows);
    void transform(std::span<const double> in, std::span<double> out) const;
};

struct LassoModel {
    std::vector<double> weights;
    double intercept = 0.0;
    double lambda = 0.0;
    std::vector<double> objective_trace;  // per coordinate-descent sweep
};

// Coordinate descent on (1/2n)||y - Xw - b||^2 + lambda ||w||_1. Converged
// when no coordinate moves more than tol in a sweep.
LassoModel train_lasso(const FeatureMatrix& x, std::span<const double> y, double lambda,
                       int max_sweeps = 100000, double tol = 1e-7);
double lasso_predict(const LassoModel& m, std::span<const double> row);
// Max subgradient-optimality violation across coordinates (0 at the optimum).
double lasso_kkt_residual(const FeatureMatrix& x, std::span<const double> y, const LassoModel& m);
// Smallest lambda that zeroes every weight.
double lasso_lambda_max(const FeatureMatrix& x, std::span<const double> y);

struct SvrModel {
    std::vector<double> beta;  // alpha - alpha*, one per training row
    double bias = 0.0;
    double c = 1.0;
    double epsilon = 0.2;
    double gamma = 1.0;
    std::size_t cols = 0;
    std::vector<double> support_rows;       // standardized rows with beta != 0
    std::vector<double> support_beta;       // matching coefficients
    double final_kkt_violation = 0.0;
};

// Sequential minimal optimization of the epsilon-insensitive dual with an RBF
// kernel, to KKT tolerance tol. check_every_step validates box and equality
// feasibility after each update (testing hook).
SvrModel train_svr(const FeatureMatrix& x, std::span<const double> y, double c, double epsilon,
                   double gamma, double tol = 1e-3, std::uint64_t max_iterations = 20000000,
                   bool check_every_step = false);
double svr_predict(const SvrModel& m, std::span<const double> row);
// Dual objective value of the trained model (for optimality cross-checks).
double svr_dual_objective(const FeatureMatrix& x, std::span<const double> y, const SvrModel& m);

struct ModelSpec {
    enum class Kind { Lasso, Svr } kind = Kind::Svr;
    // Lasso: lambda < 0 selects by inner 5-fold CV over a 20-point log grid
    // from lambda_max down to lambda_max * 1e-3.
    double lambda = -1.0;
    double c = 1.0;
    double epsilon = 0.2;
    double gamma = 0.0;  // 0 = 1/num_columns on standardized features

    std::string describe() const;
};
ModelSpec::Kind model_kind_from_string(std::string_view name);

struct EvalResult {
    std::vector<double> fold_r;
    std::vector<bool> fold_defined;
    double mean_r = 0.0;    // over defined folds
    double pooled_r = 0.0;  // single r over all held-out predictions
    bool pooled_defined = false;
    int folds = 0;
    std::uint64_t seed = 0;
    std::string model;
    std::string features;
};

// Seeded shuffle, contiguous folds (sizes differ by at most one). Per fold:
// standardize on the training rows, fit, predict held out, Pearson r.
EvalResult cross_validate(const FeatureMatrix& features, const ModelSpec& spec, int folds = 10,
                          std::uint64_t seed = 1);

FeatureMatrix build_features_baseline(const LikeCorpus& corpus,
                                      const std::vector<LabeledUser>& labels,
                                      bool include_stat_features = true);
FeatureMatrix build_features_embedding(const EmbeddingMatrix& users, const LikeCorpus& corpus,
                                       const std::vector<LabeledUser>& labels,
                                       bool include_stat_features = true,
                                       const std::string& source_tag = "embedding");

struct SweepRow {
    std::string method;  // embedding method or "baseline"
    int dim = 0;
    std::uint64_t users = 0;
    EvalResult eval;
};

struct SweepTable {
    std::vector<SweepRow> rows;
};

// Per unlabeled-user count: subsample (labeled users always retained, entity
// vocabulary fixed), retrain each method, cross-validate.
SweepTable sweep_datasize(const LikeCorpus& corpus, const std::vector<LabeledUser>& labels,
                          const std::vector<EmbeddingConfig>& methods,
                          const std::vector<std::uint64_t>& user_counts, const ModelSpec& spec,
                          int folds = 10, std::uint64_t seed = 1, bool include_baseline = true,
                          bool include_stat_features = true);

SweepTable sweep_featuresize(const LikeCorpus& corpus, const std::vector<LabeledUser>& labels,
                             const std::vector<EmbeddingConfig>& methods,
                             const std::vector<int>& dims, const ModelSpec& spec, int folds = 10,
                             std::uint64_t seed = 1, bool include_baseline = true,
                             bool include_stat_features = true);

// Results table: "method dim users fold r" rows plus per-configuration mean
// and pooled summary lines.
void write_eval_table(const std::filesystem::path& path, const SweepTable& table);
// Plot-ready CSV: x,series,y (x = users or dims).
void write_sweep_csv(const std::filesystem::path& path, const SweepTable& table,
                     const std::string& x_field);

}  // namespace ule
