#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <unordered_map>

#include "ule/analysis.hpp"
#include "ule/error.hpp"
#include "ule/predict.hpp"
#include "ule/rng.hpp"

namespace ule {

void StandardScaler::fit(const FeatureMatrix& x, std::span<const std::size_t> train_rows) {
    mean.assign(x.cols, 0.0);
    stddev.assign(x.cols, 1.0);
    if (train_rows.empty()) throw InputError("scaler: no training rows");
    for (std::size_t i : train_rows) {
        auto row = x.row(i);
        for (std::size_t j = 0; j < x.cols; ++j) mean[j] += row[j];
    }
    const double inv_n = 1.0 / static_cast<double>(train_rows.size());
    for (double& m : mean) m *= inv_n;
    std::vector<double> var(x.cols, 0.0);
    for (std::size_t i : train_rows) {
        auto row = x.row(i);
        for (std::size_t j = 0; j < x.cols; ++j) {
            const double d = row[j] - mean[j];
            var[j] += d * d;
        }
    }
    for (std::size_t j = 0; j < x.cols; ++j) {
        const double sigma = std::sqrt(var[j] * inv_n);
        stddev[j] = sigma > 0.0 ? sigma : 1.0;
    }
}

void StandardScaler::transform(std::span<const double> in, std::span<double> out) const {
    for (std::size_t j = 0; j < in.size(); ++j) out[j] = (in[j] - mean[j]) / stddev[j];
}

std::string ModelSpec::describe() const {
    char buf[160];
    if (kind == Kind::Lasso) {
        if (lambda < 0.0)
            std::snprintf(buf, sizeof buf, "lasso(lambda=cv)");
        else
            std::snprintf(buf, sizeof buf, "lasso(lambda=%g)", lambda);
    } else {
        std::snprintf(buf, sizeof buf, "svr(C=%g,eps=%g,gamma=%s)", c, epsilon,
                      gamma > 0.0 ? std::to_string(gamma).c_str() : "1/cols");
    }
    return buf;
}

ModelSpec::Kind model_kind_from_string(std::string_view name) {
    if (name == "lasso" || name == "lr-l") return ModelSpec::Kind::Lasso;
    if (name == "svr") return ModelSpec::Kind::Svr;
    throw ConfigError("unknown model '" + std::string(name) + "'; valid: lasso, svr");
}

namespace {

FeatureMatrix standardized_subset(const FeatureMatrix& x, const StandardScaler& scaler,
                                  std::span<const std::size_t> rows) {
    FeatureMatrix out;
    out.rows = rows.size();
    out.cols = x.cols;
    out.values.resize(out.rows * out.cols);
    out.y.resize(out.rows);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        scaler.transform(x.row(rows[i]), out.row(i));
        out.y[i] = x.y[rows[i]];
    }
    return out;
}

// Lambda search on the training rows only: 20-point log grid from lambda_max
// down to lambda_max*1e-3, inner 5-fold CV scored by held-out squared error.
double select_lambda(const FeatureMatrix& train, std::uint64_t seed) {
    const double lam_max = lasso_lambda_max(train, train.y);
    if (lam_max <= 0.0) return 0.0;
    constexpr int GRID = 20;
    constexpr int INNER_FOLDS = 5;
    std::vector<double> grid(GRID);
    const double ratio = std::pow(1e-3, 1.0 / (GRID - 1));
    for (int g = 0; g < GRID; ++g) grid[g] = lam_max * std::pow(ratio, g);

    std::vector<std::size_t> order(train.rows);
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(seed ^ 0x1a550ULL);
    rng.shuffle(order);

    std::vector<double> score(GRID, 0.0);
    for (int f = 0; f < INNER_FOLDS; ++f) {
        const std::size_t begin = f * train.rows / INNER_FOLDS;
        const std::size_t end = (f + 1) * train.rows / INNER_FOLDS;
        if (begin == end) continue;
        std::vector<std::size_t> inner_train, inner_val;
        for (std::size_t i = 0; i < train.rows; ++i)
            (i >= begin && i < end ? inner_val : inner_train).push_back(order[i]);
        if (inner_train.size() < 2) continue;
        StandardScaler scaler;
        scaler.fit(train, inner_train);
        FeatureMatrix fit_x = standardized_subset(train, scaler, inner_train);
        FeatureMatrix val_x = standardized_subset(train, scaler, inner_val);
        for (int g = 0; g < GRID; ++g) {
            const LassoModel m = train_lasso(fit_x, fit_x.y, grid[g]);
            double sq = 0.0;
            for (std::size_t i = 0; i < val_x.rows; ++i) {
                const double err = val_x.y[i] - lasso_predict(m, val_x.row(i));
                sq += err * err;
            }
            score[g] += sq;
        }
    }
    int best = 0;
    for (int g = 1; g < GRID; ++g)
        if (score[g] < score[best]) best = g;
    return grid[best];
}

struct FittedModel {
    std::optional<LassoModel> lasso;
    std::optional<SvrModel> svr;

    double predict(std::span<const double> row) const {
        return lasso ? lasso_predict(*lasso, row) : svr_predict(*svr, row);
    }
};

FittedModel fit_model(const FeatureMatrix& train, const ModelSpec& spec, std::uint64_t seed) {
    FittedModel fitted;
    if (spec.kind == ModelSpec::Kind::Lasso) {
        const double lambda = spec.lambda >= 0.0 ? spec.lambda : select_lambda(train, seed);
        fitted.lasso = train_lasso(train, train.y, lambda);
    } else {
        const double gamma = spec.gamma > 0.0 ? spec.gamma : 1.0 / static_cast<double>(train.cols);
        fitted.svr = train_svr(train, train.y, spec.c, spec.epsilon, gamma);
    }
    return fitted;
}

bool is_constant(std::span<const double> v) {
    for (std::size_t i = 1; i < v.size(); ++i)
        if (v[i] != v[0]) return false;
    return true;
}

}  // namespace

EvalResult cross_validate(const FeatureMatrix& features, const ModelSpec& spec, int folds,
                          std::uint64_t seed) {
    if (folds < 2) throw ConfigError("cross validation needs at least 2 folds");
    if (features.rows < static_cast<std::size_t>(folds))
        throw InputError("fewer labeled rows than folds");

    std::vector<std::size_t> order(features.rows);
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(seed);
    rng.shuffle(order);

    EvalResult result;
    result.folds = folds;
    result.seed = seed;
    result.model = spec.describe();
    result.features = features.source;

    std::vector<double> pooled_pred, pooled_true;
    double r_sum = 0.0;
    std::size_t r_count = 0;
    for (int f = 0; f < folds; ++f) {
        const std::size_t begin = static_cast<std::size_t>(f) * features.rows / folds;
        const std::size_t end = static_cast<std::size_t>(f + 1) * features.rows / folds;
        std::vector<std::size_t> train_rows, test_rows;
        for (std::size_t i = 0; i < features.rows; ++i)
            (i >= begin && i < end ? test_rows : train_rows).push_back(order[i]);

        StandardScaler scaler;
        scaler.fit(features, train_rows);
        FeatureMatrix train = standardized_subset(features, scaler, train_rows);
        FeatureMatrix test = standardized_subset(features, scaler, test_rows);
        train.cols = features.cols;
        const FittedModel model = fit_model(train, spec, seed + static_cast<std::uint64_t>(f));

        std::vector<double> pred(test.rows);
        for (std::size_t i = 0; i < test.rows; ++i) pred[i] = model.predict(test.row(i));
        pooled_pred.insert(pooled_pred.end(), pred.begin(), pred.end());
        pooled_true.insert(pooled_true.end(), test.y.begin(), test.y.end());

        if (test.rows < 2 || is_constant(pred) || is_constant(test.y)) {
            result.fold_r.push_back(0.0);
            result.fold_defined.push_back(false);
            continue;
        }
        const double r = pearson(pred, test.y);
        result.fold_r.push_back(r);
        result.fold_defined.push_back(true);
        r_sum += r;
        ++r_count;
    }
    result.mean_r = r_count > 0 ? r_sum / static_cast<double>(r_count) : 0.0;
    if (pooled_pred.size() >= 2 && !is_constant(pooled_pred) && !is_constant(pooled_true)) {
        result.pooled_r = pearson(pooled_pred, pooled_true);
        result.pooled_defined = true;
    }
    return result;
}

namespace {

void append_stat_columns(FeatureMatrix& m, const LikeCorpus& corpus,
                         const std::vector<LabeledUser>& labels) {
    const std::size_t old_cols = m.cols;
    std::vector<double> widened(m.rows * (old_cols + 2));
    for (std::size_t i = 0; i < m.rows; ++i) {
        std::copy(m.values.begin() + i * old_cols, m.values.begin() + (i + 1) * old_cols,
                  widened.begin() + i * (old_cols + 2));
        const UserStatFeatures f = user_stat_features(corpus, labels[i].user);
        widened[i * (old_cols + 2) + old_cols] = static_cast<double>(f.num_likes);
        widened[i * (old_cols + 2) + old_cols + 1] = f.avg_entity_popularity;
    }
    m.values = std::move(widened);
    m.cols = old_cols + 2;
}

}  // namespace

FeatureMatrix build_features_baseline(const LikeCorpus& corpus,
                                      const std::vector<LabeledUser>& labels,
                                      bool include_stat_features) {
    if (labels.empty()) throw InputError("no labeled users");
    FeatureMatrix m;
    m.rows = labels.size();
    m.cols = corpus.num_entities();
    m.source = "baseline-raw";
    m.values.assign(m.rows * m.cols, 0.0);
    m.y.resize(m.rows);
    m.row_ids.reserve(m.rows);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        for (std::uint32_t e : corpus.likes_of(labels[i].user)) m.values[i * m.cols + e] = 1.0;
        m.y[i] = labels[i].ddr;
        m.row_ids.push_back(corpus.user_ids[labels[i].user]);
    }
    if (include_stat_features) append_stat_columns(m, corpus, labels);
    return m;
}

FeatureMatrix build_features_embedding(const EmbeddingMatrix& users, const LikeCorpus& corpus,
                                       const std::vector<LabeledUser>& labels,
                                       bool include_stat_features, const std::string& source_tag) {
    if (labels.empty()) throw InputError("no labeled users");
    // Rows align by user id; missing rows are an alignment error.
    std::unordered_map<std::string, std::size_t> row_of;
    row_of.reserve(users.rows);
    for (std::size_t i = 0; i < users.rows; ++i) row_of.emplace(users.ids[i], i);
    FeatureMatrix m;
    m.rows = labels.size();
    m.cols = users.dim;
    m.source = source_tag;
    m.values.resize(m.rows * m.cols);
    m.y.resize(m.rows);
    m.row_ids.reserve(m.rows);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const std::string& id = corpus.user_ids[labels[i].user];
        auto it = row_of.find(id);
        if (it == row_of.end())
            throw InputError("embedding has no row for labeled user " + id +
                             " (corpus/embedding mismatch)");
        auto src = users.row(it->second);
        std::copy(src.begin(), src.end(), m.values.begin() + i * m.cols);
        m.y[i] = labels[i].ddr;
        m.row_ids.push_back(id);
    }
    if (include_stat_features) append_stat_columns(m, corpus, labels);
    return m;
}

namespace {

// Row subset of a corpus keeping the entity vocabulary fixed, so embeddings
// and baseline columns stay comparable across subsample sizes.
LikeCorpus subsample_users(const LikeCorpus& corpus, const std::vector<std::uint32_t>& keep) {
    LikeCorpus out;
    out.entity_ids = corpus.entity_ids;
    out.entity_index = corpus.entity_index;
    out.entity_count.assign(corpus.num_entities(), 0);
    out.user_ids.reserve(keep.size());
    out.row_ptr.reserve(keep.size() + 1);
    out.row_ptr.push_back(0);
    for (std::uint32_t u : keep) {
        out.user_ids.push_back(corpus.user_ids[u]);
        for (std::uint32_t e : corpus.likes_of(u)) {
            out.col_idx.push_back(e);
            ++out.entity_count[e];
        }
        out.row_ptr.push_back(out.col_idx.size());
    }
    out.user_index.reserve(out.user_ids.size());
    for (std::size_t u = 0; u < out.user_ids.size(); ++u)
        out.user_index.emplace(out.user_ids[u], static_cast<std::uint32_t>(u));
    return out;
}

std::vector<LabeledUser> relabel(const LikeCorpus& corpus,
                                 const std::vector<LabeledUser>& labels,
                                 const LikeCorpus& original) {
    std::vector<LabeledUser> out;
    out.reserve(labels.size());
    for (const LabeledUser& l : labels) {
        auto it = corpus.user_index.find(original.user_ids[l.user]);
        if (it == corpus.user_index.end()) continue;
        out.push_back({it->second, l.ddr});
    }
    return out;
}

}  // namespace

SweepTable sweep_datasize(const LikeCorpus& corpus, const std::vector<LabeledUser>& labels,
                          const std::vector<EmbeddingConfig>& methods,
                          const std::vector<std::uint64_t>& user_counts, const ModelSpec& spec,
                          int folds, std::uint64_t seed, bool include_baseline,
                          bool include_stat_features) {
    std::vector<bool> labeled_mask(corpus.num_users(), false);
    for (const LabeledUser& l : labels) labeled_mask[l.user] = true;
    std::vector<std::uint32_t> unlabeled;
    for (std::size_t u = 0; u < corpus.num_users(); ++u)
        if (!labeled_mask[u]) unlabeled.push_back(static_cast<std::uint32_t>(u));

    SweepTable table;
    for (std::uint64_t count : user_counts) {
        if (count < labels.size())
            throw ConfigError("subsample size " + std::to_string(count) +
                              " is below the labeled-user total " + std::to_string(labels.size()));
        if (count > corpus.num_users())
            throw ConfigError("subsample size " + std::to_string(count) +
                              " exceeds the corpus size " + std::to_string(corpus.num_users()));
        // Labeled users always retained; unlabeled filled by a seeded draw.
        std::vector<std::uint32_t> pool = unlabeled;
        Rng rng(seed ^ (0xD474ULL + count));
        rng.shuffle(pool);
        std::vector<std::uint32_t> keep;
        keep.reserve(count);
        for (const LabeledUser& l : labels) keep.push_back(l.user);
        const std::uint64_t extra = count - labels.size();
        for (std::uint64_t i = 0; i < extra; ++i) keep.push_back(pool[i]);
        std::sort(keep.begin(), keep.end());
        const LikeCorpus sub = subsample_users(corpus, keep);
        const std::vector<LabeledUser> sub_labels = relabel(sub, labels, corpus);

        if (include_baseline) {
            const FeatureMatrix base =
                build_features_baseline(sub, sub_labels, include_stat_features);
            SweepRow row;
            row.method = "baseline";
            row.dim = 0;
            row.users = count;
            row.eval = cross_validate(base, spec, folds, seed);
            table.rows.push_back(std::move(row));
        }
        for (const EmbeddingConfig& cfg : methods) {
            const TrainedEmbedding trained = train_embedding(sub, cfg);
            const FeatureMatrix feat =
                build_features_embedding(trained.users, sub, sub_labels, include_stat_features,
                                         std::string(method_name(cfg.method)));
            SweepRow row;
            row.method = std::string(method_name(cfg.method));
            row.dim = cfg.dim;
            row.users = count;
            row.eval = cross_validate(feat, spec, folds, seed);
            table.rows.push_back(std::move(row));
        }
    }
    return table;
}

SweepTable sweep_featuresize(const LikeCorpus& corpus, const std::vector<LabeledUser>& labels,
                             const std::vector<EmbeddingConfig>& methods,
                             const std::vector<int>& dims, const ModelSpec& spec, int folds,
                             std::uint64_t seed, bool include_baseline,
                             bool include_stat_features) {
    SweepTable table;
    if (include_baseline) {
        const FeatureMatrix base = build_features_baseline(corpus, labels, include_stat_features);
        SweepRow row;
        row.method = "baseline";
        row.dim = 0;
        row.users = corpus.num_users();
        row.eval = cross_validate(base, spec, folds, seed);
        table.rows.push_back(std::move(row));
    }
    for (const EmbeddingConfig& base_cfg : methods) {
        for (int dim : dims) {
            EmbeddingConfig cfg = base_cfg;
            cfg.dim = dim;
            const TrainedEmbedding trained = train_embedding(corpus, cfg);
            const FeatureMatrix feat =
                build_features_embedding(trained.users, corpus, labels, include_stat_features,
                                         std::string(method_name(cfg.method)));
            SweepRow row;
            row.method = std::string(method_name(cfg.method));
            row.dim = dim;
            row.users = corpus.num_users();
            row.eval = cross_validate(feat, spec, folds, seed);
            table.rows.push_back(std::move(row));
        }
    }
    return table;
}

void write_eval_table(const std::filesystem::path& path, const SweepTable& table) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write results table: " + path.string());
    out << "# method\tdim\tusers\tfold\tr\n";
    char buf[64];
    for (const SweepRow& row : table.rows) {
        for (std::size_t f = 0; f < row.eval.fold_r.size(); ++f) {
            if (row.eval.fold_defined[f])
                std::snprintf(buf, sizeof buf, "%.17g", row.eval.fold_r[f]);
            else
                std::snprintf(buf, sizeof buf, "skipped");
            out << row.method << '\t' << row.dim << '\t' << row.users << '\t' << f << '\t' << buf
                << '\n';
        }
        std::snprintf(buf, sizeof buf, "%.17g", row.eval.mean_r);
        out << row.method << '\t' << row.dim << '\t' << row.users << "\tmean\t" << buf << '\n';
        if (row.eval.pooled_defined) {
            std::snprintf(buf, sizeof buf, "%.17g", row.eval.pooled_r);
            out << row.method << '\t' << row.dim << '\t' << row.users << "\tpooled\t" << buf
                << '\n';
        }
    }
    if (!out) throw InputError("write failed: " + path.string());
}

void write_sweep_csv(const std::filesystem::path& path, const SweepTable& table,
                     const std::string& x_field) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write sweep csv: " + path.string());
    out << "x,series,y\n";
    char buf[64];
    for (const SweepRow& row : table.rows) {
        const std::uint64_t x = x_field == "dim" ? static_cast<std::uint64_t>(row.dim) : row.users;
        std::snprintf(buf, sizeof buf, "%.17g", row.eval.mean_r);
        out << x << ',' << row.method << ',' << buf << '\n';
    }
    if (!out) throw InputError("write failed: " + path.string());
}

}  // namespace ule
