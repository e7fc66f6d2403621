#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <vector>

#include "embed_internal.hpp"
#include "ule/error.hpp"
#include "ule/rng.hpp"

namespace ule::detail {

namespace {

struct CoocEntry {
    std::uint32_t a;
    std::uint32_t b;
    double x;       // distance-weighted count
    double log_x;   // cached
    double weight;  // f(x) = min(1, (x/xmax)^alpha)
};

// Distance-weighted co-occurrence over per-user sequences: each unordered
// in-window pair contributes 1/d. Sequences come from one seeded shuffle per
// user, the canonical order for unordered likes.
std::vector<CoocEntry> build_cooccurrence(const LikeCorpus& corpus, const EmbeddingConfig& config) {
    const Rng root(config.rng_seed);
    std::unordered_map<std::uint64_t, double> acc;
    std::vector<std::uint32_t> sequence;
    for (std::size_t u = 0; u < corpus.num_users(); ++u) {
        auto likes = corpus.likes_of(static_cast<std::uint32_t>(u));
        sequence.assign(likes.begin(), likes.end());
        Rng seq_rng = root.substream(corpus.num_users() + u);
        seq_rng.shuffle(sequence);
        const int len = static_cast<int>(sequence.size());
        for (int i = 0; i < len; ++i) {
            const int hi = std::min(len - 1, i + config.window);
            for (int j = i + 1; j <= hi; ++j) {
                std::uint32_t a = sequence[i];
                std::uint32_t b = sequence[j];
                if (a == b) continue;  // cannot happen in a deduplicated corpus
                if (a > b) std::swap(a, b);
                acc[(static_cast<std::uint64_t>(a) << 32) | b] += 1.0 / static_cast<double>(j - i);
            }
        }
    }
    std::vector<CoocEntry> entries;
    entries.reserve(acc.size());
    for (const auto& [key, x] : acc) {
        CoocEntry e;
        e.a = static_cast<std::uint32_t>(key >> 32);
        e.b = static_cast<std::uint32_t>(key & 0xffffffffULL);
        e.x = x;
        e.log_x = std::log(x);
        e.weight = std::min(1.0, std::pow(x / config.glove_xmax, config.glove_weight_alpha));
        entries.push_back(e);
    }
    // Hash order is not stable across standard libraries; fix it.
    std::sort(entries.begin(), entries.end(), [](const CoocEntry& l, const CoocEntry& r) {
        return l.a != r.a ? l.a < r.a : l.b < r.b;
    });
    return entries;
}

}  // namespace

TrainedEmbedding train_glove(const LikeCorpus& corpus, const EmbeddingConfig& config) {
    const std::size_t v = corpus.num_entities();
    const std::size_t d = static_cast<std::size_t>(config.dim);
    const int passes = config.resolved_epochs();
    const double lr0 = config.resolved_learning_rate();

    std::vector<CoocEntry> entries = build_cooccurrence(corpus, config);
    if (entries.empty()) throw InputError("glove: no co-occurring pairs in the corpus");

    Rng root(config.rng_seed);
    Rng init = root.substream(0x910EULL);
    std::vector<double> main_vec(v * d), ctx_vec(v * d);
    std::vector<double> main_bias(v, 0.0), ctx_bias(v, 0.0);
    for (double& w : main_vec) w = (init.next_double() - 0.5) / static_cast<double>(d);
    for (double& w : ctx_vec) w = (init.next_double() - 0.5) / static_cast<double>(d);

    auto objective = [&]() {
        double j = 0.0;
        for (const CoocEntry& e : entries) {
            const double* wa = main_vec.data() + static_cast<std::size_t>(e.a) * d;
            const double* wb = ctx_vec.data() + static_cast<std::size_t>(e.b) * d;
            double diff = main_bias[e.a] + ctx_bias[e.b] - e.log_x;
            for (std::size_t k = 0; k < d; ++k) diff += wa[k] * wb[k];
            j += e.weight * diff * diff;
            // symmetric term with the roles swapped
            const double* wa2 = main_vec.data() + static_cast<std::size_t>(e.b) * d;
            const double* wb2 = ctx_vec.data() + static_cast<std::size_t>(e.a) * d;
            double diff2 = main_bias[e.b] + ctx_bias[e.a] - e.log_x;
            for (std::size_t k = 0; k < d; ++k) diff2 += wa2[k] * wb2[k];
            j += e.weight * diff2 * diff2;
        }
        return j / (2.0 * static_cast<double>(entries.size()));
    };

    TrainStats stats;
    stats.objective_name = "weighted least-squares objective";
    stats.initial_objective = objective();
    stats.epochs_run = passes;

    std::vector<std::uint64_t> order(entries.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    const std::uint64_t schedule_total =
        std::max<std::uint64_t>(1, static_cast<std::uint64_t>(passes) * entries.size());
    std::uint64_t processed = 0;

    auto update_one = [&](std::uint32_t main, std::uint32_t ctx, const CoocEntry& e, double lr) {
        double* wm = main_vec.data() + static_cast<std::size_t>(main) * d;
        double* wc = ctx_vec.data() + static_cast<std::size_t>(ctx) * d;
        double diff = main_bias[main] + ctx_bias[ctx] - e.log_x;
        for (std::size_t k = 0; k < d; ++k) diff += wm[k] * wc[k];
        const double g = e.weight * diff * lr;
        for (std::size_t k = 0; k < d; ++k) {
            const double m = wm[k];
            wm[k] -= g * wc[k];
            wc[k] -= g * m;
        }
        main_bias[main] -= g;
        ctx_bias[ctx] -= g;
    };

    for (int pass = 0; pass < passes; ++pass) {
        Rng shuffle_rng = root.substream(0x0610ULL + static_cast<std::uint64_t>(pass));
        shuffle_rng.shuffle(order);
        for (std::uint64_t idx : order) {
            const CoocEntry& e = entries[idx];
            const double progress =
                static_cast<double>(processed++) / static_cast<double>(schedule_total);
            const double lr = std::max(lr0 * (1.0 - progress), lr0 * 1e-4);
            update_one(e.a, e.b, e, lr);
            update_one(e.b, e.a, e, lr);
        }
        stats.per_epoch_objective.push_back(objective());
        if (!std::isfinite(stats.per_epoch_objective.back()))
            throw DivergenceError("glove objective diverged (learning rate " +
                                  std::to_string(lr0) + ")");
    }
    stats.final_objective = stats.per_epoch_objective.empty() ? stats.initial_objective
                                                              : stats.per_epoch_objective.back();

    // Final per-entity vectors: main + context, the usual GloVe sum.
    EmbeddingMatrix entity;
    entity.rows = v;
    entity.dim = d;
    entity.ids = corpus.entity_ids;
    entity.values.resize(v * d);
    for (std::size_t i = 0; i < v * d; ++i) entity.values[i] = main_vec[i] + ctx_vec[i];

    TrainedEmbedding out;
    out.users = aggregate_average(entity, corpus);
    out.entities = std::move(entity);
    out.stats = std::move(stats);
    return out;
}

}  // namespace ule::detail
