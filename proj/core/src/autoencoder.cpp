#include "ule/ae_objective.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "embed_internal.hpp"
#include "ule/error.hpp"
#include "ule/rng.hpp"

namespace ule::ae {

namespace {

inline double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

// Stable cross-entropy of a logistic unit from its logit:
// -(y log s(z) + (1-y) log(1-s(z))) = max(z,0) - z y + log(1 + exp(-|z|)).
inline double logit_cross_entropy(double z, double y) {
    return std::max(z, 0.0) - z * y + std::log1p(std::exp(-std::fabs(z)));
}

}  // namespace

void Params::zero() {
    std::fill(w_in.begin(), w_in.end(), 0.0);
    std::fill(b_hidden.begin(), b_hidden.end(), 0.0);
    std::fill(w_out.begin(), w_out.end(), 0.0);
    std::fill(b_out.begin(), b_out.end(), 0.0);
}

Params Params::like(const Params& other) {
    Params p;
    p.num_entities = other.num_entities;
    p.hidden_dim = other.hidden_dim;
    p.w_in.assign(other.w_in.size(), 0.0);
    p.b_hidden.assign(other.b_hidden.size(), 0.0);
    p.w_out.assign(other.w_out.size(), 0.0);
    p.b_out.assign(other.b_out.size(), 0.0);
    return p;
}

void hidden_activations(const Params& p, std::span<const std::uint32_t> likes,
                        std::span<double> out) {
    const std::size_t d = p.hidden_dim;
    for (std::size_t j = 0; j < d; ++j) out[j] = p.b_hidden[j];
    for (std::uint32_t e : likes) {
        const double* row = p.w_in.data() + static_cast<std::size_t>(e) * d;
        for (std::size_t j = 0; j < d; ++j) out[j] += row[j];
    }
    for (std::size_t j = 0; j < d; ++j) out[j] = sigmoid(out[j]);
}

double batch_loss(const Params& p, const LikeCorpus& corpus,
                  std::span<const std::uint32_t> users) {
    const std::size_t d = p.hidden_dim;
    const std::size_t v = p.num_entities;
    std::vector<double> hidden(d);
    double total = 0.0;
    for (std::uint32_t u : users) {
        auto likes = corpus.likes_of(u);
        hidden_activations(p, likes, hidden);
        double loss = 0.0;
        std::size_t like_pos = 0;
        for (std::size_t e = 0; e < v; ++e) {
            const double* row = p.w_out.data() + e * d;
            double z = p.b_out[e];
            for (std::size_t j = 0; j < d; ++j) z += row[j] * hidden[j];
            const bool liked = like_pos < likes.size() && likes[like_pos] == e;
            if (liked) ++like_pos;
            loss += logit_cross_entropy(z, liked ? 1.0 : 0.0);
        }
        total += loss;
    }
    return total / static_cast<double>(users.size());
}

namespace {

void accumulate_user_gradient(const Params& p, const LikeCorpus& corpus, std::uint32_t u,
                              double scale, Params& grad, std::vector<double>& hidden,
                              std::vector<double>& delta_hidden) {
    const std::size_t d = p.hidden_dim;
    const std::size_t v = p.num_entities;
    auto likes = corpus.likes_of(u);
    hidden_activations(p, likes, hidden);
    std::fill(delta_hidden.begin(), delta_hidden.end(), 0.0);

    std::size_t like_pos = 0;
    for (std::size_t e = 0; e < v; ++e) {
        const double* row = p.w_out.data() + e * d;
        double z = p.b_out[e];
        for (std::size_t j = 0; j < d; ++j) z += row[j] * hidden[j];
        const bool liked = like_pos < likes.size() && likes[like_pos] == e;
        if (liked) ++like_pos;
        const double delta_out = (sigmoid(z) - (liked ? 1.0 : 0.0)) * scale;
        grad.b_out[e] += delta_out;
        double* grow = grad.w_out.data() + e * d;
        for (std::size_t j = 0; j < d; ++j) {
            grow[j] += delta_out * hidden[j];
            delta_hidden[j] += delta_out * row[j];
        }
    }
    for (std::size_t j = 0; j < d; ++j) delta_hidden[j] *= hidden[j] * (1.0 - hidden[j]);
    for (std::uint32_t e : likes) {
        double* grow = grad.w_in.data() + static_cast<std::size_t>(e) * d;
        for (std::size_t j = 0; j < d; ++j) grow[j] += delta_hidden[j];
    }
    for (std::size_t j = 0; j < d; ++j) grad.b_hidden[j] += delta_hidden[j];
}

void add_params(Params& into, const Params& from) {
    for (std::size_t i = 0; i < into.w_in.size(); ++i) into.w_in[i] += from.w_in[i];
    for (std::size_t i = 0; i < into.b_hidden.size(); ++i) into.b_hidden[i] += from.b_hidden[i];
    for (std::size_t i = 0; i < into.w_out.size(); ++i) into.w_out[i] += from.w_out[i];
    for (std::size_t i = 0; i < into.b_out.size(); ++i) into.b_out[i] += from.b_out[i];
}

}  // namespace

void accumulate_batch_gradient(const Params& p, const LikeCorpus& corpus,
                               std::span<const std::uint32_t> users, Params& grad, int threads) {
    const double scale = 1.0 / static_cast<double>(users.size());
    const int workers = std::max(1, threads);
    if (workers == 1 || users.size() < 8) {
        std::vector<double> hidden(p.hidden_dim), delta(p.hidden_dim);
        for (std::uint32_t u : users)
            accumulate_user_gradient(p, corpus, u, scale, grad, hidden, delta);
        return;
    }
    // Thread-local accumulators reduced in thread order: deterministic for a
    // fixed thread count.
    std::vector<Params> locals;
    locals.reserve(workers);
    for (int w = 0; w < workers; ++w) locals.push_back(Params::like(p));
    std::vector<std::thread> pool;
    const std::size_t chunk = (users.size() + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
        const std::size_t begin = std::min(users.size(), static_cast<std::size_t>(w) * chunk);
        const std::size_t end = std::min(users.size(), begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([&, w, begin, end] {
            std::vector<double> hidden(p.hidden_dim), delta(p.hidden_dim);
            for (std::size_t i = begin; i < end; ++i)
                accumulate_user_gradient(p, corpus, users[i], scale, locals[w], hidden, delta);
        });
    }
    for (auto& th : pool) th.join();
    for (const Params& local : locals) add_params(grad, local);
}

}  // namespace ule::ae

namespace ule::detail {

TrainedEmbedding train_autoencoder(const LikeCorpus& corpus, const EmbeddingConfig& config) {
    const std::size_t num_users = corpus.num_users();
    const std::size_t num_entities = corpus.num_entities();
    const std::size_t d = static_cast<std::size_t>(config.dim);
    const int epochs = config.resolved_epochs();
    const double lr = config.resolved_learning_rate();
    const std::size_t batch = static_cast<std::size_t>(config.batch_size);

    ae::Params params;
    params.num_entities = num_entities;
    params.hidden_dim = d;
    Rng rng(config.rng_seed);
    const double init_range = std::sqrt(6.0 / static_cast<double>(num_entities + d));
    params.w_in.resize(num_entities * d);
    params.w_out.resize(num_entities * d);
    for (double& w : params.w_in) w = rng.next_uniform(-init_range, init_range);
    for (double& w : params.w_out) w = rng.next_uniform(-init_range, init_range);
    params.b_hidden.assign(d, 0.0);
    params.b_out.assign(num_entities, 0.0);

    std::vector<std::uint32_t> eval_users;
    for (std::size_t u = 0; u < std::min<std::size_t>(num_users, 256); ++u)
        eval_users.push_back(static_cast<std::uint32_t>(u));

    TrainStats stats;
    stats.objective_name = "batch cross-entropy";
    stats.initial_objective = ae::batch_loss(params, corpus, eval_users);
    stats.epochs_run = epochs;

    std::vector<std::uint32_t> order(num_users);
    for (std::size_t u = 0; u < num_users; ++u) order[u] = static_cast<std::uint32_t>(u);
    ae::Params grad = ae::Params::like(params);
    // Batch gradients reduce thread-locals in thread order, so a fixed thread
    // count is deterministic even in deterministic mode.
    const int threads = std::max(1, config.threads);
    for (int epoch = 0; epoch < epochs; ++epoch) {
        Rng shuffle_rng = rng.substream(0x0AE0ULL + static_cast<std::uint64_t>(epoch));
        shuffle_rng.shuffle(order);
        for (std::size_t start = 0; start < num_users; start += batch) {
            const std::size_t end = std::min(num_users, start + batch);
            grad.zero();
            ae::accumulate_batch_gradient(params, corpus,
                                          {order.data() + start, end - start}, grad, threads);
            for (std::size_t i = 0; i < params.w_in.size(); ++i)
                params.w_in[i] -= lr * grad.w_in[i];
            for (std::size_t i = 0; i < params.b_hidden.size(); ++i)
                params.b_hidden[i] -= lr * grad.b_hidden[i];
            for (std::size_t i = 0; i < params.w_out.size(); ++i)
                params.w_out[i] -= lr * grad.w_out[i];
            for (std::size_t i = 0; i < params.b_out.size(); ++i)
                params.b_out[i] -= lr * grad.b_out[i];
        }
        stats.per_epoch_objective.push_back(ae::batch_loss(params, corpus, eval_users));
        if (!std::isfinite(stats.per_epoch_objective.back()))
            throw DivergenceError("autoencoder loss diverged (learning rate " +
                                  std::to_string(lr) + ")");
    }
    stats.final_objective =
        stats.per_epoch_objective.empty() ? stats.initial_objective
                                          : stats.per_epoch_objective.back();

    TrainedEmbedding out;
    out.users.rows = num_users;
    out.users.dim = d;
    out.users.ids = corpus.user_ids;
    out.users.values.resize(num_users * d);
    for (std::size_t u = 0; u < num_users; ++u)
        ae::hidden_activations(params, corpus.likes_of(static_cast<std::uint32_t>(u)),
                               out.users.row(u));
    out.stats = std::move(stats);
    return out;
}

}  // namespace ule::detail
