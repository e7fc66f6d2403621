#include <cmath>
#include <vector>

#include "embed_internal.hpp"
#include "ule/error.hpp"
#include "ule/rng.hpp"

namespace ule {

namespace {

// Sanity check on the Gibbs count tables: nonnegative everywhere and summing
// to the token total. Cheap next to a sweep, so it runs after every one.
void check_gibbs_state(const std::vector<std::int32_t>& doc_topic,
                       const std::vector<std::int32_t>& topic_entity,
                       const std::vector<std::int64_t>& topic_total, std::uint64_t tokens) {
    std::int64_t sum_dt = 0, sum_te = 0, sum_t = 0;
    for (std::int32_t v : doc_topic) {
        if (v < 0) throw DivergenceError("lda: negative doc-topic count");
        sum_dt += v;
    }
    for (std::int32_t v : topic_entity) {
        if (v < 0) throw DivergenceError("lda: negative topic-entity count");
        sum_te += v;
    }
    for (std::int64_t v : topic_total) {
        if (v < 0) throw DivergenceError("lda: negative topic total");
        sum_t += v;
    }
    if (sum_dt != static_cast<std::int64_t>(tokens) || sum_te != sum_dt || sum_t != sum_dt)
        throw DivergenceError("lda: count tables out of sync with token total");
}

}  // namespace

LdaModel train_lda(const LikeCorpus& corpus, const EmbeddingConfig& config) {
    config.validate(corpus);
    const std::size_t num_users = corpus.num_users();
    const std::size_t num_entities = corpus.num_entities();
    const int k = config.dim;
    const double alpha = config.resolved_lda_alpha();
    const double beta = config.resolved_lda_beta();
    const int sweeps = config.resolved_epochs();
    const std::uint64_t tokens = corpus.num_pairs();

    // Every like is one token; a user's likes form the document.
    std::vector<std::int32_t> assignment(tokens);
    std::vector<std::int32_t> doc_topic(num_users * k, 0);
    std::vector<std::int32_t> topic_entity(static_cast<std::size_t>(k) * num_entities, 0);
    std::vector<std::int64_t> topic_total(k, 0);

    Rng rng(config.rng_seed);
    for (std::uint64_t i = 0; i < tokens; ++i)
        assignment[i] = static_cast<std::int32_t>(rng.next_below(static_cast<std::uint64_t>(k)));
    for (std::size_t u = 0; u < num_users; ++u) {
        for (std::uint64_t i = corpus.row_ptr[u]; i < corpus.row_ptr[u + 1]; ++i) {
            const std::int32_t t = assignment[i];
            ++doc_topic[u * k + t];
            ++topic_entity[static_cast<std::size_t>(t) * num_entities + corpus.col_idx[i]];
            ++topic_total[t];
        }
    }

    // Held-out style objective: negative mean log predictive probability of a
    // fixed token sample under the current point estimates.
    std::vector<std::uint64_t> eval_tokens;
    {
        const std::uint64_t step = std::max<std::uint64_t>(1, tokens / 2000);
        for (std::uint64_t i = 0; i < tokens; i += step) eval_tokens.push_back(i);
    }
    std::vector<std::uint32_t> token_user(tokens);
    for (std::size_t u = 0; u < num_users; ++u)
        for (std::uint64_t i = corpus.row_ptr[u]; i < corpus.row_ptr[u + 1]; ++i)
            token_user[i] = static_cast<std::uint32_t>(u);
    const double v_beta = static_cast<double>(num_entities) * beta;
    auto eval_objective = [&]() {
        double total = 0.0;
        for (std::uint64_t i : eval_tokens) {
            const std::uint32_t u = token_user[i];
            const std::uint32_t e = corpus.col_idx[i];
            const double len = static_cast<double>(corpus.user_degree(u));
            double p = 0.0;
            for (int t = 0; t < k; ++t) {
                const double theta = (doc_topic[u * k + t] + alpha) / (len + k * alpha);
                const double phi =
                    (topic_entity[static_cast<std::size_t>(t) * num_entities + e] + beta) /
                    (static_cast<double>(topic_total[t]) + v_beta);
                p += theta * phi;
            }
            total += -std::log(std::max(p, 1e-300));
        }
        return total / static_cast<double>(eval_tokens.size());
    };

    TrainStats stats;
    stats.objective_name = "token negative log predictive";
    stats.initial_objective = eval_objective();
    stats.epochs_run = sweeps;

    std::vector<double> weight(k);
    for (int sweep = 0; sweep < sweeps; ++sweep) {
        for (std::size_t u = 0; u < num_users; ++u) {
            std::int32_t* dt = doc_topic.data() + u * k;
            for (std::uint64_t i = corpus.row_ptr[u]; i < corpus.row_ptr[u + 1]; ++i) {
                const std::uint32_t e = corpus.col_idx[i];
                const std::int32_t old_t = assignment[i];
                --dt[old_t];
                --topic_entity[static_cast<std::size_t>(old_t) * num_entities + e];
                --topic_total[old_t];

                double total = 0.0;
                for (int t = 0; t < k; ++t) {
                    const double w =
                        (dt[t] + alpha) *
                        (topic_entity[static_cast<std::size_t>(t) * num_entities + e] + beta) /
                        (static_cast<double>(topic_total[t]) + v_beta);
                    total += w;
                    weight[t] = total;
                }
                const double pick = rng.next_double() * total;
                int new_t = 0;
                while (new_t + 1 < k && weight[new_t] <= pick) ++new_t;

                assignment[i] = new_t;
                ++dt[new_t];
                ++topic_entity[static_cast<std::size_t>(new_t) * num_entities + e];
                ++topic_total[new_t];
            }
        }
        check_gibbs_state(doc_topic, topic_entity, topic_total, tokens);
        stats.per_epoch_objective.push_back(eval_objective());
    }
    stats.final_objective = stats.per_epoch_objective.empty()
                                ? stats.initial_objective
                                : stats.per_epoch_objective.back();

    LdaModel model;
    model.num_topics = k;
    model.alpha = alpha;
    model.beta = beta;
    model.num_entities = num_entities;
    model.topic_entity.resize(static_cast<std::size_t>(k) * num_entities);
    for (int t = 0; t < k; ++t) {
        const double denom = static_cast<double>(topic_total[t]) + v_beta;
        for (std::size_t e = 0; e < num_entities; ++e)
            model.topic_entity[static_cast<std::size_t>(t) * num_entities + e] =
                (topic_entity[static_cast<std::size_t>(t) * num_entities + e] + beta) / denom;
    }
    model.user_topics.rows = num_users;
    model.user_topics.dim = static_cast<std::size_t>(k);
    model.user_topics.ids = corpus.user_ids;
    model.user_topics.values.resize(num_users * k);
    for (std::size_t u = 0; u < num_users; ++u) {
        const double len = static_cast<double>(corpus.user_degree(static_cast<std::uint32_t>(u)));
        for (int t = 0; t < k; ++t)
            model.user_topics.values[u * k + t] = (doc_topic[u * k + t] + alpha) / (len + k * alpha);
    }
    model.stats = std::move(stats);
    return model;
}

namespace detail {

TrainedEmbedding train_lda_embedding(const LikeCorpus& corpus, const EmbeddingConfig& config) {
    LdaModel model = train_lda(corpus, config);
    TrainedEmbedding out;
    out.users = std::move(model.user_topics);
    out.stats = std::move(model.stats);
    return out;
}

}  // namespace detail

}  // namespace ule
