#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>
#include <vector>

#include "embed_internal.hpp"
#include "ule/error.hpp"
#include "ule/ns_objective.hpp"
#include "ule/rng.hpp"

namespace ule::ns {

double event_loss(std::span<const double> input, std::span<const double> positive,
                  std::span<const std::span<const double>> negatives) {
    double dot = 0.0;
    for (std::size_t j = 0; j < input.size(); ++j) dot += input[j] * positive[j];
    double loss = -std::log(std::max(sigmoid(dot), 1e-300));
    for (const auto& neg : negatives) {
        double nd = 0.0;
        for (std::size_t j = 0; j < input.size(); ++j) nd += input[j] * neg[j];
        loss += -std::log(std::max(sigmoid(-nd), 1e-300));
    }
    return loss;
}

EventGradients event_gradients(std::span<const double> input, std::span<const double> positive,
                               std::span<const std::span<const double>> negatives) {
    const std::size_t d = input.size();
    EventGradients g;
    g.input.assign(d, 0.0);
    g.positive.assign(d, 0.0);
    g.negatives.resize(negatives.size());

    double dot = 0.0;
    for (std::size_t j = 0; j < d; ++j) dot += input[j] * positive[j];
    const double pos_err = sigmoid(dot) - 1.0;  // d(-log s(x))/dx
    for (std::size_t j = 0; j < d; ++j) {
        g.input[j] += pos_err * positive[j];
        g.positive[j] = pos_err * input[j];
    }
    for (std::size_t i = 0; i < negatives.size(); ++i) {
        const auto& neg = negatives[i];
        double nd = 0.0;
        for (std::size_t j = 0; j < d; ++j) nd += input[j] * neg[j];
        const double neg_err = sigmoid(nd);  // d(-log s(-x))/dx
        auto& gn = g.negatives[i];
        gn.assign(d, 0.0);
        for (std::size_t j = 0; j < d; ++j) {
            g.input[j] += neg_err * neg[j];
            gn[j] = neg_err * input[j];
        }
    }
    return g;
}

}  // namespace ule::ns

namespace ule::detail {

namespace {

// Alias table over entity counts^0.75, the standard negative-sampling draw.
class NegativeSampler {
  public:
    explicit NegativeSampler(const LikeCorpus& corpus) {
        const std::size_t n = corpus.num_entities();
        std::vector<double> weights(n);
        for (std::size_t e = 0; e < n; ++e)
            weights[e] = std::pow(static_cast<double>(corpus.entity_count[e]), 0.75);
        build(weights);
    }

    std::uint32_t sample(Rng& rng) const {
        const std::size_t i = static_cast<std::size_t>(rng.next_below(prob_.size()));
        return rng.next_double() < prob_[i] ? static_cast<std::uint32_t>(i) : alias_[i];
    }

  private:
    void build(const std::vector<double>& weights) {
        const std::size_t n = weights.size();
        prob_.resize(n);
        alias_.resize(n);
        double total = 0.0;
        for (double w : weights) total += w;
        std::vector<double> scaled(n);
        std::vector<std::uint32_t> small, large;
        for (std::size_t i = 0; i < n; ++i) {
            scaled[i] = weights[i] * static_cast<double>(n) / total;
            (scaled[i] < 1.0 ? small : large).push_back(static_cast<std::uint32_t>(i));
        }
        while (!small.empty() && !large.empty()) {
            const std::uint32_t s = small.back();
            small.pop_back();
            const std::uint32_t l = large.back();
            large.pop_back();
            prob_[s] = scaled[s];
            alias_[s] = l;
            scaled[l] = (scaled[l] + scaled[s]) - 1.0;
            (scaled[l] < 1.0 ? small : large).push_back(l);
        }
        for (std::uint32_t i : large) prob_[i] = 1.0;
        for (std::uint32_t i : small) prob_[i] = 1.0;
    }

    std::vector<double> prob_;
    std::vector<std::uint32_t> alias_;
};

struct EvalEvent {
    std::uint32_t user;
    std::uint32_t target;
    std::vector<std::uint32_t> context;  // window neighbours in canonical order
    std::vector<std::uint32_t> negatives;
};

// Fused negative-sampling update on raw parameter arrays. Applies exactly
// -lr * ns::event_gradients (the unit tests pin the equivalence); grad_input
// collects the input-side gradient for the caller to distribute.
inline void ns_update(std::span<double> input_read, double* grad_input,
                      double* output_table, std::uint32_t target,
                      std::span<const std::uint32_t> negatives, std::size_t d, double lr) {
    double* pos = output_table + static_cast<std::size_t>(target) * d;
    double dot = 0.0;
    for (std::size_t j = 0; j < d; ++j) dot += input_read[j] * pos[j];
    const double pos_g = (1.0 - ns::sigmoid(dot)) * lr;
    for (std::size_t j = 0; j < d; ++j) {
        grad_input[j] += pos_g * pos[j];
        pos[j] += pos_g * input_read[j];
    }
    for (std::uint32_t n : negatives) {
        double* neg = output_table + static_cast<std::size_t>(n) * d;
        double nd = 0.0;
        for (std::size_t j = 0; j < d; ++j) nd += input_read[j] * neg[j];
        const double neg_g = -ns::sigmoid(nd) * lr;
        for (std::size_t j = 0; j < d; ++j) {
            grad_input[j] += neg_g * neg[j];
            neg[j] += neg_g * input_read[j];
        }
    }
}

class Word2VecTrainer {
  public:
    Word2VecTrainer(const LikeCorpus& corpus, const EmbeddingConfig& config)
        : corpus_(corpus),
          config_(config),
          dim_(static_cast<std::size_t>(config.dim)),
          sampler_(corpus),
          root_(config.rng_seed) {
        const std::size_t v = corpus.num_entities();
        const std::size_t u = corpus.num_users();
        const bool needs_entity_inputs = config.method != Method::PDbow;
        const bool needs_user_vectors =
            config.method == Method::PDm || config.method == Method::PDbow;

        Rng init = root_.substream(0x1717ULL);
        if (needs_entity_inputs) {
            syn0_.resize(v * dim_);
            for (double& w : syn0_) w = (init.next_double() - 0.5) / static_cast<double>(dim_);
        }
        syn1_.assign(v * dim_, 0.0);
        if (needs_user_vectors) {
            user_vec_.resize(u * dim_);
            for (double& w : user_vec_) w = (init.next_double() - 0.5) / static_cast<double>(dim_);
        }
        total_tokens_ = corpus.num_pairs();
        build_eval_events();
    }

    TrainedEmbedding run() {
        const int epochs = config_.resolved_epochs();
        const double lr0 = config_.resolved_learning_rate();
        TrainStats stats;
        stats.objective_name = "negative-sampling loss (fixed events)";
        stats.initial_objective = eval_objective();
        stats.epochs_run = epochs;

        const std::uint64_t schedule_total =
            std::max<std::uint64_t>(1, static_cast<std::uint64_t>(epochs) * total_tokens_);
        processed_ = 0;

        const int workers = config_.deterministic ? 1 : std::max(1, config_.threads);
        for (int epoch = 0; epoch < epochs; ++epoch) {
            if (workers == 1) {
                train_users(0, corpus_.num_users(), epoch, lr0, schedule_total);
            } else {
                // Fast mode: lock-free updates over disjoint user shards.
                // Doubles are word-sized and aligned, so reads never tear;
                // results vary run to run.
                std::vector<std::thread> pool;
                const std::size_t n = corpus_.num_users();
                const std::size_t chunk = (n + workers - 1) / workers;
                for (int w = 0; w < workers; ++w) {
                    const std::size_t begin = std::min(n, static_cast<std::size_t>(w) * chunk);
                    const std::size_t end = std::min(n, begin + chunk);
                    if (begin < end)
                        pool.emplace_back([this, begin, end, epoch, lr0, schedule_total] {
                            train_users(begin, end, epoch, lr0, schedule_total);
                        });
                }
                for (auto& th : pool) th.join();
            }
            stats.per_epoch_objective.push_back(eval_objective());
            if (!std::isfinite(stats.per_epoch_objective.back()))
                throw DivergenceError("negative-sampling loss diverged (learning rate " +
                                      std::to_string(lr0) + ")");
        }
        stats.final_objective = stats.per_epoch_objective.empty() ? stats.initial_objective
                                                                  : stats.per_epoch_objective.back();

        TrainedEmbedding out;
        if (config_.method == Method::PDm || config_.method == Method::PDbow) {
            out.users.rows = corpus_.num_users();
            out.users.dim = dim_;
            out.users.ids = corpus_.user_ids;
            out.users.values = user_vec_;
        } else {
            EmbeddingMatrix entity;
            entity.rows = corpus_.num_entities();
            entity.dim = dim_;
            entity.ids = corpus_.entity_ids;
            entity.values = syn0_;
            out.users = aggregate_average(entity, corpus_);
        }
        if (method_has_entity_vectors(config_.method)) {
            EmbeddingMatrix entity;
            entity.rows = corpus_.num_entities();
            entity.dim = dim_;
            entity.ids = corpus_.entity_ids;
            entity.values = syn0_;
            out.entities = std::move(entity);
        }
        out.stats = std::move(stats);
        return out;
    }

  private:
    void train_users(std::size_t begin, std::size_t end, int epoch, double lr0,
                     std::uint64_t schedule_total) {
        std::vector<std::uint32_t> sequence;
        std::vector<double> context_avg(dim_);
        std::vector<double> grad_input(dim_);
        std::vector<std::uint32_t> negatives;
        const int window = config_.window;
        const int ns = config_.negative_samples;

        for (std::size_t u = begin; u < end; ++u) {
            auto likes = corpus_.likes_of(static_cast<std::uint32_t>(u));
            if (likes.empty()) continue;
            sequence.assign(likes.begin(), likes.end());
            // Likes carry no order; one seeded permutation per (user, epoch)
            // is the canonical sequence.
            Rng seq_rng = root_.substream((static_cast<std::uint64_t>(epoch) + 1) *
                                              corpus_.num_users() +
                                          u);
            seq_rng.shuffle(sequence);

            const std::uint64_t done =
                processed_.fetch_add(sequence.size(), std::memory_order_relaxed);
            const double progress =
                static_cast<double>(done) / static_cast<double>(schedule_total);
            const double lr = std::max(lr0 * (1.0 - progress), lr0 * 1e-4);

            const int len = static_cast<int>(sequence.size());
            for (int t = 0; t < len; ++t) {
                const std::uint32_t target = sequence[t];
                negatives.clear();
                for (int k = 0; k < ns; ++k) {
                    const std::uint32_t neg = sampler_.sample(seq_rng);
                    if (neg != target) negatives.push_back(neg);
                }
                switch (config_.method) {
                    case Method::UCbow: {
                        const int lo = std::max(0, t - window);
                        const int hi = std::min(len - 1, t + window);
                        const int cw = hi - lo;  // excludes the target itself
                        if (cw <= 0) break;
                        std::fill(context_avg.begin(), context_avg.end(), 0.0);
                        for (int c = lo; c <= hi; ++c) {
                            if (c == t) continue;
                            const double* v = syn0_.data() + sequence[c] * dim_;
                            for (std::size_t j = 0; j < dim_; ++j) context_avg[j] += v[j];
                        }
                        const double inv = 1.0 / static_cast<double>(cw);
                        for (std::size_t j = 0; j < dim_; ++j) context_avg[j] *= inv;
                        std::fill(grad_input.begin(), grad_input.end(), 0.0);
                        ns_update(context_avg, grad_input.data(), syn1_.data(), target, negatives,
                                  dim_, lr);
                        // Input was an average: each context word takes 1/cw
                        // of the input-side step.
                        for (std::size_t j = 0; j < dim_; ++j) grad_input[j] *= inv;
                        for (int c = lo; c <= hi; ++c) {
                            if (c == t) continue;
                            double* v = syn0_.data() + sequence[c] * dim_;
                            for (std::size_t j = 0; j < dim_; ++j) v[j] += grad_input[j];
                        }
                        break;
                    }
                    case Method::USg: {
                        const int lo = std::max(0, t - window);
                        const int hi = std::min(len - 1, t + window);
                        for (int c = lo; c <= hi; ++c) {
                            if (c == t) continue;
                            double* input = syn0_.data() + sequence[c] * dim_;
                            std::fill(grad_input.begin(), grad_input.end(), 0.0);
                            ns_update({input, dim_}, grad_input.data(), syn1_.data(), target,
                                      negatives, dim_, lr);
                            for (std::size_t j = 0; j < dim_; ++j) input[j] += grad_input[j];
                        }
                        break;
                    }
                    case Method::PDm: {
                        const int lo = std::max(0, t - window);
                        const int hi = std::min(len - 1, t + window);
                        const int cw = hi - lo;  // context words, user vector joins them
                        std::fill(context_avg.begin(), context_avg.end(), 0.0);
                        for (int c = lo; c <= hi; ++c) {
                            if (c == t) continue;
                            const double* v = syn0_.data() + sequence[c] * dim_;
                            for (std::size_t j = 0; j < dim_; ++j) context_avg[j] += v[j];
                        }
                        double* uvec = user_vec_.data() + u * dim_;
                        for (std::size_t j = 0; j < dim_; ++j) context_avg[j] += uvec[j];
                        const double inv = 1.0 / static_cast<double>(cw + 1);
                        for (std::size_t j = 0; j < dim_; ++j) context_avg[j] *= inv;
                        std::fill(grad_input.begin(), grad_input.end(), 0.0);
                        ns_update(context_avg, grad_input.data(), syn1_.data(), target, negatives,
                                  dim_, lr);
                        for (std::size_t j = 0; j < dim_; ++j) grad_input[j] *= inv;
                        for (int c = lo; c <= hi; ++c) {
                            if (c == t) continue;
                            double* v = syn0_.data() + sequence[c] * dim_;
                            for (std::size_t j = 0; j < dim_; ++j) v[j] += grad_input[j];
                        }
                        for (std::size_t j = 0; j < dim_; ++j) uvec[j] += grad_input[j];
                        break;
                    }
                    case Method::PDbow: {
                        double* uvec = user_vec_.data() + u * dim_;
                        std::fill(grad_input.begin(), grad_input.end(), 0.0);
                        ns_update({uvec, dim_}, grad_input.data(), syn1_.data(), target, negatives,
                                  dim_, lr);
                        for (std::size_t j = 0; j < dim_; ++j) uvec[j] += grad_input[j];
                        break;
                    }
                    default: throw ConfigError("not a negative-sampling method");
                }
            }
        }
    }

    void build_eval_events() {
        Rng rng = root_.substream(0xE7A1ULL);
        const std::size_t want = std::min<std::size_t>(1000, corpus_.num_users());
        eval_events_.reserve(want);
        for (std::size_t i = 0; i < want; ++i) {
            const std::uint32_t u =
                static_cast<std::uint32_t>(rng.next_below(corpus_.num_users()));
            auto likes = corpus_.likes_of(u);
            if (likes.empty()) continue;
            EvalEvent ev;
            ev.user = u;
            const std::size_t pos = static_cast<std::size_t>(rng.next_below(likes.size()));
            ev.target = likes[pos];
            const int window = config_.window;
            const int lo = std::max(0, static_cast<int>(pos) - window);
            const int hi = std::min(static_cast<int>(likes.size()) - 1,
                                    static_cast<int>(pos) + window);
            for (int c = lo; c <= hi; ++c)
                if (c != static_cast<int>(pos)) ev.context.push_back(likes[c]);
            for (int k = 0; k < config_.negative_samples; ++k) {
                const std::uint32_t neg = sampler_.sample(rng);
                if (neg != ev.target) ev.negatives.push_back(neg);
            }
            eval_events_.push_back(std::move(ev));
        }
    }

    double eval_objective() const {
        std::vector<double> input(dim_);
        double total = 0.0;
        std::size_t counted = 0;
        for (const EvalEvent& ev : eval_events_) {
            switch (config_.method) {
                case Method::UCbow: {
                    if (ev.context.empty()) continue;
                    std::fill(input.begin(), input.end(), 0.0);
                    for (std::uint32_t c : ev.context) {
                        const double* v = syn0_.data() + static_cast<std::size_t>(c) * dim_;
                        for (std::size_t j = 0; j < dim_; ++j) input[j] += v[j];
                    }
                    const double inv = 1.0 / static_cast<double>(ev.context.size());
                    for (std::size_t j = 0; j < dim_; ++j) input[j] *= inv;
                    break;
                }
                case Method::USg: {
                    if (ev.context.empty()) continue;
                    const double* v =
                        syn0_.data() + static_cast<std::size_t>(ev.context.front()) * dim_;
                    std::copy(v, v + dim_, input.begin());
                    break;
                }
                case Method::PDm: {
                    std::fill(input.begin(), input.end(), 0.0);
                    for (std::uint32_t c : ev.context) {
                        const double* v = syn0_.data() + static_cast<std::size_t>(c) * dim_;
                        for (std::size_t j = 0; j < dim_; ++j) input[j] += v[j];
                    }
                    const double* uvec = user_vec_.data() + static_cast<std::size_t>(ev.user) * dim_;
                    for (std::size_t j = 0; j < dim_; ++j) input[j] += uvec[j];
                    const double inv = 1.0 / static_cast<double>(ev.context.size() + 1);
                    for (std::size_t j = 0; j < dim_; ++j) input[j] *= inv;
                    break;
                }
                case Method::PDbow: {
                    const double* uvec = user_vec_.data() + static_cast<std::size_t>(ev.user) * dim_;
                    std::copy(uvec, uvec + dim_, input.begin());
                    break;
                }
                default: return 0.0;
            }
            std::vector<std::span<const double>> negs;
            negs.reserve(ev.negatives.size());
            for (std::uint32_t n : ev.negatives)
                negs.emplace_back(syn1_.data() + static_cast<std::size_t>(n) * dim_, dim_);
            total += ns::event_loss(input, {syn1_.data() + static_cast<std::size_t>(ev.target) * dim_, dim_},
                                    negs);
            ++counted;
        }
        return counted > 0 ? total / static_cast<double>(counted) : 0.0;
    }

    const LikeCorpus& corpus_;
    EmbeddingConfig config_;
    std::size_t dim_;
    NegativeSampler sampler_;
    Rng root_;
    std::vector<double> syn0_;      // entity input vectors
    std::vector<double> syn1_;      // entity output vectors
    std::vector<double> user_vec_;  // paragraph vectors (P-DM, P-DBOW)
    std::uint64_t total_tokens_ = 0;
    std::atomic<std::uint64_t> processed_{0};
    std::vector<EvalEvent> eval_events_;
};

}  // namespace

TrainedEmbedding train_word2vec(const LikeCorpus& corpus, const EmbeddingConfig& config) {
    Word2VecTrainer trainer(corpus, config);
    return trainer.run();
}

}  // namespace ule::detail
