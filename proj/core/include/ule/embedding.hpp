#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ule/corpus.hpp"

namespace ule {

// The eight unsupervised feature learners behind one interface.
enum class Method { Svd, Lda, Ae, UCbow, USg, UGlove, PDm, PDbow };

constexpr std::array<Method, 8> ALL_METHODS = {Method::Svd,   Method::Lda,  Method::Ae,
                                               Method::UCbow, Method::USg,  Method::UGlove,
                                               Method::PDm,   Method::PDbow};

std::string_view method_name(Method m);
Method method_from_string(std::string_view name);  // throws ConfigError listing valid names
bool method_has_entity_vectors(Method m);          // 2-stage methods plus SVD basis and P-DM

struct EmbeddingConfig {
    Method method = Method::Svd;
    int dim = 100;
    int window = 20;
    int negative_samples = 10;
    int epochs = 0;           // 0 = per-method default; LDA reads this as Gibbs sweeps
    int batch_size = 50;      // autoencoder minibatch
    double learning_rate = 0.0;  // 0 = per-method default
    double lda_alpha = 0.0;      // 0 = 1/num_topics
    double lda_beta = 0.0;       // 0 = 1/num_topics
    double glove_xmax = 100.0;
    double glove_weight_alpha = 0.75;
    int svd_power_iterations = 3;
    int svd_oversample = 8;
    std::uint64_t rng_seed = 1;
    bool deterministic = true;  // serialized updates; false permits lock-free parallel SGD
    int threads = 1;

    int resolved_epochs() const;
    double resolved_learning_rate() const;
    double resolved_lda_alpha() const { return lda_alpha > 0.0 ? lda_alpha : 1.0 / dim; }
    double resolved_lda_beta() const { return lda_beta > 0.0 ? lda_beta : 1.0 / dim; }
    void validate(const LikeCorpus& corpus) const;  // throws ConfigError
};

// Dense row-major matrix with row ids; used for both user and entity vectors.
struct EmbeddingMatrix {
    std::size_t rows = 0;
    std::size_t dim = 0;
    std::vector<std::string> ids;  // size rows
    std::vector<double> values;    // rows * dim

    std::span<double> row(std::size_t i) { return {values.data() + i * dim, dim}; }
    std::span<const double> row(std::size_t i) const { return {values.data() + i * dim, dim}; }
};

struct TrainStats {
    std::string objective_name;
    double initial_objective = 0.0;  // fixed evaluation sample, before training
    double final_objective = 0.0;    // same sample, after the last epoch
    std::vector<double> per_epoch_objective;  // methods that track full passes
    int epochs_run = 0;
};

struct TrainedEmbedding {
    EmbeddingMatrix users;
    std::optional<EmbeddingMatrix> entities;  // per-entity vectors where the method has them
    Method method = Method::Svd;
    EmbeddingConfig config;
    TrainStats stats;
};

TrainedEmbedding train_embedding(const LikeCorpus& corpus, const EmbeddingConfig& config);

// Each user row becomes the arithmetic mean of the vectors of the entities the
// user likes (the 2-stage aggregation step).
EmbeddingMatrix aggregate_average(const EmbeddingMatrix& like_vectors, const LikeCorpus& corpus);

// Text format: "<rows> <dim>" then one "<id> <v1> ... <vdim>" line per row,
// full round-trip precision.
void write_embedding(const std::filesystem::path& path, const EmbeddingMatrix& m);
EmbeddingMatrix read_embedding(const std::filesystem::path& path);

// Collapsed-Gibbs LDA with the full topic-entity table kept for inspection.
struct LdaModel {
    int num_topics = 0;
    double alpha = 0.0;
    double beta = 0.0;
    std::size_t num_entities = 0;
    std::vector<double> topic_entity;  // num_topics * num_entities, rows sum to 1
    EmbeddingMatrix user_topics;       // smoothed per-user proportions, rows sum to 1
    TrainStats stats;
};

LdaModel train_lda(const LikeCorpus& corpus, const EmbeddingConfig& config);

// Entities ranked by per-topic probability, ties broken by entity index.
std::vector<std::uint32_t> topic_top_entities(const LdaModel& model, int topic, std::size_t n);

}  // namespace ule
