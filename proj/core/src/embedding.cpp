#include "ule/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "embed_internal.hpp"
#include "ule/error.hpp"

namespace ule {

std::string_view method_name(Method m) {
    switch (m) {
        case Method::Svd: return "svd";
        case Method::Lda: return "lda";
        case Method::Ae: return "ae";
        case Method::UCbow: return "u-cbow";
        case Method::USg: return "u-sg";
        case Method::UGlove: return "u-glove";
        case Method::PDm: return "p-dm";
        case Method::PDbow: return "p-dbow";
    }
    return "?";
}

Method method_from_string(std::string_view name) {
    std::string lower(name);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    std::replace(lower.begin(), lower.end(), '_', '-');
    for (Method m : ALL_METHODS)
        if (lower == method_name(m)) return m;
    std::string valid;
    for (Method m : ALL_METHODS) {
        if (!valid.empty()) valid += ", ";
        valid += method_name(m);
    }
    throw ConfigError("unknown method '" + std::string(name) + "'; valid methods: " + valid);
}

bool method_has_entity_vectors(Method m) {
    switch (m) {
        case Method::Svd:
        case Method::UCbow:
        case Method::USg:
        case Method::UGlove:
        case Method::PDm: return true;
        default: return false;
    }
}

int EmbeddingConfig::resolved_epochs() const {
    if (epochs > 0) return epochs;
    switch (method) {
        case Method::Ae: return 50;      // paper default
        case Method::Lda: return 200;    // Gibbs sweeps
        case Method::UGlove: return 50;  // full co-occurrence passes
        case Method::Svd: return 1;
        default: return 5;  // negative-sampling SGD methods
    }
}

double EmbeddingConfig::resolved_learning_rate() const {
    if (learning_rate > 0.0) return learning_rate;
    switch (method) {
        case Method::UGlove: return 0.05;
        case Method::Ae: return 0.1;
        default: return 0.025;
    }
}

void EmbeddingConfig::validate(const LikeCorpus& corpus) const {
    if (corpus.num_pairs() == 0) throw ConfigError("cannot train on an empty corpus");
    if (dim < 1) throw ConfigError("dim must be at least 1");
    if (method == Method::Svd &&
        static_cast<std::size_t>(dim) >= std::min(corpus.num_users(), corpus.num_entities()))
        throw ConfigError("svd dim must be below min(num_users, num_entities) = " +
                          std::to_string(std::min(corpus.num_users(), corpus.num_entities())));
    const bool windowed = method == Method::UCbow || method == Method::USg ||
                          method == Method::UGlove || method == Method::PDm;
    if (windowed && window < 1) throw ConfigError("window must be at least 1");
    const bool ns_based = method == Method::UCbow || method == Method::USg ||
                          method == Method::PDm || method == Method::PDbow;
    if (ns_based && negative_samples < 1)
        throw ConfigError("negative sampling rate must be at least 1");
    if (method == Method::Ae && batch_size < 1) throw ConfigError("batch size must be positive");
    if (epochs < 0) throw ConfigError("epochs must be nonnegative");
    if (learning_rate < 0.0) throw ConfigError("learning rate must be nonnegative");
    if (glove_xmax <= 0.0) throw ConfigError("glove xmax must be positive");
    if (threads < 0) throw ConfigError("threads must be nonnegative");
}

TrainedEmbedding train_embedding(const LikeCorpus& corpus, const EmbeddingConfig& config) {
    config.validate(corpus);
    TrainedEmbedding out;
    switch (config.method) {
        case Method::Svd: out = detail::train_svd(corpus, config); break;
        case Method::Lda: out = detail::train_lda_embedding(corpus, config); break;
        case Method::Ae: out = detail::train_autoencoder(corpus, config); break;
        case Method::UCbow:
        case Method::USg:
        case Method::PDm:
        case Method::PDbow: out = detail::train_word2vec(corpus, config); break;
        case Method::UGlove: out = detail::train_glove(corpus, config); break;
    }
    out.method = config.method;
    out.config = config;
    for (double v : out.users.values)
        if (!std::isfinite(v))
            throw DivergenceError(std::string(method_name(config.method)) +
                                  " produced a non-finite embedding (learning rate " +
                                  std::to_string(config.resolved_learning_rate()) + ")");
    return out;
}

EmbeddingMatrix aggregate_average(const EmbeddingMatrix& like_vectors, const LikeCorpus& corpus) {
    if (like_vectors.rows != corpus.num_entities())
        throw InputError("entity vector count does not match the corpus vocabulary");
    EmbeddingMatrix out;
    out.rows = corpus.num_users();
    out.dim = like_vectors.dim;
    out.ids = corpus.user_ids;
    out.values.assign(out.rows * out.dim, 0.0);
    for (std::size_t u = 0; u < out.rows; ++u) {
        auto likes = corpus.likes_of(static_cast<std::uint32_t>(u));
        if (likes.empty())
            throw InputError("user " + corpus.user_ids[u] + " has no likes to average");
        auto dst = out.row(u);
        for (std::uint32_t e : likes) {
            auto src = like_vectors.row(e);
            for (std::size_t j = 0; j < out.dim; ++j) dst[j] += src[j];
        }
        const double inv = 1.0 / static_cast<double>(likes.size());
        for (std::size_t j = 0; j < out.dim; ++j) dst[j] *= inv;
    }
    return out;
}

void write_embedding(const std::filesystem::path& path, const EmbeddingMatrix& m) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write embedding file: " + path.string());
    out << m.rows << ' ' << m.dim << '\n';
    char buf[64];
    for (std::size_t i = 0; i < m.rows; ++i) {
        out << m.ids[i];
        auto row = m.row(i);
        for (double v : row) {
            std::snprintf(buf, sizeof buf, "%.17g", v);
            out << ' ' << buf;
        }
        out << '\n';
    }
    if (!out) throw InputError("write failed: " + path.string());
}

EmbeddingMatrix read_embedding(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open embedding file: " + path.string());
    std::string header;
    if (!std::getline(in, header)) throw FormatError("empty embedding file: " + path.string());
    std::istringstream hs(header);
    EmbeddingMatrix m;
    if (!(hs >> m.rows >> m.dim)) throw FormatError("bad embedding header: " + path.string());
    m.ids.resize(m.rows);
    m.values.resize(m.rows * m.dim);
    std::string line;
    for (std::size_t i = 0; i < m.rows; ++i) {
        if (!std::getline(in, line))
            throw FormatError("embedding file truncated at row " + std::to_string(i) + ": " +
                              path.string());
        std::istringstream ss(line);
        if (!(ss >> m.ids[i])) throw FormatError("bad embedding row " + std::to_string(i));
        auto row = m.row(i);
        for (std::size_t j = 0; j < m.dim; ++j)
            if (!(ss >> row[j]))
                throw FormatError("embedding row " + std::to_string(i) + " has fewer than " +
                                  std::to_string(m.dim) + " values: " + path.string());
        double extra;
        if (ss >> extra)
            throw FormatError("embedding row " + std::to_string(i) + " has extra values");
    }
    std::string tail;
    while (std::getline(in, tail))
        if (!tail.empty())
            throw FormatError("embedding file has trailing rows beyond the declared " +
                              std::to_string(m.rows));
    return m;
}

std::vector<std::uint32_t> topic_top_entities(const LdaModel& model, int topic, std::size_t n) {
    if (topic < 0 || topic >= model.num_topics) throw LookupError("topic index out of range");
    std::vector<std::uint32_t> order(model.num_entities);
    for (std::size_t e = 0; e < model.num_entities; ++e) order[e] = static_cast<std::uint32_t>(e);
    const double* row = model.topic_entity.data() +
                        static_cast<std::size_t>(topic) * model.num_entities;
    const std::size_t k = std::min(n, model.num_entities);
    std::partial_sort(order.begin(), order.begin() + k, order.end(),
                      [row](std::uint32_t a, std::uint32_t b) {
                          if (row[a] != row[b]) return row[a] > row[b];
                          return a < b;
                      });
    order.resize(k);
    return order;
}

}  // namespace ule
