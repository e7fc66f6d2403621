#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "ule/corpus.hpp"

namespace ule {

struct SynthConfig {
    std::uint32_t num_users = 10000;
    std::uint32_t num_entities = 2000;
    int num_topics = 10;
    int num_signal_topics = 2;  // ddr-correlated topics, alternating sign
    // Likes per user: round(exp(Normal(likes_mu, likes_sigma))) clamped to
    // [min_likes, num_entities].
    double likes_mu = 3.0;
    double likes_sigma = 0.7;
    std::uint32_t min_likes = 1;
    double popularity_exponent = 1.0;  // Zipf exponent of entity base popularity
    double signal_strength = 1.0;
    double labeled_fraction = 0.1;
    double ddr_mean = -2.0;  // log10 k scale
    double ddr_stddev = 0.7;
    std::uint64_t rng_seed = 1;
    int threads = 1;

    void validate() const;
};

struct SynthTruth {
    std::vector<double> ddr;                         // per user, generation order
    std::vector<std::vector<double>> topic_entity;   // T x V probability rows
    std::vector<std::vector<double>> user_mixture;   // U x T probability rows
    std::vector<int> signal_topics;
    std::vector<int> signal_signs;                   // +1 / -1, aligned with signal_topics
    std::vector<std::uint32_t> likes_per_user;       // drawn degree per user
};

struct SynthResult {
    LikeCorpus corpus;
    std::vector<std::pair<std::string, double>> labels;  // labeled subset only
    SynthTruth truth;
};

// Draws ddr ~ Normal(ddr_mean, ddr_stddev), plants signal topics whose mixture
// weight moves with ddr, and samples each user's distinct likes from the
// topic-mixture-weighted entity distribution. Deterministic per seed; per-user
// substreams make a parallel run identical to a sequential one.
SynthResult generate(const SynthConfig& config);

void write_truth_json(const std::filesystem::path& path, const SynthTruth& truth);
SynthTruth read_truth_json(const std::filesystem::path& path);

// Generation index encoded in an id such as "e000123".
std::uint32_t parse_generated_index(const std::string& id);

}  // namespace ule
