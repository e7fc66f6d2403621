#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include <doctest.h>

#include "ule/analysis.hpp"
#include "ule/error.hpp"
#include "ule/synthgen.hpp"

using namespace ule;

namespace {

std::vector<LabeledUser> aligned(const SynthResult& synth) {
    std::unordered_map<std::string, double> table;
    for (const auto& [id, ddr] : synth.labels) table[id] = ddr;
    return align_labels(synth.corpus, table);
}

}  // namespace

TEST_CASE("generation is deterministic and parallel-invariant") {
    SynthConfig cfg;
    cfg.num_users = 800;
    cfg.num_entities = 300;
    cfg.num_topics = 6;
    cfg.num_signal_topics = 2;
    cfg.signal_strength = 1.0;
    cfg.labeled_fraction = 0.5;
    cfg.likes_mu = 2.5;
    cfg.likes_sigma = 0.6;
    cfg.min_likes = 2;
    cfg.rng_seed = 123;

    const SynthResult a = generate(cfg);
    const SynthResult b = generate(cfg);
    CHECK(a.corpus.col_idx == b.corpus.col_idx);
    CHECK(a.corpus.row_ptr == b.corpus.row_ptr);
    CHECK(a.labels == b.labels);
    CHECK(a.truth.ddr == b.truth.ddr);

    SynthConfig parallel = cfg;
    parallel.threads = 4;
    const SynthResult c = generate(parallel);
    CHECK(a.corpus.col_idx == c.corpus.col_idx);
    CHECK(a.truth.user_mixture == c.truth.user_mixture);

    SynthConfig other_seed = cfg;
    other_seed.rng_seed = 124;
    const SynthResult d = generate(other_seed);
    CHECK(a.corpus.col_idx != d.corpus.col_idx);
}

TEST_CASE("corpus structure matches the planted truth") {
    SynthConfig cfg;
    cfg.num_users = 1200;
    cfg.num_entities = 400;
    cfg.num_topics = 8;
    cfg.num_signal_topics = 2;
    cfg.signal_strength = 1.5;
    cfg.labeled_fraction = 0.3;
    cfg.likes_mu = 2.8;
    cfg.likes_sigma = 0.5;
    cfg.min_likes = 3;
    cfg.rng_seed = 9;
    const SynthResult synth = generate(cfg);
    synth.corpus.check_consistent();

    // Pair count equals the sum of per-user draws (likes are distinct).
    const std::uint64_t drawn =
        std::accumulate(synth.truth.likes_per_user.begin(), synth.truth.likes_per_user.end(),
                        std::uint64_t{0});
    CHECK(synth.corpus.num_pairs() == drawn);

    // Labeled ids exist in the corpus and carry the truth ddr.
    for (const auto& [id, ddr] : synth.labels) {
        const std::uint32_t u = synth.corpus.user_index.at(id);
        CHECK(synth.truth.ddr[u] == ddr);
    }
    CHECK(synth.labels.size() ==
          static_cast<std::size_t>(std::llround(cfg.labeled_fraction * cfg.num_users)));

    // Mixtures and topic rows are probability vectors.
    for (const auto& row : synth.truth.topic_entity) {
        double sum = 0.0;
        for (double p : row) {
            CHECK(p >= 0.0);
            sum += p;
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
    }
    for (std::size_t u = 0; u < 50; ++u) {
        double sum = 0.0;
        for (double p : synth.truth.user_mixture[u]) sum += p;
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("planted monotonicity: heavy positive-topic users discount more") {
    SynthConfig cfg;
    cfg.num_users = 3000;
    cfg.num_entities = 500;
    cfg.num_topics = 10;
    cfg.num_signal_topics = 2;
    cfg.signal_strength = 1.0;
    cfg.labeled_fraction = 1.0;
    cfg.likes_mu = 2.8;
    cfg.likes_sigma = 0.5;
    cfg.min_likes = 3;
    cfg.rng_seed = 31;
    const SynthResult synth = generate(cfg);

    const int positive_topic = synth.truth.signal_topics[0];
    REQUIRE(synth.truth.signal_signs[0] == 1);
    std::vector<double> weights(cfg.num_users);
    for (std::uint32_t u = 0; u < cfg.num_users; ++u)
        weights[u] = synth.truth.user_mixture[u][positive_topic];
    std::vector<double> sorted = weights;
    std::sort(sorted.begin(), sorted.end());
    const double median = sorted[sorted.size() / 2];

    double above = 0, below = 0;
    std::size_t na = 0, nb = 0;
    for (std::uint32_t u = 0; u < cfg.num_users; ++u) {
        if (weights[u] > median) {
            above += synth.truth.ddr[u];
            ++na;
        } else {
            below += synth.truth.ddr[u];
            ++nb;
        }
    }
    CHECK(above / na > below / nb);
}

TEST_CASE("zero signal makes the screen statistically null") {
    SynthConfig cfg;
    cfg.num_users = 2500;
    cfg.num_entities = 1500;
    cfg.num_topics = 6;
    cfg.num_signal_topics = 2;  // planted but with zero strength
    cfg.signal_strength = 0.0;
    cfg.labeled_fraction = 1.0;
    cfg.likes_mu = 2.9;
    cfg.likes_sigma = 0.5;
    cfg.min_likes = 3;
    cfg.rng_seed = 55;
    const SynthResult synth = generate(cfg);
    const CorrelationReport report = correlate_entities(synth.corpus, aligned(synth));
    const double fraction =
        double(report.significant_positive + report.significant_negative) /
        double(report.records.size());
    // |r| below the p<0.05 cutoff for at least 95% of entities.
    CHECK(fraction < 0.10);
}

TEST_CASE("degree distribution tracks the configured log-normal") {
    SynthConfig cfg;
    cfg.num_users = 50000;
    cfg.num_entities = 2000;
    cfg.num_topics = 10;
    cfg.num_signal_topics = 2;
    cfg.signal_strength = 1.0;
    cfg.labeled_fraction = 0.1;
    cfg.likes_mu = 3.0;
    cfg.likes_sigma = 0.6;
    cfg.min_likes = 1;
    cfg.rng_seed = 606;
    const SynthResult synth = generate(cfg);

    // KS distance between empirical degrees and the rounded log-normal
    // (continuity-corrected CDF).
    std::vector<double> degrees;
    for (std::size_t u = 0; u < synth.corpus.num_users(); ++u)
        degrees.push_back(double(synth.corpus.user_degree(std::uint32_t(u))));
    std::sort(degrees.begin(), degrees.end());
    auto lognormal_cdf = [&](double x) {
        if (x <= 0.0) return 0.0;
        const double z = (std::log(x) - cfg.likes_mu) / cfg.likes_sigma;
        return 0.5 * std::erfc(-z / std::sqrt(2.0));
    };
    double ks = 0.0;
    for (std::size_t i = 0; i < degrees.size();) {
        std::size_t j = i;
        while (j < degrees.size() && degrees[j] == degrees[i]) ++j;
        const double model = lognormal_cdf(degrees[i] + 0.5);
        const double empirical_hi = double(j) / double(degrees.size());
        const double empirical_lo = double(i) / double(degrees.size());
        ks = std::max(ks, std::fabs(model - empirical_hi));
        ks = std::max(ks, std::fabs(model - empirical_lo));
        i = j;
    }
    CHECK(ks <= 0.05);
}

TEST_CASE("truth json round trips") {
    SynthConfig cfg;
    cfg.num_users = 60;
    cfg.num_entities = 40;
    cfg.num_topics = 4;
    cfg.num_signal_topics = 2;
    cfg.likes_mu = 2.0;
    cfg.likes_sigma = 0.4;
    cfg.min_likes = 2;
    cfg.rng_seed = 8;
    const SynthResult synth = generate(cfg);

    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "ule_synth_test";
    fs::create_directories(dir);
    const fs::path file = dir / "truth.json";
    write_truth_json(file, synth.truth);
    const SynthTruth back = read_truth_json(file);
    CHECK(back.ddr == synth.truth.ddr);
    CHECK(back.topic_entity == synth.truth.topic_entity);
    CHECK(back.user_mixture == synth.truth.user_mixture);
    CHECK(back.signal_topics == synth.truth.signal_topics);
    CHECK(back.likes_per_user == synth.truth.likes_per_user);
    fs::remove_all(dir);

    CHECK(parse_generated_index("e000123") == 123);
    CHECK(parse_generated_index("u000001") == 1);
}

TEST_CASE("infeasible configurations are rejected") {
    SynthConfig cfg;
    cfg.num_users = 10;
    cfg.num_entities = 5;
    cfg.min_likes = 8;  // more than the vocabulary allows
    CHECK_THROWS_AS(generate(cfg), ConfigError);

    SynthConfig bad_fraction;
    bad_fraction.labeled_fraction = 0.0;
    CHECK_THROWS_AS(generate(bad_fraction), ConfigError);
}
