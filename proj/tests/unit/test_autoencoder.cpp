#include <cmath>

#include <doctest.h>

#include "ule/ae_objective.hpp"
#include "ule/embedding.hpp"
#include "ule/rng.hpp"
#include "ule/synthgen.hpp"

using namespace ule;

namespace {

ae::Params random_params(std::size_t entities, std::size_t hidden, Rng& rng) {
    ae::Params p;
    p.num_entities = entities;
    p.hidden_dim = hidden;
    p.w_in.resize(entities * hidden);
    p.w_out.resize(entities * hidden);
    p.b_hidden.resize(hidden);
    p.b_out.resize(entities);
    for (double& v : p.w_in) v = rng.next_normal(0, 0.4);
    for (double& v : p.w_out) v = rng.next_normal(0, 0.4);
    for (double& v : p.b_hidden) v = rng.next_normal(0, 0.2);
    for (double& v : p.b_out) v = rng.next_normal(0, 0.2);
    return p;
}

}  // namespace

TEST_CASE("reconstruction gradient matches finite differences on a 10x20 corpus") {
    Rng rng(2718);
    std::vector<std::pair<std::string, std::string>> pairs;
    for (int u = 0; u < 10; ++u) {
        int ones = 0;
        for (int e = 0; e < 20; ++e)
            if (rng.next_double() < 0.35) {
                pairs.emplace_back("u" + std::to_string(u), "e" + std::to_string(e));
                ++ones;
            }
        if (ones == 0) pairs.emplace_back("u" + std::to_string(u), "e0");
    }
    for (int e = 0; e < 20; ++e) pairs.emplace_back("u0", "e" + std::to_string(e));
    const LikeCorpus corpus = ingest_pairs(pairs);
    REQUIRE(corpus.num_entities() == 20);

    std::vector<std::uint32_t> batch;
    for (std::uint32_t u = 0; u < corpus.num_users(); ++u) batch.push_back(u);

    const double h = 1e-6;
    for (int trial = 0; trial < 20; ++trial) {
        ae::Params p = random_params(20, 4, rng);
        ae::Params grad = ae::Params::like(p);
        ae::accumulate_batch_gradient(p, corpus, batch, grad);

        // Spot-check a handful of coordinates in every parameter block.
        auto check_block = [&](std::vector<double>& theta, const std::vector<double>& g) {
            for (int probe = 0; probe < 5; ++probe) {
                const std::size_t idx = rng.next_below(theta.size());
                const double keep = theta[idx];
                theta[idx] = keep + h;
                const double up = ae::batch_loss(p, corpus, batch);
                theta[idx] = keep - h;
                const double down = ae::batch_loss(p, corpus, batch);
                theta[idx] = keep;
                const double fd = (up - down) / (2 * h);
                const double rel =
                    std::fabs(g[idx] - fd) / std::max({std::fabs(g[idx]), std::fabs(fd), 1e-8});
                CHECK(rel <= 1e-4);
            }
        };
        check_block(p.w_in, grad.w_in);
        check_block(p.w_out, grad.w_out);
        check_block(p.b_hidden, grad.b_hidden);
        check_block(p.b_out, grad.b_out);
    }
}

TEST_CASE("threaded batch gradient equals the serial one") {
    Rng rng(5);
    SynthConfig cfg;
    cfg.num_users = 64;
    cfg.num_entities = 40;
    cfg.num_topics = 3;
    cfg.likes_mu = 2.2;
    cfg.likes_sigma = 0.3;
    cfg.min_likes = 2;
    cfg.rng_seed = 6;
    const SynthResult synth = generate(cfg);
    std::vector<std::uint32_t> batch;
    for (std::uint32_t u = 0; u < synth.corpus.num_users(); ++u) batch.push_back(u);

    const ae::Params p = random_params(synth.corpus.num_entities(), 6, rng);
    ae::Params serial = ae::Params::like(p);
    ae::accumulate_batch_gradient(p, synth.corpus, batch, serial, 1);
    ae::Params threaded = ae::Params::like(p);
    ae::accumulate_batch_gradient(p, synth.corpus, batch, threaded, 3);
    for (std::size_t i = 0; i < serial.w_in.size(); ++i)
        CHECK(threaded.w_in[i] == doctest::Approx(serial.w_in[i]).epsilon(1e-12));
    for (std::size_t i = 0; i < serial.b_out.size(); ++i)
        CHECK(threaded.b_out[i] == doctest::Approx(serial.b_out[i]).epsilon(1e-12));
}

TEST_CASE("autoencoder training reduces loss and emits hidden activations") {
    SynthConfig cfg;
    cfg.num_users = 300;
    cfg.num_entities = 100;
    cfg.num_topics = 4;
    cfg.likes_mu = 2.5;
    cfg.likes_sigma = 0.4;
    cfg.min_likes = 3;
    cfg.rng_seed = 47;
    const SynthResult synth = generate(cfg);

    EmbeddingConfig ec;
    ec.method = Method::Ae;
    ec.dim = 10;
    ec.epochs = 10;
    ec.batch_size = 50;
    ec.rng_seed = 7;
    const TrainedEmbedding trained = train_embedding(synth.corpus, ec);
    CHECK(trained.stats.final_objective < trained.stats.initial_objective);
    // Logistic hidden units live in (0, 1).
    for (double v : trained.users.values) {
        CHECK(v > 0.0);
        CHECK(v < 1.0);
    }
    const TrainedEmbedding again = train_embedding(synth.corpus, ec);
    CHECK(again.users.values == trained.users.values);
}
