#include <filesystem>
#include <fstream>

#include <doctest.h>

#include "ule/corpus.hpp"
#include "ule/embedding.hpp"
#include "ule/error.hpp"
#include "ule/rng.hpp"
#include "ule/synthgen.hpp"

using namespace ule;

TEST_CASE("method names round trip and bad names list the valid set") {
    for (Method m : ALL_METHODS) CHECK(method_from_string(method_name(m)) == m);
    CHECK(method_from_string("SVD") == Method::Svd);
    CHECK(method_from_string("P_DBOW") == Method::PDbow);
    CHECK_THROWS_WITH_AS(method_from_string("word2vec"), doctest::Contains("p-dbow"),
                         ConfigError);
}

TEST_CASE("embedding files round trip at full precision") {
    EmbeddingMatrix m;
    m.rows = 17;
    m.dim = 9;
    Rng rng(2);
    for (std::size_t i = 0; i < m.rows; ++i) m.ids.push_back("row" + std::to_string(i));
    m.values.resize(m.rows * m.dim);
    for (double& v : m.values) v = rng.next_normal(0, 1e3) * std::pow(10.0, -int(rng.next_below(12)));

    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "ule_embio_test";
    fs::create_directories(dir);
    const fs::path file = dir / "emb.tsv";
    write_embedding(file, m);
    const EmbeddingMatrix back = read_embedding(file);
    CHECK(back.rows == m.rows);
    CHECK(back.dim == m.dim);
    CHECK(back.ids == m.ids);
    CHECK(back.values == m.values);  // bit-exact via %.17g

    SUBCASE("degenerate zero-row matrix") {
        EmbeddingMatrix empty;
        empty.rows = 0;
        empty.dim = 5;
        const fs::path efile = dir / "empty.tsv";
        write_embedding(efile, empty);
        const EmbeddingMatrix eback = read_embedding(efile);
        CHECK(eback.rows == 0);
        CHECK(eback.dim == 5);
    }

    SUBCASE("truncation is a format error, not silent loss") {
        std::string body;
        {
            std::ifstream in(file);
            std::ostringstream ss;
            ss << in.rdbuf();
            body = ss.str();
        }
        const fs::path bad = dir / "trunc.tsv";
        std::ofstream(bad) << body.substr(0, body.size() * 2 / 3);
        CHECK_THROWS_AS(read_embedding(bad), FormatError);

        const fs::path short_row = dir / "short.tsv";
        std::ofstream(short_row) << "1 3\nrow0 1.0 2.0\n";
        CHECK_THROWS_AS(read_embedding(short_row), FormatError);
    }
    fs::remove_all(dir);
}

TEST_CASE("average aggregation matches direct summation") {
    const LikeCorpus corpus = ingest_pairs({{"single", "a"},
                                            {"cancel", "a"},
                                            {"cancel", "b"},
                                            {"mix", "a"},
                                            {"mix", "b"},
                                            {"mix", "c"}});
    EmbeddingMatrix vectors;
    vectors.rows = 3;
    vectors.dim = 2;
    vectors.ids = corpus.entity_ids;
    vectors.values = {1.0, 2.0, -1.0, -2.0, 4.0, 6.0};  // a, b, c

    const EmbeddingMatrix users = aggregate_average(vectors, corpus);
    const auto single = users.row(corpus.user_index.at("single"));
    CHECK(single[0] == doctest::Approx(1.0));
    CHECK(single[1] == doctest::Approx(2.0));
    const auto cancel = users.row(corpus.user_index.at("cancel"));
    CHECK(cancel[0] == doctest::Approx(0.0));
    CHECK(cancel[1] == doctest::Approx(0.0));

    // Brute-force oracle on a random 5-user case.
    Rng rng(12);
    std::vector<std::pair<std::string, std::string>> pairs;
    for (int u = 0; u < 5; ++u)
        for (int e = 0; e < 8; ++e)
            if (rng.next_double() < 0.5)
                pairs.emplace_back("u" + std::to_string(u), "e" + std::to_string(e));
    pairs.emplace_back("u4", "e0");  // no empty users
    const LikeCorpus random_corpus = ingest_pairs(pairs);
    EmbeddingMatrix rand_vec;
    rand_vec.rows = random_corpus.num_entities();
    rand_vec.dim = 4;
    rand_vec.ids = random_corpus.entity_ids;
    rand_vec.values.resize(rand_vec.rows * rand_vec.dim);
    for (double& v : rand_vec.values) v = rng.next_normal();
    const EmbeddingMatrix agg = aggregate_average(rand_vec, random_corpus);
    for (std::size_t u = 0; u < random_corpus.num_users(); ++u) {
        auto likes = random_corpus.likes_of(std::uint32_t(u));
        for (std::size_t j = 0; j < rand_vec.dim; ++j) {
            double sum = 0.0;
            for (std::uint32_t e : likes) sum += rand_vec.row(e)[j];
            CHECK(agg.row(u)[j] == doctest::Approx(sum / likes.size()).epsilon(1e-12));
        }
    }

    EmbeddingMatrix wrong = vectors;
    wrong.rows = 2;
    CHECK_THROWS_AS(aggregate_average(wrong, corpus), InputError);
}

TEST_CASE("every method is deterministic, finite, and improves its objective") {
    SynthConfig cfg;
    cfg.num_users = 400;
    cfg.num_entities = 150;
    cfg.num_topics = 5;
    cfg.num_signal_topics = 2;
    cfg.signal_strength = 1.0;
    cfg.likes_mu = 2.4;
    cfg.likes_sigma = 0.5;
    cfg.min_likes = 3;
    cfg.rng_seed = 2024;
    const SynthResult synth = generate(cfg);

    for (Method m : ALL_METHODS) {
        CAPTURE(method_name(m));
        EmbeddingConfig ec;
        ec.method = m;
        ec.dim = 12;
        ec.rng_seed = 99;
        ec.epochs = (m == Method::Lda) ? 40 : (m == Method::Ae) ? 8 : (m == Method::UGlove) ? 10 : 5;
        const TrainedEmbedding a = train_embedding(synth.corpus, ec);
        CHECK(a.users.rows == synth.corpus.num_users());
        CHECK(a.users.dim == 12);
        for (double v : a.users.values) CHECK(std::isfinite(v));
        CHECK(a.stats.final_objective < a.stats.initial_objective);
        CHECK(bool(a.entities) == method_has_entity_vectors(m));

        const TrainedEmbedding b = train_embedding(synth.corpus, ec);
        CHECK(a.users.values == b.users.values);  // bit-identical rerun
    }
}

TEST_CASE("lda rows are probability vectors") {
    SynthConfig cfg;
    cfg.num_users = 200;
    cfg.num_entities = 80;
    cfg.num_topics = 4;
    cfg.likes_mu = 2.2;
    cfg.likes_sigma = 0.4;
    cfg.min_likes = 2;
    cfg.rng_seed = 5;
    const SynthResult synth = generate(cfg);
    EmbeddingConfig ec;
    ec.method = Method::Lda;
    ec.dim = 6;
    ec.epochs = 30;
    ec.rng_seed = 4;
    const TrainedEmbedding lda = train_embedding(synth.corpus, ec);
    for (std::size_t u = 0; u < lda.users.rows; ++u) {
        double sum = 0.0;
        for (double v : lda.users.row(u)) {
            CHECK(v >= 0.0);
            sum += v;
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("svd dim bound and empty corpus are config errors") {
    const LikeCorpus tiny = ingest_pairs({{"u1", "e1"}, {"u1", "e2"}, {"u2", "e1"}});
    EmbeddingConfig ec;
    ec.method = Method::Svd;
    ec.dim = 2;  // min(2 users, 2 entities) = 2, must be strictly below
    CHECK_THROWS_AS(train_embedding(tiny, ec), ConfigError);
    ec.dim = 0;
    CHECK_THROWS_AS(train_embedding(tiny, ec), ConfigError);
}
