#include <cmath>
#include <vector>

#include <doctest.h>

#include "ule/embedding.hpp"
#include "ule/ns_objective.hpp"
#include "ule/rng.hpp"
#include "ule/synthgen.hpp"

using namespace ule;

namespace {

struct NsEvent {
    std::vector<double> input;
    std::vector<double> positive;
    std::vector<std::vector<double>> negatives;

    std::vector<std::span<const double>> negative_spans() const {
        std::vector<std::span<const double>> s;
        for (const auto& n : negatives) s.emplace_back(n.data(), n.size());
        return s;
    }
};

NsEvent random_event(Rng& rng, std::size_t dim, std::size_t num_neg) {
    NsEvent ev;
    ev.input.resize(dim);
    ev.positive.resize(dim);
    for (double& v : ev.input) v = rng.next_normal(0, 0.8);
    for (double& v : ev.positive) v = rng.next_normal(0, 0.8);
    ev.negatives.resize(num_neg);
    for (auto& n : ev.negatives) {
        n.resize(dim);
        for (double& v : n) v = rng.next_normal(0, 0.8);
    }
    return ev;
}

double max_rel_error(double got, double want) {
    return std::fabs(got - want) / std::max({std::fabs(got), std::fabs(want), 1e-8});
}

}  // namespace

TEST_CASE("negative-sampling gradients match central finite differences") {
    Rng rng(314);
    const double h = 1e-6;
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t dim = 3 + rng.next_below(8);
        const std::size_t num_neg = 1 + rng.next_below(6);
        NsEvent ev = random_event(rng, dim, num_neg);
        const auto grads = ns::event_gradients(ev.input, ev.positive, ev.negative_spans());

        auto loss_now = [&]() { return ns::event_loss(ev.input, ev.positive, ev.negative_spans()); };
        for (std::size_t j = 0; j < dim; ++j) {
            const double keep = ev.input[j];
            ev.input[j] = keep + h;
            const double up = loss_now();
            ev.input[j] = keep - h;
            const double down = loss_now();
            ev.input[j] = keep;
            CHECK(max_rel_error(grads.input[j], (up - down) / (2 * h)) <= 1e-5);

            const double keep_pos = ev.positive[j];
            ev.positive[j] = keep_pos + h;
            const double pup = loss_now();
            ev.positive[j] = keep_pos - h;
            const double pdown = loss_now();
            ev.positive[j] = keep_pos;
            CHECK(max_rel_error(grads.positive[j], (pup - pdown) / (2 * h)) <= 1e-5);
        }
        for (std::size_t n = 0; n < num_neg; ++n) {
            for (std::size_t j = 0; j < dim; ++j) {
                const double keep = ev.negatives[n][j];
                ev.negatives[n][j] = keep + h;
                const double up = loss_now();
                ev.negatives[n][j] = keep - h;
                const double down = loss_now();
                ev.negatives[n][j] = keep;
                CHECK(max_rel_error(grads.negatives[n][j], (up - down) / (2 * h)) <= 1e-5);
            }
        }
    }
}

TEST_CASE("loss decomposes over negatives and saturates correctly") {
    Rng rng(1);
    NsEvent ev = random_event(rng, 5, 3);
    const double full = ns::event_loss(ev.input, ev.positive, ev.negative_spans());
    double sum = ns::event_loss(ev.input, ev.positive, {});
    for (const auto& n : ev.negatives) {
        std::vector<std::span<const double>> one{{n.data(), n.size()}};
        // -log s(h.pos) counted once; add only the negative term.
        sum += ns::event_loss(ev.input, ev.positive, one) -
               ns::event_loss(ev.input, ev.positive, {});
    }
    CHECK(full == doctest::Approx(sum).epsilon(1e-12));

    // A perfectly-scored event has near-zero loss.
    std::vector<double> big_pos(5, 10.0), input(5, 1.0);
    std::vector<double> big_neg(5, -10.0);
    std::vector<std::span<const double>> negs{{big_neg.data(), big_neg.size()}};
    CHECK(ns::event_loss(input, big_pos, negs) < 1e-8);
}

TEST_CASE("all four ns methods learn the planted structure deterministically") {
    SynthConfig cfg;
    cfg.num_users = 500;
    cfg.num_entities = 120;
    cfg.num_topics = 4;
    cfg.num_signal_topics = 0;
    cfg.likes_mu = 2.6;
    cfg.likes_sigma = 0.4;
    cfg.min_likes = 4;
    cfg.rng_seed = 63;
    const SynthResult synth = generate(cfg);

    for (Method m : {Method::UCbow, Method::USg, Method::PDm, Method::PDbow}) {
        CAPTURE(method_name(m));
        EmbeddingConfig ec;
        ec.method = m;
        ec.dim = 16;
        ec.epochs = 6;
        ec.rng_seed = 1234;
        const TrainedEmbedding trained = train_embedding(synth.corpus, ec);
        CHECK(trained.stats.final_objective < trained.stats.initial_objective);
        CHECK(trained.stats.per_epoch_objective.size() == 6);

        // Entities of the same planted topic should score closer than entities
        // of different topics under the entity vectors (2-stage methods).
        // Center first: averaged-input methods push a large shared component
        // into every context vector, which cosine would otherwise saturate on.
        if (trained.entities) {
            const auto& ent = *trained.entities;
            std::vector<double> mean(ent.dim, 0.0);
            for (std::size_t a = 0; a < ent.rows; ++a)
                for (std::size_t j = 0; j < ent.dim; ++j) mean[j] += ent.row(a)[j];
            for (double& v : mean) v /= double(ent.rows);
            auto centered = [&](std::size_t row, std::size_t j) {
                return ent.row(row)[j] - mean[j];
            };
            double same = 0.0, cross = 0.0;
            std::size_t same_n = 0, cross_n = 0;
            for (std::size_t a = 0; a < ent.rows; a += 3) {
                for (std::size_t b = a + 1; b < ent.rows; b += 3) {
                    const std::uint32_t ga = parse_generated_index(ent.ids[a]);
                    const std::uint32_t gb = parse_generated_index(ent.ids[b]);
                    double dot = 0.0, na = 0.0, nb = 0.0;
                    for (std::size_t j = 0; j < ent.dim; ++j) {
                        dot += centered(a, j) * centered(b, j);
                        na += centered(a, j) * centered(a, j);
                        nb += centered(b, j) * centered(b, j);
                    }
                    const double cos = dot / std::sqrt(na * nb);
                    if (ga % cfg.num_topics == gb % cfg.num_topics) {
                        same += cos;
                        ++same_n;
                    } else {
                        cross += cos;
                        ++cross_n;
                    }
                }
            }
            CHECK(same / double(same_n) > cross / double(cross_n));
        }
    }
}

TEST_CASE("fast mode runs and deterministic mode reproduces itself") {
    SynthConfig cfg;
    cfg.num_users = 300;
    cfg.num_entities = 80;
    cfg.num_topics = 4;
    cfg.likes_mu = 2.3;
    cfg.likes_sigma = 0.4;
    cfg.min_likes = 3;
    cfg.rng_seed = 15;
    const SynthResult synth = generate(cfg);

    EmbeddingConfig ec;
    ec.method = Method::USg;
    ec.dim = 8;
    ec.epochs = 3;
    ec.rng_seed = 77;
    const TrainedEmbedding a = train_embedding(synth.corpus, ec);
    const TrainedEmbedding b = train_embedding(synth.corpus, ec);
    CHECK(a.users.values == b.users.values);

    EmbeddingConfig fast = ec;
    fast.deterministic = false;
    fast.threads = 4;
    const TrainedEmbedding c = train_embedding(synth.corpus, fast);
    CHECK(c.users.rows == a.users.rows);
    for (double v : c.users.values) CHECK(std::isfinite(v));
}
