#include <algorithm>
#include <cmath>
#include <filesystem>
#include <vector>

#include <doctest.h>

#include "ule/analysis.hpp"
#include "ule/error.hpp"
#include "ule/mathx.hpp"
#include "ule/rng.hpp"
#include "ule/synthgen.hpp"

using namespace ule;

namespace {

// Textbook two-pass covariance formula, the independent route.
double pearson_brute(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    double sx = 0, sy = 0, sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
        sxy += x[i] * y[i];
        sxx += x[i] * x[i];
        syy += y[i] * y[i];
    }
    const double num = sxy - sx * sy / n;
    const double den = std::sqrt((sxx - sx * sx / n) * (syy - sy * sy / n));
    return num / den;
}

}  // namespace

TEST_CASE("pearson fixed values") {
    CHECK(pearson(std::vector<double>{1, 2, 3}, std::vector<double>{1, 2, 3}) ==
          doctest::Approx(1.0));
    CHECK(pearson(std::vector<double>{1, 2, 3}, std::vector<double>{3, 2, 1}) ==
          doctest::Approx(-1.0));
    CHECK(pearson(std::vector<double>{1, 2, 3, 4}, std::vector<double>{1, 3, 2, 4}) ==
          doctest::Approx(0.8).epsilon(1e-12));
    CHECK_THROWS_AS(pearson(std::vector<double>{1, 1, 1}, std::vector<double>{1, 2, 3}),
                    InputError);
    CHECK_THROWS_AS(pearson(std::vector<double>{1, 2}, std::vector<double>{1, 2, 3}), InputError);
}

TEST_CASE("pearson matches the brute-force formula on random vectors") {
    Rng rng(101);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 3 + rng.next_below(40);
        std::vector<double> x(n), y(n);
        for (std::size_t i = 0; i < n; ++i) {
            x[i] = rng.next_normal(0, 3);
            y[i] = rng.next_normal(1, 2);
        }
        CHECK(pearson(x, y) == doctest::Approx(pearson_brute(x, y)).epsilon(1e-12));
    }
}

TEST_CASE("pearson is affine invariant") {
    Rng rng(7);
    std::vector<double> x(25), y(25);
    for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] = rng.next_normal();
        y[i] = rng.next_normal();
    }
    const double base = pearson(x, y);
    std::vector<double> ax(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) ax[i] = 2.5 * x[i] - 7.0;
    CHECK(pearson(ax, y) == doctest::Approx(base).epsilon(1e-12));
    for (std::size_t i = 0; i < x.size(); ++i) ax[i] = -1.5 * x[i] + 2.0;
    CHECK(pearson(ax, y) == doctest::Approx(-base).epsilon(1e-12));
}

TEST_CASE("p-value fixed points and monotonicity") {
    CHECK(p_value(0.0, 10) == doctest::Approx(1.0));
    CHECK(p_value(1.0, 5) == 0.0);
    CHECK(p_value(-1.0, 5) == 0.0);
    // df=2 closed form: p = 1 - t/sqrt(2+t^2) gives exactly 0.2 at r=0.8, n=4.
    CHECK(p_value(0.8, 4) == doctest::Approx(0.2).epsilon(1e-9));
    CHECK_THROWS_AS(p_value(0.5, 2), InputError);

    double prev = 1.0;
    for (double r = 0.05; r < 1.0; r += 0.05) {
        const double p = p_value(r, 20);
        CHECK(p < prev);
        prev = p;
    }
    prev = 1.0;
    for (std::uint64_t n = 4; n < 200; n *= 2) {
        const double p = p_value(0.3, n);
        CHECK(p < prev);
        prev = p;
    }
}

TEST_CASE("entity screen matches per-column pearson and counts significance") {
    SynthConfig cfg;
    cfg.num_users = 600;
    cfg.num_entities = 150;
    cfg.num_topics = 5;
    cfg.num_signal_topics = 2;
    cfg.signal_strength = 1.5;
    cfg.labeled_fraction = 1.0;
    cfg.likes_mu = 2.5;
    cfg.likes_sigma = 0.5;
    cfg.min_likes = 3;
    cfg.rng_seed = 42;
    const SynthResult synth = generate(cfg);
    const auto labels = [&] {
        std::unordered_map<std::string, double> table;
        for (const auto& [id, ddr] : synth.labels) table[id] = ddr;
        return align_labels(synth.corpus, table);
    }();

    const CorrelationReport report = correlate_entities(synth.corpus, labels);

    // Cross-check a sample of records against the generic pearson.
    std::vector<double> y(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) y[i] = labels[i].ddr;
    std::size_t checked = 0;
    for (std::size_t pick = 0; pick < report.records.size(); pick += 17) {
        const auto& rec = report.records[pick];
        const std::uint32_t e = synth.corpus.entity_index.at(rec.feature_id);
        std::vector<double> col(labels.size(), 0.0);
        for (std::size_t i = 0; i < labels.size(); ++i) {
            auto likes = synth.corpus.likes_of(labels[i].user);
            col[i] = std::binary_search(likes.begin(), likes.end(), e) ? 1.0 : 0.0;
        }
        CHECK(rec.r == doctest::Approx(pearson(col, y)).epsilon(1e-9));
        CHECK(rec.p == doctest::Approx(p_value(rec.r, labels.size())).epsilon(1e-12));
        ++checked;
    }
    CHECK(checked > 3);

    // Sorted by p; significance counters recount.
    std::uint64_t pos = 0, neg = 0;
    for (std::size_t i = 0; i < report.records.size(); ++i) {
        if (i > 0) CHECK(report.records[i - 1].p <= report.records[i].p);
        if (report.records[i].p < report.threshold)
            (report.records[i].r > 0 ? pos : neg) += 1;
    }
    CHECK(pos == report.significant_positive);
    CHECK(neg == report.significant_negative);

    // Signal entities surface with the planted sign: entity e belongs to
    // topic e mod T; topic 0 is positive, topic 1 negative.
    std::size_t matching_sign = 0, significant_signal = 0;
    for (const auto& rec : report.records) {
        if (rec.p >= 0.05) continue;
        const std::uint32_t gen = parse_generated_index(rec.feature_id);
        const int topic = static_cast<int>(gen % cfg.num_topics);
        if (topic == 0) {
            ++significant_signal;
            matching_sign += rec.r > 0;
        } else if (topic == 1) {
            ++significant_signal;
            matching_sign += rec.r < 0;
        }
    }
    CHECK(significant_signal > 10);
    CHECK(matching_sign >= significant_signal * 9 / 10);
}

TEST_CASE("an entity liked by every labeled user is skipped as constant") {
    std::vector<std::pair<std::string, std::string>> pairs;
    for (int u = 0; u < 12; ++u) {
        pairs.emplace_back("u" + std::to_string(u), "omni");
        if (u % 2 == 0) pairs.emplace_back("u" + std::to_string(u), "half");
    }
    const LikeCorpus corpus = ingest_pairs(pairs);
    std::unordered_map<std::string, double> table;
    for (int u = 0; u < 12; ++u) table["u" + std::to_string(u)] = u * 0.1;
    const auto labels = align_labels(corpus, table);
    const CorrelationReport report = correlate_entities(corpus, labels);
    CHECK(report.skipped_constant == 1);
    REQUIRE(report.records.size() == 1);
    CHECK(report.records[0].feature_id == "half");
}

TEST_CASE("topic screen finds an exact permutation match") {
    // One topic's proportions equal the labels exactly -> r = 1.
    const std::size_t users = 50, topics = 4;
    std::vector<double> props(users * topics);
    Rng rng(3);
    std::vector<LabeledUser> labels;
    for (std::size_t u = 0; u < users; ++u) {
        const double ddr = rng.next_normal(-2, 0.5);
        labels.push_back({static_cast<std::uint32_t>(u), ddr});
        props[u * topics + 0] = ddr;
        for (std::size_t t = 1; t < topics; ++t) props[u * topics + t] = rng.next_double();
    }
    const CorrelationReport report = correlate_topics(props, topics, labels);
    REQUIRE_FALSE(report.records.empty());
    CHECK(report.records[0].feature_id == "topic0");
    CHECK(report.records[0].r == doctest::Approx(1.0));
    CHECK(report.records[0].p == 0.0);
}

TEST_CASE("null labels keep the significant fraction in the binomial band") {
    SynthConfig cfg;
    cfg.num_users = 2500;
    cfg.num_entities = 2000;
    cfg.num_topics = 8;
    cfg.num_signal_topics = 0;
    cfg.signal_strength = 0.0;
    cfg.labeled_fraction = 1.0;
    cfg.likes_mu = 3.0;
    cfg.likes_sigma = 0.5;
    cfg.min_likes = 4;
    cfg.rng_seed = 77;
    const SynthResult synth = generate(cfg);
    std::unordered_map<std::string, double> table;
    for (const auto& [id, ddr] : synth.labels) table[id] = ddr;
    const auto labels = align_labels(synth.corpus, table);
    const CorrelationReport report = correlate_entities(synth.corpus, labels);

    const std::uint64_t significant =
        report.significant_positive + report.significant_negative;
    const auto band = binomial_central_interval(report.records.size(), 0.05, 0.99);
    CHECK(significant >= band.lo);
    CHECK(significant <= band.hi);
}

TEST_CASE("report file round trips and the top view slices by sign") {
    namespace fs = std::filesystem;
    CorrelationReport report;
    report.threshold = 0.05;
    report.records = {{"a", 0.9, 0.001, 50},  {"b", -0.8, 0.002, 50}, {"c", 0.5, 0.01, 50},
                      {"d", -0.4, 0.02, 50},  {"e", 0.2, 0.2, 50},    {"f", -0.1, 0.5, 50}};
    report.significant_positive = 2;
    report.significant_negative = 2;

    const fs::path dir = fs::temp_directory_path() / "ule_analysis_test";
    fs::create_directories(dir);
    const fs::path file = dir / "report.tsv";
    write_correlation_report(file, report);
    const CorrelationReport back = read_correlation_report(file);
    REQUIRE(back.records.size() == report.records.size());
    for (std::size_t i = 0; i < back.records.size(); ++i) {
        CHECK(back.records[i].feature_id == report.records[i].feature_id);
        CHECK(back.records[i].r == report.records[i].r);
        CHECK(back.records[i].p == report.records[i].p);
    }
    CHECK(back.significant_positive == 2);

    const auto top_pos = top_correlated(report, 2, +1);
    REQUIRE(top_pos.size() == 2);
    CHECK(top_pos[0].feature_id == "a");
    CHECK(top_pos[1].feature_id == "c");
    const auto top_neg = top_correlated(report, 10, -1);
    REQUIRE(top_neg.size() == 3);
    CHECK(top_neg[0].feature_id == "b");
    fs::remove_all(dir);
}
