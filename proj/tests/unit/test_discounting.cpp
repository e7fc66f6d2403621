#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>

#include <doctest.h>

#include "ule/discounting.hpp"
#include "ule/error.hpp"
#include "ule/rng.hpp"

using namespace ule;

namespace {

DelayBlock ladder_block(double amount, int days, double lo, double step) {
    DelayBlock b;
    b.delayed_amount = amount;
    b.delay_days = days;
    for (double v = amount; v >= lo - 1e-9; v -= step) b.immediate_ladder.push_back(v);
    return b;
}

}  // namespace

TEST_CASE("subjective value follows the hyperbolic form") {
    CHECK(subjective_value(1000, 0.0, 365) == doctest::Approx(1000.0));
    CHECK(subjective_value(1000, 0.01, 100) == doctest::Approx(500.0));  // 1000/(1+1)
    CHECK(subjective_value(100, 1.0 / 30.0, 30) == doctest::Approx(50.0));
    CHECK_THROWS_AS(subjective_value(-5, 0.1, 10), std::domain_error);
    CHECK_THROWS_AS(subjective_value(100, -0.1, 10), std::domain_error);
    // Monotone decreasing in k and in D.
    CHECK(subjective_value(1000, 0.02, 100) < subjective_value(1000, 0.01, 100));
    CHECK(subjective_value(1000, 0.01, 200) < subjective_value(1000, 0.01, 100));
}

TEST_CASE("indifference value brackets the switch point") {
    const DelayBlock block = ladder_block(1000, 30, 300, 50);
    REQUIRE(block.immediate_ladder.size() == 15);

    std::vector<bool> all_delayed(15, false);
    CHECK(indifference_value(block, all_delayed) == doctest::Approx(1000.0));

    // Immediate accepted at >= 700, rejected below: midpoint of 700 and 650.
    std::vector<bool> switch_at_700(15, false);
    for (std::size_t i = 0; i < 15; ++i) switch_at_700[i] = block.immediate_ladder[i] >= 700.0;
    CHECK(indifference_value(block, switch_at_700) == doctest::Approx(675.0));

    std::vector<bool> all_immediate(15, true);
    CHECK(indifference_value(block, all_immediate) == doctest::Approx(275.0));

    CHECK_THROWS_AS(indifference_value(block, std::vector<bool>(14, true)), InputError);

    // One inconsistent answer still resolves to the overall extremes.
    std::vector<bool> noisy = switch_at_700;
    noisy[10] = true;  // accepts 500 while rejecting 650..550
    const double v = indifference_value(block, noisy);
    CHECK(v == doctest::Approx((500.0 + 650.0) / 2.0));
}

TEST_CASE("k from indifference inverts the hyperbola") {
    CHECK(k_from_indifference(1000, 1000, 30) == doctest::Approx(1e-5));  // clamped
    CHECK(k_from_indifference(1000, 500, 30) == doctest::Approx(1.0 / 30.0).epsilon(1e-12));
    CHECK(k_from_indifference(100, 50, 30) == doctest::Approx(1.0 / 30.0).epsilon(1e-12));
    CHECK_THROWS_AS(k_from_indifference(1000, 0, 30), std::domain_error);
    CHECK_THROWS_AS(k_from_indifference(1000, 1500, 30), std::domain_error);

    // Strictly decreasing in V, and subjective_value inverts it exactly.
    Rng rng(3);
    double prev = 1e300;
    for (double v = 100.0; v <= 990.0; v += 40.0) {
        const double k = k_from_indifference(1000, v, 90);
        CHECK(k < prev);
        prev = k;
        CHECK(subjective_value(1000, k, 90) == doctest::Approx(v).epsilon(1e-12));
    }
}

TEST_CASE("score questionnaire averages per-block log k") {
    // Two blocks engineered to yield k = 0.01 and k = 0.1 exactly.
    DiscountProtocol protocol;
    DelayBlock b1;
    b1.delayed_amount = 1000;
    b1.delay_days = 100;
    b1.immediate_ladder = {600, 400};
    DelayBlock b2 = b1;
    b2.delay_days = 10;
    protocol.blocks = {b1, b2};

    Questionnaire q;
    q.user_id = "u";
    q.responses = {{true, false}, {true, false}};  // both blocks: V = 500
    const DdrScore score = score_questionnaire(protocol, q);
    CHECK(score.per_block[0].k == doctest::Approx(0.01).epsilon(1e-12));
    CHECK(score.per_block[1].k == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(score.ddr == doctest::Approx(-1.5).epsilon(1e-12));

    // V = A in every block -> ddr = log10(k_floor) = -5.
    Questionnaire all_delayed;
    all_delayed.user_id = "v";
    all_delayed.responses = {{false, false}, {false, false}};
    CHECK(score_questionnaire(protocol, all_delayed).ddr == doctest::Approx(-5.0));

    // Natural-log knob.
    ScoringOptions nat;
    nat.log_base = std::exp(1.0);
    CHECK(score_questionnaire(protocol, q, nat).ddr ==
          doctest::Approx((std::log(0.01) + std::log(0.1)) / 2.0).epsilon(1e-12));

    Questionnaire malformed;
    malformed.user_id = "w";
    malformed.responses = {{true, false}};
    CHECK_THROWS_AS(score_questionnaire(protocol, malformed), InputError);
}

TEST_CASE("score is invariant under block permutation") {
    const DiscountProtocol protocol = default_protocol();
    const Questionnaire q = simulate_responses(protocol, 0.035);
    const double ddr = score_questionnaire(protocol, q).ddr;

    DiscountProtocol reversed;
    reversed.blocks.assign(protocol.blocks.rbegin(), protocol.blocks.rend());
    Questionnaire rq;
    rq.user_id = q.user_id;
    rq.responses.assign(q.responses.rbegin(), q.responses.rend());
    CHECK(score_questionnaire(reversed, rq).ddr == doctest::Approx(ddr).epsilon(1e-12));
}

TEST_CASE("simulate responses applies the choice rule") {
    const DiscountProtocol protocol = default_protocol();
    const Questionnaire lazy = simulate_responses(protocol, 0.0);
    for (const auto& block : lazy.responses)
        for (bool chose : block) CHECK_FALSE(chose);  // V = A, ties go delayed

    const Questionnaire impatient = simulate_responses(protocol, 1e6);
    for (const auto& block : impatient.responses)
        for (bool chose : block) CHECK(chose);

    // k = 0.01 on a (1000, 100 day) block: V = 500, immediate chosen at 550+.
    DiscountProtocol one;
    one.blocks = {ladder_block(1000, 100, 300, 50)};
    const Questionnaire q = simulate_responses(one, 0.01);
    for (std::size_t i = 0; i < one.blocks[0].immediate_ladder.size(); ++i)
        CHECK(q.responses[0][i] == (one.blocks[0].immediate_ladder[i] >= 550.0));
}

namespace {

// Ladder-resolution bound used by the round-trip property: the response
// pattern pins k to an interval; intersect with the generating range and take
// the worst log10 gap to the recovered estimate.
double roundtrip_bound(const DiscountProtocol& protocol, const DdrScore& recovered, double k_lo,
                       double k_hi) {
    double total = 0.0;
    for (std::size_t b = 0; b < protocol.blocks.size(); ++b) {
        const DelayBlock& blk = protocol.blocks[b];
        const double v_hat = recovered.per_block[b].indifference_value;
        const auto& ladder = blk.immediate_ladder;
        // Pattern interval in V: true V lies in [highest rejected, lowest
        // accepted), recoverable from the bracketing amounts around v_hat.
        double v_low = 0.0, v_high = blk.delayed_amount;
        for (double amount : ladder) {
            if (amount > v_hat)
                v_high = std::min(v_high, amount);
            else
                v_low = std::max(v_low, amount);
        }
        // Convert to a k interval (k decreasing in V), clamp by the known
        // generating range, and take the worst gap.
        auto k_of = [&](double v) {
            if (v <= 0.0) return k_hi;
            return std::max((blk.delayed_amount - v) / (v * blk.delay_days), 1e-5);
        };
        const double k_min_block = std::clamp(k_of(v_high), k_lo, k_hi);
        const double k_max_block = std::clamp(k_of(std::max(v_low, 1e-9)), k_lo, k_hi);
        const double lk_hat = std::log10(recovered.per_block[b].k);
        const double gap = std::max(std::fabs(lk_hat - std::log10(k_min_block)),
                                    std::fabs(lk_hat - std::log10(k_max_block)));
        total += gap;
    }
    return total / static_cast<double>(protocol.blocks.size());
}

}  // namespace

TEST_CASE("round trip recovers ddr within the ladder resolution") {
    const DiscountProtocol protocol = default_protocol();
    Rng rng(17);
    for (int trial = 0; trial < 100; ++trial) {
        const double k = std::pow(10.0, rng.next_uniform(-4.0, std::log10(0.5)));
        const Questionnaire q = simulate_responses(protocol, k);
        const DdrScore score = score_questionnaire(protocol, q);
        const double truth = std::log10(std::max(k, 1e-5));
        const double bound = roundtrip_bound(protocol, score, 1e-4, 0.5);
        CHECK(std::fabs(score.ddr - truth) <= bound + 1e-9);
    }
}

TEST_CASE("questionnaire and label files round trip") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "ule_disc_test";
    fs::create_directories(dir);
    const DiscountProtocol protocol = default_protocol();

    std::vector<Questionnaire> qs;
    Rng rng(5);
    for (int i = 0; i < 7; ++i) {
        char name[16];
        std::snprintf(name, sizeof name, "user%02d", i);
        qs.push_back(
            simulate_responses(protocol, std::pow(10.0, rng.next_uniform(-4.0, -0.5)), name));
    }
    const fs::path qfile = dir / "q.tsv";
    write_questionnaire_file(qfile, qs);
    const auto back = read_questionnaire_file(qfile, protocol);
    REQUIRE(back.size() == qs.size());
    for (const auto& q : back) {
        const auto orig = std::find_if(qs.begin(), qs.end(),
                                       [&](const Questionnaire& o) { return o.user_id == q.user_id; });
        REQUIRE(orig != qs.end());
        CHECK(q.responses == orig->responses);
    }

    std::vector<std::pair<std::string, double>> labels = {{"a", -1.25}, {"b", -3.5e-2}};
    const fs::path lfile = dir / "l.tsv";
    write_ddr_labels(lfile, labels);
    CHECK(read_ddr_labels(lfile) == labels);

    // Malformed line reports its number.
    const fs::path bad = dir / "bad.tsv";
    {
        std::FILE* f = std::fopen(bad.c_str(), "w");
        std::fputs("u 0 0 1\nu 0 oops 1\n", f);
        std::fclose(f);
    }
    CHECK_THROWS_WITH_AS(read_questionnaire_file(bad, protocol),
                         doctest::Contains("line 2"), InputError);
    fs::remove_all(dir);
}
