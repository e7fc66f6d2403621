#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace ule {

// One delay condition: a delayed reward against a descending ladder of
// immediate offers.
struct DelayBlock {
    double delayed_amount = 0.0;
    int delay_days = 0;
    std::vector<double> immediate_ladder;  // strictly decreasing, in (0, delayed_amount]
};

struct DiscountProtocol {
    std::vector<DelayBlock> blocks;

    void validate() const;  // throws InputError on a malformed protocol
};

// Ladders run linearly from the delayed amount down over 15 steps; delays span
// 1 week to 5 years with $1000 at stake except $100 at the 1-month delay.
DiscountProtocol default_protocol();

struct Questionnaire {
    std::string user_id;
    // responses[b][i] is true when the user took immediate_ladder[i] over the
    // delayed reward of block b.
    std::vector<std::vector<bool>> responses;
};

struct BlockScore {
    std::size_t block_index = 0;
    double indifference_value = 0.0;
    double k = 0.0;  // per-day rate, clamped below by k_floor
};

struct DdrScore {
    std::vector<BlockScore> per_block;
    double ddr = 0.0;  // mean of log(k) over blocks, base per ScoringOptions
};

struct ScoringOptions {
    double k_floor = 1e-5;   // per day; keeps log(k) defined when V = A
    double log_base = 10.0;  // paper formula uses log10; base e is exposed as a knob
};

// V = A / (1 + kD).
double subjective_value(double delayed_amount, double k, int delay_days);

// Midpoint between the lowest immediate amount accepted and the highest
// rejected. All-delayed -> A; all-immediate -> min ladder minus half a step.
double indifference_value(const DelayBlock& block, const std::vector<bool>& responses);

// k = (A - V) / (V * D), clamped below by k_floor.
double k_from_indifference(double delayed_amount, double indifference, int delay_days,
                           double k_floor = 1e-5);

DdrScore score_questionnaire(const DiscountProtocol& protocol, const Questionnaire& q,
                             const ScoringOptions& opt = {});

// Applies the hyperbolic choice rule: immediate is chosen exactly when its
// amount exceeds the subjective value of the delayed reward. Ties go delayed.
Questionnaire simulate_responses(const DiscountProtocol& protocol, double true_k,
                                 const std::string& user_id = "sim");

// Questionnaire file: user_id<TAB>block_index<TAB>ladder_position<TAB>chose_immediate
std::vector<Questionnaire> read_questionnaire_file(const std::filesystem::path& path,
                                                   const DiscountProtocol& protocol);
void write_questionnaire_file(const std::filesystem::path& path,
                              const std::vector<Questionnaire>& qs);

// DDR labels file: user_id<TAB>ddr
void write_ddr_labels(const std::filesystem::path& path,
                      const std::vector<std::pair<std::string, double>>& labels);
std::vector<std::pair<std::string, double>> read_ddr_labels(const std::filesystem::path& path);

}  // namespace ule
