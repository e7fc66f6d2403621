#include "ule/discounting.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "ule/error.hpp"

namespace ule {

void DiscountProtocol::validate() const {
    if (blocks.empty()) throw InputError("protocol has no delay blocks");
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        const DelayBlock& blk = blocks[b];
        if (blk.delayed_amount <= 0.0)
            throw InputError("block " + std::to_string(b) + ": delayed amount must be positive");
        if (blk.delay_days < 1)
            throw InputError("block " + std::to_string(b) + ": delay must be at least one day");
        if (blk.immediate_ladder.empty())
            throw InputError("block " + std::to_string(b) + ": empty ladder");
        for (std::size_t i = 0; i < blk.immediate_ladder.size(); ++i) {
            const double v = blk.immediate_ladder[i];
            if (v <= 0.0 || v > blk.delayed_amount)
                throw InputError("block " + std::to_string(b) +
                                 ": ladder value outside (0, delayed amount]");
            if (i > 0 && v >= blk.immediate_ladder[i - 1])
                throw InputError("block " + std::to_string(b) +
                                 ": ladder is not strictly decreasing");
        }
    }
}

namespace {

DelayBlock linear_block(double amount, int delay_days, int steps = 15) {
    DelayBlock blk;
    blk.delayed_amount = amount;
    blk.delay_days = delay_days;
    // 15 values from A down in equal steps, bottoming out at 30% of A
    // (1000, 950, ..., 300 for A = 1000).
    const double step = amount * 0.05;
    blk.immediate_ladder.resize(steps);
    for (int i = 0; i < steps; ++i) blk.immediate_ladder[i] = amount - step * i;
    return blk;
}

}  // namespace

DiscountProtocol default_protocol() {
    DiscountProtocol p;
    p.blocks.push_back(linear_block(1000.0, 7));     // 1 week
    p.blocks.push_back(linear_block(100.0, 30));     // 1 month, smaller stake
    p.blocks.push_back(linear_block(1000.0, 182));   // 6 months
    p.blocks.push_back(linear_block(1000.0, 365));   // 1 year
    p.blocks.push_back(linear_block(1000.0, 1825));  // 5 years
    return p;
}

double subjective_value(double delayed_amount, double k, int delay_days) {
    if (delayed_amount <= 0.0) throw std::domain_error("delayed amount must be positive");
    if (k < 0.0) throw std::domain_error("discount rate must be nonnegative");
    if (delay_days < 0) throw std::domain_error("delay must be nonnegative");
    return delayed_amount / (1.0 + k * static_cast<double>(delay_days));
}

double indifference_value(const DelayBlock& block, const std::vector<bool>& responses) {
    if (responses.size() != block.immediate_ladder.size())
        throw InputError("response count does not match ladder length");
    double lowest_accepted = -1.0;  // smallest immediate amount chosen over delayed
    double highest_rejected = -1.0;
    for (std::size_t i = 0; i < responses.size(); ++i) {
        const double amount = block.immediate_ladder[i];
        if (responses[i]) {
            if (lowest_accepted < 0.0 || amount < lowest_accepted) lowest_accepted = amount;
        } else {
            if (amount > highest_rejected) highest_rejected = amount;
        }
    }
    if (lowest_accepted < 0.0) return block.delayed_amount;  // never preferred immediate
    if (highest_rejected < 0.0) {
        // Took every immediate offer: indifference sits below the ladder.
        const auto& ladder = block.immediate_ladder;
        const double bottom = ladder.back();
        const double half_step =
            ladder.size() >= 2 ? (ladder[ladder.size() - 2] - bottom) / 2.0 : bottom / 2.0;
        return bottom - half_step;
    }
    // Midpoint between the bracketing amounts. With inconsistent answers the
    // same rule applies to the overall extremes.
    return (lowest_accepted + highest_rejected) / 2.0;
}

double k_from_indifference(double delayed_amount, double indifference, int delay_days,
                           double k_floor) {
    if (indifference <= 0.0) throw std::domain_error("indifference value must be positive");
    if (indifference > delayed_amount)
        throw std::domain_error("indifference value cannot exceed the delayed amount");
    if (delay_days < 1) throw std::domain_error("delay must be at least one day");
    const double raw =
        (delayed_amount - indifference) / (indifference * static_cast<double>(delay_days));
    return std::max(raw, k_floor);
}

DdrScore score_questionnaire(const DiscountProtocol& protocol, const Questionnaire& q,
                             const ScoringOptions& opt) {
    protocol.validate();
    if (q.responses.size() != protocol.blocks.size())
        throw InputError("questionnaire for " + q.user_id + " has " +
                         std::to_string(q.responses.size()) + " blocks, protocol has " +
                         std::to_string(protocol.blocks.size()));
    DdrScore score;
    const double log_base = std::log(opt.log_base);
    double sum_log_k = 0.0;
    for (std::size_t b = 0; b < protocol.blocks.size(); ++b) {
        const DelayBlock& blk = protocol.blocks[b];
        const double v = indifference_value(blk, q.responses[b]);
        const double k = k_from_indifference(blk.delayed_amount, v, blk.delay_days, opt.k_floor);
        score.per_block.push_back({b, v, k});
        sum_log_k += std::log(k) / log_base;
    }
    score.ddr = sum_log_k / static_cast<double>(protocol.blocks.size());
    if (!std::isfinite(score.ddr)) throw InputError("non-finite ddr for " + q.user_id);
    return score;
}

Questionnaire simulate_responses(const DiscountProtocol& protocol, double true_k,
                                 const std::string& user_id) {
    protocol.validate();
    if (true_k < 0.0) throw std::domain_error("discount rate must be nonnegative");
    Questionnaire q;
    q.user_id = user_id;
    q.responses.resize(protocol.blocks.size());
    for (std::size_t b = 0; b < protocol.blocks.size(); ++b) {
        const DelayBlock& blk = protocol.blocks[b];
        const double v = subjective_value(blk.delayed_amount, true_k, blk.delay_days);
        auto& row = q.responses[b];
        row.resize(blk.immediate_ladder.size());
        for (std::size_t i = 0; i < row.size(); ++i) row[i] = blk.immediate_ladder[i] > v;
    }
    return q;
}

std::vector<Questionnaire> read_questionnaire_file(const std::filesystem::path& path,
                                                   const DiscountProtocol& protocol) {
    protocol.validate();
    std::ifstream in(path);
    if (!in) throw InputError("cannot open questionnaire file: " + path.string());
    // user -> block -> position -> response, tolerating any line order
    std::map<std::string, std::vector<std::vector<int>>> acc;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        std::string user;
        long block = -1, pos = -1;
        int chose = -1;
        if (!(ss >> user >> block >> pos >> chose) || (chose != 0 && chose != 1))
            throw InputError("malformed questionnaire line " + std::to_string(line_no));
        if (block < 0 || static_cast<std::size_t>(block) >= protocol.blocks.size())
            throw InputError("line " + std::to_string(line_no) + ": block index out of range");
        const auto& ladder = protocol.blocks[static_cast<std::size_t>(block)].immediate_ladder;
        if (pos < 0 || static_cast<std::size_t>(pos) >= ladder.size())
            throw InputError("line " + std::to_string(line_no) + ": ladder position out of range");
        auto it = acc.find(user);
        if (it == acc.end()) {
            std::vector<std::vector<int>> empty(protocol.blocks.size());
            for (std::size_t b = 0; b < protocol.blocks.size(); ++b)
                empty[b].assign(protocol.blocks[b].immediate_ladder.size(), -1);
            it = acc.emplace(user, std::move(empty)).first;
        }
        it->second[static_cast<std::size_t>(block)][static_cast<std::size_t>(pos)] = chose;
    }
    if (acc.empty()) throw InputError("questionnaire file is empty: " + path.string());
    std::vector<Questionnaire> out;
    out.reserve(acc.size());
    for (const auto& [user, blocks] : acc) {
        Questionnaire q;
        q.user_id = user;
        q.responses.resize(blocks.size());
        for (std::size_t b = 0; b < blocks.size(); ++b) {
            q.responses[b].resize(blocks[b].size());
            for (std::size_t i = 0; i < blocks[b].size(); ++i) {
                if (blocks[b][i] < 0)
                    throw InputError("user " + user + ": missing response in block " +
                                     std::to_string(b) + " position " + std::to_string(i));
                q.responses[b][i] = blocks[b][i] == 1;
            }
        }
        out.push_back(std::move(q));
    }
    return out;
}

void write_questionnaire_file(const std::filesystem::path& path,
                              const std::vector<Questionnaire>& qs) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write questionnaire file: " + path.string());
    for (const auto& q : qs)
        for (std::size_t b = 0; b < q.responses.size(); ++b)
            for (std::size_t i = 0; i < q.responses[b].size(); ++i)
                out << q.user_id << '\t' << b << '\t' << i << '\t' << (q.responses[b][i] ? 1 : 0)
                    << '\n';
    if (!out) throw InputError("write failed: " + path.string());
}

void write_ddr_labels(const std::filesystem::path& path,
                      const std::vector<std::pair<std::string, double>>& labels) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write labels file: " + path.string());
    char buf[64];
    for (const auto& [user, ddr] : labels) {
        std::snprintf(buf, sizeof buf, "%.17g", ddr);
        out << user << '\t' << buf << '\n';
    }
    if (!out) throw InputError("write failed: " + path.string());
}

std::vector<std::pair<std::string, double>> read_ddr_labels(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open labels file: " + path.string());
    std::vector<std::pair<std::string, double>> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        std::string user;
        double ddr = 0.0;
        if (!(ss >> user >> ddr) || !std::isfinite(ddr))
            throw InputError("malformed label line " + std::to_string(line_no) + " in " +
                             path.string());
        out.emplace_back(std::move(user), ddr);
    }
    if (out.empty()) throw InputError("labels file is empty: " + path.string());
    return out;
}

}  // namespace ule
