#include "ule/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>

#include "ule/error.hpp"
#include "ule/mathx.hpp"

namespace ule {

double pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw InputError("pearson: length mismatch");
    const std::size_t n = x.size();
    if (n < 2) throw InputError("pearson: need at least two samples");
    double mean_x = 0.0, mean_y = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mean_x += x[i];
        mean_y += y[i];
    }
    mean_x /= static_cast<double>(n);
    mean_y /= static_cast<double>(n);
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mean_x;
        const double dy = y[i] - mean_y;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (sxx == 0.0 || syy == 0.0) throw InputError("pearson: constant input vector");
    return sxy / std::sqrt(sxx * syy);
}

double p_value(double r, std::uint64_t n) {
    if (std::fabs(r) > 1.0 + 1e-12) throw InputError("p_value: |r| exceeds 1");
    if (n < 3) throw InputError("p_value: need n >= 3");
    r = std::clamp(r, -1.0, 1.0);
    if (std::fabs(r) == 1.0) return 0.0;
    const double df = static_cast<double>(n - 2);
    const double t = r * std::sqrt(df) / std::sqrt(1.0 - r * r);
    return student_t_two_sided(t, df);
}

namespace {

void finalize_report(CorrelationReport& report, bool benjamini_hochberg) {
    std::sort(report.records.begin(), report.records.end(),
              [](const CorrelationRecord& a, const CorrelationRecord& b) {
                  if (a.p != b.p) return a.p < b.p;
                  return a.feature_id < b.feature_id;
              });
    const std::size_t m = report.records.size();
    std::vector<bool> significant(m, false);
    if (benjamini_hochberg) {
        // Step-up: largest i with p_(i) <= (i/m) * q; everything below passes.
        std::size_t cut = 0;
        for (std::size_t i = 0; i < m; ++i) {
            const double bound =
                report.threshold * static_cast<double>(i + 1) / static_cast<double>(m);
            if (report.records[i].p <= bound) cut = i + 1;
        }
        for (std::size_t i = 0; i < cut; ++i) significant[i] = true;
    } else {
        for (std::size_t i = 0; i < m; ++i)
            significant[i] = report.records[i].p < report.threshold;
    }
    for (std::size_t i = 0; i < m; ++i) {
        if (!significant[i]) continue;
        if (report.records[i].r > 0.0)
            ++report.significant_positive;
        else
            ++report.significant_negative;
    }
}

}  // namespace

CorrelationReport correlate_entities(const LikeCorpus& corpus,
                                     const std::vector<LabeledUser>& labels, double threshold,
                                     bool benjamini_hochberg, int threads) {
    if (labels.size() < 3) throw InputError("correlation screen needs at least 3 labeled users");
    const std::size_t n = labels.size();
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = labels[i].ddr;
    double mean_y = 0.0;
    for (double v : y) mean_y += v;
    mean_y /= static_cast<double>(n);
    double syy = 0.0;
    for (double v : y) syy += (v - mean_y) * (v - mean_y);

    // One CSR pass gives, per entity, the count of labeled likers m and the
    // ddr sum over them. For a binary indicator column those two numbers pin
    // the correlation: r = (s1 - m*ybar) / sqrt(m(1 - m/n) * syy).
    const std::size_t cols = corpus.num_entities();
    std::vector<std::uint64_t> ones(cols, 0);
    std::vector<double> sum_y_ones(cols, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::uint32_t e : corpus.likes_of(labels[i].user)) {
            ++ones[e];
            sum_y_ones[e] += y[i];
        }
    }

    CorrelationReport report;
    report.threshold = threshold;
    std::vector<double> rs(cols, 0.0);
    std::vector<std::uint8_t> keep(cols, 0);
    const int workers = std::max(1, threads);
    auto run = [&](std::size_t begin, std::size_t end) {
        for (std::size_t e = begin; e < end; ++e) {
            if (ones[e] == 0 || ones[e] == n || syy == 0.0) continue;
            const double m = static_cast<double>(ones[e]);
            const double sxx = m * (1.0 - m / static_cast<double>(n));
            rs[e] = (sum_y_ones[e] - m * mean_y) / std::sqrt(sxx * syy);
            keep[e] = 1;
        }
    };
    if (workers == 1 || cols < 64) {
        run(0, cols);
    } else {
        std::vector<std::thread> pool;
        const std::size_t chunk = (cols + workers - 1) / workers;
        for (int w = 0; w < workers; ++w) {
            const std::size_t begin = std::min(cols, static_cast<std::size_t>(w) * chunk);
            const std::size_t end = std::min(cols, begin + chunk);
            if (begin < end) pool.emplace_back(run, begin, end);
        }
        for (auto& th : pool) th.join();
    }

    report.records.reserve(cols);
    for (std::size_t e = 0; e < cols; ++e) {
        if (!keep[e]) {
            ++report.skipped_constant;
            continue;
        }
        report.records.push_back({corpus.entity_ids[e], rs[e], p_value(rs[e], n), n});
    }
    finalize_report(report, benjamini_hochberg);
    return report;
}

CorrelationReport correlate_topics(std::span<const double> user_topic_proportions,
                                   std::size_t num_topics, const std::vector<LabeledUser>& labels,
                                   double threshold, bool benjamini_hochberg, int threads) {
    if (labels.size() < 3) throw InputError("correlation screen needs at least 3 labeled users");
    if (num_topics == 0 || user_topic_proportions.size() % num_topics != 0)
        throw InputError("proportions matrix shape mismatch");
    const std::size_t num_users = user_topic_proportions.size() / num_topics;
    const std::size_t n = labels.size();
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (labels[i].user >= num_users) throw InputError("label refers to a missing user row");
        y[i] = labels[i].ddr;
    }

    CorrelationReport report;
    report.threshold = threshold;
    std::vector<CorrelationRecord> records(num_topics);
    std::vector<std::uint8_t> keep(num_topics, 0);
    const int workers = std::max(1, threads);
    auto run = [&](std::size_t begin, std::size_t end) {
        std::vector<double> col(n);
        for (std::size_t t = begin; t < end; ++t) {
            for (std::size_t i = 0; i < n; ++i)
                col[i] = user_topic_proportions[labels[i].user * num_topics + t];
            bool constant = true;
            for (std::size_t i = 1; i < n && constant; ++i) constant = col[i] == col[0];
            bool y_constant = true;
            for (std::size_t i = 1; i < n && y_constant; ++i) y_constant = y[i] == y[0];
            if (constant || y_constant) continue;
            const double r = pearson(col, y);
            records[t] = {"topic" + std::to_string(t), r, p_value(r, n), n};
            keep[t] = 1;
        }
    };
    if (workers == 1 || num_topics < 64) {
        run(0, num_topics);
    } else {
        std::vector<std::thread> pool;
        const std::size_t chunk = (num_topics + workers - 1) / workers;
        for (int w = 0; w < workers; ++w) {
            const std::size_t begin = std::min(num_topics, static_cast<std::size_t>(w) * chunk);
            const std::size_t end = std::min(num_topics, begin + chunk);
            if (begin < end) pool.emplace_back(run, begin, end);
        }
        for (auto& th : pool) th.join();
    }
    for (std::size_t t = 0; t < num_topics; ++t) {
        if (keep[t])
            report.records.push_back(std::move(records[t]));
        else
            ++report.skipped_constant;
    }
    finalize_report(report, benjamini_hochberg);
    return report;
}

void write_correlation_report(const std::filesystem::path& path, const CorrelationReport& report) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write report: " + path.string());
    out << "# feature_id\tr\tp\tn\tsign\n";
    out << "# threshold " << report.threshold << " significant_positive "
        << report.significant_positive << " significant_negative " << report.significant_negative
        << " skipped_constant " << report.skipped_constant << '\n';
    char rbuf[64], pbuf[64];
    for (const auto& rec : report.records) {
        std::snprintf(rbuf, sizeof rbuf, "%.17g", rec.r);
        std::snprintf(pbuf, sizeof pbuf, "%.17g", rec.p);
        out << rec.feature_id << '\t' << rbuf << '\t' << pbuf << '\t' << rec.n << '\t'
            << (rec.r >= 0.0 ? '+' : '-') << '\n';
    }
    if (!out) throw InputError("write failed: " + path.string());
}

CorrelationReport read_correlation_report(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open report: " + path.string());
    CorrelationReport report;
    std::string line;
    bool header_seen = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream ss(line.substr(1));
            std::string key;
            ss >> key;
            if (key == "threshold") {
                header_seen = true;
                ss >> report.threshold;
                std::string k2;
                while (ss >> k2) {
                    if (k2 == "significant_positive") ss >> report.significant_positive;
                    if (k2 == "significant_negative") ss >> report.significant_negative;
                    if (k2 == "skipped_constant") ss >> report.skipped_constant;
                }
            }
            continue;
        }
        std::istringstream ss(line);
        CorrelationRecord rec;
        char sign = 0;
        if (!(ss >> rec.feature_id >> rec.r >> rec.p >> rec.n >> sign))
            throw FormatError("malformed report line in " + path.string());
        report.records.push_back(std::move(rec));
    }
    if (!header_seen) throw FormatError("missing report header in " + path.string());
    return report;
}

std::vector<CorrelationRecord> top_correlated(const CorrelationReport& report, std::size_t k,
                                              int sign) {
    std::vector<CorrelationRecord> out;
    for (const auto& rec : report.records) {
        if (sign > 0 && rec.r <= 0.0) continue;
        if (sign < 0 && rec.r >= 0.0) continue;
        out.push_back(rec);
        if (out.size() == k) break;
    }
    return out;
}

}  // namespace ule
