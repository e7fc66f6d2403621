#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "ule/corpus.hpp"

namespace ule {

struct CorrelationRecord {
    std::string feature_id;
    double r = 0.0;
    double p = 1.0;
    std::uint64_t n = 0;
};

struct CorrelationReport {
    std::vector<CorrelationRecord> records;  // sorted by p ascending
    double threshold = 0.05;
    std::uint64_t significant_positive = 0;
    std::uint64_t significant_negative = 0;
    std::uint64_t skipped_constant = 0;  // constant columns never reach the records
};

// Sample Pearson correlation; throws on length mismatch, n < 2, or a constant
// input.
double pearson(std::span<const double> x, std::span<const double> y);

// Two-sided p for the null of zero correlation: t = r sqrt(n-2) / sqrt(1-r^2)
// against Student's t with n-2 degrees of freedom.
double p_value(double r, std::uint64_t n);

// One record per entity, correlating the binary like indicator (restricted to
// labeled users) with ddr. With benjamini_hochberg the significance flags use
// BH-adjusted p-values; raw p's are always reported.
CorrelationReport correlate_entities(const LikeCorpus& corpus,
                                     const std::vector<LabeledUser>& labels,
                                     double threshold = 0.05, bool benjamini_hochberg = false,
                                     int threads = 1);

// Same screen over real-valued per-user topic proportions (rows aligned with
// corpus user indices, num_topics columns).
CorrelationReport correlate_topics(std::span<const double> user_topic_proportions,
                                   std::size_t num_topics,
                                   const std::vector<LabeledUser>& labels,
                                   double threshold = 0.05, bool benjamini_hochberg = false,
                                   int threads = 1);

// Report file: feature_id r p n sign, tab-separated, sorted by p.
void write_correlation_report(const std::filesystem::path& path, const CorrelationReport& report);
CorrelationReport read_correlation_report(const std::filesystem::path& path);

// Top-K positively and top-K negatively correlated records, most significant
// first (the paper-table layout).
std::vector<CorrelationRecord> top_correlated(const CorrelationReport& report, std::size_t k,
                                              int sign);

}  // namespace ule
