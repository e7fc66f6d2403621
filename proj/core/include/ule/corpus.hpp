#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace ule {

// Deduplicated binary user x entity incidence in CSR layout. Immutable after
// construction; safe to share across threads.
struct LikeCorpus {
    std::vector<std::string> user_ids;    // dense index -> id, first-appearance order
    std::vector<std::string> entity_ids;  // dense index -> id
    std::unordered_map<std::string, std::uint32_t> user_index;
    std::unordered_map<std::string, std::uint32_t> entity_index;
    std::vector<std::uint64_t> row_ptr;       // size num_users()+1
    std::vector<std::uint32_t> col_idx;       // per-user entity indices, sorted ascending
    std::vector<std::uint64_t> entity_count;  // column sums

    std::size_t num_users() const { return user_ids.size(); }
    std::size_t num_entities() const { return entity_ids.size(); }
    std::uint64_t num_pairs() const { return row_ptr.empty() ? 0 : row_ptr.back(); }

    std::span<const std::uint32_t> likes_of(std::uint32_t user) const {
        return {col_idx.data() + row_ptr[user],
                static_cast<std::size_t>(row_ptr[user + 1] - row_ptr[user])};
    }
    std::uint64_t user_degree(std::uint32_t user) const {
        return row_ptr[user + 1] - row_ptr[user];
    }

    void check_consistent() const;  // validates the CSR invariants; throws on violation
};

// Builds a corpus from raw (user_id, entity_id) pairs. Duplicates collapse,
// vocabularies index by first appearance.
LikeCorpus ingest_pairs(const std::vector<std::pair<std::string, std::string>>& pairs);

// Single pass: drop entities below min_entity_likes (counts over the input),
// then users whose remaining degree is below min_user_likes. With
// fixed_point=true the two steps repeat until stable.
LikeCorpus filter_corpus(const LikeCorpus& corpus, std::uint64_t min_user_likes,
                         std::uint64_t min_entity_likes, bool fixed_point = false);

struct DegreeHistogram {
    // {bucket lower bound, count}; buckets are powers of two for log-log plots.
    std::vector<std::pair<std::uint64_t, std::uint64_t>> buckets;
    std::uint64_t total = 0;
};

std::pair<DegreeHistogram, DegreeHistogram> degree_distribution(const LikeCorpus& corpus);

struct UserStatFeatures {
    std::uint64_t num_likes = 0;
    double avg_entity_popularity = 0.0;  // mean like-count of liked entities
};

UserStatFeatures user_stat_features(const LikeCorpus& corpus, std::uint32_t user);

struct LabeledUser {
    std::uint32_t user = 0;  // corpus index
    double ddr = 0.0;
};

// Users present in both the corpus and the label table, ascending index order.
std::vector<LabeledUser> align_labels(const LikeCorpus& corpus,
                                      const std::unordered_map<std::string, double>& ddr_table);

// Pairs file: user_id<TAB>entity_id, one per line, '#' comments ignored.
LikeCorpus read_pairs_file(const std::filesystem::path& path);
void write_pairs_file(const std::filesystem::path& path, const LikeCorpus& corpus);

// Versioned text snapshot of a corpus (vocabularies plus CSR rows).
void write_corpus_snapshot(const std::filesystem::path& path, const LikeCorpus& corpus);
LikeCorpus read_corpus_snapshot(const std::filesystem::path& path);

std::unordered_map<std::string, double> read_label_table(const std::filesystem::path& path);

}  // namespace ule
