#include "ule/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "ule/discounting.hpp"
#include "ule/error.hpp"

namespace ule {

void LikeCorpus::check_consistent() const {
    if (row_ptr.size() != num_users() + 1) throw InputError("corpus: row_ptr size mismatch");
    if (entity_count.size() != num_entities())
        throw InputError("corpus: entity_count size mismatch");
    std::vector<std::uint64_t> recount(num_entities(), 0);
    for (std::size_t u = 0; u < num_users(); ++u) {
        if (row_ptr[u] > row_ptr[u + 1]) throw InputError("corpus: row_ptr not nondecreasing");
        std::uint32_t prev = 0;
        bool first = true;
        for (std::uint64_t i = row_ptr[u]; i < row_ptr[u + 1]; ++i) {
            const std::uint32_t e = col_idx[i];
            if (e >= num_entities()) throw InputError("corpus: entity index out of range");
            if (!first && e <= prev) throw InputError("corpus: row not sorted or has duplicates");
            prev = e;
            first = false;
            ++recount[e];
        }
    }
    for (std::size_t e = 0; e < num_entities(); ++e)
        if (recount[e] != entity_count[e]) throw InputError("corpus: entity counts inconsistent");
}

LikeCorpus ingest_pairs(const std::vector<std::pair<std::string, std::string>>& pairs) {
    if (pairs.empty()) throw InputError("no pairs to ingest: corpus would be empty");
    LikeCorpus c;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
    edges.reserve(pairs.size());
    for (const auto& [user, entity] : pairs) {
        auto [uit, unew] = c.user_index.try_emplace(user, c.user_ids.size());
        if (unew) c.user_ids.push_back(user);
        auto [eit, enew] = c.entity_index.try_emplace(entity, c.entity_ids.size());
        if (enew) c.entity_ids.push_back(entity);
        edges.emplace_back(uit->second, eit->second);
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

    c.row_ptr.assign(c.num_users() + 1, 0);
    c.entity_count.assign(c.num_entities(), 0);
    for (const auto& [u, e] : edges) {
        ++c.row_ptr[u + 1];
        ++c.entity_count[e];
    }
    for (std::size_t u = 0; u < c.num_users(); ++u) c.row_ptr[u + 1] += c.row_ptr[u];
    c.col_idx.resize(edges.size());
    std::vector<std::uint64_t> cursor(c.row_ptr.begin(), c.row_ptr.end() - 1);
    for (const auto& [u, e] : edges) c.col_idx[cursor[u]++] = e;
    return c;
}

namespace {

LikeCorpus filter_once(const LikeCorpus& corpus, std::uint64_t min_user_likes,
                       std::uint64_t min_entity_likes, bool& changed) {
    std::vector<bool> keep_entity(corpus.num_entities());
    for (std::size_t e = 0; e < corpus.num_entities(); ++e)
        keep_entity[e] = corpus.entity_count[e] >= min_entity_likes;

    // Dense reindexing, ascending in the old index order.
    std::vector<std::uint32_t> entity_map(corpus.num_entities(), UINT32_MAX);
    LikeCorpus out;
    for (std::size_t e = 0; e < corpus.num_entities(); ++e) {
        if (!keep_entity[e]) continue;
        entity_map[e] = static_cast<std::uint32_t>(out.entity_ids.size());
        out.entity_ids.push_back(corpus.entity_ids[e]);
    }
    out.entity_count.assign(out.entity_ids.size(), 0);

    for (std::size_t u = 0; u < corpus.num_users(); ++u) {
        auto likes = corpus.likes_of(static_cast<std::uint32_t>(u));
        std::uint64_t degree = 0;
        for (std::uint32_t e : likes) degree += keep_entity[e] ? 1 : 0;
        if (degree < min_user_likes || degree == 0) continue;
        out.user_ids.push_back(corpus.user_ids[u]);
        out.row_ptr.push_back(out.col_idx.size());
        for (std::uint32_t e : likes) {
            if (!keep_entity[e]) continue;
            const std::uint32_t ne = entity_map[e];
            out.col_idx.push_back(ne);
            ++out.entity_count[ne];
        }
    }
    out.row_ptr.push_back(out.col_idx.size());

    out.user_index.reserve(out.user_ids.size());
    for (std::size_t u = 0; u < out.user_ids.size(); ++u)
        out.user_index.emplace(out.user_ids[u], static_cast<std::uint32_t>(u));
    out.entity_index.reserve(out.entity_ids.size());
    for (std::size_t e = 0; e < out.entity_ids.size(); ++e)
        out.entity_index.emplace(out.entity_ids[e], static_cast<std::uint32_t>(e));

    changed = out.num_users() != corpus.num_users() || out.num_entities() != corpus.num_entities();
    if (out.col_idx.empty())
        throw InputError("filter removed every pair (thresholds " +
                         std::to_string(min_user_likes) + "/" + std::to_string(min_entity_likes) +
                         ")");
    return out;
}

}  // namespace

LikeCorpus filter_corpus(const LikeCorpus& corpus, std::uint64_t min_user_likes,
                         std::uint64_t min_entity_likes, bool fixed_point) {
    bool changed = false;
    LikeCorpus out = filter_once(corpus, min_user_likes, min_entity_likes, changed);
    while (fixed_point && changed) out = filter_once(out, min_user_likes, min_entity_likes, changed);
    return out;
}

namespace {

DegreeHistogram log_binned(const std::vector<std::uint64_t>& degrees) {
    DegreeHistogram h;
    std::vector<std::uint64_t> counts;
    for (std::uint64_t d : degrees) {
        if (d == 0) continue;
        std::size_t bucket = 0;
        while ((1ULL << (bucket + 1)) <= d) ++bucket;
        if (counts.size() <= bucket) counts.resize(bucket + 1, 0);
        ++counts[bucket];
        ++h.total;
    }
    for (std::size_t b = 0; b < counts.size(); ++b)
        if (counts[b] > 0) h.buckets.emplace_back(1ULL << b, counts[b]);
    return h;
}

}  // namespace

std::pair<DegreeHistogram, DegreeHistogram> degree_distribution(const LikeCorpus& corpus) {
    if (corpus.num_pairs() == 0) throw InputError("degree distribution of an empty corpus");
    std::vector<std::uint64_t> user_deg(corpus.num_users());
    for (std::size_t u = 0; u < corpus.num_users(); ++u)
        user_deg[u] = corpus.user_degree(static_cast<std::uint32_t>(u));
    return {log_binned(user_deg), log_binned(corpus.entity_count)};
}

UserStatFeatures user_stat_features(const LikeCorpus& corpus, std::uint32_t user) {
    if (user >= corpus.num_users()) throw LookupError("unknown user index");
    auto likes = corpus.likes_of(user);
    UserStatFeatures f;
    f.num_likes = likes.size();
    if (likes.empty()) return f;
    double sum = 0.0;
    for (std::uint32_t e : likes) sum += static_cast<double>(corpus.entity_count[e]);
    f.avg_entity_popularity = sum / static_cast<double>(likes.size());
    return f;
}

std::vector<LabeledUser> align_labels(const LikeCorpus& corpus,
                                      const std::unordered_map<std::string, double>& ddr_table) {
    std::vector<LabeledUser> out;
    for (std::size_t u = 0; u < corpus.num_users(); ++u) {
        auto it = ddr_table.find(corpus.user_ids[u]);
        if (it != ddr_table.end()) out.push_back({static_cast<std::uint32_t>(u), it->second});
    }
    if (out.empty()) throw InputError("no corpus user carries a ddr label");
    return out;
}

LikeCorpus read_pairs_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open pairs file: " + path.string());
    std::vector<std::pair<std::string, std::string>> pairs;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos || tab == 0 || tab + 1 >= line.size())
            throw InputError("malformed pair at line " + std::to_string(line_no) + " in " +
                             path.string());
        std::string entity = line.substr(tab + 1);
        if (!entity.empty() && entity.back() == '\r') entity.pop_back();
        if (entity.empty())
            throw InputError("malformed pair at line " + std::to_string(line_no) + " in " +
                             path.string());
        pairs.emplace_back(line.substr(0, tab), std::move(entity));
    }
    if (pairs.empty()) throw InputError("pairs file has no pairs: " + path.string());
    return ingest_pairs(pairs);
}

void write_pairs_file(const std::filesystem::path& path, const LikeCorpus& corpus) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write pairs file: " + path.string());
    for (std::size_t u = 0; u < corpus.num_users(); ++u)
        for (std::uint32_t e : corpus.likes_of(static_cast<std::uint32_t>(u)))
            out << corpus.user_ids[u] << '\t' << corpus.entity_ids[e] << '\n';
    if (!out) throw InputError("write failed: " + path.string());
}

namespace {
constexpr const char* SNAPSHOT_MAGIC = "ulecorpus";
constexpr int SNAPSHOT_VERSION = 1;
}  // namespace

void write_corpus_snapshot(const std::filesystem::path& path, const LikeCorpus& corpus) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write corpus snapshot: " + path.string());
    out << SNAPSHOT_MAGIC << ' ' << SNAPSHOT_VERSION << '\n';
    out << corpus.num_users() << ' ' << corpus.num_entities() << ' ' << corpus.num_pairs() << '\n';
    for (const auto& id : corpus.user_ids) out << id << '\n';
    for (const auto& id : corpus.entity_ids) out << id << '\n';
    for (std::size_t u = 0; u < corpus.num_users(); ++u) {
        auto likes = corpus.likes_of(static_cast<std::uint32_t>(u));
        out << likes.size();
        for (std::uint32_t e : likes) out << ' ' << e;
        out << '\n';
    }
    if (!out) throw InputError("write failed: " + path.string());
}

LikeCorpus read_corpus_snapshot(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open corpus snapshot: " + path.string());
    std::string magic;
    int version = 0;
    if (!(in >> magic >> version) || magic != SNAPSHOT_MAGIC)
        throw FormatError("not a corpus snapshot: " + path.string());
    if (version != SNAPSHOT_VERSION)
        throw FormatError("unsupported snapshot version " + std::to_string(version));
    std::size_t users = 0, entities = 0;
    std::uint64_t pairs = 0;
    if (!(in >> users >> entities >> pairs))
        throw FormatError("truncated snapshot header: " + path.string());
    LikeCorpus c;
    c.user_ids.resize(users);
    c.entity_ids.resize(entities);
    for (auto& id : c.user_ids)
        if (!(in >> id)) throw FormatError("truncated user vocabulary: " + path.string());
    for (auto& id : c.entity_ids)
        if (!(in >> id)) throw FormatError("truncated entity vocabulary: " + path.string());
    c.row_ptr.assign(users + 1, 0);
    c.col_idx.reserve(pairs);
    c.entity_count.assign(entities, 0);
    for (std::size_t u = 0; u < users; ++u) {
        std::size_t degree = 0;
        if (!(in >> degree)) throw FormatError("truncated snapshot row: " + path.string());
        for (std::size_t i = 0; i < degree; ++i) {
            std::uint32_t e = 0;
            if (!(in >> e) || e >= entities)
                throw FormatError("bad entity index in snapshot: " + path.string());
            c.col_idx.push_back(e);
            ++c.entity_count[e];
        }
        c.row_ptr[u + 1] = c.col_idx.size();
    }
    if (c.col_idx.size() != pairs) throw FormatError("snapshot pair count mismatch");
    c.user_index.reserve(users);
    for (std::size_t u = 0; u < users; ++u)
        c.user_index.emplace(c.user_ids[u], static_cast<std::uint32_t>(u));
    c.entity_index.reserve(entities);
    for (std::size_t e = 0; e < entities; ++e)
        c.entity_index.emplace(c.entity_ids[e], static_cast<std::uint32_t>(e));
    c.check_consistent();
    return c;
}

std::unordered_map<std::string, double> read_label_table(const std::filesystem::path& path) {
    std::unordered_map<std::string, double> table;
    for (auto& [user, ddr] : read_ddr_labels(path)) table[user] = ddr;
    return table;
}

}  // namespace ule
