#include "ule/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <thread>
#include <unordered_set>

#include <json.hpp>

#include "ule/error.hpp"
#include "ule/rng.hpp"

namespace ule {

namespace {

// Stream salts so the per-user substream order never depends on call sites.
constexpr std::uint64_t SALT_DDR = 0x01;
constexpr std::uint64_t SALT_MIXTURE = 0x02;
constexpr std::uint64_t SALT_LIKES = 0x03;
constexpr std::uint64_t SALT_LABELS = 0x04;

// Share of a topic's probability mass kept on its home entities; the rest is
// spread over the full Zipf-weighted vocabulary.
constexpr double HOME_MASS = 0.9;
constexpr double BASE_LOADING_SIGMA = 1.5;

// Vose alias table for O(1) categorical draws.
class AliasTable {
  public:
    explicit AliasTable(const std::vector<double>& weights) {
        const std::size_t n = weights.size();
        prob_.resize(n);
        alias_.resize(n);
        double total = 0.0;
        for (double w : weights) total += w;
        std::vector<double> scaled(n);
        std::vector<std::uint32_t> small, large;
        for (std::size_t i = 0; i < n; ++i) {
            scaled[i] = weights[i] * static_cast<double>(n) / total;
            (scaled[i] < 1.0 ? small : large).push_back(static_cast<std::uint32_t>(i));
        }
        while (!small.empty() && !large.empty()) {
            const std::uint32_t s = small.back();
            small.pop_back();
            const std::uint32_t l = large.back();
            large.pop_back();
            prob_[s] = scaled[s];
            alias_[s] = l;
            scaled[l] = (scaled[l] + scaled[s]) - 1.0;
            (scaled[l] < 1.0 ? small : large).push_back(l);
        }
        for (std::uint32_t i : large) prob_[i] = 1.0;
        for (std::uint32_t i : small) prob_[i] = 1.0;
    }

    std::uint32_t sample(Rng& rng) const {
        const std::size_t i = static_cast<std::size_t>(rng.next_below(prob_.size()));
        return rng.next_double() < prob_[i] ? static_cast<std::uint32_t>(i) : alias_[i];
    }

  private:
    std::vector<double> prob_;
    std::vector<std::uint32_t> alias_;
};

std::string indexed_id(char prefix, std::uint32_t index) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%c%06u", prefix, index);
    return buf;
}

}  // namespace

std::uint32_t parse_generated_index(const std::string& id) {
    if (id.size() < 2) throw InputError("not a generated id: " + id);
    return static_cast<std::uint32_t>(std::stoul(id.substr(1)));
}

void SynthConfig::validate() const {
    if (num_users == 0 || num_entities == 0) throw ConfigError("users and entities must be positive");
    if (num_topics < 1) throw ConfigError("need at least one topic");
    if (num_signal_topics < 0 || num_signal_topics > num_topics)
        throw ConfigError("signal topics must lie in [0, num_topics]");
    if (signal_strength < 0.0) throw ConfigError("signal strength must be nonnegative");
    if (!(labeled_fraction > 0.0 && labeled_fraction <= 1.0))
        throw ConfigError("labeled fraction must be in (0, 1]");
    if (min_likes < 1) throw ConfigError("min likes per user must be at least 1");
    if (min_likes > num_entities)
        throw ConfigError("likes per user cannot exceed the number of entities");
    if (likes_sigma < 0.0) throw ConfigError("likes_sigma must be nonnegative");
    if (ddr_stddev < 0.0) throw ConfigError("ddr stddev must be nonnegative");
}

SynthResult generate(const SynthConfig& config) {
    config.validate();
    const std::uint32_t U = config.num_users;
    const std::uint32_t V = config.num_entities;
    const int T = config.num_topics;
    const Rng root(config.rng_seed);

    SynthTruth truth;
    truth.signal_topics.resize(config.num_signal_topics);
    truth.signal_signs.resize(config.num_signal_topics);
    for (int j = 0; j < config.num_signal_topics; ++j) {
        truth.signal_topics[j] = j;
        truth.signal_signs[j] = (j % 2 == 0) ? 1 : -1;
    }

    // Entity base popularity: Zipf over the generation index.
    std::vector<double> zipf(V);
    for (std::uint32_t e = 0; e < V; ++e)
        zipf[e] = 1.0 / std::pow(static_cast<double>(e) + 1.0, config.popularity_exponent);

    // Topic-entity rows: home entities (dealt round-robin across topics) carry
    // HOME_MASS, the remainder follows base popularity everywhere.
    double zipf_total = 0.0;
    for (double w : zipf) zipf_total += w;
    std::vector<double> home_total(T, 0.0);
    for (std::uint32_t e = 0; e < V; ++e) home_total[e % T] += zipf[e];
    truth.topic_entity.assign(T, std::vector<double>(V));
    for (int t = 0; t < T; ++t) {
        for (std::uint32_t e = 0; e < V; ++e) {
            double p = (1.0 - HOME_MASS) * zipf[e] / zipf_total;
            if (static_cast<int>(e % T) == t) p += HOME_MASS * zipf[e] / home_total[t];
            truth.topic_entity[t][e] = p;
        }
    }
    std::vector<AliasTable> topic_alias;
    topic_alias.reserve(T);
    for (int t = 0; t < T; ++t) topic_alias.emplace_back(truth.topic_entity[t]);

    // Per-user ddr, mixture, and like count. Signal topics get a compensating
    // base offset so the population-average loading stays centered and the
    // ddr-driven term only moves users relative to each other.
    truth.ddr.resize(U);
    truth.user_mixture.assign(U, std::vector<double>(T));
    truth.likes_per_user.resize(U);
    std::vector<std::vector<std::uint32_t>> likes(U);

    const auto generate_user = [&](std::uint32_t u) {
        Rng ddr_rng = root.substream(SALT_DDR * U + u);
        const double ddr = ddr_rng.next_normal(config.ddr_mean, config.ddr_stddev);
        truth.ddr[u] = ddr;

        Rng mix_rng = root.substream(SALT_MIXTURE * U + u);
        auto& mixture = truth.user_mixture[u];
        double max_loading = -1e300;
        for (int t = 0; t < T; ++t) {
            double loading = mix_rng.next_normal(0.0, BASE_LOADING_SIGMA);
            if (t < config.num_signal_topics) {
                const double sign = truth.signal_signs[t];
                loading += config.signal_strength * sign * (ddr - config.ddr_mean);
            }
            mixture[t] = loading;
            max_loading = std::max(max_loading, loading);
        }
        double z = 0.0;
        for (int t = 0; t < T; ++t) {
            mixture[t] = std::exp(mixture[t] - max_loading);
            z += mixture[t];
        }
        for (int t = 0; t < T; ++t) mixture[t] /= z;

        Rng like_rng = root.substream(SALT_LIKES * U + u);
        const double raw = std::exp(like_rng.next_normal(config.likes_mu, config.likes_sigma));
        std::uint32_t count = static_cast<std::uint32_t>(std::llround(
            std::clamp(raw, static_cast<double>(config.min_likes), static_cast<double>(V))));
        count = std::clamp(count, config.min_likes, V);
        truth.likes_per_user[u] = count;

        // Distinct draws from the mixture: topic by CDF inversion, entity via
        // the topic's alias table, duplicates rejected. If rejection stalls
        // near full coverage, fill with the lowest unused indices.
        auto& out = likes[u];
        out.reserve(count);
        std::unordered_set<std::uint32_t> seen;
        seen.reserve(count * 2);
        std::uint64_t attempts = 0;
        const std::uint64_t max_attempts = 60ULL * count + 1000;
        while (out.size() < count && attempts < max_attempts) {
            ++attempts;
            double pick = like_rng.next_double();
            int topic = 0;
            for (; topic + 1 < T; ++topic) {
                pick -= mixture[topic];
                if (pick < 0.0) break;
            }
            const std::uint32_t e = topic_alias[topic].sample(like_rng);
            if (seen.insert(e).second) out.push_back(e);
        }
        for (std::uint32_t e = 0; out.size() < count && e < V; ++e)
            if (seen.insert(e).second) out.push_back(e);
        std::sort(out.begin(), out.end());
    };

    const int workers = std::max(1, config.threads);
    if (workers == 1 || U < 256) {
        for (std::uint32_t u = 0; u < U; ++u) generate_user(u);
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&, w] {
                for (std::uint32_t u = static_cast<std::uint32_t>(w); u < U;
                     u += static_cast<std::uint32_t>(workers))
                    generate_user(u);
            });
        for (auto& th : pool) th.join();
    }

    // Assemble the corpus in generation order; entities nobody liked stay out
    // of the vocabulary.
    SynthResult result;
    LikeCorpus& c = result.corpus;
    std::vector<std::uint32_t> entity_map(V, UINT32_MAX);
    std::vector<std::uint64_t> raw_count(V, 0);
    for (std::uint32_t u = 0; u < U; ++u)
        for (std::uint32_t e : likes[u]) ++raw_count[e];
    for (std::uint32_t e = 0; e < V; ++e) {
        if (raw_count[e] == 0) continue;
        entity_map[e] = static_cast<std::uint32_t>(c.entity_ids.size());
        c.entity_ids.push_back(indexed_id('e', e));
        c.entity_count.push_back(raw_count[e]);
    }
    c.user_ids.reserve(U);
    c.row_ptr.reserve(U + 1);
    c.row_ptr.push_back(0);
    for (std::uint32_t u = 0; u < U; ++u) {
        c.user_ids.push_back(indexed_id('u', u));
        for (std::uint32_t e : likes[u]) c.col_idx.push_back(entity_map[e]);
        c.row_ptr.push_back(c.col_idx.size());
    }
    c.user_index.reserve(U);
    for (std::uint32_t u = 0; u < U; ++u) c.user_index.emplace(c.user_ids[u], u);
    c.entity_index.reserve(c.entity_ids.size());
    for (std::size_t e = 0; e < c.entity_ids.size(); ++e)
        c.entity_index.emplace(c.entity_ids[e], static_cast<std::uint32_t>(e));

    // Labeled subset: a seeded sample of users, emitted in index order.
    const std::uint64_t want =
        std::max<std::uint64_t>(1, static_cast<std::uint64_t>(
                                       std::llround(config.labeled_fraction * static_cast<double>(U))));
    std::vector<std::uint32_t> order(U);
    for (std::uint32_t u = 0; u < U; ++u) order[u] = u;
    Rng label_rng = root.substream(SALT_LABELS * static_cast<std::uint64_t>(U));
    label_rng.shuffle(order);
    order.resize(std::min<std::uint64_t>(want, U));
    std::sort(order.begin(), order.end());
    result.labels.reserve(order.size());
    for (std::uint32_t u : order) result.labels.emplace_back(c.user_ids[u], truth.ddr[u]);
    result.truth = std::move(truth);
    return result;
}

void write_truth_json(const std::filesystem::path& path, const SynthTruth& truth) {
    nlohmann::json j;
    j["ddr"] = truth.ddr;
    j["topic_entity"] = truth.topic_entity;
    j["user_mixture"] = truth.user_mixture;
    j["signal_topics"] = truth.signal_topics;
    j["signal_signs"] = truth.signal_signs;
    j["likes_per_user"] = truth.likes_per_user;
    std::ofstream out(path);
    if (!out) throw InputError("cannot write truth file: " + path.string());
    out << j.dump() << '\n';
    if (!out) throw InputError("write failed: " + path.string());
}

SynthTruth read_truth_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open truth file: " + path.string());
    nlohmann::json j;
    in >> j;
    SynthTruth truth;
    truth.ddr = j.at("ddr").get<std::vector<double>>();
    truth.topic_entity = j.at("topic_entity").get<std::vector<std::vector<double>>>();
    truth.user_mixture = j.at("user_mixture").get<std::vector<std::vector<double>>>();
    truth.signal_topics = j.at("signal_topics").get<std::vector<int>>();
    truth.signal_signs = j.at("signal_signs").get<std::vector<int>>();
    truth.likes_per_user = j.at("likes_per_user").get<std::vector<std::uint32_t>>();
    return truth;
}

}  // namespace ule
