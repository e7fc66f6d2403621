// Command-line front end for the full pipeline:
//   synth -> filter -> ddr-score -> embed -> correlate -> train -> sweep -> report
//
// Exit codes: 0 success, 1 internal error, 2 usage or input error,
// 3 numeric divergence.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ule/analysis.hpp"
#include "ule/corpus.hpp"
#include "ule/discounting.hpp"
#include "ule/embedding.hpp"
#include "ule/error.hpp"
#include "ule/manifest.hpp"
#include "ule/predict.hpp"
#include "ule/svgplot.hpp"
#include "ule/synthgen.hpp"

namespace {

using Clock = std::chrono::steady_clock;

struct CommonOpts {
    std::uint64_t seed = 1;
    int threads = 1;
    bool deterministic = true;
    std::uint64_t min_user_likes = 50;
    std::uint64_t min_entity_likes = 800;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--seed", opts.seed, "Random seed")->capture_default_str();
    cmd->add_option("--threads", opts.threads, "Worker threads")->capture_default_str();
    cmd->add_flag("--deterministic,!--fast", opts.deterministic,
                  "Serialized updates and reproducible outputs (--fast permits lock-free SGD)")
        ->capture_default_str();
}

void add_filter_opts(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--min-user-likes", opts.min_user_likes,
                    "Drop users with fewer remaining likes")
        ->capture_default_str();
    cmd->add_option("--min-entity-likes", opts.min_entity_likes,
                    "Drop entities with fewer likes")
        ->capture_default_str();
}

ule::LikeCorpus load_corpus(const std::string& pairs_path, const std::string& snapshot_path,
                            const CommonOpts& opts) {
    if (!snapshot_path.empty()) return ule::read_corpus_snapshot(snapshot_path);
    ule::LikeCorpus corpus = ule::read_pairs_file(pairs_path);
    if (opts.min_user_likes > 0 || opts.min_entity_likes > 0)
        corpus = ule::filter_corpus(corpus, opts.min_user_likes, opts.min_entity_likes);
    return corpus;
}

std::vector<ule::LabeledUser> load_labels(const ule::LikeCorpus& corpus,
                                          const std::string& labels_path) {
    return ule::align_labels(corpus, ule::read_label_table(labels_path));
}

std::vector<std::string> split_list(const std::string& csv) {
    std::vector<std::string> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

// ---------------------------------------------------------------- synth ----

struct SynthOpts {
    ule::SynthConfig config;
    std::string out_pairs = "pairs.tsv";
    std::string out_labels = "labels.tsv";
    std::string out_truth = "truth.json";
};

int run_synth(const SynthOpts& opts, const CommonOpts& common) {
    const auto start = Clock::now();
    ule::SynthConfig cfg = opts.config;
    cfg.rng_seed = common.seed;
    cfg.threads = common.threads;
    const ule::SynthResult result = ule::generate(cfg);
    ule::write_pairs_file(opts.out_pairs, result.corpus);
    ule::write_ddr_labels(opts.out_labels, result.labels);
    ule::write_truth_json(opts.out_truth, result.truth);

    ule::RunManifest manifest;
    manifest.command = "synth";
    manifest.seed = cfg.rng_seed;
    manifest.config["users"] = std::to_string(cfg.num_users);
    manifest.config["entities"] = std::to_string(cfg.num_entities);
    manifest.config["topics"] = std::to_string(cfg.num_topics);
    manifest.config["signal_topics"] = std::to_string(cfg.num_signal_topics);
    manifest.config["signal_strength"] = fmt_double(cfg.signal_strength);
    manifest.config["labeled_fraction"] = fmt_double(cfg.labeled_fraction);
    manifest.config["likes_mu"] = fmt_double(cfg.likes_mu);
    manifest.config["likes_sigma"] = fmt_double(cfg.likes_sigma);
    manifest.config["min_likes"] = std::to_string(cfg.min_likes);
    manifest.config["popularity_exponent"] = fmt_double(cfg.popularity_exponent);
    manifest.config["threads"] = std::to_string(common.threads);
    manifest.outputs = {opts.out_pairs, opts.out_labels, opts.out_truth};
    manifest.duration_seconds = std::chrono::duration<double>(Clock::now() - start).count();
    manifest.write(opts.out_pairs);

    std::cout << "synth: " << result.corpus.num_users() << " users, "
              << result.corpus.num_entities() << " entities, " << result.corpus.num_pairs()
              << " pairs, " << result.labels.size() << " labeled\n";
    return 0;
}

// ------------------------------------------------------------ ddr-score ----

int run_ddr_score(const std::string& questionnaire, const std::string& out_path, double log_base,
                  double k_floor, const CommonOpts& common) {
    const auto start = Clock::now();
    const ule::DiscountProtocol protocol = ule::default_protocol();
    const auto questionnaires = ule::read_questionnaire_file(questionnaire, protocol);
    ule::ScoringOptions opt;
    opt.log_base = log_base;
    opt.k_floor = k_floor;
    std::vector<std::pair<std::string, double>> labels;
    labels.reserve(questionnaires.size());
    for (const auto& q : questionnaires)
        labels.emplace_back(q.user_id, ule::score_questionnaire(protocol, q, opt).ddr);
    ule::write_ddr_labels(out_path, labels);

    ule::RunManifest manifest;
    manifest.command = "ddr-score";
    manifest.seed = common.seed;
    manifest.config["log_base"] = fmt_double(log_base);
    manifest.config["k_floor"] = fmt_double(k_floor);
    manifest.input_digests[questionnaire] = ule::file_digest(questionnaire);
    manifest.outputs = {out_path};
    manifest.duration_seconds = std::chrono::duration<double>(Clock::now() - start).count();
    manifest.write(out_path);

    std::cout << "ddr-score: " << labels.size() << " users scored\n";
    return 0;
}

// --------------------------------------------------------------- filter ----

int run_filter(const std::string& pairs, const std::string& out_path, bool fixed_point,
               const CommonOpts& common) {
    const auto start = Clock::now();
    ule::LikeCorpus corpus = ule::read_pairs_file(pairs);
    const std::size_t users_before = corpus.num_users();
    const std::size_t entities_before = corpus.num_entities();
    corpus = ule::filter_corpus(corpus, common.min_user_likes, common.min_entity_likes,
                                fixed_point);
    ule::write_corpus_snapshot(out_path, corpus);

    ule::RunManifest manifest;
    manifest.command = "filter";
    manifest.seed = common.seed;
    manifest.config["min_user_likes"] = std::to_string(common.min_user_likes);
    manifest.config["min_entity_likes"] = std::to_string(common.min_entity_likes);
    manifest.config["fixed_point"] = fixed_point ? "true" : "false";
    manifest.input_digests[pairs] = ule::file_digest(pairs);
    manifest.outputs = {out_path};
    manifest.duration_seconds = std::chrono::duration<double>(Clock::now() - start).count();
    manifest.write(out_path);

    std::cout << "filter: " << users_before << " -> " << corpus.num_users() << " users, "
              << entities_before << " -> " << corpus.num_entities() << " entities\n";
    return 0;
}

// ---------------------------------------------------------------- embed ----

struct EmbedOpts {
    std::string pairs;
    std::string snapshot;
    std::string method = "svd";
    std::string out = "embedding.tsv";
    std::string entity_out;
    ule::EmbeddingConfig config;
};

int run_embed(const EmbedOpts& opts, const CommonOpts& common) {
    const auto start = Clock::now();
    const ule::LikeCorpus corpus = load_corpus(opts.pairs, opts.snapshot, common);
    ule::EmbeddingConfig cfg = opts.config;
    cfg.method = ule::method_from_string(opts.method);
    cfg.rng_seed = common.seed;
    cfg.threads = common.threads;
    cfg.deterministic = common.deterministic;
    const ule::TrainedEmbedding trained = ule::train_embedding(corpus, cfg);
    ule::write_embedding(opts.out, trained.users);
    if (!opts.entity_out.empty()) {
        if (!trained.entities)
            throw ule::ConfigError(std::string(ule::method_name(cfg.method)) +
                                   " learns no per-entity vectors");
        ule::write_embedding(opts.entity_out, *trained.entities);
    }

    ule::RunManifest manifest;
    manifest.command = "embed";
    manifest.seed = cfg.rng_seed;
    manifest.config["method"] = std::string(ule::method_name(cfg.method));
    manifest.config["dim"] = std::to_string(cfg.dim);
    manifest.config["window"] = std::to_string(cfg.window);
    manifest.config["negative"] = std::to_string(cfg.negative_samples);
    manifest.config["epochs"] = std::to_string(cfg.resolved_epochs());
    manifest.config["learning_rate"] = fmt_double(cfg.resolved_learning_rate());
    manifest.config["deterministic"] = cfg.deterministic ? "true" : "false";
    manifest.config["threads"] = std::to_string(cfg.threads);
    manifest.config["min_user_likes"] = std::to_string(common.min_user_likes);
    manifest.config["min_entity_likes"] = std::to_string(common.min_entity_likes);
    manifest.config["objective"] = trained.stats.objective_name;
    manifest.config["initial_objective"] = fmt_double(trained.stats.initial_objective);
    manifest.config["final_objective"] = fmt_double(trained.stats.final_objective);
    if (!opts.pairs.empty()) manifest.input_digests[opts.pairs] = ule::file_digest(opts.pairs);
    if (!opts.snapshot.empty())
        manifest.input_digests[opts.snapshot] = ule::file_digest(opts.snapshot);
    manifest.outputs = {opts.out};
    if (!opts.entity_out.empty()) manifest.outputs.push_back(opts.entity_out);
    manifest.duration_seconds = std::chrono::duration<double>(Clock::now() - start).count();
    manifest.write(opts.out);

    std::cout << "embed: " << ule::method_name(cfg.method) << " dim " << cfg.dim << ", objective "
              << trained.stats.initial_objective << " -> " << trained.stats.final_objective
              << '\n';
    return 0;
}

// ------------------------------------------------------------ correlate ----

struct CorrelateOpts {
    std::string pairs;
    std::string snapshot;
    std::string labels;
    std::string proportions;  // embedding file of per-user topic proportions
    std::string out = "correlations.tsv";
    double threshold = 0.05;
    bool bh = false;
    int top = 0;
};

int run_correlate(const CorrelateOpts& opts, const CommonOpts& common) {
    const auto start = Clock::now();
    const ule::LikeCorpus corpus = load_corpus(opts.pairs, opts.snapshot, common);
    const auto labels = load_labels(corpus, opts.labels);

    ule::CorrelationReport report;
    if (opts.proportions.empty()) {
        report = ule::correlate_entities(corpus, labels, opts.threshold, opts.bh, common.threads);
    } else {
        const ule::EmbeddingMatrix props = ule::read_embedding(opts.proportions);
        if (props.rows != corpus.num_users())
            throw ule::InputError("proportions row count does not match the corpus");
        report = ule::correlate_topics(props.values, props.dim, labels, opts.threshold, opts.bh,
                                       common.threads);
    }
    ule::write_correlation_report(opts.out, report);

    if (opts.top > 0) {
        const auto render = [&](int sign, const char* heading) {
            std::printf("%s\n", heading);
            for (const auto& rec : ule::top_correlated(report, opts.top, sign))
                std::printf("%s\t%+.4f\t%.3g\n", rec.feature_id.c_str(), rec.r, rec.p);
        };
        render(+1, "# positive correlation");
        render(-1, "# negative correlation");
    }

    ule::RunManifest manifest;
    manifest.command = "correlate";
    manifest.seed = common.seed;
    manifest.config["threshold"] = fmt_double(opts.threshold);
    manifest.config["benjamini_hochberg"] = opts.bh ? "true" : "false";
    manifest.config["mode"] = opts.proportions.empty() ? "entities" : "topics";
    if (!opts.pairs.empty()) manifest.input_digests[opts.pairs] = ule::file_digest(opts.pairs);
    manifest.input_digests[opts.labels] = ule::file_digest(opts.labels);
    if (!opts.proportions.empty())
        manifest.input_digests[opts.proportions] = ule::file_digest(opts.proportions);
    manifest.outputs = {opts.out};
    manifest.duration_seconds = std::chrono::duration<double>(Clock::now() - start).count();
    manifest.write(opts.out);

    std::cout << "correlate: " << report.records.size() << " features, "
              << (report.significant_positive + report.significant_negative) << " significant (+"
              << report.significant_positive << "/-" << report.significant_negative << "), "
              << report.skipped_constant << " constant skipped\n";
    return 0;
}

// ---------------------------------------------------------------- train ----

struct TrainOpts {
    std::string pairs;
    std::string snapshot;
    std::string labels;
    std::string embedding;  // empty = baseline raw likes
    std::string model = "svr";
    std::string out = "eval.tsv";
    double lambda = -1.0;
    double c = 1.0;
    double epsilon = 0.2;
    double gamma = 0.0;
    int folds = 10;
    bool no_stat_features = false;
};

int run_train(const TrainOpts& opts, const CommonOpts& common) {
    const auto start = Clock::now();
    const ule::LikeCorpus corpus = load_corpus(opts.pairs, opts.snapshot, common);
    const auto labels = load_labels(corpus, opts.labels);

    ule::ModelSpec spec;
    spec.kind = ule::model_kind_from_string(opts.model);
    spec.lambda = opts.lambda;
    spec.c = opts.c;
    spec.epsilon = opts.epsilon;
    spec.gamma = opts.gamma;

    ule::SweepTable table;
    ule::SweepRow row;
    row.users = corpus.num_users();
    if (opts.embedding.empty()) {
        const ule::FeatureMatrix feat =
            ule::build_features_baseline(corpus, labels, !opts.no_stat_features);
        row.method = "baseline";
        row.dim = 0;
        row.eval = ule::cross_validate(feat, spec, opts.folds, common.seed);
    } else {
        const ule::EmbeddingMatrix users = ule::read_embedding(opts.embedding);
        const ule::FeatureMatrix feat = ule::build_features_embedding(
            users, corpus, labels, !opts.no_stat_features, opts.embedding);
        row.method = opts.embedding;
        row.dim = static_cast<int>(users.dim);
        row.eval = ule::cross_validate(feat, spec, opts.folds, common.seed);
    }
    table.rows.push_back(row);
    ule::write_eval_table(opts.out, table);

    ule::RunManifest manifest;
    manifest.command = "train";
    manifest.seed = common.seed;
    manifest.config["model"] = row.eval.model;
    manifest.config["folds"] = std::to_string(opts.folds);
    manifest.config["features"] = row.eval.features;
    manifest.config["include_stat_features"] = opts.no_stat_features ? "false" : "true";
    if (!opts.pairs.empty()) manifest.input_digests[opts.pairs] = ule::file_digest(opts.pairs);
    manifest.input_digests[opts.labels] = ule::file_digest(opts.labels);
    if (!opts.embedding.empty())
        manifest.input_digests[opts.embedding] = ule::file_digest(opts.embedding);
    manifest.outputs = {opts.out};
    manifest.duration_seconds = std::chrono::duration<double>(Clock::now() - start).count();
    manifest.write(opts.out);

    std::printf("train: %s mean r %.4f%s\n", row.method.c_str(), row.eval.mean_r,
                row.eval.pooled_defined
                    ? (" (pooled " + std::to_string(row.eval.pooled_r) + ")").c_str()
                    : "");
    return 0;
}

// ---------------------------------------------------------------- sweep ----

struct SweepOpts {
    std::string mode = "datasize";
    std::string pairs;
    std::string snapshot;
    std::string labels;
    std::string methods = "svd,lda,ae,u-cbow,u-sg,u-glove,p-dm,p-dbow";
    std::string counts;
    std::string dims = "50,100,300,500";
    std::string out = "sweep.tsv";
    std::string csv = "sweep.csv";
    std::string model = "svr";
    double lambda = -1.0;
    double c = 1.0;
    double epsilon = 0.2;
    double gamma = 0.0;
    int folds = 10;
    ule::EmbeddingConfig base_config;
    bool no_baseline = false;
    bool no_stat_features = false;
};

int run_sweep(const SweepOpts& opts, const CommonOpts& common) {
    const auto start = Clock::now();
    const ule::LikeCorpus corpus = load_corpus(opts.pairs, opts.snapshot, common);
    const auto labels = load_labels(corpus, opts.labels);

    ule::ModelSpec spec;
    spec.kind = ule::model_kind_from_string(opts.model);
    spec.lambda = opts.lambda;
    spec.c = opts.c;
    spec.epsilon = opts.epsilon;
    spec.gamma = opts.gamma;

    std::vector<ule::EmbeddingConfig> method_configs;
    for (const std::string& name : split_list(opts.methods)) {
        ule::EmbeddingConfig cfg = opts.base_config;
        cfg.method = ule::method_from_string(name);
        cfg.rng_seed = common.seed;
        cfg.threads = common.threads;
        cfg.deterministic = common.deterministic;
        method_configs.push_back(cfg);
    }
    if (method_configs.empty()) throw ule::ConfigError("no methods requested");

    ule::SweepTable table;
    std::string x_field;
    if (opts.mode == "datasize") {
        if (opts.counts.empty()) throw ule::ConfigError("datasize sweep needs --counts");
        std::vector<std::uint64_t> counts;
        for (const std::string& c : split_list(opts.counts)) counts.push_back(std::stoull(c));
        table = ule::sweep_datasize(corpus, labels, method_configs, counts, spec, opts.folds,
                                    common.seed, !opts.no_baseline, !opts.no_stat_features);
        x_field = "users";
    } else if (opts.mode == "featuresize") {
        std::vector<int> dims;
        for (const std::string& d : split_list(opts.dims)) dims.push_back(std::stoi(d));
        table = ule::sweep_featuresize(corpus, labels, method_configs, dims, spec, opts.folds,
                                       common.seed, !opts.no_baseline, !opts.no_stat_features);
        x_field = "dim";
    } else {
        throw ule::ConfigError("unknown sweep mode '" + opts.mode +
                               "'; valid: datasize, featuresize");
    }
    ule::write_eval_table(opts.out, table);
    ule::write_sweep_csv(opts.csv, table, x_field);

    ule::RunManifest manifest;
    manifest.command = "sweep";
    manifest.seed = common.seed;
    manifest.config["mode"] = opts.mode;
    manifest.config["methods"] = opts.methods;
    manifest.config["model"] = spec.describe();
    manifest.config["folds"] = std::to_string(opts.folds);
    manifest.config["dim"] = std::to_string(opts.base_config.dim);
    if (!opts.pairs.empty()) manifest.input_digests[opts.pairs] = ule::file_digest(opts.pairs);
    manifest.input_digests[opts.labels] = ule::file_digest(opts.labels);
    manifest.outputs = {opts.out, opts.csv};
    manifest.duration_seconds = std::chrono::duration<double>(Clock::now() - start).count();
    manifest.write(opts.out);

    std::cout << "sweep: " << table.rows.size() << " configurations evaluated\n";
    return 0;
}

// --------------------------------------------------------------- report ----

int run_report(const std::string& csv_path, const std::string& out_svg, const std::string& title,
               const std::string& x_label, const CommonOpts& common) {
    const auto start = Clock::now();
    std::ifstream in(csv_path);
    if (!in) throw ule::InputError("cannot open sweep csv: " + csv_path);
    std::string line;
    if (!std::getline(in, line) || line != "x,series,y")
        throw ule::FormatError("not a sweep csv (expected header x,series,y): " + csv_path);
    std::vector<ule::PlotSeries> series;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string xs, name, ys;
        if (!std::getline(ss, xs, ',') || !std::getline(ss, name, ',') || !std::getline(ss, ys))
            throw ule::FormatError("malformed csv line " + std::to_string(line_no));
        const double x = std::stod(xs);
        const double y = std::stod(ys);
        auto it = std::find_if(series.begin(), series.end(),
                               [&](const ule::PlotSeries& s) { return s.name == name; });
        if (it == series.end()) {
            series.push_back({name, {}});
            it = series.end() - 1;
        }
        it->points.emplace_back(x, y);
    }
    if (series.empty()) throw ule::InputError("sweep csv has no data rows: " + csv_path);
    ule::write_svg_line_chart(out_svg, title, x_label, "mean cross-validated r", series);

    ule::RunManifest manifest;
    manifest.command = "report";
    manifest.seed = common.seed;
    manifest.input_digests[csv_path] = ule::file_digest(csv_path);
    manifest.outputs = {out_svg};
    manifest.duration_seconds = std::chrono::duration<double>(Clock::now() - start).count();
    manifest.write(out_svg);

    std::cout << "report: " << series.size() << " series -> " << out_svg << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"User-like embeddings and delay-discounting prediction pipeline"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Config file (key=value lines); flags take precedence");
    app.set_version_flag("--version", ule::TOOL_VERSION);

    CommonOpts common;

    auto* synth = app.add_subcommand("synth", "Generate a synthetic corpus with planted signal");
    SynthOpts synth_opts;
    add_common(synth, common);
    synth->add_option("--users", synth_opts.config.num_users)->capture_default_str();
    synth->add_option("--entities", synth_opts.config.num_entities)->capture_default_str();
    synth->add_option("--topics", synth_opts.config.num_topics)->capture_default_str();
    synth->add_option("--signal-topics", synth_opts.config.num_signal_topics)
        ->capture_default_str();
    synth->add_option("--signal-strength", synth_opts.config.signal_strength)
        ->capture_default_str();
    synth->add_option("--labeled-fraction", synth_opts.config.labeled_fraction)
        ->capture_default_str();
    synth->add_option("--likes-mu", synth_opts.config.likes_mu)->capture_default_str();
    synth->add_option("--likes-sigma", synth_opts.config.likes_sigma)->capture_default_str();
    synth->add_option("--min-likes", synth_opts.config.min_likes)->capture_default_str();
    synth->add_option("--popularity-exponent", synth_opts.config.popularity_exponent)
        ->capture_default_str();
    synth->add_option("--ddr-mean", synth_opts.config.ddr_mean)->capture_default_str();
    synth->add_option("--ddr-stddev", synth_opts.config.ddr_stddev)->capture_default_str();
    synth->add_option("--out-pairs", synth_opts.out_pairs)->capture_default_str();
    synth->add_option("--out-labels", synth_opts.out_labels)->capture_default_str();
    synth->add_option("--out-truth", synth_opts.out_truth)->capture_default_str();

    auto* ddr = app.add_subcommand("ddr-score", "Score questionnaires into ddr labels");
    std::string ddr_in, ddr_out = "ddr.tsv";
    double ddr_log_base = 10.0, ddr_k_floor = 1e-5;
    add_common(ddr, common);
    ddr->add_option("--questionnaire", ddr_in, "Questionnaire file")->required();
    ddr->add_option("--out", ddr_out)->capture_default_str();
    ddr->add_option("--log-base", ddr_log_base)->capture_default_str();
    ddr->add_option("--k-floor", ddr_k_floor)->capture_default_str();

    auto* filter = app.add_subcommand("filter", "Filter a pairs file into a corpus snapshot");
    std::string filter_pairs, filter_out = "corpus.snapshot";
    bool filter_fixed_point = false;
    add_common(filter, common);
    add_filter_opts(filter, common);
    filter->add_option("--pairs", filter_pairs)->required();
    filter->add_option("--out", filter_out)->capture_default_str();
    filter->add_flag("--fixed-point", filter_fixed_point,
                     "Repeat the two filter passes until stable");

    auto* embed = app.add_subcommand("embed", "Train a user like embedding");
    EmbedOpts embed_opts;
    add_common(embed, common);
    add_filter_opts(embed, common);
    embed->add_option("--pairs", embed_opts.pairs);
    embed->add_option("--snapshot", embed_opts.snapshot, "Corpus snapshot (skips filtering)");
    embed->add_option("--method", embed_opts.method,
                      "svd, lda, ae, u-cbow, u-sg, u-glove, p-dm, p-dbow")
        ->capture_default_str();
    embed->add_option("--dim", embed_opts.config.dim)->capture_default_str();
    embed->add_option("--window", embed_opts.config.window)->capture_default_str();
    embed->add_option("--negative", embed_opts.config.negative_samples)->capture_default_str();
    embed->add_option("--epochs", embed_opts.config.epochs, "0 = per-method default")
        ->capture_default_str();
    embed->add_option("--batch-size", embed_opts.config.batch_size)->capture_default_str();
    embed->add_option("--learning-rate", embed_opts.config.learning_rate,
                      "0 = per-method default")
        ->capture_default_str();
    embed->add_option("--lda-alpha", embed_opts.config.lda_alpha)->capture_default_str();
    embed->add_option("--lda-beta", embed_opts.config.lda_beta)->capture_default_str();
    embed->add_option("--glove-xmax", embed_opts.config.glove_xmax)->capture_default_str();
    embed->add_option("--out", embed_opts.out)->capture_default_str();
    embed->add_option("--entity-out", embed_opts.entity_out, "Also write per-entity vectors");

    auto* correlate = app.add_subcommand("correlate", "Pearson screen of features against ddr");
    CorrelateOpts corr_opts;
    add_common(correlate, common);
    add_filter_opts(correlate, common);
    correlate->add_option("--pairs", corr_opts.pairs);
    correlate->add_option("--snapshot", corr_opts.snapshot);
    correlate->add_option("--labels", corr_opts.labels)->required();
    correlate->add_option("--proportions", corr_opts.proportions,
                          "Per-user topic proportions (embedding file); screens topics instead "
                          "of entities");
    correlate->add_option("--threshold", corr_opts.threshold)->capture_default_str();
    correlate->add_flag("--bh", corr_opts.bh, "Benjamini-Hochberg significance flags");
    correlate->add_option("--top", corr_opts.top, "Print the top-K view per sign");
    correlate->add_option("--out", corr_opts.out)->capture_default_str();

    auto* train = app.add_subcommand("train", "Cross-validated ddr prediction");
    TrainOpts train_opts;
    add_common(train, common);
    add_filter_opts(train, common);
    train->add_option("--pairs", train_opts.pairs);
    train->add_option("--snapshot", train_opts.snapshot);
    train->add_option("--labels", train_opts.labels)->required();
    train->add_option("--embedding", train_opts.embedding,
                      "Embedding file; omit for the raw-likes baseline");
    train->add_option("--model", train_opts.model, "svr or lasso")->capture_default_str();
    train->add_option("--lambda", train_opts.lambda, "Lasso lambda; negative = inner-CV grid")
        ->capture_default_str();
    train->add_option("--C", train_opts.c)->capture_default_str();
    train->add_option("--epsilon", train_opts.epsilon)->capture_default_str();
    train->add_option("--gamma", train_opts.gamma, "0 = 1/num_columns")->capture_default_str();
    train->add_option("--folds", train_opts.folds)->capture_default_str();
    train->add_flag("--no-stat-features", train_opts.no_stat_features);
    train->add_option("--out", train_opts.out)->capture_default_str();

    auto* sweep = app.add_subcommand("sweep", "Data-size or feature-size sweeps");
    SweepOpts sweep_opts;
    add_common(sweep, common);
    add_filter_opts(sweep, common);
    sweep->add_option("--mode", sweep_opts.mode, "datasize or featuresize")->capture_default_str();
    sweep->add_option("--pairs", sweep_opts.pairs);
    sweep->add_option("--snapshot", sweep_opts.snapshot);
    sweep->add_option("--labels", sweep_opts.labels)->required();
    sweep->add_option("--methods", sweep_opts.methods)->capture_default_str();
    sweep->add_option("--counts", sweep_opts.counts, "User counts for datasize mode");
    sweep->add_option("--dims", sweep_opts.dims)->capture_default_str();
    sweep->add_option("--dim", sweep_opts.base_config.dim, "Embedding dim for datasize mode")
        ->capture_default_str();
    sweep->add_option("--window", sweep_opts.base_config.window)->capture_default_str();
    sweep->add_option("--negative", sweep_opts.base_config.negative_samples)
        ->capture_default_str();
    sweep->add_option("--epochs", sweep_opts.base_config.epochs)->capture_default_str();
    sweep->add_option("--model", sweep_opts.model)->capture_default_str();
    sweep->add_option("--lambda", sweep_opts.lambda)->capture_default_str();
    sweep->add_option("--C", sweep_opts.c)->capture_default_str();
    sweep->add_option("--epsilon", sweep_opts.epsilon)->capture_default_str();
    sweep->add_option("--gamma", sweep_opts.gamma)->capture_default_str();
    sweep->add_option("--folds", sweep_opts.folds)->capture_default_str();
    sweep->add_flag("--no-baseline", sweep_opts.no_baseline);
    sweep->add_flag("--no-stat-features", sweep_opts.no_stat_features);
    sweep->add_option("--out", sweep_opts.out)->capture_default_str();
    sweep->add_option("--csv", sweep_opts.csv)->capture_default_str();

    auto* report = app.add_subcommand("report", "Render a sweep csv as an SVG line chart");
    std::string report_csv, report_out = "sweep.svg", report_title = "ddr prediction",
                report_x = "users";
    add_common(report, common);
    report->add_option("--csv", report_csv)->required();
    report->add_option("--out", report_out)->capture_default_str();
    report->add_option("--title", report_title)->capture_default_str();
    report->add_option("--x-label", report_x)->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (app.got_subcommand(synth)) return run_synth(synth_opts, common);
        if (app.got_subcommand(ddr))
            return run_ddr_score(ddr_in, ddr_out, ddr_log_base, ddr_k_floor, common);
        if (app.got_subcommand(filter))
            return run_filter(filter_pairs, filter_out, filter_fixed_point, common);
        if (app.got_subcommand(embed)) return run_embed(embed_opts, common);
        if (app.got_subcommand(correlate)) return run_correlate(corr_opts, common);
        if (app.got_subcommand(train)) return run_train(train_opts, common);
        if (app.got_subcommand(sweep)) return run_sweep(sweep_opts, common);
        if (app.got_subcommand(report))
            return run_report(report_csv, report_out, report_title, report_x, common);
        std::cerr << "no subcommand\n";
        return 2;
    } catch (const ule::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const ule::InputError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const ule::LookupError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const ule::DivergenceError& e) {
        std::cerr << "numeric divergence: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 1;
    }
}
