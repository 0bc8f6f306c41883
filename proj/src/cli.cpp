#include "onionrank/cli.hpp"

#include <filesystem>
#include <functional>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "onionrank/common.hpp"
#include "onionrank/corpus.hpp"
#include "onionrank/cv.hpp"
#include "onionrank/features.hpp"
#include "onionrank/graph.hpp"
#include "onionrank/groundtruth.hpp"
#include "onionrank/ltr.hpp"
#include "onionrank/metrics.hpp"
#include "onionrank/ner.hpp"
#include "onionrank/synth.hpp"
#include "onionrank/text.hpp"

namespace onionrank::cli {

namespace fs = std::filesystem;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Streams {
    std::istream& in;
    std::ostream& out;
    std::ostream& err;
};

// ---------------------------------------------------------------- helpers

std::ofstream open_out(const fs::path& p) {
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    if (!out) throw DataError("cannot write " + p.string());
    return out;
}

std::ifstream open_in(const fs::path& p, const char* what) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw DataError(std::string("cannot open ") + what + " " + p.string());
    return in;
}

using Resolved = std::vector<std::pair<std::string, std::string>>;

// Options as parsed (TOML, replayable with --config) plus values resolved at
// run time as comments.
void write_manifest(const CLI::App& sub, const fs::path& target, const std::string& subcommand,
                    const Resolved& resolved) {
    std::string section = subcommand;
    std::replace(section.begin(), section.end(), ' ', '.');
    std::ostringstream m;
    m << "# onionrank " << kVersion << " run manifest\n";
    for (const auto& [k, v] : resolved) m << "# resolved " << k << " = " << v << '\n';
    m << '[' << section << "]\n" << sub.config_to_str(true, false);
    auto out = open_out(target);
    out << m.str();
}

fs::path manifest_for_file(const fs::path& p) { return fs::path(p.string() + ".manifest.toml"); }

features::FeatureMatrix load_feature_csv(const fs::path& p) {
    auto in = open_in(p, "feature matrix");
    return features::read_csv(in);
}

// Columns of `groups`, in canonical order, picked by name from `m`.
features::FeatureMatrix select_columns(const features::FeatureMatrix& m,
                                       const std::vector<std::string>& names) {
    std::vector<std::size_t> idx;
    for (const auto& name : names) {
        auto it = std::find(m.columns.begin(), m.columns.end(), name);
        if (it == m.columns.end()) throw DataError("feature matrix has no column \"" + name + "\"");
        idx.push_back(static_cast<std::size_t>(it - m.columns.begin()));
    }
    features::FeatureMatrix out;
    out.row_ids = m.row_ids;
    out.columns = names;
    out.values.reserve(m.rows() * names.size());
    for (std::size_t r = 0; r < m.rows(); ++r)
        for (std::size_t c : idx) out.values.push_back(m.at(r, c));
    return out;
}

std::vector<std::string> group_feature_names(const std::vector<features::FeatureGroup>& groups) {
    std::vector<features::FeatureGroup> g = groups;
    std::sort(g.begin(), g.end());
    g.erase(std::unique(g.begin(), g.end()), g.end());
    std::vector<std::string> names;
    for (auto grp : g) {
        auto [b, e] = features::group_columns(grp);
        for (std::size_t c = b; c < e; ++c) names.emplace_back(features::kFeatureNames[c]);
    }
    return names;
}

std::vector<features::FeatureGroup> parse_groups_or_usage(const std::string& s) {
    try {
        return features::parse_groups(s);
    } catch (const DataError& e) {
        throw UsageError(e.what());
    }
}

ltr::Scheme parse_scheme_or_usage(const std::string& s) {
    auto sc = ltr::parse_scheme(s);
    if (!sc) throw UsageError("unknown scheme \"" + s + "\" (pointwise, pairwise, listwise)");
    return *sc;
}

std::vector<std::size_t> parse_k_or_usage(const std::string& s) {
    try {
        return eval::parse_k_list(s);
    } catch (const DataError& e) {
        throw UsageError(e.what());
    }
}

std::map<std::string, int> load_gains(const fs::path& annotations) {
    auto records = gt::load_annotations(annotations);
    if (records.empty()) throw DataError("annotation file " + annotations.string() + " is empty");
    return gt::build_ground_truth(records).gains;
}

std::vector<ltr::JudgedDomain> judged_rows(const features::FeatureMatrix& m,
                                           const std::map<std::string, int>& gains) {
    std::vector<ltr::JudgedDomain> out;
    for (const auto& [id, g] : gains) {
        std::size_t r = m.find_row(id);
        if (r == m.rows()) throw DataError("annotated domain \"" + id + "\" has no feature row");
        auto row = m.row(r);
        out.push_back({id, g, {row.begin(), row.end()}});
    }
    return out;
}

// ---------------------------------------------------------------- pipeline

struct PipelineOptions {
    std::string corpus, gazetteer, lexicon, visual, reference_date;
    bool landing_only = false;
    bool invert_keyword_ratio = false;
    std::size_t vocab_size = 10000;
    std::size_t min_df = 3;
    std::size_t popularity_threshold = 5;
    std::size_t top_x = 10;
    int recency_days = 90;
};

void add_pipeline_options(CLI::App* sub, PipelineOptions& o) {
    sub->add_option("--corpus", o.corpus, "Corpus root directory");
    sub->add_option("--gazetteer", o.gazetteer, "Gazetteer TSV (surface_form<TAB>category)");
    sub->add_option("--lexicon", o.lexicon, "Unigram lexicon, one word per line by frequency");
    sub->add_option("--visual", o.visual, "Visual classification records (NDJSON)");
    sub->add_option("--reference-date", o.reference_date,
                    "Date anchoring recency (RFC-3339); default: latest scrape time");
    sub->add_flag("--landing-only", o.landing_only, "Compute page features on the landing page only");
    sub->add_flag("--invert-keyword-ratio", o.invert_keyword_ratio,
                  "keyword_to_total as keywords/total instead of total/keywords");
    sub->add_option("--vocab-size", o.vocab_size, "TF-IDF vocabulary size")->check(CLI::PositiveNumber);
    sub->add_option("--min-df", o.min_df, "Minimum document frequency")->check(CLI::PositiveNumber);
    sub->add_option("--popularity-threshold", o.popularity_threshold, "Mentions for a popular entity")
        ->check(CLI::PositiveNumber);
    sub->add_option("--top-x", o.top_x, "ToRank_top_X cut-off")->check(CLI::PositiveNumber);
    sub->add_option("--recency-days", o.recency_days, "Recency window in days")->check(CLI::PositiveNumber);
}

struct PipelineResult {
    corpus::Corpus corpus;
    features::FeatureMatrix matrix;
    graph::Digraph graph;
    std::string reference_date;
};

PipelineResult run_pipeline(const PipelineOptions& o, const std::vector<features::FeatureGroup>& groups,
                            std::ostream& err) {
    if (o.corpus.empty()) throw UsageError("--corpus is required");
    if (o.gazetteer.empty()) throw UsageError("--gazetteer is required");
    if (o.lexicon.empty()) throw UsageError("--lexicon is required");

    PipelineResult res;
    auto ingest = corpus::ingest_corpus(o.corpus);
    ingest.report.write(err);
    if (ingest.corpus.domains.empty()) throw DataError("corpus " + o.corpus + " has no usable domains");
    res.corpus = std::move(ingest.corpus);

    features::FeatureConfig cfg;
    if (!o.reference_date.empty()) {
        auto t = corpus::parse_rfc3339(o.reference_date);
        if (!t) throw UsageError("bad --reference-date \"" + o.reference_date + "\"");
        cfg.reference_date = *t;
    } else {
        for (const auto& d : res.corpus.domains) cfg.reference_date = std::max(cfg.reference_date, d.scrape_time);
    }
    res.reference_date = corpus::format_rfc3339(cfg.reference_date);
    cfg.recency_days = o.recency_days;
    cfg.vocab_size = o.vocab_size;
    cfg.min_df = o.min_df;
    cfg.popularity_threshold = o.popularity_threshold;
    cfg.top_x = o.top_x;
    cfg.landing_only = o.landing_only;
    cfg.invert_keyword_ratio = o.invert_keyword_ratio;

    auto gazetteer = ner::load_gazetteer(o.gazetteer);
    auto lexicon = text::load_lexicon(o.lexicon);
    auto ids = res.corpus.domain_ids();
    corpus::VisualIndex visual;
    if (!o.visual.empty()) {
        visual = corpus::load_visual_records(o.visual, ids).records;
    } else {
        err << "warning: no --visual file; visual features are zero\n";
        for (const auto& id : ids) visual[id];
    }
    auto inputs = features::prepare_inputs(res.corpus, std::move(lexicon), gazetteer, std::move(visual), cfg);
    res.matrix = features::assemble_feature_matrix(res.corpus, inputs, groups, cfg);
    res.graph = inputs.graph.graph;
    return res;
}

struct TrainOptions {
    double lr = 1e-3;
    std::size_t max_epochs = 2000;
    std::size_t patience = 50;
    double min_delta = 1e-4;
    double dropout = 0.5;
    double listnet_gain_scale = 1.0;
};

void add_train_options(CLI::App* sub, TrainOptions& o) {
    sub->add_option("--lr", o.lr, "Learning rate")->check(CLI::PositiveNumber);
    sub->add_option("--max-epochs", o.max_epochs, "Epoch budget")->check(CLI::PositiveNumber);
    sub->add_option("--patience", o.patience, "Early-stopping patience in epochs")->check(CLI::PositiveNumber);
    sub->add_option("--min-delta", o.min_delta, "Minimum validation NDCG@10 improvement")
        ->check(CLI::NonNegativeNumber);
    sub->add_option("--dropout", o.dropout, "Dropout rate in [0,1)")->check(CLI::Range(0.0, 0.999999));
    sub->add_option("--listnet-gain-scale", o.listnet_gain_scale, "Gain multiplier in the ListNet target")
        ->check(CLI::PositiveNumber);
}

ltr::TrainConfig make_train_config(const TrainOptions& o, std::uint64_t seed) {
    ltr::TrainConfig c;
    c.learning_rate = o.lr;
    c.max_epochs = o.max_epochs;
    c.patience = o.patience;
    c.min_delta = o.min_delta;
    c.dropout = o.dropout;
    c.listnet_gain_scale = o.listnet_gain_scale;
    c.seed = seed;
    return c;
}

graph::Digraph load_graph(const std::string& edges, const std::string& corpus_root, std::ostream& err) {
    if (!edges.empty()) {
        auto in = open_in(edges, "edge list");
        return graph::read_edge_list(in);
    }
    if (!corpus_root.empty()) {
        auto ingest = corpus::ingest_corpus(corpus_root);
        ingest.report.write(err);
        return corpus::derive_link_graph(ingest.corpus);
    }
    throw UsageError("need --edges or --corpus for the link graph");
}

// ---------------------------------------------------------------- commands

struct SynthCmd {
    std::string out;
    synth::SynthConfig cfg;

    void add(CLI::App* app) {
        app->add_option("--out", out, "Output directory")->required();
        app->add_option("--n-domains", cfg.n_domains, "Number of domains")->check(CLI::Range(10, 1000000));
        app->add_option("--seed", cfg.seed, "Random seed");
        app->add_option("--sigma", cfg.sigma, "Annotator flip probability")->check(CLI::Range(0.0, 1.0));
        app->add_option("--link-density", cfg.link_density, "Base link probability")->check(CLI::Range(0.0, 1.0));
        app->add_option("--signal", cfg.signal, "Weight of the latent value in the features")
            ->check(CLI::Range(0.0, 1.0));
        app->add_option("--annotators", cfg.n_annotators, "Simulated annotators")->check(CLI::Range(3, 1000));
    }
    int run(const CLI::App& root, Streams s) {
        auto res = synth::generate_corpus(cfg, out);
        write_manifest(root, fs::path(out) / "manifest.toml", "synth", {});
        s.out << "wrote " << res.domains.size() << " domains, " << res.edges.size() << " links, "
              << res.annotations.size() << " annotation records to " << out << '\n';
        return kOk;
    }
};

struct IngestCmd {
    std::string corpus, out, edges;

    void add(CLI::App* app) {
        app->add_option("--corpus", corpus, "Corpus root directory")->required();
        app->add_option("--out", out, "Write the ingested corpus as JSON");
        app->add_option("--edges", edges, "Write the derived link graph (src<TAB>dst)");
    }
    int run(const CLI::App& root, Streams s) {
        auto ingest = corpus::ingest_corpus(corpus);
        ingest.report.write(s.err);
        if (!out.empty()) {
            open_out(out) << corpus::serialize(ingest.corpus);
            write_manifest(root, manifest_for_file(out), "ingest", {});
        }
        auto g = corpus::derive_link_graph(ingest.corpus);
        if (!edges.empty()) {
            auto f = open_out(edges);
            graph::write_edge_list(f, g);
            write_manifest(root, manifest_for_file(edges), "ingest", {});
        }
        s.out << "domains " << ingest.report.domains_loaded << ", pages " << ingest.report.pages_loaded
              << ", links " << g.edge_count() << '\n';
        return ingest.report.domain_errors.empty() ? kOk : kData;
    }
};

struct FeaturesCmd {
    PipelineOptions pipe;
    std::string groups = "all", out;

    void add(CLI::App* app) {
        add_pipeline_options(app, pipe);
        app->add_option("--groups", groups, "Comma list of text,ner,html,visual,graph or all");
        app->add_option("--out", out, "Feature matrix CSV")->required();
    }
    int run(const CLI::App& root, Streams s) {
        auto g = parse_groups_or_usage(groups);
        auto res = run_pipeline(pipe, g, s.err);
        auto f = open_out(out);
        features::write_csv(f, res.matrix);
        write_manifest(root, manifest_for_file(out), "features", {{"reference_date", res.reference_date}});
        s.out << res.matrix.rows() << " domains x " << res.matrix.cols() << " features -> " << out << '\n';
        return kOk;
    }
};

struct TrainCmd {
    std::string features_path, annotations, scheme = "listwise", groups = "all", model_out, history_out;
    std::uint64_t seed = 0;
    std::size_t val_fold = 0;
    TrainOptions opts;

    void add(CLI::App* app) {
        app->add_option("--features", features_path, "Feature matrix CSV")->required();
        app->add_option("--annotations", annotations, "Annotation records (NDJSON)")->required();
        app->add_option("--scheme", scheme, "pointwise|pairwise|listwise");
        app->add_option("--groups", groups, "Feature groups to train on");
        app->add_option("--seed", seed, "Seed for initialization, dropout and the split");
        app->add_option("--val-fold", val_fold, "Fold (0-4) held out for early stopping")->check(CLI::Range(0, 4));
        add_train_options(app, opts);
        app->add_option("--out", model_out, "Model JSON")->required();
        app->add_option("--history", history_out, "Training history CSV");
    }
    int run(const CLI::App& root, Streams s) {
        auto sc = parse_scheme_or_usage(scheme);
        auto names = group_feature_names(parse_groups_or_usage(groups));
        auto m = select_columns(load_feature_csv(features_path), names);
        auto judged = judged_rows(m, load_gains(annotations));
        std::vector<std::string> ids;
        for (const auto& j : judged) ids.push_back(j.domain_id);
        auto plan = eval::make_fold_plan(ids, seed);

        features::FeatureMatrix train_m, val_m;
        train_m.columns = val_m.columns = names;
        for (const auto& j : judged) {
            auto& t = plan.fold_of(j.domain_id) == val_fold ? val_m : train_m;
            t.row_ids.push_back(j.domain_id);
            t.values.insert(t.values.end(), j.features.begin(), j.features.end());
        }
        auto [train_std, stats] = features::standardize(train_m);
        auto val_std = features::standardize(val_m, stats).first;
        std::map<std::string, int> gains;
        for (const auto& j : judged) gains[j.domain_id] = j.gain;
        auto to_judged = [&](const features::FeatureMatrix& fm) {
            std::map<std::string, int> sub;
            for (const auto& id : fm.row_ids) sub[id] = gains.at(id);
            return judged_rows(fm, sub);
        };
        auto cfg = make_train_config(opts, seed);
        auto result = ltr::train(sc, to_judged(train_std), to_judged(val_std), cfg);
        result.model.stats = stats;
        result.model.feature_names = names;
        {
            auto f = open_out(model_out);
            ltr::save_model(f, result.model);
        }
        write_manifest(root, manifest_for_file(model_out), "train", {});
        if (!history_out.empty()) {
            auto f = open_out(history_out);
            ltr::write_history_csv(f, result.history);
        }
        s.out << ltr::method_label(sc) << ": best validation NDCG@10 " << format_double(result.best_val_ndcg)
              << " at epoch " << result.best_epoch << " of " << result.history.size() << '\n';
        return kOk;
    }
};

struct RankCmd {
    std::string model_path, features_path, out;

    void add(CLI::App* app) {
        app->add_option("--model", model_path, "Model JSON")->required();
        app->add_option("--features", features_path, "Feature matrix CSV")->required();
        app->add_option("--out", out, "Ranking CSV (domain_id,score,rank)")->required();
    }
    int run(const CLI::App& root, Streams s) {
        auto mf = open_in(model_path, "model");
        auto model = ltr::load_model(mf);
        auto m = load_feature_csv(features_path);
        if (!model.feature_names.empty()) m = select_columns(m, model.feature_names);
        if (model.stats) m = features::standardize(m, model.stats).first;
        std::vector<ltr::JudgedDomain> rows;
        for (std::size_t r = 0; r < m.rows(); ++r) {
            auto row = m.row(r);
            rows.push_back({m.row_ids[r], 0, {row.begin(), row.end()}});
        }
        auto ranked = ltr::predict_rank(model, rows);
        auto f = open_out(out);
        f << "domain_id,score,rank\n";
        for (std::size_t i = 0; i < ranked.size(); ++i)
            f << ranked[i].domain_id << ',' << format_double(ranked[i].score) << ',' << i + 1 << '\n';
        write_manifest(root, manifest_for_file(out), "rank", {});
        s.out << "ranked " << ranked.size() << " domains -> " << out << '\n';
        return kOk;
    }
};

// Reads a ranking CSV whose first column is the domain id; rows are taken
// in `rank` order when that column exists, else in file order.
std::vector<std::string> read_ranking(const fs::path& p) {
    auto in = open_in(p, "ranking");
    std::string line;
    if (!std::getline(in, line)) throw DataError("ranking file " + p.string() + " is empty");
    auto header = split(line, ',');
    std::size_t rank_col = header.size();
    for (std::size_t i = 0; i < header.size(); ++i)
        if (trim(header[i]) == "rank") rank_col = i;
    std::vector<std::pair<std::size_t, std::string>> rows;
    std::size_t n = 1;
    while (std::getline(in, line)) {
        ++n;
        if (trim(line).empty()) continue;
        auto cells = split(line, ',');
        std::size_t key = rows.size();
        if (rank_col < header.size()) {
            if (cells.size() <= rank_col) throw DataError("ranking line " + std::to_string(n) + " is short");
            try {
                key = std::stoul(cells[rank_col]);
            } catch (const std::exception&) {
                throw DataError("ranking line " + std::to_string(n) + ": bad rank");
            }
        }
        rows.emplace_back(key, std::string(trim(cells[0])));
    }
    std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<std::string> ids;
    for (auto& r : rows) ids.push_back(std::move(r.second));
    return ids;
}

struct EvalCmd {
    std::string ranking, annotations, k_list = "1-10,15,20,25", out;
    bool judged_only = false;

    void add(CLI::App* app) {
        app->add_option("--ranking", ranking, "Ranking CSV (first column domain_id)")->required();
        app->add_option("--annotations", annotations, "Annotation records (NDJSON)")->required();
        app->add_option("--k-list", k_list, "K values, e.g. 1-10,15,20,25");
        app->add_flag("--judged-only", judged_only, "Drop ranked domains without annotations");
        app->add_option("--out", out, "Write K,ndcg CSV here instead of stdout");
    }
    int run(const CLI::App& root, Streams s) {
        auto ks = parse_k_or_usage(k_list);
        auto ids = read_ranking(ranking);
        auto gains = load_gains(annotations);
        std::map<std::string, double> truth(gains.begin(), gains.end());
        if (judged_only) std::erase_if(ids, [&](const std::string& id) { return !truth.contains(id); });
        std::ostringstream csv;
        csv << "K,ndcg\n";
        for (std::size_t k : ks) {
            auto n = eval::ndcg_at_k(ids, truth, k);
            csv << k << ',' << format_double(n.value) << '\n';
        }
        if (out.empty()) {
            s.out << csv.str();
        } else {
            open_out(out) << csv.str();
            write_manifest(root, manifest_for_file(out), "eval", {});
        }
        return kOk;
    }
};

struct BaselineCmd {
    std::string edges, corpus, algo = "pagerank", out;
    std::optional<double> alpha, beta;
    std::size_t max_iter = 1000;
    double tol = 1e-9;

    void add(CLI::App* app) {
        app->add_option("--edges", edges, "Edge list (src<TAB>dst)");
        app->add_option("--corpus", corpus, "Corpus root (link graph derived from hyperlinks)");
        app->add_option("--algo", algo, "pagerank|hits|katz|torank");
        app->add_option("--alpha", alpha, "Damping / attenuation / degree weight");
        app->add_option("--beta", beta, "Katz constant or ToRank connectivity weight");
        app->add_option("--max-iter", max_iter, "Iteration cap")->check(CLI::PositiveNumber);
        app->add_option("--tol", tol, "L1 convergence tolerance")->check(CLI::PositiveNumber);
        app->add_option("--out", out, "Ranking CSV (node,score,rank)")->required();
    }
    int run(const CLI::App& root, Streams s) {
        auto a = eval::parse_link_algo(algo);
        if (!a) throw UsageError("unknown --algo \"" + algo + "\"");
        auto g = load_graph(edges, corpus, s.err);
        eval::BaselineConfig cfg;
        cfg.control = {max_iter, tol};
        if (alpha) cfg.pagerank_alpha = cfg.katz_alpha = cfg.torank_alpha = *alpha;
        if (beta) cfg.katz_beta = cfg.torank_beta = *beta;
        auto r = eval::run_link_algorithm(g, *a, cfg);
        auto f = open_out(out);
        graph::write_ranking_csv(f, g, r);
        write_manifest(root, manifest_for_file(out), "baseline", {});
        if (!r.converged) s.err << "warning: " << eval::link_algo_label(*a) << " did not converge\n";
        s.out << eval::link_algo_label(*a) << ": ranked " << g.size() << " nodes -> " << out << '\n';
        return kOk;
    }
};

struct CvCmd {
    PipelineOptions pipe;
    std::string features_path, edges, annotations, scheme = "listwise", groups = "all",
                                                   k_list = "1-10,15,20,25", out;
    std::uint64_t seed = 0;
    bool no_baselines = false;
    TrainOptions opts;

    void add(CLI::App* app) {
        add_pipeline_options(app, pipe);
        app->add_option("--features", features_path, "Precomputed feature matrix CSV (skips extraction)");
        app->add_option("--edges", edges, "Edge list for the link-based baselines");
        app->add_option("--annotations", annotations, "Annotation records (NDJSON)")->required();
        app->add_option("--scheme", scheme, "pointwise|pairwise|listwise");
        app->add_option("--groups", groups, "Feature groups");
        app->add_option("--seed", seed, "Seed for folds, initialization and dropout");
        app->add_option("--k-list", k_list, "K values, e.g. 1-10,15,20,25");
        app->add_flag("--no-baselines", no_baselines, "Skip PageRank/HITS/Katz/ToRank");
        add_train_options(app, opts);
        app->add_option("--out", out, "Report directory")->required();
    }
    int run(const CLI::App& root, Streams s) {
        auto sc = parse_scheme_or_usage(scheme);
        auto g = parse_groups_or_usage(groups);
        auto ks = parse_k_or_usage(k_list);
        auto names = group_feature_names(g);
        Resolved resolved;

        features::FeatureMatrix m;
        std::optional<graph::Digraph> link_graph;
        if (!features_path.empty()) {
            m = select_columns(load_feature_csv(features_path), names);
        } else {
            auto res = run_pipeline(pipe, g, s.err);
            m = std::move(res.matrix);
            link_graph = std::move(res.graph);
            resolved.emplace_back("reference_date", res.reference_date);
        }
        if (!no_baselines && !edges.empty()) {
            auto f = open_in(edges, "edge list");
            link_graph = graph::read_edge_list(f);
        } else if (!no_baselines && !link_graph) {
            link_graph = load_graph(edges, pipe.corpus, s.err);
        }

        auto judged = judged_rows(m, load_gains(annotations));
        auto cfg = make_train_config(opts, seed);
        auto cv = eval::cross_validate(judged, sc, cfg, ks);
        if (names.size() != features::kFeatureCount)
            cv.curve.method += "[" + features::format_groups(g) + "]";

        std::vector<eval::NdcgCurve> curves{cv.curve};
        std::vector<std::string> notes = cv.notes;
        if (!no_baselines) {
            auto base = eval::compare_baselines(judged, *link_graph, cv.plan, eval::BaselineConfig{}, ks, &notes);
            curves.insert(curves.end(), base.begin(), base.end());
        }

        fs::path dir(out);
        fs::create_directories(dir);
        {
            auto f = open_out(dir / "cv_folds.csv");
            eval::write_fold_csv(f, curves);
        }
        {
            auto f = open_out(dir / "cv_summary.csv");
            eval::write_summary_csv(f, curves);
        }
        {
            auto f = open_out(dir / "cv_notes.txt");
            f << "NDCG per K is the arithmetic mean over the 5 test folds.\n";
            f << "features: " << names.size() << " (" << features::format_groups(g) << ")\n";
            for (const auto& t : cv.training)
                f << "fold " << t.fold + 1 << ": best epoch " << t.best_epoch << " of " << t.epochs_run
                  << ", validation NDCG@10 " << format_double(t.best_val_ndcg) << '\n';
            for (const auto& n : notes) f << n << '\n';
        }
        write_manifest(root, dir / "manifest.toml", "cv", resolved);

        for (const auto& c : curves) {
            const auto* p10 = c.at(10);
            s.out << c.method << " NDCG@10 "
                  << (p10 ? format_double(p10->mean) : std::string("n/a")) << '\n';
        }
        return kOk;
    }
};

struct AnnotatePlanCmd {
    std::string corpus, domains_file, annotators, out;
    std::size_t n_annotators = 13, per_domain = 3, batch_size = 23;
    std::uint64_t seed = 0;

    void add(CLI::App* app) {
        app->add_option("--corpus", corpus, "Corpus root (domains to judge)");
        app->add_option("--domains", domains_file, "File with one domain id per line");
        app->add_option("--annotators", annotators, "Comma list of annotator ids");
        app->add_option("--n-annotators", n_annotators, "Generated annotator ids when --annotators is absent")
            ->check(CLI::PositiveNumber);
        app->add_option("--per-domain", per_domain, "Judges per domain")->check(CLI::PositiveNumber);
        app->add_option("--batch-size", batch_size, "Target batch size")->check(CLI::PositiveNumber);
        app->add_option("--seed", seed, "Shuffle seed");
        app->add_option("--out", out, "Plan JSON")->required();
    }
    int run(const CLI::App& root, Streams s) {
        std::vector<std::string> ids;
        if (!domains_file.empty()) {
            auto in = open_in(domains_file, "domain list");
            std::string line;
            while (std::getline(in, line))
                if (!trim(line).empty()) ids.emplace_back(trim(line));
        } else if (!corpus.empty()) {
            auto ingest = corpus::ingest_corpus(corpus);
            ingest.report.write(s.err);
            ids = ingest.corpus.domain_ids();
        } else {
            throw UsageError("need --corpus or --domains");
        }
        std::vector<std::string> people;
        if (!annotators.empty()) {
            for (auto& a : split(annotators, ','))
                if (!trim(a).empty()) people.emplace_back(trim(a));
        } else {
            for (std::size_t i = 1; i <= n_annotators; ++i) {
                std::string num = std::to_string(i);
                people.push_back("annotator" + std::string(num.size() < 2 ? 1 : 0, '0') + num);
            }
        }
        auto plan = gt::assignment_plan(ids, people, per_domain, batch_size, seed);
        {
            auto f = open_out(out);
            gt::write_plan_json(f, plan);
        }
        write_manifest(root, manifest_for_file(out), "annotate plan", {});
        s.out << plan.assignment_count() << " assignments for " << ids.size() << " domains and "
              << people.size() << " annotators -> " << out << '\n';
        return kOk;
    }
};

struct AnnotateRunCmd {
    std::string corpus, plan_path, annotator, questionnaire, out;
    std::size_t batch = 0;

    void add(CLI::App* app) {
        app->add_option("--corpus", corpus, "Corpus root")->required();
        app->add_option("--plan", plan_path, "Plan JSON from `annotate plan`")->required();
        app->add_option("--annotator", annotator, "Annotator id")->required();
        app->add_option("--batch", batch, "1-based batch number; 0 runs every batch")->check(CLI::NonNegativeNumber);
        app->add_option("--questionnaire", questionnaire, "Questionnaire file (default: built-in v1)");
        app->add_option("--out", out, "Annotation file, appended to")->required();
    }
    int run(const CLI::App&, Streams s) {
        auto pf = open_in(plan_path, "plan");
        auto plan = gt::read_plan_json(pf);
        auto it = std::find_if(plan.annotators.begin(), plan.annotators.end(),
                               [&](const auto& a) { return a.annotator_id == annotator; });
        if (it == plan.annotators.end()) throw DataError("annotator \"" + annotator + "\" is not in the plan");
        if (batch > it->batches.size())
            throw UsageError("annotator has " + std::to_string(it->batches.size()) + " batches");
        std::vector<std::string> todo;
        for (std::size_t b = 0; b < it->batches.size(); ++b)
            if (batch == 0 || b + 1 == batch) todo.insert(todo.end(), it->batches[b].begin(), it->batches[b].end());

        std::set<std::string> done;
        if (fs::exists(out))
            for (const auto& r : gt::load_annotations(out))
                if (r.annotator_id == annotator) done.insert(r.domain_id);

        auto questions = questionnaire.empty() ? gt::default_questionnaire() : gt::load_questionnaire(questionnaire);
        auto ingest = corpus::ingest_corpus(corpus);
        ingest.report.write(s.err);
        if (fs::path(out).has_parent_path()) fs::create_directories(fs::path(out).parent_path());
        std::ofstream records(out, std::ios::app | std::ios::binary);
        if (!records) throw DataError("cannot append to " + out);
        auto res = gt::annotate_interactive(ingest.corpus, annotator, todo, questions, s.in, s.out, records, done);
        s.out << "\nrecorded " << res.records.size() << " domains"
              << (res.interrupted ? " (session stopped; rerun to resume)" : "") << '\n';
        return kOk;
    }
};

struct AnnotateMergeCmd {
    std::vector<std::string> inputs;
    std::string out;

    void add(CLI::App* app) {
        app->add_option("--annotations", inputs, "Annotation files")->required();
        app->add_option("--out", out, "Gains CSV (domain_id,gain,answers)")->required();
    }
    int run(const CLI::App& root, Streams s) {
        std::vector<gt::AnnotationRecord> all;
        for (const auto& p : inputs) {
            auto r = gt::load_annotations(p);
            all.insert(all.end(), r.begin(), r.end());
        }
        auto truth = gt::build_ground_truth(all);
        auto f = open_out(out);
        f << "domain_id,gain,answers\n";
        for (const auto& [id, ans] : truth.unified) {
            f << id << ',' << truth.gains.at(id) << ',';
            for (bool a : ans) f << (a ? '1' : '0');
            f << '\n';
        }
        write_manifest(root, manifest_for_file(out), "annotate merge", {});
        s.out << truth.gains.size() << " domains -> " << out << '\n';
        return kOk;
    }
};

}  // namespace

int dispatch(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err) {
    CLI::App app{"Ranking onion domains by content with learning to rank", "onionrank"};
    app.option_defaults()->always_capture_default();
    app.set_config("--config", "", "Read options from a TOML file (e.g. a run manifest)");
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);

    SynthCmd synth_cmd;
    IngestCmd ingest_cmd;
    FeaturesCmd features_cmd;
    TrainCmd train_cmd;
    RankCmd rank_cmd;
    EvalCmd eval_cmd;
    BaselineCmd baseline_cmd;
    CvCmd cv_cmd;
    AnnotatePlanCmd plan_cmd;
    AnnotateRunCmd run_cmd;
    AnnotateMergeCmd merge_cmd;

    auto* synth = app.add_subcommand("synth", "Generate a synthetic corpus with planted gains");
    auto* ingest = app.add_subcommand("ingest", "Load a corpus and derive its link graph");
    auto* feats = app.add_subcommand("features", "Extract the feature matrix");
    auto* train = app.add_subcommand("train", "Train a ranking model");
    auto* rank = app.add_subcommand("rank", "Rank domains with a trained model");
    auto* evalc = app.add_subcommand("eval", "NDCG@K of a ranking against annotations");
    auto* baseline = app.add_subcommand("baseline", "Rank a link graph with PageRank, HITS, Katz or ToRank");
    auto* cv = app.add_subcommand("cv", "Five-fold cross-validation with link-based baselines");
    auto* annotate = app.add_subcommand("annotate", "Ground-truth annotation tools");
    annotate->require_subcommand(1);
    auto* plan = annotate->add_subcommand("plan", "Assign domains to annotators");
    auto* runa = annotate->add_subcommand("run", "Answer the questionnaire in the terminal");
    auto* merge = annotate->add_subcommand("merge", "Majority-vote annotations into gains");

    synth_cmd.add(synth);
    ingest_cmd.add(ingest);
    features_cmd.add(feats);
    train_cmd.add(train);
    rank_cmd.add(rank);
    eval_cmd.add(evalc);
    baseline_cmd.add(baseline);
    cv_cmd.add(cv);
    plan_cmd.add(plan);
    run_cmd.add(runa);
    merge_cmd.add(merge);
    for (auto* sub : {synth, ingest, feats, train, rank, evalc, baseline, cv, annotate, plan, runa, merge})
        sub->configurable();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e, out, err);
        return rc == 0 ? kOk : kUsage;
    }

    Streams s{in, out, err};
    const std::pair<CLI::App*, std::function<int()>> commands[] = {
        {synth, [&] { return synth_cmd.run(*synth, s); }},
        {ingest, [&] { return ingest_cmd.run(*ingest, s); }},
        {feats, [&] { return features_cmd.run(*feats, s); }},
        {train, [&] { return train_cmd.run(*train, s); }},
        {rank, [&] { return rank_cmd.run(*rank, s); }},
        {evalc, [&] { return eval_cmd.run(*evalc, s); }},
        {baseline, [&] { return baseline_cmd.run(*baseline, s); }},
        {cv, [&] { return cv_cmd.run(*cv, s); }},
        {plan, [&] { return plan_cmd.run(*plan, s); }},
        {runa, [&] { return run_cmd.run(*runa, s); }},
        {merge, [&] { return merge_cmd.run(*merge, s); }},
    };
    CLI::App* active = nullptr;
    try {
        for (const auto& [sub, run] : commands)
            if (sub->parsed()) {
                active = sub;
                return run();
            }
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        if (active) err << active->help();
        return kUsage;
    } catch (const DataError& e) {
        err << "error: " << e.what() << '\n';
        return kData;
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return kData;
    } catch (const nlohmann::json::exception& e) {
        err << "error: " << e.what() << '\n';
        return kData;
    }
    err << app.help();
    return kUsage;
}

}  // namespace onionrank::cli
