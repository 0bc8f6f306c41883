#include <cmath>
#include <fstream>
#include <map>

#include "doctest.h"
#include "onionrank/features.hpp"
#include "onionrank/synth.hpp"
#include "test_util.hpp"

using namespace onionrank;
using namespace onionrank::synth;
namespace fs = std::filesystem;

namespace {

std::map<std::string, std::string> snapshot(const fs::path& root) {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(root))
        if (e.is_regular_file()) files[fs::relative(e.path(), root).string()] = testutil::read_file(e.path());
    return files;
}

std::vector<double> average_ranks(const std::vector<double>& v) {
    std::vector<std::size_t> idx(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < idx.size();) {
        std::size_t j = i;
        while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
        for (std::size_t k = i; k <= j; ++k) r[idx[k]] = (double(i) + double(j)) / 2.0;
        i = j + 1;
    }
    return r;
}

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
    auto ra = average_ranks(a), rb = average_ranks(b);
    double ma = 0, mb = 0;
    for (std::size_t i = 0; i < ra.size(); ++i) {
        ma += ra[i];
        mb += rb[i];
    }
    ma /= double(ra.size());
    mb /= double(rb.size());
    double sab = 0, saa = 0, sbb = 0;
    for (std::size_t i = 0; i < ra.size(); ++i) {
        sab += (ra[i] - ma) * (rb[i] - mb);
        saa += (ra[i] - ma) * (ra[i] - ma);
        sbb += (rb[i] - mb) * (rb[i] - mb);
    }
    return sab / std::sqrt(saa * sbb);
}

}  // namespace

TEST_CASE("config validation") {
    SynthConfig c;
    CHECK_NOTHROW(c.validate());
    c.sigma = 1.5;
    CHECK_THROWS_AS(c.validate(), DataError);
    c = {};
    c.n_domains = 0;
    CHECK_THROWS_AS(c.validate(), DataError);
    c = {};
    c.n_annotators = 2;
    CHECK_THROWS_AS(c.validate(), DataError);
}

TEST_CASE("generation is byte-deterministic") {
    testutil::TempDir a("synth-a"), b("synth-b"), c("synth-c");
    SynthConfig cfg;
    cfg.n_domains = 10;
    cfg.seed = 3;
    generate_corpus(cfg, a.path());
    generate_corpus(cfg, b.path());
    cfg.seed = 4;
    generate_corpus(cfg, c.path());
    auto sa = snapshot(a.path());
    CHECK(sa.size() > 10);
    CHECK(sa == snapshot(b.path()));
    CHECK(sa != snapshot(c.path()));
    CHECK(sa.count("planted.csv"));
    CHECK(sa.count("annotations.jsonl"));
    CHECK(sa.count("corpus/hs0001/meta.json"));
}

TEST_CASE("noise-free annotators reproduce the planted gains") {
    testutil::TempDir dir("synth-clean");
    SynthConfig cfg;
    cfg.n_domains = 40;
    cfg.sigma = 0.0;
    cfg.seed = 9;
    auto out = generate_corpus(cfg, dir.path());
    auto gt = gt::build_ground_truth(gt::load_annotations(dir / "annotations.jsonl"));
    REQUIRE(gt.gains.size() == 40);
    for (const auto& d : out.domains) {
        CHECK(d.latent >= 0.0);
        CHECK(d.latent <= 23.0);
        CHECK(d.planted_gain == std::lround(d.latent));
        CHECK(gt.gains.at(d.domain_id) == d.planted_gain);
        CHECK(gt::gain(d.planted_answers) == d.planted_gain);
    }
}

TEST_CASE("noisy annotators stay close to the planted gains") {
    testutil::TempDir dir("synth-noisy");
    SynthConfig cfg;
    cfg.n_domains = 100;
    cfg.seed = 2;
    auto out = generate_corpus(cfg, dir.path());
    auto gt = gt::build_ground_truth(out.annotations);
    double total = 0;
    for (const auto& d : out.domains) total += std::abs(gt.gains.at(d.domain_id) - d.planted_gain);
    CHECK(total / 100.0 <= 1.0);
}

TEST_CASE("corpus links reproduce the planted edges and features carry the signal") {
    testutil::TempDir dir("synth-links");
    SynthConfig cfg;
    cfg.n_domains = 80;
    cfg.sigma = 0.0;
    cfg.seed = 5;
    auto out = generate_corpus(cfg, dir.path());
    auto [c, report] = corpus::ingest_corpus(dir / "corpus");
    CHECK(report.domain_errors.empty());
    CHECK(report.skipped_pages.empty());
    REQUIRE(c.domains.size() == 80);

    auto g = corpus::derive_link_graph(c);
    std::vector<std::pair<std::string, std::string>> edges;
    for (auto [u, v] : g.edges()) edges.emplace_back(g.name(u), g.name(v));
    std::sort(edges.begin(), edges.end());
    CHECK(edges == out.edges);
    CHECK_FALSE(edges.empty());

    std::ifstream planted_edges(dir / "planted_edges.tsv");
    auto planted_graph = graph::read_edge_list(planted_edges);
    CHECK(planted_graph.edge_count() == out.edges.size());

    features::FeatureConfig fc;
    fc.reference_date = cfg.scrape_time;
    auto lex = text::load_lexicon(dir / "lexicon.txt");
    auto gaz = ner::load_gazetteer(dir / "gazetteer.tsv");
    auto ids = c.domain_ids();
    auto visual = corpus::load_visual_records(dir / "visual.jsonl", ids).records;
    auto inputs = features::prepare_inputs(c, lex, gaz, visual, fc);
    auto m = features::assemble_feature_matrix(c, inputs, features::kAllGroups, fc);

    std::vector<double> latent, keyword_num, suspicious, in_degree;
    for (std::size_t r = 0; r < m.rows(); ++r) {
        latent.push_back(out.domains[r].latent);
        keyword_num.push_back(m.at(r, 5));
        suspicious.push_back(m.at(r, 27));
        in_degree.push_back(m.at(r, 33));
    }
    CHECK(spearman(latent, keyword_num) >= 0.5);
    CHECK(spearman(latent, suspicious) >= 0.5);
    CHECK(spearman(latent, in_degree) >= 0.3);
}
