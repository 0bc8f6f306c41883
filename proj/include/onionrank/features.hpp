#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "onionrank/corpus.hpp"
#include "onionrank/graph.hpp"
#include "onionrank/ner.hpp"
#include "onionrank/text.hpp"

namespace onionrank::features {

inline constexpr std::size_t kFeatureCount = 40;

/// Column names in canonical order: text 9, named entities 10, HTML 8,
/// visual 6, graph 7.
inline constexpr std::array<std::string_view, kFeatureCount> kFeatureNames = {
    "recently_updated", "updates_count", "address_words_count", "address_letters_count",
    "clones_rate", "keyword_num", "keyword_TF-IDF", "keyword_avg_weight", "keyword_to_total",
    "popular_NE_PER", "popular_NE_LOC", "popular_NE_ORG", "popular_NE_PRD", "popular_NE_CRTV",
    "popular_NE_GRP", "NE_counter", "NE_TF-IDF", "popular_NE_TF-IDF", "emerging_NE",
    "internal_links", "external_links", "img_count", "needs_credential", "has_title", "has_H1",
    "TF-IDF_title_H1", "TF-IDF_alt",
    "suspicious_count", "noise_count", "total_count", "avg_suspicious_conf", "avg_normal_conf",
    "suspicious_majority",
    "in_degree", "out_degree", "cls", "btwn", "eigvec", "ToRank_rank", "ToRank_top_X",
};

enum class FeatureGroup { Text, Ner, Html, Visual, Graph };
inline constexpr std::array<FeatureGroup, 5> kAllGroups = {
    FeatureGroup::Text, FeatureGroup::Ner, FeatureGroup::Html, FeatureGroup::Visual,
    FeatureGroup::Graph,
};

std::string_view group_name(FeatureGroup g);
/// Accepts text, ner, html, visual, graph (case-insensitive).
std::optional<FeatureGroup> parse_group(std::string_view s);
/// Comma-separated group names or "all". Throws DataError on unknown
/// names or an empty selection. Result is in canonical order, no repeats.
std::vector<FeatureGroup> parse_groups(std::string_view list);
std::string format_groups(std::span<const FeatureGroup> groups);

/// [first, last) column range of a group within the full 40 columns.
std::pair<std::size_t, std::size_t> group_columns(FeatureGroup g);

using TextFeatures = std::array<double, 9>;
using NeFeatures = std::array<double, 10>;
using HtmlFeatures = std::array<double, 8>;
using VisualFeatures = std::array<double, 6>;
using GraphFeatures = std::array<double, 7>;

struct FeatureConfig {
    corpus::Timestamp reference_date{};  // required; normally the scrape date
    int recency_days = 90;
    std::size_t vocab_size = 10000;
    std::size_t min_df = 3;
    std::size_t popularity_threshold = 5;
    std::size_t top_x = 10;
    bool landing_only = false;
    bool invert_keyword_ratio = false;  // keywords / total instead of total / keywords

    corpus::Timestamp recency_threshold() const;
};

TextFeatures extract_text_features(const corpus::Domain& domain, const text::TfIdfModel& tfidf,
                                   const text::CloneIndex& clones, const text::Lexicon& lexicon,
                                   const FeatureConfig& config);

NeFeatures extract_ne_features(const corpus::Domain& domain, const ner::EntityRecognizer& recognizer,
                               const text::TfIdfModel& tfidf, const ner::EmergingIndex& emerging,
                               std::size_t popularity_threshold = 5, bool landing_only = false);

HtmlFeatures extract_html_features(const corpus::Domain& domain, const text::TfIdfModel& tfidf,
                                   bool landing_only = false);

VisualFeatures extract_visual_features(std::span<const corpus::VisualRecord> records);

/// Corpus-global graph quantities computed once.
struct GraphContext {
    graph::Digraph graph;
    graph::CentralityResult centrality;
    graph::RankingResult torank;
    std::vector<std::size_t> torank_rank;  // 1-based, per node
};
GraphContext build_graph_context(graph::Digraph graph, double torank_alpha = 0.9,
                                 double torank_beta = 0.2);

GraphFeatures extract_graph_features(std::string_view domain_id, const GraphContext& ctx,
                                     std::size_t top_x = 10);

/// Dense row-major matrix with named rows and columns.
struct FeatureMatrix {
    std::vector<std::string> row_ids;
    std::vector<std::string> columns;
    std::vector<double> values;

    std::size_t rows() const { return row_ids.size(); }
    std::size_t cols() const { return columns.size(); }
    double& at(std::size_t r, std::size_t c) { return values[r * cols() + c]; }
    double at(std::size_t r, std::size_t c) const { return values[r * cols() + c]; }
    std::span<const double> row(std::size_t r) const { return {values.data() + r * cols(), cols()}; }

    /// Rows picked by index, in the given order.
    FeatureMatrix select_rows(std::span<const std::size_t> idx) const;
    /// Index of a row id, or rows() when absent.
    std::size_t find_row(std::string_view id) const;
};

/// First column `domain_id`, then one column per feature; 17 significant digits.
void write_csv(std::ostream& out, const FeatureMatrix& m);
FeatureMatrix read_csv(std::istream& in);

/// Everything the extractors need, built once per corpus.
struct ExtractionInputs {
    text::TfIdfModel tfidf;
    text::CloneIndex clones;
    text::Lexicon lexicon;
    const ner::EntityRecognizer* recognizer = nullptr;
    ner::EmergingIndex emerging;
    corpus::VisualIndex visual;
    GraphContext graph;
};

ExtractionInputs prepare_inputs(const corpus::Corpus& corpus, text::Lexicon lexicon,
                                const ner::EntityRecognizer& recognizer,
                                corpus::VisualIndex visual, const FeatureConfig& config);

/// One row per domain, columns of the selected groups in canonical order.
FeatureMatrix assemble_feature_matrix(const corpus::Corpus& corpus, const ExtractionInputs& inputs,
                                      std::span<const FeatureGroup> groups,
                                      const FeatureConfig& config);

struct StandardizationStats {
    std::vector<double> mean;
    std::vector<double> stddev;  // population standard deviation
};

/// Without `stats`, fits them on `m`; otherwise applies them unchanged.
/// Zero-variance columns become 0.
std::pair<FeatureMatrix, StandardizationStats> standardize(
    const FeatureMatrix& m, const std::optional<StandardizationStats>& stats = std::nullopt);

}  // namespace onionrank::features
