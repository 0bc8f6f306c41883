#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "onionrank/graph.hpp"
#include "onionrank/ltr.hpp"

namespace onionrank::eval {

inline constexpr std::size_t kFolds = 5;

enum class FoldRole { Train, Validation, Test };

/// Seeded 5-way partition of the judged domains. In iteration i, fold i is
/// the test fold, fold (i+1) mod 5 validates and the other three train.
struct FoldPlan {
    std::uint64_t seed = 0;
    std::vector<std::string> domain_ids;  // sorted
    std::vector<std::size_t> fold;        // fold index per entry of domain_ids

    static std::size_t test_fold(std::size_t iteration) { return iteration % kFolds; }
    static std::size_t validation_fold(std::size_t iteration) { return (iteration + 1) % kFolds; }
    static FoldRole role(std::size_t iteration, std::size_t fold);

    std::vector<std::string> members(std::size_t fold) const;
    /// Throws DataError for an unknown id.
    std::size_t fold_of(std::string_view id) const;
};

/// Throws DataError on duplicate ids or fewer ids than folds.
FoldPlan make_fold_plan(std::span<const std::string> domain_ids, std::uint64_t seed);

/// {1..10, 15, 20, 25}
std::vector<std::size_t> default_k_list();
/// Comma list of positive integers or ranges (`1-10,15,20`); must be
/// strictly increasing.
std::vector<std::size_t> parse_k_list(std::string_view s);

struct CurvePoint {
    std::size_t k = 0;
    double mean = 0.0;  // arithmetic mean over folds
    std::vector<double> per_fold;
};

struct NdcgCurve {
    std::string method;
    std::vector<CurvePoint> points;

    /// Point for `k`, or null.
    const CurvePoint* at(std::size_t k) const;
};

struct FoldTraining {
    std::size_t fold = 0;
    std::size_t best_epoch = 0;
    std::size_t epochs_run = 0;
    double best_val_ndcg = 0.0;
};

struct CvResult {
    FoldPlan plan;
    NdcgCurve curve;
    std::vector<FoldTraining> training;
    std::vector<std::string> notes;  // K truncations, degenerate folds
};

/// Five-fold protocol. `judged` carries raw (unstandardized) features;
/// standardization is fitted on the three training folds of each iteration.
/// The fold plan is seeded with `config.seed`. Needs at least 10 domains.
CvResult cross_validate(std::span<const ltr::JudgedDomain> judged, ltr::Scheme scheme,
                        const ltr::TrainConfig& config, std::span<const std::size_t> k_list);

enum class LinkAlgo { PageRank, Hits, Katz, ToRank };

std::optional<LinkAlgo> parse_link_algo(std::string_view s);
/// PageRank, HITS, Katz, ToRank.
std::string_view link_algo_label(LinkAlgo a);
inline constexpr LinkAlgo kAllLinkAlgos[] = {LinkAlgo::PageRank, LinkAlgo::Hits, LinkAlgo::Katz,
                                             LinkAlgo::ToRank};

struct BaselineConfig {
    double pagerank_alpha = 0.85;
    double katz_alpha = 0.1;
    double katz_beta = 1.0;
    double torank_alpha = 0.9;
    double torank_beta = 0.2;
    graph::IterationControl control{};
};

/// HITS ranks by authority score.
graph::RankingResult run_link_algorithm(const graph::Digraph& g, LinkAlgo algo,
                                        const BaselineConfig& config);

/// Subgraph on `ids` (sorted, so ties fall to the smaller domain id). Ids
/// missing from `g` become isolated nodes.
graph::Digraph induced_on_ids(const graph::Digraph& g, std::vector<std::string> ids);

/// For every test fold of `plan`, ranks the fold's domains by each link
/// algorithm on the induced subgraph and scores it against the same gains.
std::vector<NdcgCurve> compare_baselines(std::span<const ltr::JudgedDomain> judged,
                                         const graph::Digraph& graph, const FoldPlan& plan,
                                         const BaselineConfig& config,
                                         std::span<const std::size_t> k_list,
                                         std::vector<std::string>* notes = nullptr);

/// `method,K,fold,ndcg` with 1-based folds.
void write_fold_csv(std::ostream& out, std::span<const NdcgCurve> curves);
/// `method,K,mean_ndcg`
void write_summary_csv(std::ostream& out, std::span<const NdcgCurve> curves);

}  // namespace onionrank::eval
