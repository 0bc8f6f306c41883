#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "onionrank/common.hpp"

namespace onionrank::graph {

using NodeId = std::size_t;

/// Simple directed graph with named nodes. Edges are deduplicated and
/// self-loops are rejected. Node ids are indices into names().
class Digraph {
public:
    Digraph() = default;
    explicit Digraph(std::vector<std::string> names);

    NodeId add_node(std::string name);
    /// Returns false if the edge already exists or is a self-loop.
    bool add_edge(NodeId src, NodeId dst);

    std::size_t size() const { return names_.size(); }
    std::size_t edge_count() const { return edge_count_; }
    const std::vector<std::string>& names() const { return names_; }
    const std::string& name(NodeId v) const { return names_[v]; }
    /// Index lookup by name; returns size() when absent.
    NodeId find(const std::string& name) const;

    const std::vector<NodeId>& out(NodeId v) const { return out_[v]; }
    const std::vector<NodeId>& in(NodeId v) const { return in_[v]; }
    bool has_edge(NodeId src, NodeId dst) const;

    std::vector<std::pair<NodeId, NodeId>> edges() const;

    /// Subgraph induced by `keep` (names kept in the given order).
    Digraph induced(std::span<const NodeId> keep) const;

private:
    std::vector<std::string> names_;
    std::map<std::string, NodeId> index_;
    std::vector<std::vector<NodeId>> out_, in_;
    std::size_t edge_count_ = 0;
};

/// Reads `src<TAB>dst` lines; unknown names become new nodes in order of
/// first appearance. Blank lines and lines starting with '#' are skipped.
Digraph read_edge_list(std::istream& in);
void write_edge_list(std::ostream& out, const Digraph& g);

/// Nodes ordered best-first. Scores are non-increasing; ties go to the
/// smaller node id.
struct RankingResult {
    struct Entry {
        NodeId node;
        double score;
    };
    std::vector<Entry> entries;
    bool converged = true;
    std::size_t iterations = 0;

    /// 1-based rank per node id.
    std::vector<std::size_t> ranks(std::size_t n) const;
};

/// Sorts `scores` into a RankingResult using the tie rule above.
RankingResult rank_scores(std::span<const double> scores);

/// Writes `node,score,rank` CSV with a header line.
void write_ranking_csv(std::ostream& out, const Digraph& g, const RankingResult& r);

struct IterationControl {
    std::size_t max_iter = 1000;
    double tol = 1e-9;
};

struct PageRankResult {
    std::vector<double> scores;
    RankingResult ranking;
};
PageRankResult pagerank(const Digraph& g, double alpha = 0.85, IterationControl ctl = {});

struct HitsResult {
    std::vector<double> hubs;
    std::vector<double> authorities;
    RankingResult ranking;  // by authority
};
HitsResult hits(const Digraph& g, IterationControl ctl = {});

struct KatzResult {
    std::vector<double> raw;     // fixed point before normalization
    std::vector<double> scores;  // L2-normalized
    RankingResult ranking;
};
/// Throws DataError when the iterate norm exceeds 1e12 (alpha too large).
KatzResult katz(const Digraph& g, double alpha = 0.1, double beta = 1.0, IterationControl ctl = {});

/// Score of a candidate node during one greedy ToRank step.
struct ToRankCandidate {
    std::size_t degree;           // in + out within the remaining graph
    std::size_t max_degree;       // max over remaining nodes
    std::size_t largest_before;   // largest weakly connected component size
    std::size_t largest_after;    // same, with the candidate removed
};
using ToRankScore = double (*)(const ToRankCandidate&, double alpha, double beta);

/// alpha * degree / max_degree + beta * relative shrink of the largest
/// weakly connected component.
double torank_connectivity_score(const ToRankCandidate& c, double alpha, double beta);

/// Greedy removal ranking. Every node appears exactly once; the reported
/// score of the node picked at step i (0-based) is (n - i) / n.
RankingResult torank(const Digraph& g, double alpha = 0.9, double beta = 0.2,
                     ToRankScore score = torank_connectivity_score);

/// Per-candidate scores at the first greedy step (exposed for inspection).
std::vector<double> torank_first_step_scores(const Digraph& g, double alpha, double beta,
                                             ToRankScore score = torank_connectivity_score);

struct CentralityResult {
    std::vector<double> closeness;
    std::vector<double> betweenness;
    std::vector<double> eigenvector;
    bool eigenvector_converged = true;
};

struct CentralityOptions {
    double teleport = 1e-6;
    IterationControl eigen{10000, 1e-12};
};

/// Closeness on incoming distances with the reachable-set correction,
/// directed betweenness normalized by 1/((n-1)(n-2)), eigenvector centrality
/// on A^T with a small uniform teleport (L2-normalized).
CentralityResult centralities(const Digraph& g, CentralityOptions opts = {});

/// Undirected simple graph as adjacency lists.
using UndirectedGraph = std::vector<std::vector<NodeId>>;

/// k-shell (core number) of every node.
std::vector<std::size_t> kshell(const UndirectedGraph& g);

/// Size of the largest weakly connected component among `alive` nodes.
std::size_t largest_weak_component(const Digraph& g, const std::vector<bool>& alive);

}  // namespace onionrank::graph
