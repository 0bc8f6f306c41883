#include "onionrank/graph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>

namespace onionrank::graph {

Digraph::Digraph(std::vector<std::string> names) {
    for (auto& n : names) add_node(std::move(n));
}

NodeId Digraph::add_node(std::string name) {
    auto it = index_.find(name);
    if (it != index_.end()) return it->second;
    NodeId id = names_.size();
    index_.emplace(name, id);
    names_.push_back(std::move(name));
    out_.emplace_back();
    in_.emplace_back();
    return id;
}

bool Digraph::add_edge(NodeId src, NodeId dst) {
    if (src == dst || src >= size() || dst >= size()) return false;
    auto& o = out_[src];
    auto pos = std::lower_bound(o.begin(), o.end(), dst);
    if (pos != o.end() && *pos == dst) return false;
    o.insert(pos, dst);
    auto& i = in_[dst];
    i.insert(std::lower_bound(i.begin(), i.end(), src), src);
    ++edge_count_;
    return true;
}

NodeId Digraph::find(const std::string& name) const {
    auto it = index_.find(name);
    return it == index_.end() ? size() : it->second;
}

bool Digraph::has_edge(NodeId src, NodeId dst) const {
    if (src >= size()) return false;
    return std::binary_search(out_[src].begin(), out_[src].end(), dst);
}

std::vector<std::pair<NodeId, NodeId>> Digraph::edges() const {
    std::vector<std::pair<NodeId, NodeId>> e;
    e.reserve(edge_count_);
    for (NodeId u = 0; u < size(); ++u)
        for (NodeId v : out_[u]) e.emplace_back(u, v);
    return e;
}

Digraph Digraph::induced(std::span<const NodeId> keep) const {
    Digraph sub;
    std::vector<NodeId> remap(size(), size());
    for (NodeId v : keep) remap[v] = sub.add_node(names_[v]);
    for (NodeId u : keep)
        for (NodeId v : out_[u])
            if (remap[v] != size()) sub.add_edge(remap[u], remap[v]);
    return sub;
}

Digraph read_edge_list(std::istream& in) {
    Digraph g;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty() || line[0] == '#') continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos)
            throw DataError("edge list line " + std::to_string(lineno) + ": expected src<TAB>dst");
        std::string src(trim(line.substr(0, tab)));
        std::string dst(trim(line.substr(tab + 1)));
        if (src.empty() || dst.empty())
            throw DataError("edge list line " + std::to_string(lineno) + ": empty endpoint");
        NodeId s = g.add_node(src);
        NodeId d = g.add_node(dst);
        g.add_edge(s, d);
    }
    return g;
}

void write_edge_list(std::ostream& out, const Digraph& g) {
    for (auto [u, v] : g.edges()) out << g.name(u) << '\t' << g.name(v) << '\n';
}

std::vector<std::size_t> RankingResult::ranks(std::size_t n) const {
    std::vector<std::size_t> r(n, 0);
    for (std::size_t i = 0; i < entries.size(); ++i) r[entries[i].node] = i + 1;
    return r;
}

RankingResult rank_scores(std::span<const double> scores) {
    RankingResult r;
    r.entries.reserve(scores.size());
    for (NodeId v = 0; v < scores.size(); ++v) r.entries.push_back({v, scores[v]});
    std::stable_sort(r.entries.begin(), r.entries.end(),
                     [](const auto& a, const auto& b) { return a.score > b.score; });
    return r;
}

void write_ranking_csv(std::ostream& out, const Digraph& g, const RankingResult& r) {
    out << "node,score,rank\n";
    for (std::size_t i = 0; i < r.entries.size(); ++i) {
        const auto& e = r.entries[i];
        out << g.name(e.node) << ',' << format_double(e.score) << ',' << (i + 1) << '\n';
    }
}

namespace {

void require_nonempty(const Digraph& g, const char* what) {
    if (g.size() == 0) throw DataError(std::string(what) + ": graph is empty");
}

double l1_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d += std::abs(a[i] - b[i]);
    return d;
}

double l2_norm(const std::vector<double>& x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return std::sqrt(s);
}

void l2_normalize(std::vector<double>& x) {
    double n = l2_norm(x);
    if (n > 0.0)
        for (double& v : x) v /= n;
}

}  // namespace

PageRankResult pagerank(const Digraph& g, double alpha, IterationControl ctl) {
    require_nonempty(g, "pagerank");
    const std::size_t n = g.size();
    const double inv_n = 1.0 / static_cast<double>(n);
    std::vector<double> p(n, inv_n), next(n);
    bool converged = false;
    std::size_t it = 0;
    while (it < ctl.max_iter) {
        ++it;
        double dangling = 0.0;
        for (NodeId u = 0; u < n; ++u)
            if (g.out(u).empty()) dangling += p[u];
        for (NodeId v = 0; v < n; ++v) {
            double acc = 0.0;
            for (NodeId u : g.in(v)) acc += p[u] / static_cast<double>(g.out(u).size());
            next[v] = alpha * (acc + dangling * inv_n) + (1.0 - alpha) * inv_n;
        }
        double change = l1_diff(next, p);
        p.swap(next);
        if (change <= ctl.tol) {
            converged = true;
            break;
        }
    }
    PageRankResult res{p, rank_scores(p)};
    res.ranking.converged = converged;
    res.ranking.iterations = it;
    return res;
}

HitsResult hits(const Digraph& g, IterationControl ctl) {
    require_nonempty(g, "hits");
    const std::size_t n = g.size();
    std::vector<double> h(n, 1.0 / std::sqrt(static_cast<double>(n))), a(n, 0.0);
    std::vector<double> h_next(n), a_next(n);
    bool converged = false;
    std::size_t it = 0;
    while (it < ctl.max_iter) {
        ++it;
        for (NodeId v = 0; v < n; ++v) {
            double acc = 0.0;
            for (NodeId u : g.in(v)) acc += h[u];
            a_next[v] = acc;
        }
        l2_normalize(a_next);
        for (NodeId u = 0; u < n; ++u) {
            double acc = 0.0;
            for (NodeId v : g.out(u)) acc += a_next[v];
            h_next[u] = acc;
        }
        l2_normalize(h_next);
        double change = l1_diff(a_next, a) + l1_diff(h_next, h);
        a.swap(a_next);
        h.swap(h_next);
        if (change <= ctl.tol) {
            converged = true;
            break;
        }
    }
    HitsResult res{h, a, rank_scores(a)};
    res.ranking.converged = converged;
    res.ranking.iterations = it;
    return res;
}

KatzResult katz(const Digraph& g, double alpha, double beta, IterationControl ctl) {
    require_nonempty(g, "katz");
    const std::size_t n = g.size();
    std::vector<double> x(n, 0.0), next(n);
    bool converged = false;
    std::size_t it = 0;
    while (it < ctl.max_iter) {
        ++it;
        for (NodeId v = 0; v < n; ++v) {
            double acc = 0.0;
            for (NodeId u : g.in(v)) acc += x[u];
            next[v] = alpha * acc + beta;
        }
        if (!(l2_norm(next) <= 1e12))
            throw DataError("katz: iteration diverged; alpha = " + format_double(alpha) +
                            " is too large for this graph's spectral radius");
        double change = l1_diff(next, x);
        x.swap(next);
        if (change <= ctl.tol) {
            converged = true;
            break;
        }
    }
    KatzResult res;
    res.raw = x;
    res.scores = x;
    l2_normalize(res.scores);
    res.ranking = rank_scores(res.scores);
    res.ranking.converged = converged;
    res.ranking.iterations = it;
    return res;
}

std::size_t largest_weak_component(const Digraph& g, const std::vector<bool>& alive) {
    const std::size_t n = g.size();
    std::vector<bool> seen(n, false);
    std::vector<NodeId> stack;
    std::size_t best = 0;
    for (NodeId s = 0; s < n; ++s) {
        if (!alive[s] || seen[s]) continue;
        std::size_t count = 0;
        stack.push_back(s);
        seen[s] = true;
        while (!stack.empty()) {
            NodeId u = stack.back();
            stack.pop_back();
            ++count;
            for (const auto* adj : {&g.out(u), &g.in(u)}) {
                for (NodeId v : *adj) {
                    if (alive[v] && !seen[v]) {
                        seen[v] = true;
                        stack.push_back(v);
                    }
                }
            }
        }
        best = std::max(best, count);
    }
    return best;
}

double torank_connectivity_score(const ToRankCandidate& c, double alpha, double beta) {
    double degree_term = c.max_degree == 0
                             ? 0.0
                             : static_cast<double>(c.degree) / static_cast<double>(c.max_degree);
    double shrink = c.largest_before == 0
                        ? 0.0
                        : static_cast<double>(c.largest_before - c.largest_after) /
                              static_cast<double>(c.largest_before);
    return alpha * degree_term + beta * shrink;
}

namespace {

std::vector<double> torank_step_scores(const Digraph& g, const std::vector<bool>& alive,
                                       double alpha, double beta, ToRankScore score) {
    const std::size_t n = g.size();
    std::vector<std::size_t> degree(n, 0);
    std::size_t max_degree = 0;
    for (NodeId v = 0; v < n; ++v) {
        if (!alive[v]) continue;
        for (NodeId u : g.out(v)) degree[v] += alive[u] ? 1 : 0;
        for (NodeId u : g.in(v)) degree[v] += alive[u] ? 1 : 0;
        max_degree = std::max(max_degree, degree[v]);
    }
    const std::size_t before = largest_weak_component(g, alive);

    std::vector<double> scores(n, -std::numeric_limits<double>::infinity());
    std::vector<bool> trial = alive;
    for (NodeId v = 0; v < n; ++v) {
        if (!alive[v]) continue;
        trial[v] = false;
        std::size_t after = largest_weak_component(g, trial);
        trial[v] = true;
        scores[v] = score({degree[v], max_degree, before, after}, alpha, beta);
    }
    return scores;
}

}  // namespace

std::vector<double> torank_first_step_scores(const Digraph& g, double alpha, double beta,
                                             ToRankScore score) {
    return torank_step_scores(g, std::vector<bool>(g.size(), true), alpha, beta, score);
}

RankingResult torank(const Digraph& g, double alpha, double beta, ToRankScore score) {
    require_nonempty(g, "torank");
    const std::size_t n = g.size();
    std::vector<bool> alive(n, true);
    RankingResult r;
    r.entries.reserve(n);
    for (std::size_t step = 0; step < n; ++step) {
        auto scores = torank_step_scores(g, alive, alpha, beta, score);
        NodeId best = n;
        for (NodeId v = 0; v < n; ++v) {
            if (!alive[v]) continue;
            if (best == n || scores[v] > scores[best]) best = v;
        }
        alive[best] = false;
        r.entries.push_back(
            {best, static_cast<double>(n - step) / static_cast<double>(n)});
    }
    r.iterations = n;
    return r;
}

CentralityResult centralities(const Digraph& g, CentralityOptions opts) {
    require_nonempty(g, "centralities");
    const std::size_t n = g.size();
    CentralityResult res;
    res.closeness.assign(n, 0.0);
    res.betweenness.assign(n, 0.0);

    constexpr std::size_t kUnreached = static_cast<std::size_t>(-1);
    std::vector<std::size_t> dist(n);
    std::deque<NodeId> queue;

    // Closeness: distances from every node that can reach u.
    for (NodeId u = 0; u < n; ++u) {
        std::fill(dist.begin(), dist.end(), kUnreached);
        dist[u] = 0;
        queue.assign(1, u);
        std::size_t reached = 0, total = 0;
        while (!queue.empty()) {
            NodeId v = queue.front();
            queue.pop_front();
            ++reached;
            total += dist[v];
            for (NodeId w : g.in(v)) {
                if (dist[w] == kUnreached) {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        if (total > 0 && n > 1) {
            double r1 = static_cast<double>(reached - 1);
            res.closeness[u] = (r1 / static_cast<double>(total)) * (r1 / static_cast<double>(n - 1));
        }
    }

    // Betweenness (Brandes).
    std::vector<double> sigma(n), delta(n);
    std::vector<std::vector<NodeId>> preds(n);
    std::vector<NodeId> order;
    order.reserve(n);
    for (NodeId s = 0; s < n; ++s) {
        std::fill(dist.begin(), dist.end(), kUnreached);
        std::fill(sigma.begin(), sigma.end(), 0.0);
        std::fill(delta.begin(), delta.end(), 0.0);
        for (auto& p : preds) p.clear();
        order.clear();
        dist[s] = 0;
        sigma[s] = 1.0;
        queue.assign(1, s);
        while (!queue.empty()) {
            NodeId v = queue.front();
            queue.pop_front();
            order.push_back(v);
            for (NodeId w : g.out(v)) {
                if (dist[w] == kUnreached) {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
                if (dist[w] == dist[v] + 1) {
                    sigma[w] += sigma[v];
                    preds[w].push_back(v);
                }
            }
        }
        for (auto it = order.rbegin(); it != order.rend(); ++it) {
            NodeId w = *it;
            for (NodeId v : preds[w]) delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
            if (w != s) res.betweenness[w] += delta[w];
        }
    }
    if (n > 2) {
        double scale = 1.0 / (static_cast<double>(n - 1) * static_cast<double>(n - 2));
        for (double& b : res.betweenness) b *= scale;
    }

    // Eigenvector: power iteration on (I + A^T) plus a uniform teleport. The
    // identity shift keeps periodic graphs from oscillating and leaves the
    // dominant eigenvector unchanged.
    std::vector<double> x(n, 1.0 / std::sqrt(static_cast<double>(n))), next(n);
    res.eigenvector_converged = false;
    for (std::size_t it = 0; it < opts.eigen.max_iter; ++it) {
        double mass = std::accumulate(x.begin(), x.end(), 0.0);
        for (NodeId v = 0; v < n; ++v) {
            double acc = x[v];
            for (NodeId u : g.in(v)) acc += x[u];
            next[v] = acc + opts.teleport * mass / static_cast<double>(n);
        }
        l2_normalize(next);
        double change = l1_diff(next, x);
        x.swap(next);
        if (change <= opts.eigen.tol) {
            res.eigenvector_converged = true;
            break;
        }
    }
    res.eigenvector = std::move(x);
    return res;
}

std::vector<std::size_t> kshell(const UndirectedGraph& g) {
    const std::size_t n = g.size();
    std::vector<std::size_t> degree(n), shell(n, 0);
    std::vector<bool> removed(n, false);
    for (NodeId v = 0; v < n; ++v) degree[v] = g[v].size();
    std::size_t remaining = n;
    std::size_t k = 0;
    std::vector<NodeId> queue;
    while (remaining > 0) {
        queue.clear();
        for (NodeId v = 0; v < n; ++v)
            if (!removed[v] && degree[v] <= k) queue.push_back(v);
        if (queue.empty()) {
            ++k;
            continue;
        }
        while (!queue.empty()) {
            NodeId v = queue.back();
            queue.pop_back();
            if (removed[v]) continue;
            removed[v] = true;
            shell[v] = k;
            --remaining;
            for (NodeId w : g[v]) {
                if (removed[w]) continue;
                if (--degree[w] <= k) queue.push_back(w);
            }
        }
    }
    return shell;
}

}  // namespace onionrank::graph
