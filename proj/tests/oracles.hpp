#pragma once

// Reference implementations written independently of the library: dense
// linear algebra, explicit enumeration and finite differences.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>
#include <vector>

#include "onionrank/graph.hpp"

namespace oracle {

using Matrix = std::vector<std::vector<double>>;

// DCG written straight from the definition: position 1 undiscounted, then
// G_i / log2(i).
inline double dcg(const std::vector<double>& gains, std::size_t k) {
    double s = 0.0;
    for (std::size_t i = 1; i <= std::min(k, gains.size()); ++i)
        s += i == 1 ? gains[0] : gains[i - 1] / std::log2(double(i));
    return s;
}

// IDCG as the best DCG over every permutation (lists of length <= 8).
inline double idcg_by_enumeration(std::vector<double> gains, std::size_t k) {
    std::sort(gains.begin(), gains.end());
    double best = 0.0;
    do best = std::max(best, dcg(gains, k));
    while (std::next_permutation(gains.begin(), gains.end()));
    return best;
}

// Solves A x = b by Gaussian elimination with partial pivoting.
inline std::vector<double> solve(Matrix a, std::vector<double> b) {
    const std::size_t n = b.size();
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < n; ++r)
            if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
        std::swap(a[c], a[piv]);
        std::swap(b[c], b[piv]);
        for (std::size_t r = c + 1; r < n; ++r) {
            double f = a[r][c] / a[c][c];
            for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
            b[r] -= f * b[c];
        }
    }
    std::vector<double> x(n);
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t k = i + 1; k < n; ++k) s -= a[i][k] * x[k];
        x[i] = s / a[i][i];
    }
    return x;
}

inline Matrix adjacency(const onionrank::graph::Digraph& g) {
    Matrix a(g.size(), std::vector<double>(g.size(), 0.0));
    for (auto [u, v] : g.edges()) a[u][v] = 1.0;
    return a;
}

// Stationary vector of the damped walk with uniform dangling redistribution,
// from the linear system (I - alpha G) p = (1 - alpha)/n.
inline std::vector<double> pagerank(const onionrank::graph::Digraph& g, double alpha) {
    const std::size_t n = g.size();
    Matrix a = adjacency(g);
    Matrix sys(n, std::vector<double>(n, 0.0));
    for (std::size_t u = 0; u < n; ++u) {
        double out = std::accumulate(a[u].begin(), a[u].end(), 0.0);
        for (std::size_t v = 0; v < n; ++v) {
            double t = out > 0 ? a[u][v] / out : 1.0 / double(n);  // transition u -> v
            sys[v][u] -= alpha * t;
        }
    }
    for (std::size_t i = 0; i < n; ++i) sys[i][i] += 1.0;
    return solve(sys, std::vector<double>(n, (1.0 - alpha) / double(n)));
}

// Katz fixed point x = alpha A^T x + beta, L2-normalized.
inline std::vector<double> katz(const onionrank::graph::Digraph& g, double alpha, double beta) {
    const std::size_t n = g.size();
    Matrix a = adjacency(g);
    Matrix sys(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        sys[i][i] = 1.0;
        for (std::size_t j = 0; j < n; ++j) sys[i][j] -= alpha * a[j][i];
    }
    auto x = solve(sys, std::vector<double>(n, beta));
    double norm = std::sqrt(std::inner_product(x.begin(), x.end(), x.begin(), 0.0));
    for (double& v : x) v /= norm;
    return x;
}

inline void normalize(std::vector<double>& v) {
    double s = std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
    if (s > 0)
        for (double& x : v) x /= s;
}

// Authority and hub vectors by dense power iteration on A^T A, started from
// the authorities of a uniform hub vector.
inline std::pair<std::vector<double>, std::vector<double>> hits(const onionrank::graph::Digraph& g) {
    const std::size_t n = g.size();
    Matrix a = adjacency(g);
    Matrix ata(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t k = 0; k < n; ++k) ata[i][j] += a[k][i] * a[k][j];
    std::vector<double> auth(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < n; ++k) auth[i] += a[k][i];
    normalize(auth);
    for (int it = 0; it < 200000; ++it) {
        std::vector<double> next(n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) next[i] += ata[i][j] * auth[j];
        normalize(next);
        double change = 0.0;
        for (std::size_t i = 0; i < n; ++i) change = std::max(change, std::abs(next[i] - auth[i]));
        auth = next;
        if (change < 1e-15) break;
    }
    std::vector<double> hub(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) hub[i] += a[i][j] * auth[j];
    normalize(hub);
    return {auth, hub};
}

// Betweenness by listing every shortest path explicitly.
inline std::vector<double> betweenness(const onionrank::graph::Digraph& g) {
    const std::size_t n = g.size();
    const std::size_t inf = n + 1;
    std::vector<std::vector<std::size_t>> dist(n, std::vector<std::size_t>(n, inf));
    for (std::size_t s = 0; s < n; ++s) {
        dist[s][s] = 0;
        std::vector<std::size_t> frontier{s};
        while (!frontier.empty()) {
            std::vector<std::size_t> next;
            for (auto u : frontier)
                for (auto v : g.out(u))
                    if (dist[s][v] == inf) {
                        dist[s][v] = dist[s][u] + 1;
                        next.push_back(v);
                    }
            frontier = next;
        }
    }
    std::vector<double> bc(n, 0.0);
    for (std::size_t s = 0; s < n; ++s)
        for (std::size_t t = 0; t < n; ++t) {
            if (s == t || dist[s][t] == inf) continue;
            std::vector<std::vector<std::size_t>> paths;
            std::vector<std::size_t> path{s};
            std::function<void(std::size_t)> walk = [&](std::size_t u) {
                if (u == t) {
                    paths.push_back(path);
                    return;
                }
                for (auto v : g.out(u))
                    if (dist[s][v] == dist[s][u] + 1 && dist[v][t] != inf &&
                        dist[s][v] + dist[v][t] == dist[s][t]) {
                        path.push_back(v);
                        walk(v);
                        path.pop_back();
                    }
            };
            walk(s);
            for (const auto& p : paths)
                for (std::size_t i = 1; i + 1 < p.size(); ++i) bc[p[i]] += 1.0 / double(paths.size());
        }
    if (n > 2)
        for (double& b : bc) b /= double((n - 1) * (n - 2));
    return bc;
}

inline onionrank::graph::Digraph random_digraph(std::size_t n, double p, std::mt19937_64& rng) {
    onionrank::graph::Digraph g;
    for (std::size_t i = 0; i < n; ++i) g.add_node("n" + std::to_string(i));
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j && u(rng) < p) g.add_edge(i, j);
    return g;
}

// Central difference of f at x along every coordinate.
inline std::vector<double> numeric_gradient(const std::function<double(const std::vector<double>&)>& f,
                                            std::vector<double> x, double h = 1e-5) {
    std::vector<double> g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        double keep = x[i];
        x[i] = keep + h;
        double up = f(x);
        x[i] = keep - h;
        double down = f(x);
        x[i] = keep;
        g[i] = (up - down) / (2.0 * h);
    }
    return g;
}

}  // namespace oracle
