#include "onionrank/cv.hpp"

#include <algorithm>
#include <map>
#include <ostream>
#include <random>
#include <set>

#include "onionrank/common.hpp"
#include "onionrank/features.hpp"
#include "onionrank/metrics.hpp"

namespace onionrank::eval {

FoldRole FoldPlan::role(std::size_t iteration, std::size_t fold) {
    if (fold == test_fold(iteration)) return FoldRole::Test;
    if (fold == validation_fold(iteration)) return FoldRole::Validation;
    return FoldRole::Train;
}

std::vector<std::string> FoldPlan::members(std::size_t f) const {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < domain_ids.size(); ++i)
        if (fold[i] == f) out.push_back(domain_ids[i]);
    return out;
}

std::size_t FoldPlan::fold_of(std::string_view id) const {
    auto it = std::lower_bound(domain_ids.begin(), domain_ids.end(), id);
    if (it == domain_ids.end() || *it != id)
        throw DataError("domain \"" + std::string(id) + "\" is not in the fold plan");
    return fold[static_cast<std::size_t>(it - domain_ids.begin())];
}

FoldPlan make_fold_plan(std::span<const std::string> domain_ids, std::uint64_t seed) {
    FoldPlan plan;
    plan.seed = seed;
    plan.domain_ids.assign(domain_ids.begin(), domain_ids.end());
    std::sort(plan.domain_ids.begin(), plan.domain_ids.end());
    if (std::adjacent_find(plan.domain_ids.begin(), plan.domain_ids.end()) != plan.domain_ids.end())
        throw DataError("duplicate domain id in fold plan input");
    if (plan.domain_ids.size() < kFolds)
        throw DataError("need at least " + std::to_string(kFolds) + " domains for " +
                        std::to_string(kFolds) + "-fold cross-validation");
    std::vector<std::size_t> order(plan.domain_ids.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::mt19937_64 rng(seed);
    deterministic_shuffle(order, rng);
    plan.fold.assign(order.size(), 0);
    for (std::size_t pos = 0; pos < order.size(); ++pos) plan.fold[order[pos]] = pos % kFolds;
    return plan;
}

std::vector<std::size_t> default_k_list() { return {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 15, 20, 25}; }

namespace {

std::size_t parse_positive(std::string_view s) {
    s = trim(s);
    if (s.empty() || !std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; }))
        throw DataError("bad K value \"" + std::string(s) + "\"");
    std::size_t v = std::stoul(std::string(s));
    if (v == 0) throw DataError("K values must be at least 1");
    return v;
}

}  // namespace

std::vector<std::size_t> parse_k_list(std::string_view s) {
    std::vector<std::size_t> out;
    for (const auto& part : split(s, ',')) {
        auto dash = part.find('-');
        if (dash == std::string::npos) {
            out.push_back(parse_positive(part));
            continue;
        }
        std::size_t lo = parse_positive(std::string_view(part).substr(0, dash));
        std::size_t hi = parse_positive(std::string_view(part).substr(dash + 1));
        if (hi < lo) throw DataError("bad K range \"" + part + "\"");
        for (std::size_t k = lo; k <= hi; ++k) out.push_back(k);
    }
    if (out.empty()) throw DataError("empty K list");
    for (std::size_t i = 1; i < out.size(); ++i)
        if (out[i] <= out[i - 1]) throw DataError("K values must be strictly increasing");
    return out;
}

const CurvePoint* NdcgCurve::at(std::size_t k) const {
    for (const auto& p : points)
        if (p.k == k) return &p;
    return nullptr;
}

namespace {

void check_k_list(std::span<const std::size_t> k_list) {
    if (k_list.empty()) throw DataError("empty K list");
    for (std::size_t i = 0; i < k_list.size(); ++i) {
        if (k_list[i] == 0) throw DataError("K values must be at least 1");
        if (i > 0 && k_list[i] <= k_list[i - 1]) throw DataError("K values must be strictly increasing");
    }
}

NdcgCurve empty_curve(std::string method, std::span<const std::size_t> k_list) {
    NdcgCurve c{std::move(method), {}};
    for (std::size_t k : k_list) c.points.push_back({k, 0.0, {}});
    return c;
}

// Adds one fold's NDCG values for a predicted order of gains.
void score_fold(NdcgCurve& curve, std::size_t fold, std::span<const double> gains_in_order,
                std::vector<std::string>* notes) {
    bool noted_degenerate = false;
    for (auto& p : curve.points) {
        std::size_t k = std::min(p.k, gains_in_order.size());
        if (k < p.k && notes)
            notes->push_back(curve.method + ": fold " + std::to_string(fold + 1) + " has " +
                             std::to_string(gains_in_order.size()) + " domains, K=" +
                             std::to_string(p.k) + " truncated to " + std::to_string(k));
        Ndcg n = ndcg_from_gains(gains_in_order, k);
        if (n.degenerate && notes && !noted_degenerate) {
            notes->push_back(curve.method + ": fold " + std::to_string(fold + 1) +
                             " has no positive gain; NDCG reported as 0");
            noted_degenerate = true;
        }
        p.per_fold.push_back(n.value);
    }
}

void finish_means(NdcgCurve& curve) {
    for (auto& p : curve.points) {
        double sum = 0.0;
        for (double v : p.per_fold) sum += v;
        p.mean = p.per_fold.empty() ? 0.0 : sum / static_cast<double>(p.per_fold.size());
    }
}

std::map<std::string, double> gain_map(std::span<const ltr::JudgedDomain> judged) {
    std::map<std::string, double> m;
    for (const auto& d : judged) {
        if (d.gain < 0 || d.gain > ltr::kMaxGain)
            throw DataError("gain of \"" + d.domain_id + "\" outside [0, 23]");
        m[d.domain_id] = d.gain;
    }
    return m;
}

}  // namespace

CvResult cross_validate(std::span<const ltr::JudgedDomain> judged, ltr::Scheme scheme,
                        const ltr::TrainConfig& config, std::span<const std::size_t> k_list) {
    if (judged.size() < 10) throw DataError("cross-validation needs at least 10 judged domains");
    check_k_list(k_list);
    const std::size_t width = judged.front().features.size();
    if (width == 0) throw DataError("judged domains carry no features");
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < judged.size(); ++i) {
        if (judged[i].features.size() != width)
            throw DataError("inconsistent feature width for \"" + judged[i].domain_id + "\"");
        index[judged[i].domain_id] = i;
    }
    const auto gains = gain_map(judged);

    std::vector<std::string> ids;
    for (const auto& d : judged) ids.push_back(d.domain_id);

    CvResult result;
    result.plan = make_fold_plan(ids, config.seed);
    result.curve = empty_curve(std::string(ltr::method_label(scheme)), k_list);

    features::FeatureMatrix base;
    for (std::size_t j = 0; j < width; ++j) base.columns.push_back("c" + std::to_string(j));

    for (std::size_t it = 0; it < kFolds; ++it) {
        features::FeatureMatrix train_m = base, val_m = base, test_m = base;
        for (std::size_t i = 0; i < result.plan.domain_ids.size(); ++i) {
            const auto& id = result.plan.domain_ids[i];
            const auto& d = judged[index.at(id)];
            auto role = FoldPlan::role(it, result.plan.fold[i]);
            auto& m = role == FoldRole::Train ? train_m : role == FoldRole::Validation ? val_m : test_m;
            m.row_ids.push_back(id);
            m.values.insert(m.values.end(), d.features.begin(), d.features.end());
        }
        auto [train_std, stats] = features::standardize(train_m);
        auto val_std = features::standardize(val_m, stats).first;
        auto test_std = features::standardize(test_m, stats).first;

        auto to_judged = [&](const features::FeatureMatrix& m) {
            std::vector<ltr::JudgedDomain> out;
            for (std::size_t r = 0; r < m.rows(); ++r) {
                auto row = m.row(r);
                out.push_back({m.row_ids[r], judged[index.at(m.row_ids[r])].gain, {row.begin(), row.end()}});
            }
            return out;
        };
        auto train_set = to_judged(train_std);
        auto val_set = to_judged(val_std);
        auto test_set = to_judged(test_std);

        ltr::TrainResult tr = ltr::train(scheme, train_set, val_set, config);
        result.training.push_back({it, tr.best_epoch, tr.history.size(), tr.best_val_ndcg});

        auto ranked = ltr::predict_rank(tr.model, test_set);
        std::vector<double> ordered;
        for (const auto& r : ranked) ordered.push_back(gains.at(r.domain_id));
        score_fold(result.curve, it, ordered, &result.notes);
    }
    finish_means(result.curve);
    return result;
}

std::optional<LinkAlgo> parse_link_algo(std::string_view s) {
    std::string k = to_lower(trim(s));
    if (k == "pagerank") return LinkAlgo::PageRank;
    if (k == "hits") return LinkAlgo::Hits;
    if (k == "katz") return LinkAlgo::Katz;
    if (k == "torank") return LinkAlgo::ToRank;
    return std::nullopt;
}

std::string_view link_algo_label(LinkAlgo a) {
    switch (a) {
        case LinkAlgo::PageRank: return "PageRank";
        case LinkAlgo::Hits: return "HITS";
        case LinkAlgo::Katz: return "Katz";
        case LinkAlgo::ToRank: return "ToRank";
    }
    return "?";
}

graph::RankingResult run_link_algorithm(const graph::Digraph& g, LinkAlgo algo,
                                        const BaselineConfig& config) {
    switch (algo) {
        case LinkAlgo::PageRank: return graph::pagerank(g, config.pagerank_alpha, config.control).ranking;
        case LinkAlgo::Hits: return graph::hits(g, config.control).ranking;
        case LinkAlgo::Katz:
            return graph::katz(g, config.katz_alpha, config.katz_beta, config.control).ranking;
        case LinkAlgo::ToRank: return graph::torank(g, config.torank_alpha, config.torank_beta);
    }
    throw std::logic_error("unknown link algorithm");
}

graph::Digraph induced_on_ids(const graph::Digraph& g, std::vector<std::string> ids) {
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    graph::Digraph sub(ids);
    for (graph::NodeId u = 0; u < sub.size(); ++u) {
        graph::NodeId gu = g.find(sub.name(u));
        if (gu == g.size()) continue;
        for (graph::NodeId gv : g.out(gu)) {
            graph::NodeId v = sub.find(g.name(gv));
            if (v != sub.size()) sub.add_edge(u, v);
        }
    }
    return sub;
}

std::vector<NdcgCurve> compare_baselines(std::span<const ltr::JudgedDomain> judged,
                                         const graph::Digraph& graph, const FoldPlan& plan,
                                         const BaselineConfig& config,
                                         std::span<const std::size_t> k_list,
                                         std::vector<std::string>* notes) {
    check_k_list(k_list);
    const auto gains = gain_map(judged);
    if (gains.size() != plan.domain_ids.size())
        throw DataError("fold plan and judged domains disagree");
    std::vector<NdcgCurve> curves;
    for (LinkAlgo a : kAllLinkAlgos) curves.push_back(empty_curve(std::string(link_algo_label(a)), k_list));

    for (std::size_t it = 0; it < kFolds; ++it) {
        auto members = plan.members(FoldPlan::test_fold(it));
        for (const auto& id : members)
            if (!gains.contains(id)) throw DataError("fold plan domain \"" + id + "\" has no gain");
        graph::Digraph sub = induced_on_ids(graph, members);
        for (std::size_t a = 0; a < std::size(kAllLinkAlgos); ++a) {
            auto ranking = run_link_algorithm(sub, kAllLinkAlgos[a], config);
            if (!ranking.converged && notes)
                notes->push_back(curves[a].method + ": fold " + std::to_string(it + 1) +
                                 " did not converge");
            std::vector<double> ordered;
            for (const auto& e : ranking.entries) ordered.push_back(gains.at(sub.name(e.node)));
            score_fold(curves[a], it, ordered, notes);
        }
    }
    for (auto& c : curves) finish_means(c);
    return curves;
}

void write_fold_csv(std::ostream& out, std::span<const NdcgCurve> curves) {
    out << "method,K,fold,ndcg\n";
    for (const auto& c : curves)
        for (const auto& p : c.points)
            for (std::size_t f = 0; f < p.per_fold.size(); ++f)
                out << c.method << ',' << p.k << ',' << f + 1 << ',' << format_double(p.per_fold[f]) << '\n';
}

void write_summary_csv(std::ostream& out, std::span<const NdcgCurve> curves) {
    out << "method,K,mean_ndcg\n";
    for (const auto& c : curves)
        for (const auto& p : c.points) out << c.method << ',' << p.k << ',' << format_double(p.mean) << '\n';
}

}  // namespace onionrank::eval
