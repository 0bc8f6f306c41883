#include "onionrank/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "onionrank/common.hpp"

namespace onionrank::eval {

double dcg_at_k(std::span<const double> gains_in_order, std::size_t k) {
    if (k < 1) throw DataError("DCG@k requires k >= 1");
    k = std::min(k, gains_in_order.size());
    if (k == 0) return 0.0;
    double dcg = gains_in_order[0];
    for (std::size_t i = 2; i <= k; ++i)
        dcg += gains_in_order[i - 1] / std::log2(static_cast<double>(i));
    return dcg;
}

Ndcg ndcg_from_gains(std::span<const double> gains_in_order, std::size_t k) {
    std::vector<double> ideal(gains_in_order.begin(), gains_in_order.end());
    std::sort(ideal.begin(), ideal.end(), std::greater<>());
    double idcg = dcg_at_k(ideal, k);
    if (idcg <= 0.0) return {0.0, true};
    return {dcg_at_k(gains_in_order, k) / idcg, false};
}

Ndcg ndcg_at_k(std::span<const std::string> predicted_order,
               const std::map<std::string, double>& truth, std::size_t k) {
    std::vector<double> gains;
    gains.reserve(predicted_order.size());
    for (const auto& id : predicted_order) {
        auto it = truth.find(id);
        if (it == truth.end()) throw DataError("no ground-truth gain for \"" + id + "\"");
        gains.push_back(it->second);
    }
    return ndcg_from_gains(gains, k);
}

}  // namespace onionrank::eval
