#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>

namespace onionrank::eval {

/// DCG@k = G_1 + sum_{i=2..k} G_i / log2(i). Positions 1 and 2 are both
/// undiscounted. k is truncated to the list length; throws for k < 1.
double dcg_at_k(std::span<const double> gains_in_order, std::size_t k);

struct Ndcg {
    double value = 0.0;
    bool degenerate = false;  // ideal DCG was zero; value reported as 0
};

/// NDCG@k of a list whose gains are given in predicted order; the ideal
/// order is the same gains sorted descending.
Ndcg ndcg_from_gains(std::span<const double> gains_in_order, std::size_t k);

/// Throws DataError if a predicted id has no gain in `truth`.
Ndcg ndcg_at_k(std::span<const std::string> predicted_order,
               const std::map<std::string, double>& truth, std::size_t k);

}  // namespace onionrank::eval
