#include <algorithm>
#include <random>

#include "doctest.h"
#include "onionrank/common.hpp"
#include "onionrank/metrics.hpp"
#include "oracles.hpp"

using namespace onionrank;
using eval::dcg_at_k;
using eval::ndcg_at_k;
using eval::ndcg_from_gains;

TEST_CASE("dcg: first term and hand-evaluated list") {
    std::vector<double> g{2, 3, 1};
    CHECK(dcg_at_k(g, 1) == doctest::Approx(2.0));
    CHECK(dcg_at_k(g, 3) == doctest::Approx(5.6309).epsilon(1e-4));
    CHECK(dcg_at_k(std::vector<double>{0, 0, 0}, 3) == 0.0);
    CHECK(dcg_at_k(g, 10) == dcg_at_k(g, 3));
    CHECK_THROWS_AS(dcg_at_k(g, 0), DataError);
}

TEST_CASE("ndcg over domain ids") {
    std::map<std::string, double> truth{{"A", 3}, {"B", 2}, {"C", 1}};
    std::vector<std::string> ideal{"A", "B", "C"}, swapped{"B", "A", "C"}, reversed{"C", "B", "A"};
    CHECK(ndcg_at_k(ideal, truth, 3).value == doctest::Approx(1.0));
    // positions 1 and 2 carry the same weight
    CHECK(ndcg_at_k(swapped, truth, 3).value == doctest::Approx(1.0));
    CHECK(ndcg_at_k(reversed, truth, 3).value == doctest::Approx(4.8927 / 5.6309).epsilon(1e-4));

    std::vector<std::string> unknown{"A", "Z"};
    CHECK_THROWS_AS(ndcg_at_k(unknown, truth, 2), DataError);
}

TEST_CASE("all-zero gains are degenerate") {
    auto n = ndcg_from_gains(std::vector<double>{0, 0, 0}, 2);
    CHECK(n.value == 0.0);
    CHECK(n.degenerate);
    CHECK_FALSE(ndcg_from_gains(std::vector<double>{0, 1}, 2).degenerate);
}

TEST_CASE("ndcg equals brute-force evaluation on every permutation") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 60; ++trial) {
        std::size_t len = 1 + trial % 6;
        std::vector<double> gains(len);
        for (auto& g : gains) g = double(rng() % 24);
        for (std::size_t k = 1; k <= len + 1; ++k) {
            double idcg = oracle::idcg_by_enumeration(gains, k);
            auto perm = gains;
            std::sort(perm.begin(), perm.end());
            do {
                auto got = ndcg_from_gains(perm, k);
                double want = idcg > 0 ? oracle::dcg(perm, k) / idcg : 0.0;
                REQUIRE(std::abs(got.value - want) <= 1e-12);
            } while (std::next_permutation(perm.begin(), perm.end()));
        }
    }
}

TEST_CASE("ndcg properties") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 200; ++trial) {
        std::size_t len = 3 + rng() % 10;
        std::vector<double> g(len);
        for (auto& x : g) x = double(rng() % 24);
        std::size_t k = 1 + rng() % len;
        double base = ndcg_from_gains(g, k).value;
        CHECK(base >= 0.0);
        CHECK(base <= 1.0 + 1e-15);

        // gain scaling cancels in the ratio
        auto scaled = g;
        double c = 0.5 + double(rng() % 100) / 10.0;
        for (auto& x : scaled) x *= c;
        CHECK(std::abs(ndcg_from_gains(scaled, k).value - base) <= 1e-12);

        // positions 1 and 2 share a weight once both are inside the cutoff
        if (k >= 2) {
            auto s12 = g;
            std::swap(s12[0], s12[1]);
            CHECK(std::abs(ndcg_from_gains(s12, k).value - base) <= 1e-12);
        }

        // moving a higher gain from position >= 2 further down never helps
        std::size_t i = 1 + rng() % (len - 1);
        std::size_t j = i + 1 + (i + 1 < len ? rng() % (len - i - 1) : 0);
        if (j < len && g[i] > g[j]) {
            auto sw = g;
            std::swap(sw[i], sw[j]);
            CHECK(ndcg_from_gains(sw, k).value <= base + 1e-12);
        }

        // the ideal order scores exactly one
        auto ideal = g;
        std::sort(ideal.begin(), ideal.end(), std::greater<>());
        if (ideal[0] > 0) CHECK(ndcg_from_gains(ideal, k).value == 1.0);
    }
}
