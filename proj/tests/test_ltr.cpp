#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "onionrank/common.hpp"
#include "onionrank/ltr.hpp"
#include "onionrank/metrics.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace onionrank;
using namespace onionrank::ltr;

namespace {

std::vector<double> random_scores(std::mt19937_64& rng, std::size_t n) {
    std::normal_distribution<double> d(0.0, 2.0);
    std::vector<double> s(n);
    for (auto& x : s) x = d(rng);
    return s;
}

std::vector<double> random_gains(std::mt19937_64& rng, std::size_t n) {
    std::vector<double> g(n);
    for (auto& x : g) x = double(rng() % 24);
    return g;
}

// Network with every parameter set to `w` except the output bias.
ModelParams constant_model(std::size_t in, double w, double out_bias) {
    std::vector<std::size_t> hidden{3, 2};
    auto m = init_model(in, hidden, 1, Scheme::Listwise);
    m.for_each([&](double& p) { p = w; });
    m.layers.back().bias[0] = out_bias;
    return m;
}

std::vector<JudgedDomain> planted_set(std::size_t n, std::uint64_t seed, const std::string& prefix) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> d(0.0, 1.0);
    std::vector<JudgedDomain> out;
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> x(6);
        for (auto& v : x) v = d(rng);
        double latent = 0.8 * x[0] + 0.5 * x[1] - 0.3 * x[2];
        int gain = std::clamp(static_cast<int>(std::lround(11.5 + 4.0 * latent)), 0, 23);
        out.push_back({prefix + std::to_string(1000 + i), gain, x});
    }
    return out;
}

}  // namespace

TEST_CASE("scheme names and aliases") {
    CHECK(parse_scheme("ListNet") == Scheme::Listwise);
    CHECK(parse_scheme("ranknet") == Scheme::Pairwise);
    CHECK(parse_scheme("mlp") == Scheme::Pointwise);
    CHECK(parse_scheme("pairwise") == Scheme::Pairwise);
    CHECK_FALSE(parse_scheme("lambdamart").has_value());
    CHECK(method_label(Scheme::Listwise) == "ListNet");
}

TEST_CASE("forward pass") {
    SUBCASE("zero weights give the output bias") {
        auto m = constant_model(4, 0.0, 0.75);
        CHECK(forward(m, std::vector<double>{1, -2, 3, 9}, false, nullptr) == 0.75);
    }
    SUBCASE("hand-set 2-2-1 network") {
        std::vector<std::size_t> hidden{2};
        auto m = init_model(2, hidden, 0, Scheme::Pointwise);
        m.layers[0].weights = {1.0, -1.0, 0.5, 2.0};
        m.layers[0].bias = {0.0, -1.0};
        m.layers[1].weights = {2.0, -3.0};
        m.layers[1].bias = {0.25};
        // x = (3, 1): h1 = relu(3 - 1) = 2, h2 = relu(1.5 + 2 - 1) = 2.5
        CHECK(forward(m, std::vector<double>{3, 1}, false, nullptr) == doctest::Approx(2 * 2 - 3 * 2.5 + 0.25));
        // x = (0, 0): h1 = 0, h2 = relu(-1) = 0
        CHECK(forward(m, std::vector<double>{0, 0}, false, nullptr) == doctest::Approx(0.25));
    }
    SUBCASE("eval mode is deterministic, train mode drops units") {
        std::vector<std::size_t> hidden{16, 8};
        auto m = init_model(5, hidden, 3, Scheme::Listwise);
        std::vector<double> x{0.3, -1, 2, 0.5, 1};
        CHECK(forward(m, x, false, nullptr) == forward(m, x, false, nullptr));
        Rng rng(1);
        bool differs = false;
        for (int i = 0; i < 20; ++i) differs |= forward(m, x, true, &rng) != forward(m, x, false, nullptr);
        CHECK(differs);
    }
    SUBCASE("width mismatch") {
        auto m = constant_model(3, 0.1, 0);
        CHECK_THROWS_AS(forward(m, std::vector<double>{1, 2}, false, nullptr), DataError);
    }
}

TEST_CASE("init is Glorot-uniform and seeded") {
    std::vector<std::size_t> hidden{128, 32};
    auto a = init_model(40, hidden, 9, Scheme::Listwise);
    auto b = init_model(40, hidden, 9, Scheme::Listwise);
    auto c = init_model(40, hidden, 10, Scheme::Listwise);
    CHECK(a.layers[0].weights == b.layers[0].weights);
    CHECK(a.layers[0].weights != c.layers[0].weights);
    REQUIRE(a.layers.size() == 3);
    CHECK(a.layers[0].out == 128);
    CHECK(a.layers[1].out == 32);
    CHECK(a.layers[2].out == 1);
    for (const auto& l : a.layers) {
        double limit = std::sqrt(6.0 / double(l.in + l.out));
        for (double w : l.weights) CHECK(std::abs(w) <= limit);
        for (double bias : l.bias) CHECK(bias == 0.0);
    }
}

TEST_CASE("pointwise loss") {
    std::vector<double> g{23, 0, 11.5};
    std::vector<double> s{1, 0, 0.5};
    CHECK(loss_pointwise(s, g).loss == doctest::Approx(0.0));
    CHECK(loss_pointwise(std::vector<double>{0, 0}, std::vector<double>{23, 0}).loss == doctest::Approx(0.5));
    CHECK_THROWS_AS(loss_pointwise(std::vector<double>{}, std::vector<double>{}), DataError);
    CHECK_THROWS_AS(loss_pointwise(std::vector<double>{1}, std::vector<double>{1, 2}), DataError);
}

TEST_CASE("ranknet loss") {
    // equal scores: every ordered pair costs ln 2
    auto r = loss_ranknet(std::vector<double>{0, 0, 0}, std::vector<double>{3, 2, 1});
    CHECK(r.loss == doctest::Approx(std::log(2.0)));
    // a large correct margin drives the loss to zero
    CHECK(loss_ranknet(std::vector<double>{50, 0}, std::vector<double>{5, 1}).loss < 1e-20);
    // no strictly ordered pair
    auto flat = loss_ranknet(std::vector<double>{0.3, -2}, std::vector<double>{4, 4});
    CHECK(flat.degenerate);
    CHECK(flat.loss == 0.0);
    CHECK(flat.gradient == std::vector<double>{0.0, 0.0});
    CHECK_THROWS_AS(loss_ranknet(std::vector<double>{1}, std::vector<double>{1}), DataError);
}

TEST_CASE("listnet loss") {
    std::vector<double> g{3, 1, 0, 2};
    // scores equal to gains plus a shift: loss equals the entropy of q
    std::vector<double> s{8, 6, 5, 7};
    double z = 0;
    for (double x : g) z += std::exp(x);
    double entropy = 0;
    for (double x : g) entropy -= std::exp(x) / z * std::log(std::exp(x) / z);
    CHECK(loss_listnet(s, g).loss == doctest::Approx(entropy).epsilon(1e-12));
    // uniform gains
    std::vector<double> s2{0.1, -0.4, 2.0};
    double lse = std::log(std::exp(0.1) + std::exp(-0.4) + std::exp(2.0));
    double want = 0;
    for (double x : s2) want -= (x - lse) / 3.0;
    CHECK(loss_listnet(s2, std::vector<double>{5, 5, 5}).loss == doctest::Approx(want).epsilon(1e-12));
    // huge scores stay finite
    CHECK(std::isfinite(loss_listnet(std::vector<double>{1000, -1000}, std::vector<double>{23, 0}).loss));
}

TEST_CASE("loss gradients match central differences") {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 100; ++trial) {
        std::size_t n = 2 + trial % 9;
        auto s = random_scores(rng, n);
        auto g = random_gains(rng, n);
        for (Scheme sc : {Scheme::Pointwise, Scheme::Pairwise, Scheme::Listwise}) {
            auto analytic = scheme_loss(sc, s, g).gradient;
            auto numeric = oracle::numeric_gradient(
                [&](const std::vector<double>& x) { return scheme_loss(sc, x, g).loss; }, s);
            for (std::size_t i = 0; i < n; ++i) REQUIRE(testutil::rel_err(analytic[i], numeric[i]) <= 1e-4);
        }
    }
}

TEST_CASE("loss shift invariance and swap monotonicity") {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 100; ++trial) {
        std::size_t n = 2 + trial % 8;
        auto s = random_scores(rng, n);
        auto g = random_gains(rng, n);
        auto shifted = s;
        for (auto& x : shifted) x += 3.7;
        CHECK(std::abs(loss_listnet(s, g).loss - loss_listnet(shifted, g).loss) <= 1e-9);
        CHECK(std::abs(loss_ranknet(s, g).loss - loss_ranknet(shifted, g).loss) <= 1e-9);

        // find a discordant pair and swap its scores
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (g[i] > g[j] && s[i] < s[j]) {
                    auto fixed = s;
                    std::swap(fixed[i], fixed[j]);
                    CHECK(loss_listnet(fixed, g).loss < loss_listnet(s, g).loss);
                    CHECK(loss_ranknet(fixed, g).loss < loss_ranknet(s, g).loss);
                    i = j = n;
                }
    }
}

TEST_CASE("parameter gradients match central differences") {
    std::mt19937_64 rng(8);
    std::vector<JudgedDomain> batch;
    for (int i = 0; i < 6; ++i) {
        std::vector<double> x(4);
        for (auto& v : x) v = double(int(rng() % 200) - 100) / 50.0;
        batch.push_back({"d" + std::to_string(i), int(rng() % 24), x});
    }
    for (Scheme sc : {Scheme::Pointwise, Scheme::Pairwise, Scheme::Listwise}) {
        TrainConfig cfg;
        cfg.hidden = {5, 3};
        auto m = init_model(4, cfg.hidden, 4, sc);
        m.for_each([&](double& p) { p += 0.05; });  // keep ReLUs off their kink
        ModelParams grad;
        loss_and_gradient(m, batch, cfg, false, nullptr, grad);

        std::vector<double> analytic;
        grad.for_each([&](double& p) { analytic.push_back(p); });
        std::vector<double*> params;
        m.for_each([&](double& p) { params.push_back(&p); });
        REQUIRE(params.size() == analytic.size());
        ModelParams scratch;
        for (std::size_t i = 0; i < params.size(); ++i) {
            double keep = *params[i];
            *params[i] = keep + 1e-6;
            double up = loss_and_gradient(m, batch, cfg, false, nullptr, scratch);
            *params[i] = keep - 1e-6;
            double down = loss_and_gradient(m, batch, cfg, false, nullptr, scratch);
            *params[i] = keep;
            CHECK(testutil::rel_err(analytic[i], (up - down) / 2e-6) <= 1e-4);
        }
    }
}

TEST_CASE("training contract") {
    auto train_set = planted_set(120, 1, "t");
    auto val_set = planted_set(40, 2, "v");
    TrainConfig cfg;
    cfg.seed = 5;
    cfg.max_epochs = 400;

    SUBCASE("zero learning rate keeps the initial parameters") {
        TrainConfig c = cfg;
        c.learning_rate = 0.0;
        c.max_epochs = 1;
        auto r = train(Scheme::Listwise, train_set, val_set, c);
        std::vector<std::size_t> hidden{128, 32};
        auto init = init_model(6, hidden, 5, Scheme::Listwise);
        for (std::size_t l = 0; l < init.layers.size(); ++l) {
            CHECK(r.model.layers[l].weights == init.layers[l].weights);
            CHECK(r.model.layers[l].bias == init.layers[l].bias);
        }
        CHECK(r.history.size() == 1);
        CHECK(r.best_epoch == 0);
    }
    SUBCASE("same seed, same model") {
        auto a = train(Scheme::Pairwise, train_set, val_set, cfg);
        auto b = train(Scheme::Pairwise, train_set, val_set, cfg);
        for (std::size_t l = 0; l < a.model.layers.size(); ++l)
            CHECK(a.model.layers[l].weights == b.model.layers[l].weights);
        CHECK(a.best_val_ndcg == b.best_val_ndcg);
        CHECK(a.history.size() == b.history.size());
    }
    SUBCASE("history and early stopping") {
        TrainConfig c = cfg;
        c.patience = 5;
        auto r = train(Scheme::Pointwise, train_set, val_set, c);
        REQUIRE_FALSE(r.history.empty());
        CHECK(r.history.size() <= c.max_epochs);
        for (std::size_t i = 0; i < r.history.size(); ++i) CHECK(r.history[i].epoch == i + 1);
        double best = 0;
        for (const auto& h : r.history) best = std::max(best, h.val_ndcg);
        CHECK(r.best_val_ndcg >= best - c.min_delta);
    }
    SUBCASE("bad splits") {
        CHECK_THROWS_AS(train(Scheme::Listwise, {}, val_set, cfg), DataError);
        CHECK_THROWS_AS(train(Scheme::Listwise, train_set, {}, cfg), DataError);
        auto overlap = val_set;
        overlap.push_back(train_set[0]);
        CHECK_THROWS_AS(train(Scheme::Listwise, train_set, overlap, cfg), DataError);
    }
    SUBCASE("divergence is reported") {
        TrainConfig c = cfg;
        c.learning_rate = 1e200;
        c.max_epochs = 50;
        CHECK_THROWS_AS(train(Scheme::Pointwise, train_set, val_set, c), DataError);
    }
}

TEST_CASE("listnet learns a planted linear signal") {
    auto train_set = planted_set(200, 31, "t");
    auto val_set = planted_set(60, 32, "v");
    TrainConfig cfg;
    cfg.seed = 3;
    TrainConfig frozen = cfg;
    frozen.max_epochs = 0;
    double untrained = train(Scheme::Listwise, train_set, val_set, frozen).best_val_ndcg;
    auto r = train(Scheme::Listwise, train_set, val_set, cfg);
    CHECK(r.best_epoch > 0);
    CHECK(r.best_val_ndcg >= 0.9);
    CHECK(r.best_val_ndcg > untrained + 0.05);
}

TEST_CASE("predict_rank") {
    auto m = constant_model(2, 0.0, 1.0);
    std::vector<JudgedDomain> one{{"only", 0, {1, 2}}};
    CHECK(predict_rank(m, one).front().domain_id == "only");

    std::vector<JudgedDomain> tie{{"b", 0, {1, 2}}, {"a", 0, {3, 4}}};
    auto r = predict_rank(m, tie);
    CHECK(r[0].domain_id == "a");
    CHECK(r[1].domain_id == "b");

    std::vector<JudgedDomain> bad{{"x", 0, {1}}};
    CHECK_THROWS_AS(predict_rank(m, bad), DataError);

    // same set in any order gives the same ranking
    std::vector<std::size_t> hidden{8, 4};
    auto net = init_model(3, hidden, 12, Scheme::Listwise);
    auto set = planted_set(30, 4, "p");
    for (auto& d : set) d.features.resize(3);
    auto base = predict_rank(net, set);
    std::mt19937_64 rng(1);
    for (int t = 0; t < 5; ++t) {
        deterministic_shuffle(set, rng);
        auto again = predict_rank(net, set);
        for (std::size_t i = 0; i < base.size(); ++i) CHECK(again[i].domain_id == base[i].domain_id);
    }
}

TEST_CASE("model file round trip is exact") {
    std::vector<std::size_t> hidden{7, 3};
    auto m = init_model(4, hidden, 99, Scheme::Pairwise);
    m.layers[1].bias[2] = 1.0 / 3.0;
    m.stats = features::StandardizationStats{{0.1, 0.2, 0.3, 1e-300}, {1, 2, 3, 0}};
    m.feature_names = {"a", "b", "c", "d\"quoted\""};
    std::stringstream ss;
    save_model(ss, m);
    auto back = load_model(ss);
    CHECK(back.scheme == Scheme::Pairwise);
    CHECK(back.seed == 99);
    CHECK(back.feature_names == m.feature_names);
    REQUIRE(back.stats.has_value());
    CHECK(back.stats->mean == m.stats->mean);
    CHECK(back.stats->stddev == m.stats->stddev);
    for (std::size_t l = 0; l < m.layers.size(); ++l) {
        CHECK(back.layers[l].weights == m.layers[l].weights);
        CHECK(back.layers[l].bias == m.layers[l].bias);
    }
    std::vector<double> x{0.5, -1.5, 2.25, 0.0};
    CHECK(forward(back, x, false, nullptr) == forward(m, x, false, nullptr));

    std::stringstream bad("{\"format\": \"onionrank-model\", \"scheme\": \"listwise\", \"dims\": [2, 1],"
                          " \"layers\": [{\"weights\": [1], \"bias\": [0]}]}");
    CHECK_THROWS_AS(load_model(bad), DataError);
    std::stringstream junk("not json");
    CHECK_THROWS_AS(load_model(junk), DataError);
}

TEST_CASE("history csv") {
    std::ostringstream out;
    write_history_csv(out, {{1, 0.5, 0.25}, {2, 0.125, 0.75}});
    CHECK(out.str() == "epoch,loss,val_ndcg10\n1,0.5,0.25\n2,0.125,0.75\n");
}
