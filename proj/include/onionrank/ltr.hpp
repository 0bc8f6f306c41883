#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "onionrank/features.hpp"

namespace onionrank::ltr {

enum class Scheme { Pointwise, Pairwise, Listwise };

/// pointwise|mlp, pairwise|ranknet, listwise|listnet.
std::optional<Scheme> parse_scheme(std::string_view s);
std::string_view scheme_name(Scheme s);
/// Method label used in reports: MLP, RankNet, ListNet.
std::string_view method_label(Scheme s);

inline constexpr int kMaxGain = 23;

/// One labelled domain: ground-truth gain plus its (standardized) features.
struct JudgedDomain {
    std::string domain_id;
    int gain = 0;
    std::vector<double> features;
};

using Rng = std::mt19937_64;

struct DenseLayer {
    std::size_t in = 0, out = 0;
    std::vector<double> weights;  // out x in, row-major
    std::vector<double> bias;     // out
};

/// Scoring network: hidden ReLU layers (dropout after each), then one
/// linear output unit.
struct ModelParams {
    std::vector<DenseLayer> layers;
    std::uint64_t seed = 0;
    Scheme scheme = Scheme::Listwise;
    std::optional<features::StandardizationStats> stats;
    std::vector<std::string> feature_names;

    std::size_t input_dim() const { return layers.empty() ? 0 : layers.front().in; }
    /// Parameter count across all layers.
    std::size_t size() const;
    /// Visits every parameter (weights then bias, layer by layer).
    template <class F>
    void for_each(F&& f) {
        for (auto& l : layers) {
            for (double& w : l.weights) f(w);
            for (double& b : l.bias) f(b);
        }
    }
};

/// Glorot-uniform weights in +-sqrt(6/(fan_in+fan_out)), zero biases.
ModelParams init_model(std::size_t input_dim, std::span<const std::size_t> hidden,
                       std::uint64_t seed, Scheme scheme);

/// Inverted dropout when `train_mode` (kept units scaled by 1/(1-p)); `rng`
/// may be null in eval mode. Throws DataError on a width mismatch.
double forward(const ModelParams& model, std::span<const double> features, bool train_mode,
               Rng* rng, double dropout = 0.5);

struct LossResult {
    double loss = 0.0;
    std::vector<double> gradient;  // d loss / d scores
    bool degenerate = false;        // RankNet: no strictly ordered pair
};

/// Mean squared error against gains / 23.
LossResult loss_pointwise(std::span<const double> scores, std::span<const double> gains);
/// Mean of -ln sigma(s_i - s_j) over pairs with gain_i > gain_j.
LossResult loss_ranknet(std::span<const double> scores, std::span<const double> gains);
/// Top-one cross entropy: -sum softmax(gain_scale * gains) * ln softmax(scores).
LossResult loss_listnet(std::span<const double> scores, std::span<const double> gains,
                        double gain_scale = 1.0);

LossResult scheme_loss(Scheme scheme, std::span<const double> scores, std::span<const double> gains,
                       double listnet_gain_scale = 1.0);

struct TrainConfig {
    double learning_rate = 1e-3;
    std::size_t max_epochs = 2000;
    std::size_t patience = 50;
    double min_delta = 1e-4;
    double dropout = 0.5;
    std::uint64_t seed = 0;
    std::vector<std::size_t> hidden{128, 32};
    double listnet_gain_scale = 1.0;  // gains enter the ListNet softmax scaled by this
    std::size_t eval_k = 10;
};

/// Loss of `model` on a batch plus the gradient w.r.t. every parameter,
/// laid out like ModelParams (same shapes, accumulated into `grad`).
double loss_and_gradient(const ModelParams& model, std::span<const JudgedDomain> batch,
                         const TrainConfig& config, bool train_mode, Rng* rng, ModelParams& grad);

struct EpochRecord {
    std::size_t epoch;
    double loss;
    double val_ndcg;
};

struct TrainResult {
    ModelParams model;  // parameters with the best validation NDCG
    std::vector<EpochRecord> history;
    std::size_t best_epoch = 0;  // 0 means the initial parameters
    double best_val_ndcg = 0.0;
};

/// Full-batch gradient descent with early stopping on validation NDCG@k.
/// Throws DataError on empty/overlapping splits or a non-finite loss.
TrainResult train(Scheme scheme, std::span<const JudgedDomain> train_set,
                  std::span<const JudgedDomain> val_set, const TrainConfig& config);

void write_history_csv(std::ostream& out, const std::vector<EpochRecord>& history);

struct RankedItem {
    std::string domain_id;
    double score;
};

/// Eval-mode scores sorted descending, ties by domain_id ascending.
std::vector<RankedItem> predict_rank(const ModelParams& model, std::span<const JudgedDomain> domains);

/// JSON model file; doubles written with 17 significant digits.
void save_model(std::ostream& out, const ModelParams& model);
ModelParams load_model(std::istream& in);

}  // namespace onionrank::ltr
