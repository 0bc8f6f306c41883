#include "onionrank/ltr.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <set>

#include "json.hpp"
#include "onionrank/metrics.hpp"

namespace onionrank::ltr {

std::optional<Scheme> parse_scheme(std::string_view s) {
    std::string k = to_lower(trim(s));
    if (k == "pointwise" || k == "mlp") return Scheme::Pointwise;
    if (k == "pairwise" || k == "ranknet") return Scheme::Pairwise;
    if (k == "listwise" || k == "listnet") return Scheme::Listwise;
    return std::nullopt;
}

std::string_view scheme_name(Scheme s) {
    switch (s) {
        case Scheme::Pointwise: return "pointwise";
        case Scheme::Pairwise: return "pairwise";
        case Scheme::Listwise: return "listwise";
    }
    return "?";
}

std::string_view method_label(Scheme s) {
    switch (s) {
        case Scheme::Pointwise: return "MLP";
        case Scheme::Pairwise: return "RankNet";
        case Scheme::Listwise: return "ListNet";
    }
    return "?";
}

std::size_t ModelParams::size() const {
    std::size_t n = 0;
    for (const auto& l : layers) n += l.weights.size() + l.bias.size();
    return n;
}

ModelParams init_model(std::size_t input_dim, std::span<const std::size_t> hidden,
                       std::uint64_t seed, Scheme scheme) {
    if (input_dim == 0) throw DataError("model input width must be positive");
    ModelParams m;
    m.seed = seed;
    m.scheme = scheme;
    Rng rng(seed);
    std::size_t in = input_dim;
    std::vector<std::size_t> widths(hidden.begin(), hidden.end());
    widths.push_back(1);
    for (std::size_t out : widths) {
        if (out == 0) throw DataError("hidden layer width must be positive");
        DenseLayer l{in, out, std::vector<double>(in * out), std::vector<double>(out, 0.0)};
        double limit = std::sqrt(6.0 / static_cast<double>(in + out));
        for (double& w : l.weights) w = (2.0 * uniform01(rng) - 1.0) * limit;
        m.layers.push_back(std::move(l));
        in = out;
    }
    return m;
}

namespace {

struct RowCache {
    std::vector<std::vector<double>> pre;   // hidden pre-activations
    std::vector<std::vector<double>> post;  // hidden outputs after ReLU and dropout
    std::vector<std::vector<double>> mask;  // dropout multipliers
};

void check_width(const ModelParams& m, std::span<const double> x) {
    if (x.size() != m.input_dim())
        throw DataError("feature width " + std::to_string(x.size()) + " does not match model input " +
                        std::to_string(m.input_dim()));
}

double forward_cached(const ModelParams& m, std::span<const double> x, bool train_mode, Rng* rng,
                      double dropout, RowCache& cache) {
    check_width(m, x);
    const std::size_t hidden = m.layers.size() - 1;
    cache.pre.resize(hidden);
    cache.post.resize(hidden);
    cache.mask.resize(hidden);
    const double keep_scale = 1.0 / (1.0 - dropout);
    std::span<const double> cur = x;
    for (std::size_t li = 0; li < m.layers.size(); ++li) {
        const DenseLayer& l = m.layers[li];
        if (li == hidden) {
            double s = l.bias[0];
            for (std::size_t j = 0; j < l.in; ++j) s += l.weights[j] * cur[j];
            return s;
        }
        auto& z = cache.pre[li];
        auto& h = cache.post[li];
        auto& mask = cache.mask[li];
        z.assign(l.out, 0.0);
        h.assign(l.out, 0.0);
        mask.assign(l.out, 1.0);
        for (std::size_t o = 0; o < l.out; ++o) {
            const double* w = l.weights.data() + o * l.in;
            double acc = l.bias[o];
            for (std::size_t j = 0; j < l.in; ++j) acc += w[j] * cur[j];
            z[o] = acc;
            if (train_mode && dropout > 0.0) mask[o] = uniform01(*rng) < dropout ? 0.0 : keep_scale;
            h[o] = (acc > 0.0 ? acc : 0.0) * mask[o];
        }
        cur = h;
    }
    return 0.0;  // unreachable: the last layer returns above
}

void backward(const ModelParams& m, std::span<const double> x, const RowCache& cache,
              double dscore, ModelParams& grad) {
    const std::size_t hidden = m.layers.size() - 1;
    std::vector<double> delta{dscore}, prev;
    for (std::size_t li = m.layers.size(); li-- > 0;) {
        const DenseLayer& l = m.layers[li];
        DenseLayer& g = grad.layers[li];
        std::span<const double> input = li == 0 ? x : std::span<const double>(cache.post[li - 1]);
        for (std::size_t o = 0; o < l.out; ++o) {
            double d = delta[o];
            if (d == 0.0) continue;
            double* gw = g.weights.data() + o * l.in;
            for (std::size_t j = 0; j < l.in; ++j) gw[j] += d * input[j];
            g.bias[o] += d;
        }
        if (li == 0) break;
        prev.assign(l.in, 0.0);
        for (std::size_t o = 0; o < l.out; ++o) {
            double d = delta[o];
            if (d == 0.0) continue;
            const double* w = l.weights.data() + o * l.in;
            for (std::size_t j = 0; j < l.in; ++j) prev[j] += w[j] * d;
        }
        const auto& z = cache.pre[li - 1];
        const auto& mask = cache.mask[li - 1];
        for (std::size_t j = 0; j < l.in; ++j) prev[j] *= (z[j] > 0.0 ? mask[j] : 0.0);
        delta.swap(prev);
    }
    (void)hidden;
}

void zero_like(const ModelParams& m, ModelParams& g) {
    if (g.layers.size() != m.layers.size()) g.layers.resize(m.layers.size());
    for (std::size_t i = 0; i < m.layers.size(); ++i) {
        g.layers[i].in = m.layers[i].in;
        g.layers[i].out = m.layers[i].out;
        g.layers[i].weights.assign(m.layers[i].weights.size(), 0.0);
        g.layers[i].bias.assign(m.layers[i].bias.size(), 0.0);
    }
}

void require_same_length(std::span<const double> a, std::span<const double> b, std::size_t min_len,
                         const char* what) {
    if (a.size() != b.size())
        throw DataError(std::string(what) + ": scores and gains differ in length");
    if (a.size() < min_len)
        throw DataError(std::string(what) + ": needs at least " + std::to_string(min_len) + " items");
}

std::vector<double> softmax(std::span<const double> v) {
    double mx = *std::max_element(v.begin(), v.end());
    std::vector<double> p(v.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) sum += p[i] = std::exp(v[i] - mx);
    for (double& x : p) x /= sum;
    return p;
}

double log_sum_exp(std::span<const double> v) {
    double mx = *std::max_element(v.begin(), v.end());
    double sum = 0.0;
    for (double x : v) sum += std::exp(x - mx);
    return mx + std::log(sum);
}

// ln(1 + e^x) without overflow.
double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    double e = std::exp(x);
    return e / (1.0 + e);
}

}  // namespace

double forward(const ModelParams& model, std::span<const double> features, bool train_mode, Rng* rng,
               double dropout) {
    if (train_mode && dropout > 0.0 && rng == nullptr)
        throw std::invalid_argument("forward: train mode with dropout needs an rng");
    RowCache cache;
    return forward_cached(model, features, train_mode, rng, dropout, cache);
}

LossResult loss_pointwise(std::span<const double> scores, std::span<const double> gains) {
    require_same_length(scores, gains, 1, "pointwise loss");
    const double n = static_cast<double>(scores.size());
    LossResult r;
    r.gradient.resize(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) {
        double diff = scores[i] - gains[i] / kMaxGain;
        r.loss += diff * diff / n;
        r.gradient[i] = 2.0 * diff / n;
    }
    return r;
}

LossResult loss_ranknet(std::span<const double> scores, std::span<const double> gains) {
    require_same_length(scores, gains, 2, "RankNet loss");
    LossResult r;
    r.gradient.assign(scores.size(), 0.0);
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        for (std::size_t j = 0; j < scores.size(); ++j) {
            if (!(gains[i] > gains[j])) continue;
            double d = scores[i] - scores[j];
            r.loss += softplus(-d);
            double w = sigmoid(-d);
            r.gradient[i] -= w;
            r.gradient[j] += w;
            ++pairs;
        }
    }
    if (pairs == 0) {
        r.degenerate = true;
        return r;
    }
    const double inv = 1.0 / static_cast<double>(pairs);
    r.loss *= inv;
    for (double& g : r.gradient) g *= inv;
    return r;
}

LossResult loss_listnet(std::span<const double> scores, std::span<const double> gains,
                        double gain_scale) {
    require_same_length(scores, gains, 2, "ListNet loss");
    std::vector<double> scaled(gains.begin(), gains.end());
    for (double& g : scaled) g *= gain_scale;
    auto p = softmax(scores);
    auto q = softmax(scaled);
    double lse = log_sum_exp(scores);
    LossResult r;
    r.gradient.resize(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) {
        r.loss -= q[i] * (scores[i] - lse);
        r.gradient[i] = p[i] - q[i];
    }
    return r;
}

LossResult scheme_loss(Scheme scheme, std::span<const double> scores, std::span<const double> gains,
                       double listnet_gain_scale) {
    switch (scheme) {
        case Scheme::Pointwise: return loss_pointwise(scores, gains);
        case Scheme::Pairwise: return loss_ranknet(scores, gains);
        case Scheme::Listwise: return loss_listnet(scores, gains, listnet_gain_scale);
    }
    throw std::logic_error("unknown scheme");
}

double loss_and_gradient(const ModelParams& model, std::span<const JudgedDomain> batch,
                         const TrainConfig& config, bool train_mode, Rng* rng, ModelParams& grad) {
    zero_like(model, grad);
    std::vector<RowCache> caches(batch.size());
    std::vector<double> scores(batch.size()), gains(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) {
        scores[i] = forward_cached(model, batch[i].features, train_mode, rng, config.dropout, caches[i]);
        gains[i] = static_cast<double>(batch[i].gain);
    }
    LossResult lr = scheme_loss(model.scheme, scores, gains, config.listnet_gain_scale);
    for (std::size_t i = 0; i < batch.size(); ++i)
        backward(model, batch[i].features, caches[i], lr.gradient[i], grad);
    return lr.loss;
}

namespace {

std::vector<RankedItem> score_and_sort(const ModelParams& model, std::span<const JudgedDomain> domains) {
    std::vector<RankedItem> items;
    items.reserve(domains.size());
    RowCache cache;
    for (const auto& d : domains)
        items.push_back({d.domain_id, forward_cached(model, d.features, false, nullptr, 0.0, cache)});
    std::sort(items.begin(), items.end(), [](const RankedItem& a, const RankedItem& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.domain_id < b.domain_id;
    });
    return items;
}

double validation_ndcg(const ModelParams& model, std::span<const JudgedDomain> val, std::size_t k,
                       const std::map<std::string, double>& gains) {
    auto ranked = score_and_sort(model, val);
    std::vector<double> ordered;
    ordered.reserve(ranked.size());
    for (const auto& r : ranked) ordered.push_back(gains.at(r.domain_id));
    return eval::ndcg_from_gains(ordered, k).value;
}

}  // namespace

std::vector<RankedItem> predict_rank(const ModelParams& model, std::span<const JudgedDomain> domains) {
    return score_and_sort(model, domains);
}

TrainResult train(Scheme scheme, std::span<const JudgedDomain> train_set,
                  std::span<const JudgedDomain> val_set, const TrainConfig& config) {
    if (train_set.empty() || val_set.empty())
        throw DataError("training and validation sets must be non-empty");
    if (!(config.dropout >= 0.0 && config.dropout < 1.0))
        throw DataError("dropout must lie in [0, 1)");
    std::set<std::string> train_ids;
    for (const auto& d : train_set) train_ids.insert(d.domain_id);
    std::map<std::string, double> val_gains;
    for (const auto& d : val_set) {
        if (train_ids.contains(d.domain_id))
            throw DataError("domain \"" + d.domain_id + "\" is in both training and validation sets");
        val_gains[d.domain_id] = d.gain;
    }
    const std::size_t width = train_set.front().features.size();
    for (const auto* set : {&train_set, &val_set})
        for (const auto& d : *set)
            if (d.features.size() != width)
                throw DataError("inconsistent feature width for \"" + d.domain_id + "\"");

    TrainResult result;
    ModelParams model = init_model(width, config.hidden, config.seed, scheme);
    ModelParams grad;
    Rng dropout_rng(config.seed ^ 0x9E3779B97F4A7C15ULL);

    result.model = model;
    result.best_val_ndcg = validation_ndcg(model, val_set, config.eval_k, val_gains);
    result.best_epoch = 0;
    std::size_t stale = 0;

    for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
        double loss = loss_and_gradient(model, train_set, config, true, &dropout_rng, grad);
        if (!std::isfinite(loss))
            throw DataError("training diverged: non-finite loss at epoch " + std::to_string(epoch) +
                            " (learning rate " + format_double(config.learning_rate) + ")");
        for (std::size_t li = 0; li < model.layers.size(); ++li) {
            auto& l = model.layers[li];
            const auto& g = grad.layers[li];
            for (std::size_t i = 0; i < l.weights.size(); ++i) l.weights[i] -= config.learning_rate * g.weights[i];
            for (std::size_t i = 0; i < l.bias.size(); ++i) l.bias[i] -= config.learning_rate * g.bias[i];
        }
        double val = validation_ndcg(model, val_set, config.eval_k, val_gains);
        result.history.push_back({epoch, loss, val});
        if (val > result.best_val_ndcg + config.min_delta) {
            result.best_val_ndcg = val;
            result.best_epoch = epoch;
            result.model = model;
            stale = 0;
        } else if (++stale >= config.patience) {
            break;
        }
    }
    return result;
}

void write_history_csv(std::ostream& out, const std::vector<EpochRecord>& history) {
    out << "epoch,loss,val_ndcg10\n";
    for (const auto& h : history)
        out << h.epoch << ',' << format_double(h.loss) << ',' << format_double(h.val_ndcg) << '\n';
}

namespace {

void write_array(std::ostream& out, std::span<const double> v) {
    out << '[';
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out << ',';
        out << format_double(v[i]);
    }
    out << ']';
}

std::vector<double> read_array(const nlohmann::json& j, std::size_t expected, const char* what) {
    if (!j.is_array() || j.size() != expected)
        throw DataError(std::string("model file: ") + what + " should hold " +
                        std::to_string(expected) + " numbers");
    std::vector<double> v;
    v.reserve(expected);
    for (const auto& x : j) {
        if (!x.is_number()) throw DataError(std::string("model file: non-numeric entry in ") + what);
        double d = x.get<double>();
        if (!std::isfinite(d)) throw DataError(std::string("model file: non-finite value in ") + what);
        v.push_back(d);
    }
    return v;
}

}  // namespace

void save_model(std::ostream& out, const ModelParams& model) {
    using nlohmann::json;
    out << "{\n  \"format\": \"onionrank-model\",\n  \"version\": 1,\n";
    out << "  \"scheme\": " << json(std::string(scheme_name(model.scheme))).dump() << ",\n";
    out << "  \"seed\": " << model.seed << ",\n";
    out << "  \"dims\": [";
    for (std::size_t i = 0; i < model.layers.size(); ++i) {
        if (i == 0) out << model.layers[i].in;
        out << ", " << model.layers[i].out;
    }
    out << "],\n  \"features\": " << json(model.feature_names).dump() << ",\n";
    out << "  \"layers\": [\n";
    for (std::size_t i = 0; i < model.layers.size(); ++i) {
        out << "    {\"weights\": ";
        write_array(out, model.layers[i].weights);
        out << ",\n     \"bias\": ";
        write_array(out, model.layers[i].bias);
        out << '}' << (i + 1 < model.layers.size() ? ",\n" : "\n");
    }
    out << "  ],\n  \"standardization\": ";
    if (model.stats) {
        out << "{\"mean\": ";
        write_array(out, model.stats->mean);
        out << ",\n                      \"stddev\": ";
        write_array(out, model.stats->stddev);
        out << '}';
    } else {
        out << "null";
    }
    out << "\n}\n";
}

ModelParams load_model(std::istream& in) {
    using nlohmann::json;
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw DataError("model file is not valid JSON");
    if (j.value("format", "") != "onionrank-model") throw DataError("not an onionrank model file");

    ModelParams m;
    auto scheme = parse_scheme(j.value("scheme", ""));
    if (!scheme) throw DataError("model file: unknown scheme");
    m.scheme = *scheme;
    m.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("features") && j["features"].is_array())
        m.feature_names = j["features"].get<std::vector<std::string>>();

    const auto& dims = j.at("dims");
    const auto& layers = j.at("layers");
    if (!dims.is_array() || dims.size() < 2 || layers.size() != dims.size() - 1)
        throw DataError("model file: dims and layers disagree");
    for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
        DenseLayer l;
        l.in = dims[i].get<std::size_t>();
        l.out = dims[i + 1].get<std::size_t>();
        l.weights = read_array(layers[i].at("weights"), l.in * l.out, "weights");
        l.bias = read_array(layers[i].at("bias"), l.out, "bias");
        m.layers.push_back(std::move(l));
    }
    if (m.layers.back().out != 1) throw DataError("model file: output layer must have one unit");
    if (!m.feature_names.empty() && m.feature_names.size() != m.input_dim())
        throw DataError("model file: feature name count does not match input width");
    if (j.contains("standardization") && j["standardization"].is_object()) {
        features::StandardizationStats s;
        s.mean = read_array(j["standardization"].at("mean"), m.input_dim(), "mean");
        s.stddev = read_array(j["standardization"].at("stddev"), m.input_dim(), "stddev");
        m.stats = std::move(s);
    }
    return m;
}

}  // namespace onionrank::ltr
