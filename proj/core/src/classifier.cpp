#include "synapseroute/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "synapseroute/errors.hpp"
#include "synapseroute/jsonl.hpp"
#include "synapseroute/types.hpp"

namespace synapseroute {

namespace {

constexpr int kModelSchemaVersion = 1;

double sigmoid(double z) {
    double p;
    if (z >= 0.0) {
        p = 1.0 / (1.0 + std::exp(-z));
    } else {
        const double e = std::exp(z);
        p = e / (1.0 + e);
    }
    // Keep the output strictly inside (0, 1) even at saturation.
    p = std::min(p, std::nextafter(1.0, 0.0));
    p = std::max(p, std::numeric_limits<double>::denorm_min());
    return p;
}

// log(1 + e^z) without overflow.
double softplus(double z) {
    if (z > 0.0) return z + std::log1p(std::exp(-z));
    return std::log1p(std::exp(z));
}

struct Objective {
    const std::vector<std::vector<float>>& x;
    const std::vector<int>& y;
    double l2_lambda;

    double loss(const std::vector<double>& w, double b) const {
        double total = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            double z = b;
            for (std::size_t d = 0; d < w.size(); ++d) z += w[d] * double(x[i][d]);
            total += softplus(z) - double(y[i]) * z;
        }
        double reg = 0.0;
        for (double wd : w) reg += wd * wd;
        return total + 0.5 * l2_lambda * reg;
    }

    void gradient(const std::vector<double>& w, double b, std::vector<double>& gw,
                  double& gb) const {
        std::fill(gw.begin(), gw.end(), 0.0);
        gb = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            double z = b;
            for (std::size_t d = 0; d < w.size(); ++d) z += w[d] * double(x[i][d]);
            const double resid = sigmoid(z) - double(y[i]);
            for (std::size_t d = 0; d < w.size(); ++d) gw[d] += resid * double(x[i][d]);
            gb += resid;
        }
        for (std::size_t d = 0; d < w.size(); ++d) gw[d] += l2_lambda * w[d];
    }
};

void check_binary_targets(const std::vector<int>& targets) {
    bool has_pos = false;
    bool has_neg = false;
    for (int t : targets) {
        if (t == 1)
            has_pos = true;
        else if (t == 0)
            has_neg = true;
        else
            throw std::invalid_argument("targets must be 0 or 1");
    }
    if (!has_pos || !has_neg) throw SingleClass("both classes must be present");
}

}  // namespace

void TrainConfig::validate() const {
    if (!(l2_lambda >= 0.0) || !std::isfinite(l2_lambda))
        throw std::invalid_argument("l2_lambda must be a finite nonnegative real");
    if (max_iters < 1) throw std::invalid_argument("max_iters must be positive");
    if (!(tolerance > 0.0)) throw std::invalid_argument("tolerance must be positive");
}

void RouterModel::validate() const {
    if (dim == 0) throw MalformedRecord("router model dim must be positive");
    if (weights.size() != dim) throw DimensionMismatch("router model weights length != dim");
    for (double w : weights)
        if (!std::isfinite(w)) throw NonFinite("router model weights must be finite");
    if (!std::isfinite(bias)) throw NonFinite("router model bias must be finite");
    if (!(threshold >= 0.0 && threshold <= 1.0))
        throw MalformedRecord("router model threshold must lie in [0, 1]");
    if (positive_class != "thinking")
        throw MalformedRecord("router model positive_class must be \"thinking\"");
}

RouterModel train_logistic(const std::vector<std::vector<float>>& features,
                           const std::vector<int>& targets, const TrainConfig& config,
                           std::vector<double>* loss_trace) {
    config.validate();
    if (features.size() != targets.size())
        throw LengthMismatch("features and targets must have equal length");
    if (features.size() < 2) throw TooFewItems("need at least 2 training rows");
    check_binary_targets(targets);

    const std::size_t dim = features.front().size();
    if (dim == 0) throw DimensionMismatch("feature vectors must be non-empty");
    double max_norm_sq = 0.0;
    for (const auto& row : features) {
        if (row.size() != dim) throw DimensionMismatch("feature rows have inconsistent dims");
        double norm_sq = 0.0;
        for (float v : row) {
            if (!std::isfinite(v)) throw NonFinite("features contain NaN or Inf");
            norm_sq += double(v) * double(v);
        }
        max_norm_sq = std::max(max_norm_sq, norm_sq);
    }

    const Objective obj{features, targets, config.l2_lambda};
    std::vector<double> w(dim, 0.0);
    double b = 0.0;
    double loss = obj.loss(w, b);
    if (loss_trace) {
        loss_trace->clear();
        loss_trace->push_back(loss);
    }

    // Gradient Lipschitz bound for the logistic loss: ¼·Σ‖x‖² + λ, padded to
    // cover the bias coordinate. A 1/L step is monotone by construction; the
    // halving loop below guards the floating-point edge cases.
    const double n = static_cast<double>(features.size());
    const double lipschitz = 0.25 * n * (max_norm_sq + 1.0) + config.l2_lambda;
    const double base_step = 1.0 / lipschitz;

    std::vector<double> gw(dim);
    double gb = 0.0;
    std::vector<double> w_next(dim);
    int iterations = 0;

    for (int iter = 0; iter < config.max_iters; ++iter) {
        obj.gradient(w, b, gw, gb);
        double step = base_step;
        double next_loss = loss;
        double b_next = b;
        bool improved = false;
        for (int halving = 0; halving < 60; ++halving) {
            for (std::size_t d = 0; d < dim; ++d) w_next[d] = w[d] - step * gw[d];
            b_next = b - step * gb;
            next_loss = obj.loss(w_next, b_next);
            if (next_loss <= loss) {
                improved = true;
                break;
            }
            step *= 0.5;
        }
        if (!improved) break;  // at numerical floor

        const double decrease = loss - next_loss;
        w.swap(w_next);
        b = b_next;
        loss = next_loss;
        iterations = iter + 1;
        if (loss_trace) loss_trace->push_back(loss);
        if (decrease < config.tolerance) break;
    }

    RouterModel model;
    model.dim = dim;
    model.weights = std::move(w);
    model.bias = b;
    model.threshold = 0.5;
    model.train_meta.seed = config.seed;
    model.train_meta.l2_lambda = config.l2_lambda;
    model.train_meta.max_iters = config.max_iters;
    model.train_meta.converged_at_iter = iterations;
    model.train_meta.train_size = features.size();
    model.validate();
    return model;
}

double predict_proba(const RouterModel& model, const std::vector<float>& x) {
    if (x.size() != model.dim)
        throw DimensionMismatch("input has " + std::to_string(x.size()) + " dims, model expects " +
                                std::to_string(model.dim));
    double z = model.bias;
    for (std::size_t d = 0; d < model.dim; ++d) z += model.weights[d] * double(x[d]);
    return sigmoid(z);
}

double f1_at_threshold(const std::vector<double>& probs, const std::vector<int>& targets,
                       double threshold) {
    if (probs.size() != targets.size())
        throw LengthMismatch("probs and targets must have equal length");
    std::size_t tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        const bool pred = probs[i] >= threshold;
        if (pred && targets[i] == 1)
            ++tp;
        else if (pred && targets[i] == 0)
            ++fp;
        else if (!pred && targets[i] == 1)
            ++fn;
    }
    if (tp == 0) return 0.0;
    const double precision = double(tp) / double(tp + fp);
    const double recall = double(tp) / double(tp + fn);
    return 2.0 * precision * recall / (precision + recall);
}

double select_threshold_max_f1(const std::vector<double>& probs, const std::vector<int>& targets) {
    if (probs.size() != targets.size())
        throw LengthMismatch("probs and targets must have equal length");
    if (probs.empty()) throw EmptyInput("cannot select a threshold from no scores");
    check_binary_targets(targets);
    for (double p : probs)
        if (!std::isfinite(p)) throw NonFinite("probabilities must be finite");

    std::vector<double> distinct(probs);
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

    std::vector<double> candidates;
    candidates.reserve(distinct.size() + 1);
    candidates.push_back(0.0);
    for (std::size_t i = 0; i + 1 < distinct.size(); ++i)
        candidates.push_back(0.5 * (distinct[i] + distinct[i + 1]));
    candidates.push_back(1.0);

    double best_threshold = 0.0;
    double best_f1 = -1.0;
    for (double t : candidates) {
        const double f1 = f1_at_threshold(probs, targets, t);
        if (f1 > best_f1 || (f1 == best_f1 && t > best_threshold)) {
            best_f1 = f1;
            best_threshold = t;
        }
    }
    return best_threshold;
}

double auc(const std::vector<double>& probs, const std::vector<int>& targets) {
    if (probs.size() != targets.size())
        throw LengthMismatch("probs and targets must have equal length");
    check_binary_targets(targets);
    for (double p : probs)
        if (!std::isfinite(p)) throw NonFinite("probabilities must be finite");

    const std::size_t n = probs.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return probs[a] < probs[b]; });

    // Rank-sum with average ranks over ties; all partial sums are exact
    // multiples of 0.5 so the result matches pairwise counting bit-for-bit.
    double positive_rank_sum = 0.0;
    std::size_t n_pos = 0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && probs[order[j]] == probs[order[i]]) ++j;
        const double avg_rank = 0.5 * (double(i + 1) + double(j));  // 1-based
        for (std::size_t k = i; k < j; ++k)
            if (targets[order[k]] == 1) {
                positive_rank_sum += avg_rank;
                ++n_pos;
            }
        i = j;
    }
    const std::size_t n_neg = n - n_pos;
    const double u = positive_rank_sum - 0.5 * double(n_pos) * double(n_pos + 1);
    return u / (double(n_pos) * double(n_neg));
}

namespace {

void to_json(json& j, const TrainMeta& m) {
    j = json{{"seed", m.seed},
             {"l2_lambda", m.l2_lambda},
             {"max_iters", m.max_iters},
             {"converged_at_iter", m.converged_at_iter},
             {"train_size", m.train_size},
             {"timestamp", m.timestamp}};
}

void from_json(const json& j, TrainMeta& m) {
    j.at("seed").get_to(m.seed);
    j.at("l2_lambda").get_to(m.l2_lambda);
    j.at("max_iters").get_to(m.max_iters);
    j.at("converged_at_iter").get_to(m.converged_at_iter);
    j.at("train_size").get_to(m.train_size);
    j.at("timestamp").get_to(m.timestamp);
}

}  // namespace

void save_model(const RouterModel& model, const std::filesystem::path& path) {
    model.validate();
    json j{{"schema_version", kModelSchemaVersion},
           {"dim", model.dim},
           {"weights", model.weights},
           {"bias", model.bias},
           {"threshold", model.threshold},
           {"positive_class", model.positive_class},
           {"embedding_model_id", model.embedding_model_id},
           {"train_meta", json::object()}};
    to_json(j["train_meta"], model.train_meta);
    write_json_file(path, j);
}

RouterModel load_model(const std::filesystem::path& path) {
    const json j = read_json_file(path);
    RouterModel model;
    try {
        const int version = j.at("schema_version").get<int>();
        if (version != kModelSchemaVersion)
            throw SchemaVersionMismatch("unsupported router model schema_version " +
                                        std::to_string(version));
        j.at("dim").get_to(model.dim);
        j.at("weights").get_to(model.weights);
        j.at("bias").get_to(model.bias);
        j.at("threshold").get_to(model.threshold);
        j.at("positive_class").get_to(model.positive_class);
        j.at("embedding_model_id").get_to(model.embedding_model_id);
        from_json(j.at("train_meta"), model.train_meta);
    } catch (const json::exception& e) {
        throw SchemaVersionMismatch("router model file " + path.string() +
                                    " does not match schema: " + e.what());
    }
    model.validate();
    return model;
}

}  // namespace synapseroute
