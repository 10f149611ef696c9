#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "synapseroute/classifier.hpp"
#include "synapseroute/errors.hpp"
#include "synapseroute/jsonl.hpp"
#include "synapseroute/rng.hpp"
#include "test_util.hpp"

using namespace synapseroute;

namespace {

// Independent F1 computation used as the oracle for the threshold search.
double oracle_f1(const std::vector<double>& probs, const std::vector<int>& targets, double t) {
    double tp = 0.0, predicted_pos = 0.0, actual_pos = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        const bool pos = probs[i] >= t;
        predicted_pos += pos ? 1.0 : 0.0;
        actual_pos += targets[i];
        if (pos && targets[i] == 1) tp += 1.0;
    }
    if (tp == 0.0) return 0.0;
    return 2.0 * tp / (predicted_pos + actual_pos);
}

// F1 as an exact integer fraction 2*tp / (2*tp + fp + fn), so candidates can
// be compared without any floating-point rounding.
std::pair<long long, long long> oracle_f1_fraction(const std::vector<double>& probs,
                                                   const std::vector<int>& targets, double t) {
    long long tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        const bool pred = probs[i] >= t;
        if (pred && targets[i] == 1) ++tp;
        if (pred && targets[i] == 0) ++fp;
        if (!pred && targets[i] == 1) ++fn;
    }
    if (tp == 0) return {0, 1};
    return {2 * tp, 2 * tp + fp + fn};
}

bool fraction_less(std::pair<long long, long long> a, std::pair<long long, long long> b) {
    return a.first * b.second < b.first * a.second;
}

std::vector<double> threshold_candidates(const std::vector<double>& probs) {
    std::vector<double> sorted(probs);
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    std::vector<double> candidates{0.0};
    for (std::size_t i = 0; i + 1 < sorted.size(); ++i)
        candidates.push_back(0.5 * (sorted[i] + sorted[i + 1]));
    candidates.push_back(1.0);
    return candidates;
}

// Counts positive/negative pairs directly (ties worth one half).
double oracle_auc(const std::vector<double>& probs, const std::vector<int>& targets) {
    double wins = 0.0, ties = 0.0, pairs = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        if (targets[i] != 1) continue;
        for (std::size_t j = 0; j < probs.size(); ++j) {
            if (targets[j] != 0) continue;
            pairs += 1.0;
            if (probs[i] > probs[j])
                wins += 1.0;
            else if (probs[i] == probs[j])
                ties += 1.0;
        }
    }
    return (wins + 0.5 * ties) / pairs;
}

// Random score set on a coarse lattice so ties actually occur.
void random_scores(Rng& rng, std::vector<double>& probs, std::vector<int>& targets) {
    const std::size_t n = 2 + static_cast<std::size_t>(rng.next_below(38));
    probs.resize(n);
    targets.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        probs[i] = static_cast<double>(rng.next_below(21)) / 20.0;
        targets[i] = rng.next_bool(0.5) ? 1 : 0;
    }
    targets[0] = 1;  // force both classes
    targets[n - 1] = 0;
}

double train_accuracy(const RouterModel& model, const std::vector<std::vector<float>>& x,
                      const std::vector<int>& y) {
    std::size_t hits = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const int pred = predict_proba(model, x[i]) >= model.threshold ? 1 : 0;
        if (pred == y[i]) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(x.size());
}

}  // namespace

TEST_CASE("train config validation") {
    TrainConfig config;
    CHECK_NOTHROW(config.validate());
    config.l2_lambda = -0.5;
    CHECK_THROWS_AS(config.validate(), std::invalid_argument);
    config.l2_lambda = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(config.validate(), std::invalid_argument);
    config = {};
    config.max_iters = 0;
    CHECK_THROWS_AS(config.validate(), std::invalid_argument);
    config = {};
    config.tolerance = 0.0;
    CHECK_THROWS_AS(config.validate(), std::invalid_argument);
}

TEST_CASE("router model validation") {
    RouterModel m;
    m.dim = 2;
    m.weights = {0.5, -0.5};
    CHECK_NOTHROW(m.validate());

    RouterModel bad = m;
    bad.dim = 0;
    bad.weights.clear();
    CHECK_THROWS_AS(bad.validate(), MalformedRecord);
    bad = m;
    bad.weights.push_back(1.0);
    CHECK_THROWS_AS(bad.validate(), DimensionMismatch);
    bad = m;
    bad.weights[0] = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(bad.validate(), NonFinite);
    bad = m;
    bad.bias = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(bad.validate(), NonFinite);
    bad = m;
    bad.threshold = 1.5;
    CHECK_THROWS_AS(bad.validate(), MalformedRecord);
    bad = m;
    bad.positive_class = "non_thinking";
    CHECK_THROWS_AS(bad.validate(), MalformedRecord);
}

TEST_CASE("training input validation") {
    const std::vector<std::vector<float>> x = {{0.0f}, {1.0f}, {2.0f}};
    const TrainConfig config;
    CHECK_THROWS_AS(train_logistic(x, {0, 1}, config), LengthMismatch);
    CHECK_THROWS_AS(train_logistic({{1.0f}}, {1}, config), TooFewItems);
    CHECK_THROWS_AS(train_logistic(x, {0, 1, 2}, config), std::invalid_argument);
    CHECK_THROWS_AS(train_logistic(x, {1, 1, 1}, config), SingleClass);
    CHECK_THROWS_AS(train_logistic({{1.0f}, {1.0f, 2.0f}, {3.0f}}, {0, 1, 0}, config),
                    DimensionMismatch);
    CHECK_THROWS_AS(train_logistic({{}, {}}, {0, 1}, config), DimensionMismatch);
    CHECK_THROWS_AS(
        train_logistic({{1.0f}, {std::numeric_limits<float>::quiet_NaN()}}, {0, 1}, config),
        NonFinite);
}

namespace {
// Two well-separated 1-D clusters.
void separable_data(std::vector<std::vector<float>>& x, std::vector<int>& y) {
    x.clear();
    y.clear();
    Rng rng(404);
    for (int i = 0; i < 60; ++i) {
        x.push_back({static_cast<float>(-3.0 + rng.next_normal() * 0.5)});
        y.push_back(0);
        x.push_back({static_cast<float>(3.0 + rng.next_normal() * 0.5)});
        y.push_back(1);
    }
}
}  // namespace

TEST_CASE("loss trace starts at the zero-weight loss and never increases") {
    std::vector<std::vector<float>> x;
    std::vector<int> y;
    separable_data(x, y);

    TrainConfig config;
    config.l2_lambda = 0.01;
    config.max_iters = 300;
    std::vector<double> trace;
    const RouterModel model = train_logistic(x, y, config, &trace);

    REQUIRE(trace.size() >= 2);
    CHECK(trace.front() ==
          doctest::Approx(static_cast<double>(x.size()) * std::log(2.0)).epsilon(1e-12));
    for (std::size_t i = 1; i < trace.size(); ++i) CHECK(trace[i] <= trace[i - 1]);
    CHECK(trace.back() < trace.front());
    CHECK(model.train_meta.converged_at_iter == static_cast<int>(trace.size()) - 1);
    CHECK(trace.size() <= static_cast<std::size_t>(config.max_iters) + 1);
}

TEST_CASE("training is bitwise deterministic") {
    std::vector<std::vector<float>> x;
    std::vector<int> y;
    separable_data(x, y);
    TrainConfig config;
    config.l2_lambda = 0.1;

    std::vector<double> trace;
    const RouterModel a = train_logistic(x, y, config, &trace);
    const RouterModel b = train_logistic(x, y, config);
    CHECK(a.weights == b.weights);
    CHECK(a.bias == b.bias);
    CHECK(a.train_meta.converged_at_iter == b.train_meta.converged_at_iter);
}

TEST_CASE("separable data trains to perfect accuracy") {
    std::vector<std::vector<float>> x;
    std::vector<int> y;
    separable_data(x, y);
    TrainConfig config;
    config.l2_lambda = 0.01;
    config.seed = 99;
    const RouterModel model = train_logistic(x, y, config);

    CHECK(model.dim == 1);
    CHECK(model.threshold == 0.5);
    CHECK(model.train_meta.seed == 99);
    CHECK(model.train_meta.l2_lambda == 0.01);
    CHECK(model.train_meta.train_size == x.size());
    CHECK(train_accuracy(model, x, y) == 1.0);
}

TEST_CASE("no linear separator exists for xor data") {
    const std::vector<std::vector<float>> x = {{0.0f, 0.0f}, {0.0f, 1.0f}, {1.0f, 0.0f},
                                               {1.0f, 1.0f}};
    const std::vector<int> y = {0, 1, 1, 0};
    TrainConfig config;
    config.l2_lambda = 0.0;
    config.max_iters = 2000;
    const RouterModel model = train_logistic(x, y, config);
    CHECK(train_accuracy(model, x, y) <= 0.75);
}

TEST_CASE("predict_proba evaluates the logistic function") {
    RouterModel zero;
    zero.dim = 3;
    zero.weights = {0.0, 0.0, 0.0};
    CHECK(predict_proba(zero, {4.0f, -1.0f, 7.0f}) == 0.5);

    RouterModel m;
    m.dim = 2;
    m.weights = {1.0, -1.0};
    CHECK(predict_proba(m, {2.0f, 1.0f}) == doctest::Approx(0.7310585786300049).epsilon(1e-15));

    RouterModel saturated;
    saturated.dim = 1;
    saturated.weights = {0.0};
    saturated.bias = 20.0;
    CHECK(predict_proba(saturated, {0.0f}) >= 0.9999999);

    saturated.bias = 800.0;
    const double high = predict_proba(saturated, {0.0f});
    CHECK(high < 1.0);
    CHECK(high > 0.0);
    saturated.bias = -800.0;
    const double low = predict_proba(saturated, {0.0f});
    CHECK(low > 0.0);
    CHECK(low < 1.0);

    CHECK_THROWS_AS(predict_proba(m, {1.0f}), DimensionMismatch);
}

TEST_CASE("threshold search returns the documented midpoints") {
    // Any threshold in (0.3, 0.8) yields F1 = 1; the candidate there is the
    // midpoint 0.55.
    CHECK(select_threshold_max_f1({0.9, 0.8, 0.3}, {1, 1, 0}) == 0.55);

    // Equal scores collapse the candidates to {0, 1}. Predicting everything
    // positive beats predicting nothing, so 0 wins ...
    CHECK(select_threshold_max_f1({0.7, 0.7, 0.7}, {1, 0, 1}) == 0.0);
    // ... unless scores sit at 1.0, where both candidates classify everything
    // positive and the tie rule prefers the larger threshold.
    CHECK(select_threshold_max_f1({1.0, 1.0}, {1, 0}) == 1.0);
}

TEST_CASE("threshold search input validation") {
    CHECK_THROWS_AS(select_threshold_max_f1({}, {}), EmptyInput);
    CHECK_THROWS_AS(select_threshold_max_f1({0.1, 0.2}, {1, 1}), SingleClass);
    CHECK_THROWS_AS(select_threshold_max_f1({0.1, 0.2}, {1}), LengthMismatch);
    CHECK_THROWS_AS(
        select_threshold_max_f1({0.1, std::numeric_limits<double>::quiet_NaN()}, {1, 0}),
        NonFinite);
}

TEST_CASE("threshold search matches an independent oracle") {
    Rng rng(2024);
    std::vector<double> probs;
    std::vector<int> targets;
    for (int trial = 0; trial < 150; ++trial) {
        random_scores(rng, probs, targets);
        const double chosen = select_threshold_max_f1(probs, targets);

        // The choice comes from the canonical candidate set and attains the
        // exact maximum F1 over it (compared in integer arithmetic, so no
        // rounding enters the verdict).
        const std::vector<double> candidates = threshold_candidates(probs);
        CHECK(std::find(candidates.begin(), candidates.end(), chosen) != candidates.end());
        auto best_fraction = oracle_f1_fraction(probs, targets, candidates.front());
        for (double t : candidates) {
            const auto f = oracle_f1_fraction(probs, targets, t);
            if (fraction_less(best_fraction, f)) best_fraction = f;
        }
        CHECK_FALSE(fraction_less(oracle_f1_fraction(probs, targets, chosen), best_fraction));

        // No point on a dense grid beats the chosen threshold.
        const double best = oracle_f1(probs, targets, chosen);
        for (int g = 0; g <= 100; ++g) {
            const double t = static_cast<double>(g) / 100.0;
            CHECK(oracle_f1(probs, targets, t) <= best);
        }
    }
}

TEST_CASE("f1_at_threshold counts the positive class") {
    const std::vector<double> probs = {0.9, 0.6, 0.4, 0.2};
    const std::vector<int> targets = {1, 0, 1, 0};
    // t = 0.5: tp = 1, fp = 1, fn = 1 -> precision = recall = 0.5.
    CHECK(f1_at_threshold(probs, targets, 0.5) == doctest::Approx(0.5).epsilon(1e-15));
    // Nothing predicted positive.
    CHECK(f1_at_threshold(probs, targets, 0.95) == 0.0);
    CHECK_THROWS_AS(f1_at_threshold({0.1}, {1, 0}, 0.5), LengthMismatch);
}

TEST_CASE("auc anchors") {
    CHECK(auc({0.9, 0.8, 0.2, 0.1}, {1, 1, 0, 0}) == 1.0);
    CHECK(auc({0.5, 0.5, 0.5, 0.5}, {1, 0, 1, 0}) == 0.5);
    CHECK(auc({0.1, 0.4, 0.35, 0.8}, {0, 0, 1, 1}) == 0.75);

    CHECK_THROWS_AS(auc({0.1, 0.2}, {0, 0}), SingleClass);
    CHECK_THROWS_AS(auc({0.1}, {0, 1}), LengthMismatch);
    CHECK_THROWS_AS(auc({std::numeric_limits<double>::infinity(), 0.2}, {0, 1}), NonFinite);
}

TEST_CASE("auc equals pairwise counting exactly") {
    Rng rng(77);
    std::vector<double> probs;
    std::vector<int> targets;
    for (int trial = 0; trial < 500; ++trial) {
        random_scores(rng, probs, targets);
        CHECK(auc(probs, targets) == oracle_auc(probs, targets));
    }
}

TEST_CASE("auc is invariant under strictly increasing transforms") {
    Rng rng(78);
    std::vector<double> probs;
    std::vector<int> targets;
    for (int trial = 0; trial < 50; ++trial) {
        random_scores(rng, probs, targets);
        std::vector<double> shifted(probs.size());
        for (std::size_t i = 0; i < probs.size(); ++i) shifted[i] = 0.1 + 0.8 * probs[i];
        CHECK(auc(probs, targets) == auc(shifted, targets));
    }
}

TEST_CASE("model artifacts round-trip bit-exactly") {
    std::vector<std::vector<float>> x;
    std::vector<int> y;
    separable_data(x, y);
    TrainConfig config;
    config.seed = 7;
    RouterModel model = train_logistic(x, y, config);
    model.threshold = 0.6187;
    model.embedding_model_id = "feature-hash-v1-256";
    model.train_meta.timestamp = "2026-02-01T00:00:00Z";

    testutil::TempDir dir;
    const auto path = dir / "router.json";
    save_model(model, path);
    const RouterModel loaded = load_model(path);

    CHECK(loaded.dim == model.dim);
    CHECK(loaded.weights == model.weights);
    CHECK(loaded.bias == model.bias);
    CHECK(loaded.threshold == model.threshold);
    CHECK(loaded.positive_class == model.positive_class);
    CHECK(loaded.embedding_model_id == model.embedding_model_id);
    CHECK(loaded.train_meta.seed == model.train_meta.seed);
    CHECK(loaded.train_meta.l2_lambda == model.train_meta.l2_lambda);
    CHECK(loaded.train_meta.max_iters == model.train_meta.max_iters);
    CHECK(loaded.train_meta.converged_at_iter == model.train_meta.converged_at_iter);
    CHECK(loaded.train_meta.train_size == model.train_meta.train_size);
    CHECK(loaded.train_meta.timestamp == model.train_meta.timestamp);
}

TEST_CASE("model loading rejects foreign or truncated schemas") {
    testutil::TempDir dir;

    const auto missing_field = dir / "no_threshold.json";
    {
        RouterModel model;
        model.dim = 1;
        model.weights = {1.0};
        save_model(model, missing_field);
        json j = read_json_file(missing_field);
        j.erase("threshold");
        write_json_file(missing_field, j);
    }
    CHECK_THROWS_AS(load_model(missing_field), SchemaVersionMismatch);

    const auto future_schema = dir / "future.json";
    {
        RouterModel model;
        model.dim = 1;
        model.weights = {1.0};
        save_model(model, future_schema);
        json j = read_json_file(future_schema);
        j["schema_version"] = 2;
        write_json_file(future_schema, j);
    }
    CHECK_THROWS_AS(load_model(future_schema), SchemaVersionMismatch);

    CHECK_THROWS_AS(load_model(dir / "nonexistent.json"), IoError);
}

TEST_CASE("dimension mismatch against a loaded model surfaces at predict time") {
    testutil::TempDir dir;
    RouterModel model;
    model.dim = 4;
    model.weights = {0.1, 0.2, 0.3, 0.4};
    const auto path = dir / "router.json";
    save_model(model, path);
    const RouterModel loaded = load_model(path);
    CHECK_NOTHROW(predict_proba(loaded, {1.0f, 1.0f, 1.0f, 1.0f}));
    CHECK_THROWS_AS(predict_proba(loaded, {1.0f, 1.0f, 1.0f}), DimensionMismatch);
}
