#include "synapseroute/evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "synapseroute/errors.hpp"
#include "synapseroute/rng.hpp"

namespace synapseroute {

namespace {

std::string pred_class_name(const std::optional<char>& prediction) {
    return prediction ? std::string(1, *prediction) : std::string("(none)");
}

}  // namespace

MetricReport classification_report(const std::vector<std::optional<char>>& predictions,
                                   const std::vector<char>& golds) {
    if (predictions.size() != golds.size())
        throw LengthMismatch("predictions and golds must have equal length");
    if (golds.empty()) throw EmptyInput("cannot compute metrics over zero instances");

    const std::size_t n = golds.size();
    std::map<std::string, std::size_t> support;    // gold-class counts
    std::map<std::string, std::size_t> predicted;  // predicted-class counts
    std::map<std::string, std::size_t> tp;
    std::size_t correct_total = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const std::string gold_name(1, golds[i]);
        const std::string pred_name = pred_class_name(predictions[i]);
        ++support[gold_name];
        ++predicted[pred_name];
        if (pred_name == gold_name) {
            ++tp[gold_name];
            ++correct_total;
        }
    }

    MetricReport r;
    r.n = n;
    r.accuracy = double(correct_total) / double(n);

    double macro_p = 0.0, macro_r = 0.0, macro_f = 0.0;
    double weighted_p = 0.0, weighted_f = 0.0;
    for (const auto& [name, sup] : support) {
        const std::size_t tp_c = tp.count(name) ? tp.at(name) : 0;
        const std::size_t pred_c = predicted.count(name) ? predicted.at(name) : 0;
        const double precision = pred_c == 0 ? 0.0 : double(tp_c) / double(pred_c);
        const double recall = double(tp_c) / double(sup);
        const double f1 =
            precision + recall == 0.0 ? 0.0 : 2.0 * precision * recall / (precision + recall);
        r.per_class[name] = PerClassMetrics{sup, precision, recall, f1};
        macro_p += precision;
        macro_r += recall;
        macro_f += f1;
        weighted_p += double(sup) * precision;
        weighted_f += double(sup) * f1;
    }

    const double k = double(support.size());
    r.macro_precision = macro_p / k;
    r.macro_recall = macro_r / k;
    r.macro_f1 = macro_f / k;
    r.weighted_precision = weighted_p / double(n);
    r.weighted_f1 = weighted_f / double(n);
    // Weighted recall reduces to Σ TP / n, which is exactly the accuracy.
    r.weighted_recall = double(correct_total) / double(n);
    return r;
}

void to_json(json& j, const MetricReport& r) {
    json per_class = json::object();
    for (const auto& [name, m] : r.per_class)
        per_class[name] = json{{"support", m.support},
                               {"precision", m.precision},
                               {"recall", m.recall},
                               {"f1", m.f1}};
    j = json{{"n", r.n},
             {"accuracy", r.accuracy},
             {"macro",
              json{{"precision", r.macro_precision},
                   {"recall", r.macro_recall},
                   {"f1", r.macro_f1}}},
             {"weighted",
              json{{"precision", r.weighted_precision},
                   {"recall", r.weighted_recall},
                   {"f1", r.weighted_f1}}},
             {"per_class", std::move(per_class)}};
}

std::vector<double> min_max_normalize(const std::vector<double>& xs) {
    if (xs.empty()) throw EmptyInput("cannot normalize an empty list");
    for (double x : xs)
        if (!std::isfinite(x)) throw NonFinite("normalization input contains NaN or Inf");
    const auto [min_it, max_it] = std::minmax_element(xs.begin(), xs.end());
    const double lo = *min_it;
    const double hi = *max_it;
    std::vector<double> out(xs.size());
    if (lo == hi) {
        std::fill(out.begin(), out.end(), 0.5);
        return out;
    }
    const double range = hi - lo;
    for (std::size_t i = 0; i < xs.size(); ++i) out[i] = (xs[i] - lo) / range;
    return out;
}

std::vector<AITComponents> ait_components(const std::vector<CostPoint>& records) {
    if (records.empty()) throw EmptyInput("cannot compute AIT components of an empty population");
    std::vector<double> latencies(records.size());
    std::vector<double> tokens(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        latencies[i] = records[i].latency_ms;
        tokens[i] = records[i].completion_tokens;
    }
    const std::vector<double> norm_latency = min_max_normalize(latencies);
    const std::vector<double> norm_tokens = min_max_normalize(tokens);
    std::vector<AITComponents> out(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        out[i].A = records[i].correct ? 1.0 : 0.0;
        out[i].I = 1.0 - norm_latency[i];
        out[i].T = 1.0 - norm_tokens[i];
    }
    return out;
}

void AITScenario::validate() const {
    if (!(a >= 0.0) || !(b >= 0.0) || !(c >= 0.0) || !std::isfinite(a + b + c))
        throw std::invalid_argument("scenario weights must be finite and nonnegative");
    if (std::abs(a + b + c - 1.0) > 1e-12)
        throw std::invalid_argument("scenario weights must sum to 1");
    if (a < 0.5) throw std::invalid_argument("accuracy weight must dominate (a >= 0.5)");
}

double ait_score(const AITComponents& components, const AITScenario& scenario) {
    scenario.validate();
    return scenario.a * components.A + scenario.b * components.I + scenario.c * components.T;
}

const std::vector<AITScenario>& scenario_presets() {
    static const std::vector<AITScenario> presets = [] {
        std::vector<AITScenario> list{
            {"Accuracy First", 0.9, 0.05, 0.05},
            {"Accuracy-first with cost awareness", 0.8, 0.05, 0.15},
            {"Inference Speed First", 0.6, 0.3, 0.1},
            {"Balanced Strategy", 0.5, 0.25, 0.25},
            {"Token Size Priority", 0.5, 0.1, 0.4},
        };
        for (const AITScenario& s : list) s.validate();
        return list;
    }();
    return presets;
}

BootstrapResult bootstrap_mean_ci(const std::vector<double>& values, int iterations,
                                  double confidence, std::uint64_t seed, unsigned threads) {
    if (values.empty()) throw EmptyInput("bootstrap over an empty sample");
    if (iterations < 100) throw std::invalid_argument("bootstrap needs at least 100 iterations");
    if (!(confidence > 0.0 && confidence < 1.0))
        throw BadConfidence("confidence must lie strictly between 0 and 1");
    for (double v : values)
        if (!std::isfinite(v)) throw NonFinite("bootstrap input contains NaN or Inf");

    const std::size_t n = values.size();
    std::vector<double> means(static_cast<std::size_t>(iterations));
    auto run_range = [&](int begin, int end) {
        for (int i = begin; i < end; ++i) {
            Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(i));
            double sum = 0.0;
            for (std::size_t k = 0; k < n; ++k) sum += values[rng.next_below(n)];
            means[static_cast<std::size_t>(i)] = sum / double(n);
        }
    };

    if (threads <= 1) {
        run_range(0, iterations);
    } else {
        const unsigned workers = std::min<unsigned>(threads, static_cast<unsigned>(iterations));
        std::vector<std::thread> pool;
        pool.reserve(workers);
        const int chunk = (iterations + int(workers) - 1) / int(workers);
        for (unsigned w = 0; w < workers; ++w) {
            const int begin = int(w) * chunk;
            const int end = std::min(iterations, begin + chunk);
            if (begin >= end) break;
            pool.emplace_back(run_range, begin, end);
        }
        for (auto& t : pool) t.join();
    }

    std::sort(means.begin(), means.end());
    const double alpha = (1.0 - confidence) / 2.0;
    BootstrapResult r;
    r.mean = mean_of(values);
    r.ci_low = quantile_sorted(means, alpha);
    r.ci_high = quantile_sorted(means, 1.0 - alpha);
    r.margin = 0.5 * (r.ci_high - r.ci_low);
    r.iterations = iterations;
    r.seed = seed;
    return r;
}

void to_json(json& j, const BootstrapResult& r) {
    j = json{{"mean", r.mean},           {"ci_low", r.ci_low}, {"ci_high", r.ci_high},
             {"margin", r.margin},       {"iterations", r.iterations},
             {"seed", r.seed}};
}

void to_json(json& j, const EvalRecord& r) {
    j = json{{"question_id", r.question_id},
             {"prediction", r.prediction ? json(std::string(1, *r.prediction)) : json(nullptr)},
             {"gold", std::string(1, r.gold)},
             {"correct", r.correct},
             {"completion_tokens", r.completion_tokens},
             {"latency_ms", r.latency_ms}};
}

void from_json(const json& j, EvalRecord& r) {
    j.at("question_id").get_to(r.question_id);
    if (j.contains("prediction") && !j.at("prediction").is_null()) {
        const auto s = j.at("prediction").get<std::string>();
        if (s.size() != 1) throw MalformedRecord("prediction must be a single letter or null");
        r.prediction = s[0];
    } else {
        r.prediction = std::nullopt;
    }
    const auto gold = j.at("gold").get<std::string>();
    if (gold.size() != 1) throw MalformedRecord("gold must be a single letter");
    r.gold = gold[0];
    j.at("correct").get_to(r.correct);
    j.at("completion_tokens").get_to(r.completion_tokens);
    j.at("latency_ms").get_to(r.latency_ms);
    if (r.completion_tokens < 0 || r.latency_ms < 0)
        throw MalformedRecord("token and latency counts must be nonnegative");
}

EvalTable evaluate_modes(const std::vector<ModeLog>& logs, int iterations, double confidence,
                         std::uint64_t seed, unsigned threads) {
    if (logs.empty()) throw EmptyInput("no mode logs to evaluate");

    std::vector<std::string> reference_ids;
    for (std::size_t li = 0; li < logs.size(); ++li) {
        if (logs[li].records.empty())
            throw EmptyInput("mode log '" + logs[li].mode + "' is empty");
        std::vector<std::string> ids;
        ids.reserve(logs[li].records.size());
        for (const EvalRecord& rec : logs[li].records) ids.push_back(rec.question_id);
        std::sort(ids.begin(), ids.end());
        if (std::adjacent_find(ids.begin(), ids.end()) != ids.end())
            throw IdMismatch("duplicate question ids in log '" + logs[li].mode + "'");
        if (li == 0)
            reference_ids = std::move(ids);
        else if (ids != reference_ids)
            throw IdMismatch("mode logs do not cover the same question ids");
    }

    // Pool every record so all modes share one normalization scale.
    std::vector<CostPoint> pool;
    pool.reserve(logs.size() * reference_ids.size());
    for (const ModeLog& log : logs)
        for (const EvalRecord& rec : log.records)
            pool.push_back(CostPoint{rec.correct, double(rec.latency_ms),
                                     double(rec.completion_tokens)});
    const std::vector<AITComponents> components = ait_components(pool);

    EvalTable table;
    table.n = reference_ids.size();
    std::size_t offset = 0;
    for (const ModeLog& log : logs) {
        ModeEvaluation mode_eval;
        mode_eval.mode = log.mode;

        std::vector<std::optional<char>> preds;
        std::vector<char> golds;
        std::vector<double> latencies, tokens;
        preds.reserve(log.records.size());
        golds.reserve(log.records.size());
        for (const EvalRecord& rec : log.records) {
            preds.push_back(rec.prediction);
            golds.push_back(rec.gold);
            latencies.push_back(double(rec.latency_ms));
            tokens.push_back(double(rec.completion_tokens));
        }
        mode_eval.metrics = classification_report(preds, golds);
        mode_eval.mean_latency_ms = mean_of(latencies);
        mode_eval.mean_tokens = mean_of(tokens);

        const auto& presets = scenario_presets();
        for (std::size_t si = 0; si < presets.size(); ++si) {
            std::vector<double> scores(log.records.size());
            for (std::size_t i = 0; i < log.records.size(); ++i)
                scores[i] = ait_score(components[offset + i], presets[si]);
            // Seeded by scenario only: modes share resample indices (paired
            // bootstrap), so identical logs produce identical rows.
            const std::uint64_t stream_seed = splitmix64(seed ^ fnv1a64(presets[si].name));
            mode_eval.scenarios.push_back(ScenarioResult{
                presets[si].name,
                bootstrap_mean_ci(scores, iterations, confidence, stream_seed, threads)});
        }
        table.modes.push_back(std::move(mode_eval));
        offset += log.records.size();
    }
    return table;
}

void to_json(json& j, const EvalTable& t) {
    json modes = json::array();
    for (const ModeEvaluation& m : t.modes) {
        json scenarios = json::array();
        for (const ScenarioResult& s : m.scenarios)
            scenarios.push_back(json{{"scenario", s.scenario}, {"ait", s.ait}});
        modes.push_back(json{{"mode", m.mode},
                             {"metrics", m.metrics},
                             {"mean_latency_ms", m.mean_latency_ms},
                             {"mean_tokens", m.mean_tokens},
                             {"scenarios", std::move(scenarios)}});
    }
    j = json{{"n", t.n}, {"modes", std::move(modes)}};
}

}  // namespace synapseroute
