#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "synapseroute/stats.hpp"
#include "synapseroute/types.hpp"

namespace synapseroute {

struct PerClassMetrics {
    std::size_t support = 0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

struct MetricReport {
    std::size_t n = 0;
    double accuracy = 0.0;
    double macro_precision = 0.0;
    double macro_recall = 0.0;
    double macro_f1 = 0.0;
    double weighted_precision = 0.0;
    double weighted_recall = 0.0;  // equals accuracy by construction
    double weighted_f1 = 0.0;
    std::map<std::string, PerClassMetrics> per_class;  // keyed by gold class
};

void to_json(json& j, const MetricReport& r);

// Missing predictions (unparseable answers) count as their own predicted
// class, so they are always wrong but still contribute to gold-class recall.
MetricReport classification_report(const std::vector<std::optional<char>>& predictions,
                                   const std::vector<char>& golds);

// (x - min) / (max - min); a degenerate range maps every value to 0.5.
std::vector<double> min_max_normalize(const std::vector<double>& xs);

struct CostPoint {
    bool correct = false;
    double latency_ms = 0.0;
    double completion_tokens = 0.0;
};

struct AITComponents {
    double A = 0.0;  // correctness, 0 or 1
    double I = 0.0;  // inverted normalized latency: closer to 1 = faster
    double T = 0.0;  // inverted normalized token count: closer to 1 = cheaper
};

// Normalizes latency and tokens jointly over the whole input population
// (records from every mode being compared), then inverts via 1 - x.
std::vector<AITComponents> ait_components(const std::vector<CostPoint>& records);

struct AITScenario {
    std::string name;
    double a = 0.0;  // accuracy weight
    double b = 0.0;  // inference-speed weight
    double c = 0.0;  // token-size weight

    void validate() const;  // weights nonnegative, sum to 1, a >= 0.5
};

double ait_score(const AITComponents& components, const AITScenario& scenario);

// The five weighting strategies, in canonical order.
const std::vector<AITScenario>& scenario_presets();

struct BootstrapResult {
    double mean = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    double margin = 0.0;  // (ci_high - ci_low) / 2
    int iterations = 0;
    std::uint64_t seed = 0;
};

void to_json(json& j, const BootstrapResult& r);

// Percentile bootstrap over question-level resamples. Each iteration draws
// its randomness from an independent stream keyed by (seed, iteration), so
// results are bit-identical regardless of thread count.
BootstrapResult bootstrap_mean_ci(const std::vector<double>& values, int iterations = 1000,
                                  double confidence = 0.95, std::uint64_t seed = 0,
                                  unsigned threads = 1);

// One answered question in one mode's evaluation log.
struct EvalRecord {
    std::string question_id;
    std::optional<char> prediction;
    char gold = 'A';
    bool correct = false;
    std::int64_t completion_tokens = 0;
    std::int64_t latency_ms = 0;
};

void to_json(json& j, const EvalRecord& r);
void from_json(const json& j, EvalRecord& r);

struct ModeLog {
    std::string mode;  // e.g. "non_thinking", "thinking", "dynamic"
    std::vector<EvalRecord> records;
};

struct ScenarioResult {
    std::string scenario;
    BootstrapResult ait;
};

struct ModeEvaluation {
    std::string mode;
    MetricReport metrics;
    double mean_latency_ms = 0.0;
    double mean_tokens = 0.0;
    std::vector<ScenarioResult> scenarios;
};

struct EvalTable {
    std::size_t n = 0;  // questions per mode
    std::vector<ModeEvaluation> modes;
};

void to_json(json& j, const EvalTable& t);

// Full cross-mode comparison: classification metrics, mean cost, and AIT
// bootstrap intervals per scenario. All logs must cover the same question
// ids; AIT normalization pools every record from every mode.
EvalTable evaluate_modes(const std::vector<ModeLog>& logs, int iterations = 1000,
                         double confidence = 0.95, std::uint64_t seed = 0, unsigned threads = 1);

}  // namespace synapseroute
