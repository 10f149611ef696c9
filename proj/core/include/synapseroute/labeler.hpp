#pragma once

#include <functional>
#include <map>
#include <utility>
#include <vector>

#include "synapseroute/backend.hpp"
#include "synapseroute/stats.hpp"
#include "synapseroute/types.hpp"

namespace synapseroute {

struct LabelingStats {
    std::size_t total = 0;
    std::map<QuestionLabel, std::size_t> counts;
    std::map<QuestionLabel, double> percentages;  // of total; sums to 100 when total > 0
    std::map<Source, std::map<QuestionLabel, std::size_t>> per_source;
    SummaryStats thinking_tokens;
    SummaryStats thinking_latency_ms;
    SummaryStats non_thinking_tokens;
    SummaryStats non_thinking_latency_ms;
};

void to_json(json& j, const LabelingStats& s);

// Three-branch annotation rule. When both modes answer correctly, thinking
// wins only by strict dominance on both token count and latency; otherwise
// the cheaper non-thinking mode is preferred. Both wrong means fail.
QuestionLabel label_question(const DualProbeRecord& probe);

LabelingStats compute_stats(const std::vector<LabeledQuestion>& labeled);

struct LabelingOptions {
    std::size_t parallelism = 1;
    std::size_t max_consecutive_failures = 10;
    // Called in input order as each record completes; useful for streaming
    // output to disk so aborted runs can resume.
    std::function<void(const LabeledQuestion&)> sink;
};

// Probes every question in both modes and labels it. Output preserves input
// order. Questions whose probes keep failing are skipped; a run of
// consecutive failures beyond the configured bound aborts the pipeline with
// PipelineFailed after flushing everything already completed.
std::pair<std::vector<LabeledQuestion>, LabelingStats> run_labeling_pipeline(
    const std::vector<QuestionRecord>& questions, Backend& backend,
    const LabelingOptions& options = {});

// Keeps thinking/non_thinking records as binary training rows (thinking = 1)
// and drops fail records.
std::vector<std::pair<QuestionRecord, int>> training_view(
    const std::vector<LabeledQuestion>& labeled);

}  // namespace synapseroute
