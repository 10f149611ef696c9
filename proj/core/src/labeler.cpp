#include "synapseroute/labeler.hpp"

#include <atomic>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <thread>

#include "synapseroute/errors.hpp"

namespace synapseroute {

QuestionLabel label_question(const DualProbeRecord& probe) {
    probe.validate();
    const bool t = probe.thinking.correct;
    const bool nt = probe.non_thinking.correct;
    if (t && !nt) return QuestionLabel::thinking;
    if (!t && nt) return QuestionLabel::non_thinking;
    if (!t && !nt) return QuestionLabel::fail;
    const bool thinking_dominates =
        probe.thinking.completion_tokens < probe.non_thinking.completion_tokens &&
        probe.thinking.latency_ms < probe.non_thinking.latency_ms;
    return thinking_dominates ? QuestionLabel::thinking : QuestionLabel::non_thinking;
}

LabelingStats compute_stats(const std::vector<LabeledQuestion>& labeled) {
    LabelingStats s;
    s.total = labeled.size();
    for (QuestionLabel label :
         {QuestionLabel::thinking, QuestionLabel::non_thinking, QuestionLabel::fail}) {
        s.counts[label] = 0;
        s.percentages[label] = 0.0;
    }

    std::vector<double> t_tokens, t_latency, nt_tokens, nt_latency;
    t_tokens.reserve(labeled.size());
    t_latency.reserve(labeled.size());
    nt_tokens.reserve(labeled.size());
    nt_latency.reserve(labeled.size());
    for (const LabeledQuestion& rec : labeled) {
        ++s.counts[rec.label];
        ++s.per_source[rec.question.source][rec.label];
        t_tokens.push_back(static_cast<double>(rec.probe.thinking.completion_tokens));
        t_latency.push_back(static_cast<double>(rec.probe.thinking.latency_ms));
        nt_tokens.push_back(static_cast<double>(rec.probe.non_thinking.completion_tokens));
        nt_latency.push_back(static_cast<double>(rec.probe.non_thinking.latency_ms));
    }
    if (s.total > 0)
        for (auto& [label, pct] : s.percentages)
            pct = 100.0 * static_cast<double>(s.counts[label]) / static_cast<double>(s.total);

    s.thinking_tokens = summarize(std::move(t_tokens));
    s.thinking_latency_ms = summarize(std::move(t_latency));
    s.non_thinking_tokens = summarize(std::move(nt_tokens));
    s.non_thinking_latency_ms = summarize(std::move(nt_latency));
    return s;
}

void to_json(json& j, const LabelingStats& s) {
    json counts = json::object();
    json percentages = json::object();
    for (const auto& [label, count] : s.counts) counts[to_string(label)] = count;
    for (const auto& [label, pct] : s.percentages) percentages[to_string(label)] = pct;
    json per_source = json::object();
    for (const auto& [source, table] : s.per_source) {
        json row = json::object();
        for (const auto& [label, count] : table) row[to_string(label)] = count;
        per_source[to_string(source)] = std::move(row);
    }
    j = json{{"total", s.total},
             {"counts", std::move(counts)},
             {"percentages", std::move(percentages)},
             {"per_source", std::move(per_source)},
             {"thinking_tokens", s.thinking_tokens},
             {"thinking_latency_ms", s.thinking_latency_ms},
             {"non_thinking_tokens", s.non_thinking_tokens},
             {"non_thinking_latency_ms", s.non_thinking_latency_ms}};
}

std::pair<std::vector<LabeledQuestion>, LabelingStats> run_labeling_pipeline(
    const std::vector<QuestionRecord>& questions, Backend& backend,
    const LabelingOptions& options) {
    if (options.parallelism < 1) throw std::invalid_argument("parallelism must be at least 1");
    if (questions.empty()) return {{}, compute_stats({})};

    const std::size_t n = questions.size();
    enum class Slot { pending, done, failed };
    std::vector<Slot> state(n, Slot::pending);
    std::vector<std::optional<LabeledQuestion>> results(n);
    std::vector<LabeledQuestion> flushed;
    flushed.reserve(n);

    std::atomic<std::size_t> next{0};
    std::atomic<bool> aborted{false};
    std::size_t consecutive_failures = 0;
    std::size_t frontier = 0;
    std::mutex mutex;

    auto advance_frontier = [&] {  // caller holds mutex
        while (frontier < n && state[frontier] != Slot::pending) {
            if (state[frontier] == Slot::done) {
                flushed.push_back(*results[frontier]);
                if (options.sink) options.sink(flushed.back());
            }
            ++frontier;
        }
    };

    auto worker = [&] {
        while (!aborted.load(std::memory_order_relaxed)) {
            const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
            if (i >= n) return;
            const QuestionRecord& q = questions[i];
            try {
                DualProbeRecord probe;
                probe.question_id = q.id;
                probe.thinking = infer(q, ModeKind::thinking, backend);
                probe.non_thinking = infer(q, ModeKind::non_thinking, backend);
                LabeledQuestion rec{q, probe, label_question(probe)};

                std::lock_guard lock(mutex);
                consecutive_failures = 0;
                results[i] = std::move(rec);
                state[i] = Slot::done;
                advance_frontier();
            } catch (const std::exception&) {
                std::lock_guard lock(mutex);
                state[i] = Slot::failed;
                advance_frontier();
                if (++consecutive_failures >= options.max_consecutive_failures)
                    aborted.store(true, std::memory_order_relaxed);
            }
        }
    };

    const std::size_t workers = std::min(options.parallelism, n);
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (std::size_t i = 0; i < workers; ++i) threads.emplace_back(worker);
    for (auto& t : threads) t.join();

    if (aborted.load())
        throw PipelineFailed("labeling aborted after " +
                                 std::to_string(options.max_consecutive_failures) +
                                 " consecutive backend failures",
                             flushed.size());
    LabelingStats stats = compute_stats(flushed);
    return {std::move(flushed), std::move(stats)};
}

std::vector<std::pair<QuestionRecord, int>> training_view(
    const std::vector<LabeledQuestion>& labeled) {
    std::vector<std::pair<QuestionRecord, int>> rows;
    rows.reserve(labeled.size());
    for (const LabeledQuestion& rec : labeled) {
        if (rec.label == QuestionLabel::fail) continue;
        rows.emplace_back(rec.question, rec.label == QuestionLabel::thinking ? 1 : 0);
    }
    if (rows.empty()) throw EmptyAfterFilter("no thinking/non_thinking records after filtering");
    return rows;
}

}  // namespace synapseroute
