#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <map>
#include <unordered_map>

#include "synapseroute/backend.hpp"
#include "synapseroute/types.hpp"

namespace synapseroute {

struct SimOutcome {
    bool correct = false;
    std::int64_t tokens = 1;
    std::int64_t latency_ms = 0;
};

struct SimEntry {
    SimOutcome thinking;
    SimOutcome non_thinking;

    const SimOutcome& at(ModeKind mode) const {
        return mode == ModeKind::thinking ? thinking : non_thinking;
    }
};

// Per-question outcome table for the simulator, with a deterministic
// hash-based fallback for unknown questions.
struct SimProfile {
    std::map<std::string, SimEntry> questions;
    std::uint64_t default_seed = 0;

    // Profile entry for a question id, falling back to the hash rule.
    SimEntry resolve(const std::string& question_id) const;
    SimEntry default_entry(const std::string& key) const;

    void save(const std::filesystem::path& path) const;
    static SimProfile load(const std::filesystem::path& path);
};

void to_json(json& j, const SimOutcome& o);
void from_json(const json& j, SimOutcome& o);
void to_json(json& j, const SimEntry& e);
void from_json(const json& j, SimEntry& e);
void to_json(json& j, const SimProfile& p);
void from_json(const json& j, SimProfile& p);

// Deterministic dual-mode backend driven by a SimProfile. Requests are
// matched back to corpus questions by their rendered text; latency and token
// counts come from the profile (modeled, not wall-clock), so runs are
// bit-reproducible.
class SimBackend : public Backend {
public:
    SimBackend(SimProfile profile, const std::vector<QuestionRecord>& corpus,
               BackendConfig config = default_config());

    static BackendConfig default_config();

    ChatResult complete(const ChatRequest& request) override;
    bool reachable() override { return true; }

    // Accounting used by telemetry-integrity checks.
    std::int64_t served_tokens(ModeKind mode) const;
    std::int64_t served_requests(ModeKind mode) const;

    const SimProfile& profile() const { return profile_; }

private:
    const QuestionRecord* find_question(const std::string& user_content) const;

    SimProfile profile_;
    std::vector<QuestionRecord> corpus_;
    std::unordered_map<std::string, std::size_t> by_text_;
    std::atomic<std::int64_t> tokens_[2] = {0, 0};
    std::atomic<std::int64_t> requests_[2] = {0, 0};
};

// Synthesizes a deterministic corpus of `n` questions together with the
// matching profile. Fractions give the share of questions answered correctly
// only by the non-thinking mode, only by the thinking mode, and by neither;
// the remainder is answered correctly by both. Question stems carry
// class-dependent vocabulary so that text features are informative.
// Thinking-mode token counts follow a right-skewed distribution over
// [128, 8277] (mean near 800); non-thinking outputs are fixed at 5 tokens.
std::pair<std::vector<QuestionRecord>, SimProfile> sim_from_distribution(
    std::size_t n, double frac_non_thinking_only, double frac_thinking_only, double frac_fail,
    std::uint64_t seed);

}  // namespace synapseroute
