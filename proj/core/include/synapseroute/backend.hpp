#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "synapseroute/types.hpp"

namespace synapseroute {

// How the backend switches the thinking mode: a boolean request flag, or a
// " /think" / " /no_think" suffix on the system prompt.
enum class ModeControl { parameter_flag, prompt_suffix };

std::string to_string(ModeControl c);
ModeControl mode_control_from_string(const std::string& s);

struct BackendConfig {
    std::string endpoint_url;
    std::string model_name = "dual-mode-chat";
    ModeControl mode_control = ModeControl::parameter_flag;
    std::int64_t request_timeout_ms = 60000;
    int max_retries = 2;
    std::string system_prompt =
        "You are a careful medical assistant. Answer the multiple-choice question.";
    // JSON key carrying the boolean thinking switch when mode_control is
    // parameter_flag.
    std::string thinking_flag_key = "enable_thinking";

    // Throws std::invalid_argument when timeout < 1000 ms or retries > 5.
    void validate() const;
};

struct ChatMessage {
    std::string role;
    std::string content;
};

// A fully prepared backend request: messages plus the generation-mode control.
struct ChatRequest {
    std::vector<ChatMessage> messages;
    ModeKind mode = ModeKind::non_thinking;
    // Present exactly when the config uses parameter_flag control.
    std::optional<bool> thinking_flag;

    const std::string* last_user_content() const;
};

struct ChatResult {
    std::string raw_output;
    std::int64_t completion_tokens = 0;
    std::int64_t latency_ms = 0;
};

// The question text the router and embedder see: stem plus rendered
// "X. text" option lines. This is also the user-message body sent to the
// backend (followed by the answer instruction).
std::string question_text(const QuestionRecord& q);

extern const std::string kAnswerInstruction;

// Builds the request payload for one question under one mode. The user
// message is identical across both mode controls; only the flag or the
// system-prompt suffix differs.
ChatRequest build_prompt(const QuestionRecord& q, ModeKind mode, const BackendConfig& config);

// Applies the mode control of `config` to an externally supplied message list
// (used by the gateway proxy path). A missing system message is synthesized
// from the config.
ChatRequest apply_mode_control(std::vector<ChatMessage> messages, ModeKind mode,
                               const BackendConfig& config);

// A dual-mode chat backend: the HTTP client or the deterministic simulator.
class Backend {
public:
    explicit Backend(BackendConfig config);
    virtual ~Backend() = default;

    const BackendConfig& config() const { return config_; }

    // Executes one chat completion. Throws BackendUnavailable / Timeout after
    // retries are exhausted, BackendProtocol on malformed responses.
    virtual ChatResult complete(const ChatRequest& request) = 0;

    virtual bool reachable() = 0;

protected:
    BackendConfig config_;
};

// Probes one question in one mode and assembles the outcome: answer parsed
// against the question's option letters, correctness against its gold.
InferenceOutcome infer(const QuestionRecord& q, ModeKind mode, Backend& backend);

}  // namespace synapseroute
