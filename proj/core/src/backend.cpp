#include "synapseroute/backend.hpp"

#include <stdexcept>

#include "synapseroute/answer.hpp"
#include "synapseroute/errors.hpp"

namespace synapseroute {

const std::string kAnswerInstruction =
    "Answer with the single letter of the correct option.";

std::string to_string(ModeControl c) {
    return c == ModeControl::parameter_flag ? "parameter_flag" : "prompt_suffix";
}

ModeControl mode_control_from_string(const std::string& s) {
    if (s == "parameter_flag") return ModeControl::parameter_flag;
    if (s == "prompt_suffix") return ModeControl::prompt_suffix;
    throw std::invalid_argument("unknown mode control: " + s);
}

void BackendConfig::validate() const {
    if (request_timeout_ms < 1000) {
        throw std::invalid_argument("request_timeout_ms must be at least 1000");
    }
    if (max_retries < 0 || max_retries > 5) {
        throw std::invalid_argument("max_retries must be between 0 and 5");
    }
}

const std::string* ChatRequest::last_user_content() const {
    for (auto it = messages.rbegin(); it != messages.rend(); ++it) {
        if (it->role == "user") return &it->content;
    }
    return nullptr;
}

std::string question_text(const QuestionRecord& q) {
    std::string text = q.stem;
    for (const auto& [letter, option] : q.options) {
        text += '\n';
        text += letter;
        text += ". ";
        text += option;
    }
    return text;
}

ChatRequest apply_mode_control(std::vector<ChatMessage> messages, ModeKind mode,
                               const BackendConfig& config) {
    ChatRequest req;
    req.mode = mode;
    req.messages = std::move(messages);

    ChatMessage* system = nullptr;
    for (auto& m : req.messages) {
        if (m.role == "system") {
            system = &m;
            break;
        }
    }
    if (system == nullptr) {
        req.messages.insert(req.messages.begin(), {"system", config.system_prompt});
        system = &req.messages.front();
    }

    if (config.mode_control == ModeControl::parameter_flag) {
        req.thinking_flag = (mode == ModeKind::thinking);
    } else {
        system->content += mode == ModeKind::thinking ? " /think" : " /no_think";
    }
    return req;
}

ChatRequest build_prompt(const QuestionRecord& q, ModeKind mode, const BackendConfig& config) {
    std::vector<ChatMessage> messages;
    messages.push_back({"system", config.system_prompt});
    messages.push_back({"user", question_text(q) + "\n" + kAnswerInstruction});
    return apply_mode_control(std::move(messages), mode, config);
}

Backend::Backend(BackendConfig config) : config_(std::move(config)) {
    config_.validate();
}

InferenceOutcome infer(const QuestionRecord& q, ModeKind mode, Backend& backend) {
    const ChatRequest request = build_prompt(q, mode, backend.config());
    const ChatResult result = backend.complete(request);

    InferenceOutcome outcome;
    outcome.mode = mode;
    outcome.raw_output = result.raw_output;
    outcome.parsed_answer = parse_answer_letter(result.raw_output, q.option_letters());
    outcome.correct = outcome.parsed_answer.has_value() && *outcome.parsed_answer == q.gold;
    outcome.completion_tokens = result.completion_tokens;
    outcome.latency_ms = result.latency_ms;
    return outcome;
}

}  // namespace synapseroute
