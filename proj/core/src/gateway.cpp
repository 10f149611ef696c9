#include "synapseroute/gateway.hpp"

#include <cctype>
#include <chrono>
#include <fstream>
#include <iostream>

#include "synapseroute/errors.hpp"
#include "synapseroute/jsonl.hpp"
#include "synapseroute/sha256.hpp"

namespace synapseroute {

namespace {

std::string trim_copy(const std::string& text) {
    std::size_t begin = 0;
    std::size_t end = text.size();
    while (begin < end && std::isspace(static_cast<unsigned char>(text[begin]))) ++begin;
    while (end > begin && std::isspace(static_cast<unsigned char>(text[end - 1]))) --end;
    return text.substr(begin, end - begin);
}

std::int64_t elapsed_ms(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() -
                                                                 start)
        .count();
}

}  // namespace

void to_json(json& j, const RouteDecision& d) {
    j = json{{"question_hash", d.question_hash},
             {"probability_thinking", d.probability_thinking},
             {"threshold", d.threshold},
             {"chosen_mode", to_string(d.chosen_mode)},
             {"fallback_used", d.fallback_used},
             {"decision_latency_ms", d.decision_latency_ms}};
}

void from_json(const json& j, RouteDecision& d) {
    j.at("question_hash").get_to(d.question_hash);
    j.at("probability_thinking").get_to(d.probability_thinking);
    j.at("threshold").get_to(d.threshold);
    d.chosen_mode = mode_from_string(j.at("chosen_mode").get<std::string>());
    j.at("fallback_used").get_to(d.fallback_used);
    j.at("decision_latency_ms").get_to(d.decision_latency_ms);
}

void GatewayConfig::validate() const {
    backend.validate();
    if (threshold_override && !(*threshold_override >= 0.0 && *threshold_override <= 1.0))
        throw std::invalid_argument("threshold_override must lie in [0, 1]");
}

GatewayConfig GatewayConfig::from_json_value(const json& j) {
    GatewayConfig config;
    if (j.contains("model_path")) config.model_path = j.at("model_path").get<std::string>();
    if (j.contains("backend")) {
        const json& b = j.at("backend");
        if (b.contains("endpoint_url")) b.at("endpoint_url").get_to(config.backend.endpoint_url);
        if (b.contains("model_name")) b.at("model_name").get_to(config.backend.model_name);
        if (b.contains("mode_control"))
            config.backend.mode_control =
                mode_control_from_string(b.at("mode_control").get<std::string>());
        if (b.contains("request_timeout_ms"))
            b.at("request_timeout_ms").get_to(config.backend.request_timeout_ms);
        if (b.contains("max_retries")) b.at("max_retries").get_to(config.backend.max_retries);
        if (b.contains("system_prompt")) b.at("system_prompt").get_to(config.backend.system_prompt);
        if (b.contains("thinking_flag_key"))
            b.at("thinking_flag_key").get_to(config.backend.thinking_flag_key);
    }
    if (j.contains("embedding")) {
        const json& e = j.at("embedding");
        if (e.contains("endpoint_url")) e.at("endpoint_url").get_to(config.embedding.endpoint_url);
        if (e.contains("model_id")) e.at("model_id").get_to(config.embedding.model_id);
        if (e.contains("dimension")) e.at("dimension").get_to(config.embedding.dimension);
        if (e.contains("request_timeout_ms"))
            e.at("request_timeout_ms").get_to(config.embedding.request_timeout_ms);
        if (e.contains("max_retries")) e.at("max_retries").get_to(config.embedding.max_retries);
    }
    if (j.contains("threshold_override") && !j.at("threshold_override").is_null())
        config.threshold_override = j.at("threshold_override").get<double>();
    if (j.contains("fallback_mode"))
        config.fallback_mode = mode_from_string(j.at("fallback_mode").get<std::string>());
    if (j.contains("telemetry_path") && !j.at("telemetry_path").is_null())
        config.telemetry_path = std::filesystem::path(j.at("telemetry_path").get<std::string>());
    config.validate();
    return config;
}

GatewayConfig GatewayConfig::from_file(const std::filesystem::path& path) {
    return from_json_value(read_json_file(path));
}

Gateway::Gateway(RouterModel model, std::shared_ptr<Embedder> embedder,
                 std::shared_ptr<Backend> backend, GatewayConfig config)
    : model_(std::move(model)),
      embedder_(std::move(embedder)),
      backend_(std::move(backend)),
      config_(std::move(config)) {
    if (!embedder_) throw std::invalid_argument("gateway needs an embedder");
    if (!backend_) throw std::invalid_argument("gateway needs a backend");
    model_.validate();
    config_.validate();
}

double Gateway::effective_threshold() const {
    return config_.threshold_override ? *config_.threshold_override : model_.threshold;
}

RouteDecision Gateway::score(const std::string& query_text) {
    const auto start = std::chrono::steady_clock::now();
    RouteDecision decision;
    decision.question_hash = sha256_hex(trim_copy(query_text));
    decision.threshold = effective_threshold();
    const std::vector<float> features = embedder_->embed(query_text);
    decision.probability_thinking = predict_proba(model_, features);
    decision.chosen_mode = decision.probability_thinking >= decision.threshold
                               ? ModeKind::thinking
                               : ModeKind::non_thinking;
    decision.decision_latency_ms = elapsed_ms(start);
    return decision;
}

RouteDecision Gateway::classify_only(const std::string& query_text) {
    return score(query_text);
}

std::pair<ChatResult, RouteDecision> Gateway::route(const std::string& query_text) {
    return route_messages({ChatMessage{"user", query_text}});
}

std::pair<ChatResult, RouteDecision> Gateway::route_messages(std::vector<ChatMessage> messages) {
    const auto start = std::chrono::steady_clock::now();
    std::string user_text;
    for (auto it = messages.rbegin(); it != messages.rend(); ++it)
        if (it->role == "user") {
            user_text = it->content;
            break;
        }

    RouteDecision decision;
    try {
        decision = score(user_text);
    } catch (const Error&) {
        // Embedding/scoring trouble must not fail the request: serve it in
        // the configured fallback mode with a neutral probability.
        decision.question_hash = sha256_hex(trim_copy(user_text));
        decision.threshold = effective_threshold();
        decision.probability_thinking = 0.5;
        decision.chosen_mode = config_.fallback_mode;
        decision.fallback_used = true;
        decision.decision_latency_ms = elapsed_ms(start);
    }

    const ChatRequest request =
        apply_mode_control(std::move(messages), decision.chosen_mode, config_.backend);
    ChatResult result = backend_->complete(request);
    telemetry_append(decision, result);
    return {std::move(result), std::move(decision)};
}

void Gateway::telemetry_append(const RouteDecision& decision, const ChatResult& outcome) {
    if (!config_.telemetry_path) return;
    json line;
    to_json(line, decision);
    line["mode"] = to_string(decision.chosen_mode);
    line["completion_tokens"] = outcome.completion_tokens;
    line["latency_ms"] = outcome.latency_ms;
    const std::string serialized = line.dump();

    std::lock_guard lock(telemetry_mutex_);
    std::ofstream out(*config_.telemetry_path, std::ios::app);
    if (!out || !(out << serialized << '\n')) {
        ++telemetry_failures_;
        std::cerr << "synapseroute: telemetry append failed for "
                  << config_.telemetry_path->string() << "\n";
        return;
    }
    out.flush();
}

}  // namespace synapseroute
