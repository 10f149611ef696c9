#pragma once

#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>

#include "synapseroute/backend.hpp"
#include "synapseroute/classifier.hpp"
#include "synapseroute/embedding.hpp"
#include "synapseroute/types.hpp"

namespace synapseroute {

struct RouteDecision {
    std::string question_hash;  // digest of the trimmed query text
    double probability_thinking = 0.5;
    double threshold = 0.5;
    ModeKind chosen_mode = ModeKind::thinking;
    bool fallback_used = false;
    std::int64_t decision_latency_ms = 0;
};

void to_json(json& j, const RouteDecision& d);
void from_json(const json& j, RouteDecision& d);

struct GatewayConfig {
    std::filesystem::path model_path;
    BackendConfig backend;
    EmbeddingConfig embedding;
    std::optional<double> threshold_override;
    ModeKind fallback_mode = ModeKind::thinking;
    std::optional<std::filesystem::path> telemetry_path;

    void validate() const;
    static GatewayConfig from_json_value(const json& j);
    static GatewayConfig from_file(const std::filesystem::path& path);
};

// Scores queries with the router model and dispatches them to the backend in
// the chosen mode. Model and config are immutable after construction; all
// entry points are safe to call concurrently.
class Gateway {
public:
    Gateway(RouterModel model, std::shared_ptr<Embedder> embedder,
            std::shared_ptr<Backend> backend, GatewayConfig config);

    // Scoring without dispatch; embedding failures surface to the caller.
    RouteDecision classify_only(const std::string& query_text);

    // Full path: score, pick mode, call the backend. Embedding or scoring
    // failures fall back to config.fallback_mode instead of failing the
    // request; backend errors propagate.
    std::pair<ChatResult, RouteDecision> route(const std::string& query_text);
    std::pair<ChatResult, RouteDecision> route_messages(std::vector<ChatMessage> messages);

    // One self-contained JSON line per request. IO trouble is reported to
    // stderr and counted, never thrown.
    void telemetry_append(const RouteDecision& decision, const ChatResult& outcome);

    double effective_threshold() const;
    bool backend_reachable() { return backend_->reachable(); }
    const RouterModel& model() const { return model_; }
    const GatewayConfig& config() const { return config_; }
    std::size_t telemetry_failures() const { return telemetry_failures_; }

private:
    RouteDecision score(const std::string& query_text);

    RouterModel model_;
    std::shared_ptr<Embedder> embedder_;
    std::shared_ptr<Backend> backend_;
    GatewayConfig config_;
    std::mutex telemetry_mutex_;
    std::size_t telemetry_failures_ = 0;
};

// httplib front end:
//   POST /v1/chat/completions  chat proxy with routing headers
//   POST /v1/route             classify_only, JSON {"text": ...}
//   GET  /healthz              200 when the model is loaded and backend reachable
class GatewayServer {
public:
    explicit GatewayServer(std::shared_ptr<Gateway> gateway);
    ~GatewayServer();

    // Blocking listen for CLI use.
    bool run(const std::string& host, int port);

    // Background listen on an ephemeral port (for tests); returns the port.
    int start(const std::string& host);
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace synapseroute
