#pragma once

#include "synapseroute/backend.hpp"

namespace synapseroute {

// Chat-completions HTTP client: POST {endpoint_url}/chat/completions with a
// JSON body {model, messages, [thinking flag]}, reading
// choices[0].message.content and usage.completion_tokens. Latency is
// measured client-side, wall-clock, from request start to full response.
//
// Transport errors are retried with jittered exponential backoff starting at
// 500 ms; received-but-malformed responses are never retried.
class HttpBackend : public Backend {
public:
    explicit HttpBackend(BackendConfig config);

    ChatResult complete(const ChatRequest& request) override;
    bool reachable() override;

    // Splits an endpoint URL into {scheme://host[:port], path prefix}.
    static std::pair<std::string, std::string> split_endpoint(const std::string& url);

    // Serialized request body (exposed for request-shape tests).
    static json request_body(const ChatRequest& request, const BackendConfig& config);
};

}  // namespace synapseroute
