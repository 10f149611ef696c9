#include "synapseroute/http_backend.hpp"

#include <chrono>
#include <random>
#include <thread>

#include <httplib.h>

#include "synapseroute/errors.hpp"

namespace synapseroute {

namespace {

std::int64_t now_ms() {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

void backoff_sleep(int attempt) {
    static thread_local std::mt19937_64 jitter_rng{std::random_device{}()};
    const double base = 500.0 * static_cast<double>(1 << attempt);
    const double jitter = 0.5 + 0.5 * std::uniform_real_distribution<double>(0.0, 1.0)(jitter_rng);
    std::this_thread::sleep_for(std::chrono::milliseconds(static_cast<std::int64_t>(base * jitter)));
}

bool is_timeout(httplib::Error err) {
    return err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read ||
           err == httplib::Error::Write;
}

}  // namespace

HttpBackend::HttpBackend(BackendConfig config) : Backend(std::move(config)) {
    if (config_.endpoint_url.empty()) {
        throw std::invalid_argument("HttpBackend requires an endpoint_url");
    }
}

std::pair<std::string, std::string> HttpBackend::split_endpoint(const std::string& url) {
    const auto scheme_end = url.find("://");
    const std::size_t host_start = scheme_end == std::string::npos ? 0 : scheme_end + 3;
    const auto path_start = url.find('/', host_start);
    if (path_start == std::string::npos) return {url, ""};
    std::string prefix = url.substr(path_start);
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    return {url.substr(0, path_start), prefix};
}

json HttpBackend::request_body(const ChatRequest& request, const BackendConfig& config) {
    json messages = json::array();
    for (const auto& m : request.messages) {
        messages.push_back({{"role", m.role}, {"content", m.content}});
    }
    json body = {{"model", config.model_name},
                 {"messages", std::move(messages)},
                 {"temperature", 0.0}};
    if (request.thinking_flag.has_value()) {
        body[config.thinking_flag_key] = *request.thinking_flag;
    }
    return body;
}

ChatResult HttpBackend::complete(const ChatRequest& request) {
    const auto [host, prefix] = split_endpoint(config_.endpoint_url);
    const std::string path = prefix + "/chat/completions";
    const std::string body = request_body(request, config_).dump();

    const std::int64_t started = now_ms();
    httplib::Result res;
    for (int attempt = 0;; ++attempt) {
        httplib::Client client(host);
        client.set_connection_timeout(std::chrono::milliseconds(config_.request_timeout_ms));
        client.set_read_timeout(std::chrono::milliseconds(config_.request_timeout_ms));
        client.set_write_timeout(std::chrono::milliseconds(config_.request_timeout_ms));

        res = client.Post(path, body, "application/json");
        if (res) break;
        if (attempt >= config_.max_retries) {
            const std::string detail = httplib::to_string(res.error());
            if (is_timeout(res.error())) {
                throw Timeout("backend " + config_.endpoint_url + " timed out after " +
                              std::to_string(attempt + 1) + " attempts: " + detail);
            }
            throw BackendUnavailable("backend " + config_.endpoint_url + " unreachable after " +
                                     std::to_string(attempt + 1) + " attempts: " + detail);
        }
        backoff_sleep(attempt);
    }

    // A received non-2xx response is not retried.
    if (res->status < 200 || res->status >= 300) {
        throw BackendUnavailable("backend returned HTTP " + std::to_string(res->status) + ": " +
                                 res->body.substr(0, 512));
    }

    json payload = json::parse(res->body, nullptr, false);
    if (payload.is_discarded()) throw BackendProtocol("backend response is not JSON");
    try {
        ChatResult out;
        out.raw_output = payload.at("choices").at(0).at("message").at("content").get<std::string>();
        out.completion_tokens = payload.at("usage").at("completion_tokens").get<std::int64_t>();
        out.latency_ms = now_ms() - started;
        return out;
    } catch (const json::exception& e) {
        throw BackendProtocol(std::string("backend response missing required fields: ") + e.what());
    }
}

bool HttpBackend::reachable() {
    const auto [host, prefix] = split_endpoint(config_.endpoint_url);
    httplib::Client client(host);
    client.set_connection_timeout(std::chrono::seconds(2));
    client.set_read_timeout(std::chrono::seconds(2));
    // Any HTTP response (even 404) proves the service is up.
    auto res = client.Get(prefix + "/models");
    return static_cast<bool>(res);
}

}  // namespace synapseroute
