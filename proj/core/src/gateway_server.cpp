#include <thread>

#include <httplib.h>

#include "synapseroute/errors.hpp"
#include "synapseroute/gateway.hpp"

namespace synapseroute {

struct GatewayServer::Impl {
    std::shared_ptr<Gateway> gateway;
    httplib::Server server;
    std::thread thread;

    explicit Impl(std::shared_ptr<Gateway> gw) : gateway(std::move(gw)) {
        server.Get("/healthz", [this](const httplib::Request&, httplib::Response& res) {
            const bool reachable = gateway->backend_reachable();
            json body{{"status", reachable ? "ok" : "backend unreachable"},
                      {"model_dim", gateway->model().dim},
                      {"backend_reachable", reachable}};
            res.status = reachable ? 200 : 503;
            res.set_content(body.dump(), "application/json");
        });

        server.Post("/v1/route", [this](const httplib::Request& req, httplib::Response& res) {
            json body;
            try {
                body = json::parse(req.body);
            } catch (const json::exception&) {
                respond_error(res, 400, "request body must be JSON");
                return;
            }
            if (!body.contains("text") || !body["text"].is_string()) {
                respond_error(res, 400, "request must carry a string field \"text\"");
                return;
            }
            try {
                const RouteDecision decision = gateway->classify_only(body["text"]);
                res.set_content(json(decision).dump(), "application/json");
            } catch (const EmbeddingUnavailable& e) {
                respond_error(res, 503, e.what());
            } catch (const Error& e) {
                respond_error(res, 500, e.what());
            }
        });

        server.Post("/v1/chat/completions",
                    [this](const httplib::Request& req, httplib::Response& res) {
                        handle_chat(req, res);
                    });
    }

    static void respond_error(httplib::Response& res, int status, const std::string& message) {
        res.status = status;
        res.set_content(json{{"error", message}}.dump(), "application/json");
    }

    void handle_chat(const httplib::Request& req, httplib::Response& res) {
        json body;
        try {
            body = json::parse(req.body);
        } catch (const json::exception&) {
            respond_error(res, 400, "request body must be JSON");
            return;
        }
        if (!body.contains("messages") || !body["messages"].is_array() ||
            body["messages"].empty()) {
            respond_error(res, 400, "request must carry a non-empty \"messages\" array");
            return;
        }
        std::vector<ChatMessage> messages;
        for (const json& m : body["messages"]) {
            if (!m.contains("role") || !m.contains("content")) {
                respond_error(res, 400, "each message needs \"role\" and \"content\"");
                return;
            }
            messages.push_back(
                ChatMessage{m["role"].get<std::string>(), m["content"].get<std::string>()});
        }

        try {
            auto [result, decision] = gateway->route_messages(std::move(messages));
            json response{
                {"id", "synapseroute-" + decision.question_hash.substr(0, 16)},
                {"object", "chat.completion"},
                {"model", gateway->config().backend.model_name},
                {"choices",
                 json::array({json{{"index", 0},
                                   {"message", json{{"role", "assistant"},
                                                    {"content", result.raw_output}}},
                                   {"finish_reason", "stop"}}})},
                {"usage", json{{"completion_tokens", result.completion_tokens}}}};
            res.set_header("x-synapseroute-mode", to_string(decision.chosen_mode));
            res.set_header("x-synapseroute-prob", json(decision.probability_thinking).dump());
            res.set_content(response.dump(), "application/json");
        } catch (const Timeout& e) {
            respond_error(res, 504, e.what());
        } catch (const BackendUnavailable& e) {
            respond_error(res, 502, e.what());
        } catch (const Error& e) {
            respond_error(res, 500, e.what());
        }
    }
};

GatewayServer::GatewayServer(std::shared_ptr<Gateway> gateway)
    : impl_(std::make_unique<Impl>(std::move(gateway))) {}

GatewayServer::~GatewayServer() { stop(); }

bool GatewayServer::run(const std::string& host, int port) {
    return impl_->server.listen(host, port);
}

int GatewayServer::start(const std::string& host) {
    const int port = impl_->server.bind_to_any_port(host);
    if (port <= 0) throw IoError("cannot bind gateway server on " + host);
    impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
    return port;
}

void GatewayServer::stop() {
    if (!impl_) return;
    impl_->server.stop();
    if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace synapseroute
