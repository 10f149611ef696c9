#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <chrono>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>

#include "synapseroute/backend.hpp"
#include "synapseroute/errors.hpp"
#include "synapseroute/http_backend.hpp"
#include "synapseroute/simulator.hpp"
#include "test_util.hpp"

using namespace synapseroute;
using testutil::make_question;

TEST_CASE("backend config bounds") {
    BackendConfig cfg;
    cfg.endpoint_url = "http://x";
    CHECK_NOTHROW(cfg.validate());

    cfg.request_timeout_ms = 999;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.request_timeout_ms = 1000;
    CHECK_NOTHROW(cfg.validate());

    cfg.max_retries = 6;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.max_retries = -1;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("mode control string round trip") {
    CHECK(mode_control_from_string(to_string(ModeControl::parameter_flag)) ==
          ModeControl::parameter_flag);
    CHECK(mode_control_from_string(to_string(ModeControl::prompt_suffix)) ==
          ModeControl::prompt_suffix);
    CHECK_THROWS_AS(mode_control_from_string("flags"), std::invalid_argument);
}

TEST_CASE("question_text renders stem plus lettered options") {
    QuestionRecord q = make_question("q", 'B', 3);
    q.stem = "Which vessel?";
    q.options = {{'A', "aorta"}, {'B', "vena cava"}, {'C', "portal vein"}};
    CHECK(question_text(q) == "Which vessel?\nA. aorta\nB. vena cava\nC. portal vein");
}

TEST_CASE("build_prompt carries the thinking flag under parameter control") {
    const QuestionRecord q = make_question("q", 'A');
    BackendConfig cfg;
    cfg.mode_control = ModeControl::parameter_flag;

    const ChatRequest thinking = build_prompt(q, ModeKind::thinking, cfg);
    REQUIRE(thinking.messages.size() == 2);
    CHECK(thinking.messages[0].role == "system");
    CHECK(thinking.messages[0].content == cfg.system_prompt);  // no suffix
    CHECK(thinking.messages[1].role == "user");
    CHECK(thinking.mode == ModeKind::thinking);
    REQUIRE(thinking.thinking_flag.has_value());
    CHECK(*thinking.thinking_flag == true);

    const ChatRequest fast = build_prompt(q, ModeKind::non_thinking, cfg);
    REQUIRE(fast.thinking_flag.has_value());
    CHECK(*fast.thinking_flag == false);

    // User message: the question text followed by the answer instruction.
    CHECK(thinking.messages[1].content == question_text(q) + "\n" + kAnswerInstruction);
}

TEST_CASE("build_prompt suffixes the system prompt under prompt control") {
    const QuestionRecord q = make_question("q", 'A');
    BackendConfig cfg;
    cfg.mode_control = ModeControl::prompt_suffix;

    const ChatRequest thinking = build_prompt(q, ModeKind::thinking, cfg);
    CHECK_FALSE(thinking.thinking_flag.has_value());
    CHECK(thinking.messages[0].content == cfg.system_prompt + " /think");

    const ChatRequest fast = build_prompt(q, ModeKind::non_thinking, cfg);
    CHECK(fast.messages[0].content == cfg.system_prompt + " /no_think");
}

TEST_CASE("the user message is identical across both mode controls") {
    const QuestionRecord q = make_question("q", 'C');
    BackendConfig flag_cfg;
    flag_cfg.mode_control = ModeControl::parameter_flag;
    BackendConfig suffix_cfg;
    suffix_cfg.mode_control = ModeControl::prompt_suffix;
    const auto a = build_prompt(q, ModeKind::thinking, flag_cfg);
    const auto b = build_prompt(q, ModeKind::thinking, suffix_cfg);
    CHECK(a.messages[1].content == b.messages[1].content);
}

TEST_CASE("apply_mode_control synthesizes a missing system message") {
    BackendConfig cfg;
    std::vector<ChatMessage> messages = {{"user", "hello"}};
    const ChatRequest req = apply_mode_control(messages, ModeKind::non_thinking, cfg);
    REQUIRE(req.messages.size() == 2);
    CHECK(req.messages[0].role == "system");
    CHECK(req.messages[0].content == cfg.system_prompt);
    CHECK(req.messages[1].content == "hello");

    // An existing system message is kept (and suffixed under prompt control).
    cfg.mode_control = ModeControl::prompt_suffix;
    std::vector<ChatMessage> with_system = {{"system", "custom"}, {"user", "hi"}};
    const ChatRequest req2 = apply_mode_control(with_system, ModeKind::thinking, cfg);
    REQUIRE(req2.messages.size() == 2);
    CHECK(req2.messages[0].content == "custom /think");
}

TEST_CASE("last_user_content finds the last user turn") {
    ChatRequest req;
    CHECK(req.last_user_content() == nullptr);
    req.messages = {{"system", "s"}, {"user", "first"}, {"assistant", "a"}, {"user", "second"}};
    REQUIRE(req.last_user_content() != nullptr);
    CHECK(*req.last_user_content() == "second");
}

// A backend that answers from a canned script and records requests.
namespace {
class ScriptedBackend : public Backend {
public:
    explicit ScriptedBackend(BackendConfig cfg) : Backend(std::move(cfg)) {}

    ChatResult complete(const ChatRequest& request) override {
        captured.push_back(request);
        return {reply, 11, 42};
    }
    bool reachable() override { return true; }

    std::string reply = "The answer is A.";
    std::vector<ChatRequest> captured;
};

BackendConfig sim_cfg() { return SimBackend::default_config(); }
}  // namespace

TEST_CASE("infer assembles outcomes and is mode-faithful") {
    const QuestionRecord q = make_question("q", 'A');
    ScriptedBackend backend(sim_cfg());

    const InferenceOutcome out = infer(q, ModeKind::thinking, backend);
    CHECK(out.mode == ModeKind::thinking);
    CHECK(out.raw_output == "The answer is A.");
    CHECK(out.parsed_answer == 'A');
    CHECK(out.correct);
    CHECK(out.completion_tokens == 11);
    CHECK(out.latency_ms == 42);

    backend.reply = "The answer is B.";
    const InferenceOutcome wrong = infer(q, ModeKind::non_thinking, backend);
    CHECK(wrong.parsed_answer == 'B');
    CHECK_FALSE(wrong.correct);

    backend.reply = "I am not sure at all.";
    const InferenceOutcome missing = infer(q, ModeKind::thinking, backend);
    CHECK_FALSE(missing.parsed_answer.has_value());
    CHECK_FALSE(missing.correct);

    // The captured payload's thinking control always matches the request.
    REQUIRE(backend.captured.size() == 3);
    CHECK(backend.captured[0].thinking_flag == true);
    CHECK(backend.captured[1].thinking_flag == false);
    CHECK(backend.captured[2].thinking_flag == true);
}

// ---------------------------------------------------------------------------
// HttpBackend

TEST_CASE("split_endpoint") {
    using P = std::pair<std::string, std::string>;
    CHECK(HttpBackend::split_endpoint("http://localhost:8080") ==
          P{"http://localhost:8080", ""});
    CHECK(HttpBackend::split_endpoint("http://h:1/v1/") == P{"http://h:1", "/v1"});
    CHECK(HttpBackend::split_endpoint("https://api.example.com/v1") ==
          P{"https://api.example.com", "/v1"});
    CHECK(HttpBackend::split_endpoint("https://x/a/b/") == P{"https://x", "/a/b"});
    CHECK(HttpBackend::split_endpoint("localhost:9000") == P{"localhost:9000", ""});
}

TEST_CASE("request_body follows the chat-completions convention") {
    const QuestionRecord q = make_question("q", 'A');
    BackendConfig cfg;
    cfg.model_name = "my-model";

    const ChatRequest req = build_prompt(q, ModeKind::thinking, cfg);
    const json body = HttpBackend::request_body(req, cfg);
    CHECK(body.at("model") == "my-model");
    CHECK(body.at("temperature") == 0.0);
    CHECK(body.at("enable_thinking") == true);
    REQUIRE(body.at("messages").is_array());
    CHECK(body.at("messages").size() == 2);
    CHECK(body.at("messages")[1].at("role") == "user");

    cfg.thinking_flag_key = "reasoning";
    const json body2 = HttpBackend::request_body(build_prompt(q, ModeKind::non_thinking, cfg),
                                                 cfg);
    CHECK(body2.at("reasoning") == false);
    CHECK_FALSE(body2.contains("enable_thinking"));

    cfg.mode_control = ModeControl::prompt_suffix;
    const json body3 = HttpBackend::request_body(build_prompt(q, ModeKind::thinking, cfg), cfg);
    CHECK_FALSE(body3.contains("reasoning"));
    CHECK_FALSE(body3.contains("enable_thinking"));
}

namespace {
// Small in-process chat server for client tests.
struct ChatServer {
    httplib::Server server;
    std::thread thread;
    int port = 0;
    std::atomic<int> requests{0};
    std::string response_body =
        R"({"choices":[{"message":{"content":"The answer is B."}}],"usage":{"completion_tokens":7}})";
    int status = 200;
    json last_request;

    ChatServer() {
        server.Post("/v1/chat/completions",
                    [this](const httplib::Request& req, httplib::Response& res) {
                        ++requests;
                        last_request = json::parse(req.body, nullptr, false);
                        res.status = status;
                        res.set_content(response_body, "application/json");
                    });
        port = server.bind_to_any_port("127.0.0.1");
        thread = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
    }
    ~ChatServer() {
        server.stop();
        thread.join();
    }

    BackendConfig config() const {
        BackendConfig cfg;
        cfg.endpoint_url = "http://127.0.0.1:" + std::to_string(port) + "/v1";
        cfg.max_retries = 0;
        return cfg;
    }
};
}  // namespace

TEST_CASE("http backend extracts content and usage from the wire") {
    ChatServer srv;
    HttpBackend backend(srv.config());
    const QuestionRecord q = make_question("q", 'B');

    const ChatRequest req = build_prompt(q, ModeKind::thinking, backend.config());
    const ChatResult result = backend.complete(req);
    CHECK(result.raw_output == "The answer is B.");
    CHECK(result.completion_tokens == 7);
    CHECK(result.latency_ms >= 0);
    CHECK(srv.requests == 1);

    // The body that went over the wire is the canonical request shape.
    CHECK(srv.last_request.at("model") == backend.config().model_name);
    CHECK(srv.last_request.at("enable_thinking") == true);
    CHECK(srv.last_request.at("messages").size() == 2);

    const InferenceOutcome out = infer(q, ModeKind::thinking, backend);
    CHECK(out.correct);
    CHECK(out.completion_tokens == 7);
}

TEST_CASE("http backend is reachable when any response arrives") {
    ChatServer srv;
    HttpBackend backend(srv.config());
    CHECK(backend.reachable());

    BackendConfig dead;
    dead.endpoint_url = "http://127.0.0.1:1";
    dead.max_retries = 0;
    CHECK_FALSE(HttpBackend(dead).reachable());
}

TEST_CASE("received but malformed responses raise protocol errors without retry") {
    ChatServer srv;
    BackendConfig cfg = srv.config();
    cfg.max_retries = 3;  // must not be used for protocol errors
    HttpBackend backend(cfg);
    const ChatRequest req = build_prompt(make_question("q"), ModeKind::thinking, cfg);

    srv.response_body = "definitely not json";
    CHECK_THROWS_AS(backend.complete(req), BackendProtocol);
    CHECK(srv.requests == 1);

    srv.requests = 0;
    srv.response_body = R"({"choices":[{"message":{"content":"A"}}]})";  // no usage
    CHECK_THROWS_AS(backend.complete(req), BackendProtocol);
    CHECK(srv.requests == 1);

    srv.requests = 0;
    srv.status = 500;
    srv.response_body = R"({"error":"boom"})";
    CHECK_THROWS_AS(backend.complete(req), BackendUnavailable);
    CHECK(srv.requests == 1);
}

TEST_CASE("unreachable endpoints raise BackendUnavailable after retries") {
    BackendConfig cfg;
    cfg.endpoint_url = "http://127.0.0.1:1/v1";
    cfg.max_retries = 0;
    HttpBackend backend(cfg);
    const ChatRequest req = build_prompt(make_question("q"), ModeKind::non_thinking, cfg);
    CHECK_THROWS_AS(backend.complete(req), BackendUnavailable);
}

TEST_CASE("retries back off and then surface the transport error") {
    BackendConfig cfg;
    cfg.endpoint_url = "http://127.0.0.1:1/v1";
    cfg.max_retries = 1;
    HttpBackend backend(cfg);
    const ChatRequest req = build_prompt(make_question("q"), ModeKind::non_thinking, cfg);

    const auto started = std::chrono::steady_clock::now();
    CHECK_THROWS_AS(backend.complete(req), BackendUnavailable);
    const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                             std::chrono::steady_clock::now() - started)
                             .count();
    // One backoff sleep of at least 250 ms separates the two attempts.
    CHECK(elapsed >= 250);
}

TEST_CASE("slow responses time out") {
    httplib::Server server;
    server.Post("/chat/completions", [](const httplib::Request&, httplib::Response& res) {
        std::this_thread::sleep_for(std::chrono::milliseconds(2500));
        res.set_content("{}", "application/json");
    });
    const int port = server.bind_to_any_port("127.0.0.1");
    std::thread thread([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    BackendConfig cfg;
    cfg.endpoint_url = "http://127.0.0.1:" + std::to_string(port);
    cfg.request_timeout_ms = 1000;
    cfg.max_retries = 0;
    HttpBackend backend(cfg);
    const ChatRequest req = build_prompt(make_question("q"), ModeKind::thinking, cfg);
    CHECK_THROWS_AS(backend.complete(req), Timeout);

    server.stop();
    thread.join();
}
