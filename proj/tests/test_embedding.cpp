#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "synapseroute/embedding.hpp"
#include "synapseroute/errors.hpp"
#include "synapseroute/sha256.hpp"
#include "test_util.hpp"

using namespace synapseroute;
using testutil::TempDir;

namespace {

double l2_norm(const std::vector<float>& v) {
    double s = 0.0;
    for (float x : v) s += double(x) * double(x);
    return std::sqrt(s);
}

// Service that counts calls and returns a deterministic ramp.
class CountingService : public EmbeddingService {
public:
    explicit CountingService(std::size_t dim = 8) : dim_(dim) {}

    std::vector<float> embed_raw(const std::string& text) override {
        ++calls;
        std::vector<float> v(dim_);
        const auto h = fnv_basis(text);
        for (std::size_t i = 0; i < dim_; ++i)
            v[i] = static_cast<float>(((h >> (i % 48)) & 0xff) + 1);
        return v;
    }
    const std::string& model_id() const override { return id_; }
    std::size_t dimension() const override { return dim_; }

    std::atomic<int> calls{0};

private:
    static std::uint64_t fnv_basis(const std::string& s) {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (unsigned char c : s) h = (h ^ c) * 0x100000001b3ULL;
        return h;
    }
    std::size_t dim_;
    std::string id_ = "counting-test";
};

class BrokenService : public EmbeddingService {
public:
    enum class Failure { wrong_dim, nan_entry, zero_vector, throws };
    explicit BrokenService(Failure f) : failure_(f) {}

    std::vector<float> embed_raw(const std::string&) override {
        switch (failure_) {
            case Failure::wrong_dim: return std::vector<float>(3, 1.0f);
            case Failure::nan_entry: {
                std::vector<float> v(4, 1.0f);
                v[2] = std::nanf("");
                return v;
            }
            case Failure::zero_vector: return std::vector<float>(4, 0.0f);
            case Failure::throws: throw EmbeddingUnavailable("service down");
        }
        return {};
    }
    const std::string& model_id() const override { return id_; }
    std::size_t dimension() const override { return 4; }

private:
    Failure failure_;
    std::string id_ = "broken-test";
};

}  // namespace

TEST_CASE("hashing embedder is deterministic with a stable identity") {
    HashingEmbeddingService svc(256);
    CHECK(svc.dimension() == 256);
    CHECK(svc.model_id() == "feature-hash-v1-256");
    CHECK(HashingEmbeddingService().model_id() == "feature-hash-v1-256");

    const auto a = svc.embed_raw("A patient presents with fever");
    const auto b = svc.embed_raw("A patient presents with fever");
    CHECK(a == b);
    CHECK(a.size() == 256);
    CHECK(a != svc.embed_raw("A different question entirely"));

    // Tokenization is case-insensitive over alphanumerics.
    CHECK(svc.embed_raw("FEVER chills") == svc.embed_raw("fever CHILLS"));

    // No alphanumeric tokens still yields a usable nonzero vector.
    const auto punct = svc.embed_raw("?!—…;");
    CHECK(l2_norm(punct) > 0.0);
}

TEST_CASE("embedder normalizes and caches") {
    auto svc = std::make_shared<CountingService>();
    Embedder embedder(svc);
    CHECK(embedder.dimension() == 8);
    CHECK(embedder.model_id() == "counting-test");

    const auto v1 = embedder.embed("some text");
    CHECK(l2_norm(v1) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(svc->calls == 1);
    CHECK(embedder.cache_size() == 1);

    const auto v2 = embedder.embed("some text");
    CHECK(v1 == v2);  // bit-identical, served from cache
    CHECK(svc->calls == 1);

    // Trimming happens before keying and embedding.
    const auto v3 = embedder.embed("   some text \n");
    CHECK(v3 == v1);
    CHECK(svc->calls == 1);
    CHECK(embedder.cache_size() == 1);

    CHECK_THROWS_AS(embedder.embed(""), EmptyInput);
    CHECK_THROWS_AS(embedder.embed("  \t\n "), EmptyInput);
}

TEST_CASE("embedder surfaces service defects") {
    Embedder wrong(std::make_shared<BrokenService>(BrokenService::Failure::wrong_dim));
    CHECK_THROWS_AS(wrong.embed("x"), DimensionMismatch);

    Embedder nan(std::make_shared<BrokenService>(BrokenService::Failure::nan_entry));
    CHECK_THROWS_AS(nan.embed("x"), EmbeddingUnavailable);

    Embedder zero(std::make_shared<BrokenService>(BrokenService::Failure::zero_vector));
    CHECK_THROWS_AS(zero.embed("x"), EmbeddingUnavailable);
}

TEST_CASE("cache keys are digests of model id and trimmed text") {
    CHECK(Embedder::cache_key("m", "  text  ") == sha256_hex("m\ntext"));
    CHECK(Embedder::cache_key("m", "text") != Embedder::cache_key("n", "text"));
}

TEST_CASE("cache persists as replayable JSONL") {
    TempDir dir;
    const auto cache_path = dir / "cache.jsonl";
    std::vector<std::vector<float>> first;
    {
        auto svc = std::make_shared<CountingService>();
        Embedder embedder(svc, cache_path);
        for (const char* t : {"alpha", "beta", "gamma"}) first.push_back(embedder.embed(t));
        CHECK(svc->calls == 3);
    }
    std::ifstream in(cache_path);
    std::string line;
    int lines = 0;
    while (std::getline(in, line))
        if (!line.empty()) ++lines;
    CHECK(lines == 3);

    // A fresh embedder over the same file serves everything from cache.
    auto svc = std::make_shared<CountingService>();
    Embedder embedder(svc, cache_path);
    CHECK(embedder.cache_size() == 3);
    std::vector<std::vector<float>> second;
    for (const char* t : {"alpha", "beta", "gamma"}) second.push_back(embedder.embed(t));
    CHECK(svc->calls == 0);
    CHECK(second == first);
}

TEST_CASE("cache load tolerates torn lines and foreign models") {
    TempDir dir;
    const auto cache_path = dir / "cache.jsonl";
    {
        auto svc = std::make_shared<CountingService>();
        Embedder embedder(svc, cache_path);
        embedder.embed("alpha");
    }
    {
        std::ofstream out(cache_path, std::ios::app);
        out << "{\"key\":\"torn-lin";  // crashed mid-append
        out << "\n";
        nlohmann::json foreign{{"key", std::string(64, 'f')},
                               {"model", "someone-else"},
                               {"dim", 8},
                               {"vector", std::vector<float>(8, 0.5f)}};
        out << foreign.dump() << "\n";
    }
    auto svc = std::make_shared<CountingService>();
    Embedder embedder(svc, cache_path);
    CHECK(embedder.cache_size() == 1);  // only the valid same-model entry
    embedder.embed("alpha");
    CHECK(svc->calls == 0);
}

TEST_CASE("embed_batch preserves order and equals the sequential loop") {
    auto svc = std::make_shared<CountingService>();
    Embedder embedder(svc);
    std::vector<std::string> texts;
    for (int i = 0; i < 100; ++i) texts.push_back("text number " + std::to_string(i % 60));

    const auto batch = embedder.embed_batch(texts, 8);
    REQUIRE(batch.size() == texts.size());

    Embedder reference(std::make_shared<CountingService>());
    for (std::size_t i = 0; i < texts.size(); ++i) CHECK(batch[i] == reference.embed(texts[i]));

    // Duplicates share one cache entry and identical vectors.
    CHECK(batch[0] == batch[60]);
    CHECK(embedder.cache_size() == 60);

    CHECK(embedder.embed_batch({}, 4).empty());
    CHECK_THROWS_AS(embedder.embed_batch(texts, 0), std::invalid_argument);
}

TEST_CASE("embed_batch propagates the first failure") {
    Embedder embedder(std::make_shared<BrokenService>(BrokenService::Failure::throws));
    std::vector<std::string> texts(20, "x");
    for (int i = 0; i < 20; ++i) texts[static_cast<std::size_t>(i)] += std::to_string(i);
    CHECK_THROWS_AS(embedder.embed_batch(texts, 4), EmbeddingUnavailable);
}

TEST_CASE("embedding config reads the environment") {
    ::setenv("SYNAPSE_EMBED_URL", "http://embed.example:9000", 1);
    ::setenv("SYNAPSE_EMBED_MODEL", "custom-model", 1);
    ::setenv("SYNAPSE_EMBED_DIM", "384", 1);
    EmbeddingConfig cfg = EmbeddingConfig::from_env();
    CHECK(cfg.endpoint_url == "http://embed.example:9000");
    CHECK(cfg.model_id == "custom-model");
    CHECK(cfg.dimension == 384);

    ::setenv("SYNAPSE_EMBED_DIM", "not-a-number", 1);
    CHECK_THROWS_AS(EmbeddingConfig::from_env(), std::invalid_argument);

    ::unsetenv("SYNAPSE_EMBED_URL");
    ::unsetenv("SYNAPSE_EMBED_MODEL");
    ::unsetenv("SYNAPSE_EMBED_DIM");
    EmbeddingConfig defaults = EmbeddingConfig::from_env();
    CHECK(defaults.endpoint_url.empty());
    CHECK(defaults.model_id == "BAAI/bge-large-en-v1.5");
    CHECK(defaults.dimension == 1024);
}

namespace {
struct EmbedServer {
    httplib::Server server;
    std::thread thread;
    int port = 0;
    std::atomic<int> requests{0};
    std::size_t dim = 6;
    int status = 200;
    bool garble = false;
    nlohmann::json last_request;

    EmbedServer() {
        server.Post("/v1/embeddings", [this](const httplib::Request& req, httplib::Response& res) {
            ++requests;
            last_request = nlohmann::json::parse(req.body, nullptr, false);
            res.status = status;
            if (garble) {
                res.set_content("oops", "text/plain");
                return;
            }
            std::vector<double> vec(dim);
            for (std::size_t i = 0; i < dim; ++i) vec[i] = double(i + 1);
            nlohmann::json body;
            body["data"] = nlohmann::json::array();
            body["data"].push_back({{"embedding", vec}});
            res.set_content(body.dump(), "application/json");
        });
        port = server.bind_to_any_port("127.0.0.1");
        thread = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
    }
    ~EmbedServer() {
        server.stop();
        thread.join();
    }

    EmbeddingConfig config() const {
        EmbeddingConfig cfg;
        cfg.endpoint_url = "http://127.0.0.1:" + std::to_string(port) + "/v1";
        cfg.model_id = "remote-test";
        cfg.dimension = dim;
        cfg.max_retries = 0;
        return cfg;
    }
};
}  // namespace

TEST_CASE("http embedding service speaks the /embeddings convention") {
    EmbedServer srv;
    auto svc = std::make_shared<HttpEmbeddingService>(srv.config());
    Embedder embedder(svc);

    const auto v = embedder.embed("embed me");
    CHECK(v.size() == 6);
    CHECK(l2_norm(v) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(srv.last_request.at("model") == "remote-test");
    CHECK(srv.last_request.at("input") == "embed me");

    // Ramp 1..6 normalized: first component = 1/sqrt(91).
    CHECK(v[0] == doctest::Approx(1.0 / std::sqrt(91.0)).epsilon(1e-6));
}

TEST_CASE("http embedding service failure taxonomy") {
    EmbedServer srv;

    {
        EmbeddingConfig cfg = srv.config();
        cfg.dimension = 10;  // server returns 6
        Embedder embedder(std::make_shared<HttpEmbeddingService>(cfg));
        CHECK_THROWS_AS(embedder.embed("x"), DimensionMismatch);
    }
    {
        srv.garble = true;
        Embedder embedder(std::make_shared<HttpEmbeddingService>(srv.config()));
        CHECK_THROWS_AS(embedder.embed("x"), EmbeddingUnavailable);
        srv.garble = false;
    }
    {
        srv.status = 503;
        Embedder embedder(std::make_shared<HttpEmbeddingService>(srv.config()));
        CHECK_THROWS_AS(embedder.embed("x"), EmbeddingUnavailable);
        srv.status = 200;
    }
    {
        EmbeddingConfig cfg;
        cfg.endpoint_url = "http://127.0.0.1:1";
        cfg.max_retries = 0;
        Embedder embedder(std::make_shared<HttpEmbeddingService>(cfg));
        CHECK_THROWS_AS(embedder.embed("x"), EmbeddingUnavailable);
    }
}
