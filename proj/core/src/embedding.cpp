#include "synapseroute/embedding.hpp"

#include <atomic>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "synapseroute/errors.hpp"
#include "synapseroute/http_backend.hpp"
#include "synapseroute/rng.hpp"
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

}  // namespace

EmbeddingConfig EmbeddingConfig::from_env() {
    EmbeddingConfig config;
    if (const char* url = std::getenv("SYNAPSE_EMBED_URL")) config.endpoint_url = url;
    if (const char* model = std::getenv("SYNAPSE_EMBED_MODEL")) config.model_id = model;
    if (const char* dim = std::getenv("SYNAPSE_EMBED_DIM")) {
        char* rest = nullptr;
        const long parsed = std::strtol(dim, &rest, 10);
        if (rest == dim || *rest != '\0' || parsed <= 0)
            throw std::invalid_argument("SYNAPSE_EMBED_DIM must be a positive integer");
        config.dimension = static_cast<std::size_t>(parsed);
    }
    return config;
}

HttpEmbeddingService::HttpEmbeddingService(EmbeddingConfig config) : config_(std::move(config)) {
    if (config_.endpoint_url.empty())
        throw std::invalid_argument("embedding endpoint_url must not be empty");
    std::tie(host_, path_prefix_) = HttpBackend::split_endpoint(config_.endpoint_url);
}

std::vector<float> HttpEmbeddingService::embed_raw(const std::string& text) {
    const nlohmann::json body{{"model", config_.model_id}, {"input", text}};
    const std::string payload = body.dump();
    const std::string path = path_prefix_ + "/embeddings";

    httplib::Result res;
    for (int attempt = 0;; ++attempt) {
        httplib::Client client(host_);
        client.set_connection_timeout(0, config_.request_timeout_ms * 1000LL);
        client.set_read_timeout(0, config_.request_timeout_ms * 1000LL);
        client.set_write_timeout(0, config_.request_timeout_ms * 1000LL);
        res = client.Post(path, payload, "application/json");
        if (res) break;
        if (attempt >= config_.max_retries)
            throw EmbeddingUnavailable("embedding request to " + config_.endpoint_url +
                                       " failed: " + httplib::to_string(res.error()));
        std::this_thread::sleep_for(std::chrono::milliseconds(200 << attempt));
    }
    if (res->status < 200 || res->status >= 300)
        throw EmbeddingUnavailable("embedding service returned HTTP " +
                                   std::to_string(res->status));

    nlohmann::json parsed;
    try {
        parsed = nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::exception& e) {
        throw EmbeddingUnavailable(std::string("embedding response is not valid JSON: ") +
                                   e.what());
    }
    if (!parsed.contains("data") || !parsed["data"].is_array() || parsed["data"].empty() ||
        !parsed["data"][0].contains("embedding"))
        throw EmbeddingUnavailable("embedding response missing data[0].embedding");

    std::vector<float> vec;
    try {
        parsed["data"][0]["embedding"].get_to(vec);
    } catch (const nlohmann::json::exception& e) {
        throw EmbeddingUnavailable(std::string("embedding array malformed: ") + e.what());
    }
    return vec;
}

HashingEmbeddingService::HashingEmbeddingService(std::size_t dimension) : dimension_(dimension) {
    if (dimension_ == 0) throw std::invalid_argument("embedding dimension must be positive");
    model_id_ = "feature-hash-v1-" + std::to_string(dimension_);
}

std::vector<float> HashingEmbeddingService::embed_raw(const std::string& text) {
    std::vector<float> vec(dimension_, 0.0f);
    std::string token;
    bool any = false;
    auto flush_token = [&] {
        if (token.empty()) return;
        const std::uint64_t bits = splitmix64(fnv1a64(token));
        const float sign = (bits >> 63) != 0 ? 1.0f : -1.0f;
        vec[bits % dimension_] += sign;
        any = true;
        token.clear();
    };
    for (char c : text) {
        const auto uc = static_cast<unsigned char>(c);
        if (std::isalnum(uc))
            token.push_back(static_cast<char>(std::tolower(uc)));
        else
            flush_token();
    }
    flush_token();
    if (!any) vec[splitmix64(fnv1a64(text)) % dimension_] = 1.0f;
    return vec;
}

Embedder::Embedder(std::shared_ptr<EmbeddingService> service,
                   std::optional<std::filesystem::path> cache_path)
    : service_(std::move(service)), cache_path_(std::move(cache_path)) {
    if (!service_) throw std::invalid_argument("embedding service must not be null");
    if (cache_path_ && std::filesystem::exists(*cache_path_)) load_cache(*cache_path_);
}

std::string Embedder::cache_key(const std::string& model_id, const std::string& text) {
    return sha256_hex(model_id + "\n" + trim_copy(text));
}

void Embedder::load_cache(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open embedding cache " + path.string());
    std::string line;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception&) {
            continue;  // torn trailing line from an interrupted append
        }
        if (!j.contains("key") || !j.contains("model") || !j.contains("vector")) continue;
        if (j["model"].get<std::string>() != service_->model_id()) continue;
        std::vector<float> vec = j["vector"].get<std::vector<float>>();
        if (vec.size() != service_->dimension()) continue;
        cache_.emplace(j["key"].get<std::string>(), std::move(vec));
    }
}

void Embedder::remember(const std::string& key, const std::vector<float>& vec) {
    std::lock_guard lock(mutex_);
    if (!cache_.emplace(key, vec).second) return;  // lost a race; keep the first value
    if (!cache_path_) return;
    std::ofstream out(*cache_path_, std::ios::app);
    if (!out) throw IoError("cannot append to embedding cache " + cache_path_->string());
    nlohmann::json j{{"key", key},
                     {"model", service_->model_id()},
                     {"dim", service_->dimension()},
                     {"vector", vec}};
    out << j.dump() << '\n';
    out.flush();
}

std::vector<float> Embedder::embed(const std::string& text) {
    const std::string trimmed = trim_copy(text);
    if (trimmed.empty()) throw EmptyInput("cannot embed empty text");
    const std::string key = cache_key(service_->model_id(), trimmed);
    {
        std::lock_guard lock(mutex_);
        auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;
    }

    std::vector<float> vec = service_->embed_raw(trimmed);
    if (vec.size() != service_->dimension())
        throw DimensionMismatch("embedding service returned " + std::to_string(vec.size()) +
                                " dims, expected " + std::to_string(service_->dimension()));
    double norm_sq = 0.0;
    for (float v : vec) {
        if (!std::isfinite(v))
            throw EmbeddingUnavailable("embedding service returned non-finite values");
        norm_sq += double(v) * double(v);
    }
    if (norm_sq == 0.0) throw EmbeddingUnavailable("embedding service returned a zero vector");
    const double norm = std::sqrt(norm_sq);
    for (float& v : vec) v = static_cast<float>(v / norm);

    remember(key, vec);
    {
        // Serve the canonical cached copy so concurrent callers agree bitwise.
        std::lock_guard lock(mutex_);
        return cache_.at(key);
    }
}

std::vector<std::vector<float>> Embedder::embed_batch(const std::vector<std::string>& texts,
                                                      std::size_t max_in_flight) {
    if (max_in_flight == 0) throw std::invalid_argument("max_in_flight must be at least 1");
    if (texts.empty()) return {};

    std::vector<std::vector<float>> out(texts.size());
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::mutex error_mutex;
    std::exception_ptr first_error;

    auto worker = [&] {
        while (!failed.load(std::memory_order_relaxed)) {
            const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
            if (i >= texts.size()) return;
            try {
                out[i] = embed(texts[i]);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                failed.store(true, std::memory_order_relaxed);
                return;
            }
        }
    };

    const std::size_t workers = std::min(max_in_flight, texts.size());
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (std::size_t i = 0; i < workers; ++i) threads.emplace_back(worker);
    for (auto& t : threads) t.join();

    if (first_error) std::rethrow_exception(first_error);
    return out;
}

std::size_t Embedder::cache_size() const {
    std::lock_guard lock(mutex_);
    return cache_.size();
}

}  // namespace synapseroute
