#pragma once

#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace synapseroute {

struct EmbeddingConfig {
    std::string endpoint_url;  // empty means no remote service configured
    std::string model_id = "BAAI/bge-large-en-v1.5";
    std::size_t dimension = 1024;
    int request_timeout_ms = 30000;
    int max_retries = 2;

    // Reads SYNAPSE_EMBED_URL, SYNAPSE_EMBED_MODEL and SYNAPSE_EMBED_DIM.
    static EmbeddingConfig from_env();
};

// Produces raw (unnormalized) fixed-dimension vectors for text.
class EmbeddingService {
public:
    virtual ~EmbeddingService() = default;
    virtual std::vector<float> embed_raw(const std::string& text) = 0;
    virtual const std::string& model_id() const = 0;
    virtual std::size_t dimension() const = 0;
};

// Client for an OpenAI-style /embeddings endpoint.
class HttpEmbeddingService : public EmbeddingService {
public:
    explicit HttpEmbeddingService(EmbeddingConfig config);

    std::vector<float> embed_raw(const std::string& text) override;
    const std::string& model_id() const override { return config_.model_id; }
    std::size_t dimension() const override { return config_.dimension; }

private:
    EmbeddingConfig config_;
    std::string host_;
    std::string path_prefix_;
};

// Deterministic offline embedder: signed feature hashing over lowercased
// alphanumeric tokens. Useful for fully local runs and synthetic corpora.
class HashingEmbeddingService : public EmbeddingService {
public:
    explicit HashingEmbeddingService(std::size_t dimension = 256);

    std::vector<float> embed_raw(const std::string& text) override;
    const std::string& model_id() const override { return model_id_; }
    std::size_t dimension() const override { return dimension_; }

private:
    std::size_t dimension_;
    std::string model_id_;
};

// L2-normalizing front end over an EmbeddingService with a content-addressed
// cache (keyed by digest of model id + trimmed text), optionally persisted as
// an append-only JSONL file. Thread safe; batch calls bound their own
// concurrency.
class Embedder {
public:
    explicit Embedder(std::shared_ptr<EmbeddingService> service,
                      std::optional<std::filesystem::path> cache_path = std::nullopt);

    std::vector<float> embed(const std::string& text);
    std::vector<std::vector<float>> embed_batch(const std::vector<std::string>& texts,
                                                std::size_t max_in_flight = 8);

    const std::string& model_id() const { return service_->model_id(); }
    std::size_t dimension() const { return service_->dimension(); }
    std::size_t cache_size() const;

    static std::string cache_key(const std::string& model_id, const std::string& text);

private:
    void load_cache(const std::filesystem::path& path);
    void remember(const std::string& key, const std::vector<float>& vec);

    std::shared_ptr<EmbeddingService> service_;
    std::optional<std::filesystem::path> cache_path_;
    mutable std::mutex mutex_;
    std::unordered_map<std::string, std::vector<float>> cache_;
};

}  // namespace synapseroute
