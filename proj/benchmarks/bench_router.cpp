#include <benchmark/benchmark.h>

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "synapseroute/answer.hpp"
#include "synapseroute/classifier.hpp"
#include "synapseroute/embedding.hpp"
#include "synapseroute/evaluator.hpp"
#include "synapseroute/gateway.hpp"
#include "synapseroute/rng.hpp"
#include "synapseroute/sha256.hpp"
#include "synapseroute/simulator.hpp"

using namespace synapseroute;

namespace {

std::string sample_query() {
    return "A 57-year-old man presents with crushing substernal chest pain radiating to the "
           "left arm, diaphoresis, and nausea for the past 45 minutes. Which of the following "
           "is the most appropriate next step in management?";
}

RouterModel make_model(std::size_t dim) {
    RouterModel model;
    model.dim = dim;
    model.weights.resize(dim);
    Rng rng(7);
    for (double& w : model.weights) w = 0.3 * rng.next_normal();
    model.bias = 0.1;
    model.embedding_model_id = "feature-hash-v1-" + std::to_string(dim);
    return model;
}

void BM_Sha256(benchmark::State& state) {
    const std::string text(std::size_t(state.range(0)), 'x');
    for (auto _ : state) benchmark::DoNotOptimize(sha256_hex(text));
    state.SetBytesProcessed(std::int64_t(state.iterations()) * state.range(0));
}
BENCHMARK(BM_Sha256)->Arg(64)->Arg(1024)->Arg(16384);

void BM_HashingEmbed(benchmark::State& state) {
    HashingEmbeddingService service(std::size_t(state.range(0)));
    const std::string query = sample_query();
    for (auto _ : state) benchmark::DoNotOptimize(service.embed_raw(query));
}
BENCHMARK(BM_HashingEmbed)->Arg(256)->Arg(1024);

void BM_EmbedCached(benchmark::State& state) {
    Embedder embedder(std::make_shared<HashingEmbeddingService>(256));
    const std::string query = sample_query();
    embedder.embed(query);  // warm the cache; the loop measures hits
    for (auto _ : state) benchmark::DoNotOptimize(embedder.embed(query));
}
BENCHMARK(BM_EmbedCached);

void BM_PredictProba(benchmark::State& state) {
    const std::size_t dim = std::size_t(state.range(0));
    const RouterModel model = make_model(dim);
    std::vector<float> x(dim);
    Rng rng(11);
    for (float& v : x) v = float(rng.next_normal());
    for (auto _ : state) benchmark::DoNotOptimize(predict_proba(model, x));
}
BENCHMARK(BM_PredictProba)->Arg(256)->Arg(1024)->Arg(4096);

void BM_ClassifyOnly(benchmark::State& state) {
    const auto [questions, profile] = sim_from_distribution(50, 0.5, 0.4, 0.1, 3);
    auto backend = std::make_shared<SimBackend>(profile, questions);
    auto embedder = std::make_shared<Embedder>(std::make_shared<HashingEmbeddingService>(256));
    GatewayConfig config;
    config.backend = backend->config();
    Gateway gateway(make_model(256), embedder, backend, config);

    // Distinct texts so the embedding cache does not absorb the work.
    std::vector<std::string> queries;
    for (int i = 0; i < 64; ++i) queries.push_back(sample_query() + " variant " + std::to_string(i));
    std::size_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(gateway.classify_only(queries[i % queries.size()]));
        ++i;
    }
}
BENCHMARK(BM_ClassifyOnly);

void BM_ParseAnswerShort(benchmark::State& state) {
    const std::string output = "B";
    for (auto _ : state) benchmark::DoNotOptimize(parse_answer_letter(output, "ABCD"));
}
BENCHMARK(BM_ParseAnswerShort);

void BM_ParseAnswerVerbose(benchmark::State& state) {
    std::string output = "<think>";
    for (int i = 0; i < 40; ++i)
        output += "The differential for this presentation includes several entities. ";
    output += "</think>\n\nConsidering the findings above, the answer is C.";
    for (auto _ : state) benchmark::DoNotOptimize(parse_answer_letter(output, "ABCD"));
}
BENCHMARK(BM_ParseAnswerVerbose);

void BM_BootstrapMeanCi(benchmark::State& state) {
    Rng rng(1273);
    std::vector<double> values(1273);
    for (double& v : values) v = rng.next_bool(0.8) ? 1.0 : 0.0;
    const int iterations = int(state.range(0));
    for (auto _ : state)
        benchmark::DoNotOptimize(bootstrap_mean_ci(values, iterations, 0.95, 42, 1));
}
BENCHMARK(BM_BootstrapMeanCi)->Arg(100)->Arg(1000);

}  // namespace

BENCHMARK_MAIN();
