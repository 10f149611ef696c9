// synapseroute: dataset ingestion, dual-mode labeling, router training,
// evaluation and serving for the dual-mode routing pipeline. Stage outputs
// are JSONL files, so every stage can be re-run independently.

#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <unordered_set>

#include <CLI11.hpp>

#include "synapseroute/answer.hpp"
#include "synapseroute/backend.hpp"
#include "synapseroute/classifier.hpp"
#include "synapseroute/embedding.hpp"
#include "synapseroute/errors.hpp"
#include "synapseroute/evaluator.hpp"
#include "synapseroute/gateway.hpp"
#include "synapseroute/http_backend.hpp"
#include "synapseroute/jsonl.hpp"
#include "synapseroute/labeler.hpp"
#include "synapseroute/sampling.hpp"
#include "synapseroute/simulator.hpp"
#include "synapseroute/standardize.hpp"
#include "synapseroute/types.hpp"

namespace sr = synapseroute;
namespace fs = std::filesystem;

namespace {

bool g_json_logs = false;

// Wrong invocation (as opposed to a runtime failure); exits with code 1.
struct UsageError {
    std::string message;
};

void log_info(const std::string& msg, sr::json fields = sr::json::object()) {
    if (g_json_logs) {
        fields["level"] = "info";
        fields["msg"] = msg;
        std::cerr << fields.dump() << "\n";
    } else {
        std::cerr << msg;
        if (!fields.empty()) std::cerr << "  " << fields.dump();
        std::cerr << "\n";
    }
}

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag) {
    if (flag) return *flag;
    std::random_device rd;
    const std::uint64_t seed = (std::uint64_t(rd()) << 32) ^ std::uint64_t(rd());
    log_info("no --seed given; drew a random one (pass it back to reproduce this run)",
             {{"seed", seed}});
    return seed;
}

std::string iso_timestamp_utc() {
    const std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

sr::BackendConfig backend_config_from_env_and_flags(const std::string& url_flag,
                                                    const std::string& model_flag,
                                                    const std::string& mode_control_flag) {
    sr::BackendConfig config;
    if (const char* v = std::getenv("SYNAPSE_BACKEND_URL")) config.endpoint_url = v;
    if (const char* v = std::getenv("SYNAPSE_BACKEND_MODEL")) config.model_name = v;
    if (const char* v = std::getenv("SYNAPSE_MODE_CONTROL"))
        config.mode_control = sr::mode_control_from_string(v);
    if (!url_flag.empty()) config.endpoint_url = url_flag;
    if (!model_flag.empty()) config.model_name = model_flag;
    if (!mode_control_flag.empty())
        config.mode_control = sr::mode_control_from_string(mode_control_flag);
    return config;
}

std::shared_ptr<sr::Embedder> make_embedder(std::size_t hash_dim,
                                            const std::string& cache_path) {
    const sr::EmbeddingConfig config = sr::EmbeddingConfig::from_env();
    std::shared_ptr<sr::EmbeddingService> service;
    if (!config.endpoint_url.empty())
        service = std::make_shared<sr::HttpEmbeddingService>(config);
    else
        service = std::make_shared<sr::HashingEmbeddingService>(hash_dim);
    std::optional<fs::path> cache;
    if (!cache_path.empty()) cache = fs::path(cache_path);
    return std::make_shared<sr::Embedder>(std::move(service), std::move(cache));
}

// --- ingest ---------------------------------------------------------------

std::vector<std::pair<std::string, sr::json>> load_raw_records(const fs::path& in,
                                                               sr::Source source) {
    std::ifstream file(in);
    if (!file) throw sr::IoError("cannot open " + in.string());
    std::stringstream buffer;
    buffer << file.rdbuf();
    const std::string content = buffer.str();

    const std::size_t first = content.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return {};
    const std::string prefix = sr::to_string(source) + "-";
    std::vector<std::pair<std::string, sr::json>> out;

    if (content[first] == '[') {
        const sr::json arr = sr::json::parse(content);
        std::size_t idx = 0;
        for (const sr::json& el : arr) out.emplace_back(prefix + std::to_string(++idx), el);
        return out;
    }
    if (content[first] == '{') {
        // Either one whole-file JSON object (a dict of records keyed by id,
        // as PubMedQA ships, or a single record) or JSONL whose parse fails
        // at the second line.
        try {
            const sr::json obj = sr::json::parse(content);
            bool dict_of_records = obj.is_object() && !obj.empty();
            for (const auto& [key, value] : obj.items())
                if (!value.is_object()) {
                    dict_of_records = false;
                    break;
                }
            if (dict_of_records) {
                for (const auto& [key, value] : obj.items()) out.emplace_back(key, value);
            } else {
                out.emplace_back(prefix + "1", obj);
            }
            return out;
        } catch (const sr::json::exception&) {
            // fall through to JSONL
        }
    }

    std::istringstream lines(content);
    std::string line;
    std::size_t lineno = 0;
    std::size_t idx = 0;
    while (std::getline(lines, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            out.emplace_back(prefix + std::to_string(++idx), sr::json::parse(line));
        } catch (const sr::json::exception& e) {
            throw sr::MalformedRecord(in.string() + ":" + std::to_string(lineno) + ": " +
                                      e.what());
        }
    }
    return out;
}

int run_ingest(const std::string& source_name, const fs::path& in, const fs::path& out) {
    const sr::Source source = sr::source_from_string(source_name);
    const auto raw = load_raw_records(in, source);
    std::vector<sr::QuestionRecord> questions;
    questions.reserve(raw.size());
    std::size_t skipped = 0;
    for (const auto& [fallback_id, j] : raw) {
        try {
            questions.push_back(sr::standardize_record(sr::raw_from_json(j, source, fallback_id)));
        } catch (const sr::Error& e) {
            ++skipped;
            if (skipped <= 5)
                log_info("skipping unusable record", {{"id", fallback_id}, {"reason", e.what()}});
        }
    }
    if (questions.empty()) throw sr::EmptyAfterFilter("no usable records in " + in.string());
    sr::write_questions(out, questions);
    log_info("ingested", {{"kept", questions.size()}, {"skipped", skipped}, {"out", out.string()}});
    return 0;
}

// --- sample ---------------------------------------------------------------

int run_sample(const fs::path& in, const fs::path& out, std::size_t n,
               const std::optional<std::uint64_t>& seed_flag) {
    const auto questions = sr::read_questions(in);
    const std::uint64_t seed = resolve_seed(seed_flag);
    const auto sampled = sr::stratified_sample(questions, n, seed);
    sr::write_questions(out, sampled);
    log_info("sampled", {{"n", sampled.size()}, {"from", questions.size()}, {"seed", seed}});
    return 0;
}

// --- label ----------------------------------------------------------------

struct LabelArgs {
    fs::path in, out;
    std::size_t parallelism = 4;
    bool resume = false;
    std::string sim_profile;
    std::string backend_url, backend_model, mode_control;
    std::string stats_out;
    std::size_t max_consecutive_failures = 10;
};

int run_label(const LabelArgs& args) {
    const auto questions = sr::read_questions(args.in);
    std::vector<sr::QuestionRecord> pending = questions;
    bool append = false;
    if (args.resume && fs::exists(args.out)) {
        std::unordered_set<std::string> done;
        for (const auto& rec : sr::read_labeled(args.out)) done.insert(rec.question.id);
        std::erase_if(pending, [&](const sr::QuestionRecord& q) { return done.count(q.id) > 0; });
        append = true;
        log_info("resuming", {{"already_labeled", done.size()}, {"pending", pending.size()}});
    }

    std::shared_ptr<sr::Backend> backend;
    if (!args.sim_profile.empty()) {
        backend = std::make_shared<sr::SimBackend>(sr::SimProfile::load(args.sim_profile),
                                                   questions);
    } else {
        const sr::BackendConfig config = backend_config_from_env_and_flags(
            args.backend_url, args.backend_model, args.mode_control);
        if (config.endpoint_url.empty())
            throw UsageError{"no backend configured: pass --backend-url or --sim, "
                             "or set SYNAPSE_BACKEND_URL"};
        backend = std::make_shared<sr::HttpBackend>(config);
    }

    std::ofstream sink_stream(args.out, append ? std::ios::app : std::ios::trunc);
    if (!sink_stream) throw sr::IoError("cannot open " + args.out.string());
    sr::LabelingOptions options;
    options.parallelism = args.parallelism;
    options.max_consecutive_failures = args.max_consecutive_failures;
    options.sink = [&](const sr::LabeledQuestion& rec) { sr::append_labeled(sink_stream, rec); };

    try {
        sr::run_labeling_pipeline(pending, *backend, options);
    } catch (const sr::PipelineFailed& e) {
        log_info("pipeline aborted; completed records were flushed and --resume will skip them",
                 {{"completed", e.completed_records}});
        throw;
    }
    sink_stream.close();

    const auto all = sr::read_labeled(args.out);
    const sr::LabelingStats stats = sr::compute_stats(all);
    const fs::path stats_path = args.stats_out.empty()
                                    ? fs::path(args.out.string() + ".stats.json")
                                    : fs::path(args.stats_out);
    sr::write_json_file(stats_path, sr::json(stats));
    log_info("labeled", {{"total", all.size()},
                         {"thinking", stats.counts.at(sr::QuestionLabel::thinking)},
                         {"non_thinking", stats.counts.at(sr::QuestionLabel::non_thinking)},
                         {"fail", stats.counts.at(sr::QuestionLabel::fail)},
                         {"stats", stats_path.string()}});
    return 0;
}

// --- train ------------------------------------------------------------------

struct TrainArgs {
    fs::path in, out;
    double l2_lambda = 1.0;
    int max_iters = 500;
    double tolerance = 1e-8;
    std::optional<std::uint64_t> seed;
    double val_fraction = 0.2;
    std::size_t hash_dim = 256;
    std::string cache;
    std::size_t max_in_flight = 8;
};

int run_train(const TrainArgs& args) {
    if (!(args.val_fraction >= 0.0 && args.val_fraction < 1.0))
        throw UsageError{"--val-fraction must lie in [0, 1)"};

    const auto labeled = sr::read_labeled(args.in);
    const auto rows = sr::training_view(labeled);
    std::vector<std::string> texts;
    std::vector<int> targets;
    texts.reserve(rows.size());
    targets.reserve(rows.size());
    for (const auto& [question, target] : rows) {
        texts.push_back(sr::question_text(question));
        targets.push_back(target);
    }

    const auto embedder = make_embedder(args.hash_dim, args.cache);
    log_info("embedding training rows", {{"rows", rows.size()},
                                         {"embedding_model", embedder->model_id()},
                                         {"dim", embedder->dimension()}});
    const auto features = embedder->embed_batch(texts, args.max_in_flight);

    const std::uint64_t seed = resolve_seed(args.seed);
    const auto fit_indices = sr::stratified_pick(targets, 2, 1.0 - args.val_fraction, seed);
    std::vector<bool> in_fit(rows.size(), false);
    for (std::size_t i : fit_indices) in_fit[i] = true;

    std::vector<std::vector<float>> fit_x, val_x;
    std::vector<int> fit_y, val_y;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (in_fit[i]) {
            fit_x.push_back(features[i]);
            fit_y.push_back(targets[i]);
        } else {
            val_x.push_back(features[i]);
            val_y.push_back(targets[i]);
        }
    }

    sr::TrainConfig config;
    config.l2_lambda = args.l2_lambda;
    config.max_iters = args.max_iters;
    config.tolerance = args.tolerance;
    config.seed = seed;
    sr::RouterModel model = sr::train_logistic(fit_x, fit_y, config);

    double val_auc = -1.0;
    try {
        std::vector<double> val_probs;
        val_probs.reserve(val_x.size());
        for (const auto& x : val_x) val_probs.push_back(sr::predict_proba(model, x));
        model.threshold = sr::select_threshold_max_f1(val_probs, val_y);
        val_auc = sr::auc(val_probs, val_y);
    } catch (const sr::Error& e) {
        log_info("threshold selection fell back to 0.5 (validation carve-out unusable)",
                 {{"reason", e.what()}});
        model.threshold = 0.5;
    }

    model.embedding_model_id = embedder->model_id();
    model.train_meta.timestamp = iso_timestamp_utc();
    sr::save_model(model, args.out);

    sr::json summary{{"out", args.out.string()},
                     {"train_rows", fit_x.size()},
                     {"val_rows", val_x.size()},
                     {"threshold", model.threshold},
                     {"iterations", model.train_meta.converged_at_iter},
                     {"seed", seed}};
    if (val_auc >= 0.0) summary["val_auc"] = val_auc;
    log_info("trained router model", summary);
    return 0;
}

// --- eval -------------------------------------------------------------------

sr::ModeLog read_mode_log(const fs::path& path) {
    sr::ModeLog log;
    sr::for_each_jsonl(path, [&](const sr::json& j) {
        if (!j.contains("mode"))
            throw sr::MalformedRecord(path.string() + ": log line is missing \"mode\"");
        const std::string mode = j.at("mode").get<std::string>();
        if (log.records.empty())
            log.mode = mode;
        else if (mode != log.mode)
            throw sr::MalformedRecord(path.string() + ": mixed modes in one log file");
        log.records.push_back(j.get<sr::EvalRecord>());
    });
    return log;
}

struct EvalArgs {
    std::vector<fs::path> logs;
    fs::path out;
    std::string csv;
    int iterations = 1000;
    double confidence = 0.95;
    std::optional<std::uint64_t> seed;
    unsigned threads = 1;
};

int run_eval(const EvalArgs& args) {
    if (args.iterations < 100) throw UsageError{"--iterations must be at least 100"};
    std::vector<sr::ModeLog> logs;
    logs.reserve(args.logs.size());
    for (const fs::path& p : args.logs) logs.push_back(read_mode_log(p));

    const std::uint64_t seed = resolve_seed(args.seed);
    const sr::EvalTable table =
        sr::evaluate_modes(logs, args.iterations, args.confidence, seed, args.threads);
    sr::write_json_file(args.out, sr::json(table));

    if (!args.csv.empty()) {
        std::ofstream csv(args.csv);
        if (!csv) throw sr::IoError("cannot open " + args.csv);
        csv << "mode,scenario,ait_mean,ait_margin,ci_low,ci_high,accuracy,macro_f1,weighted_f1,"
               "mean_latency_ms,mean_tokens\n";
        for (const auto& mode : table.modes)
            for (const auto& s : mode.scenarios)
                csv << mode.mode << ",\"" << s.scenario << "\"," << s.ait.mean << ','
                    << s.ait.margin << ',' << s.ait.ci_low << ',' << s.ait.ci_high << ','
                    << mode.metrics.accuracy << ',' << mode.metrics.macro_f1 << ','
                    << mode.metrics.weighted_f1 << ',' << mode.mean_latency_ms << ','
                    << mode.mean_tokens << '\n';
    }
    log_info("evaluated", {{"modes", table.modes.size()}, {"n", table.n}, {"out", args.out.string()},
                           {"seed", seed}});
    return 0;
}

// --- serve ------------------------------------------------------------------

struct ServeArgs {
    std::string config_path;
    std::string host = "0.0.0.0";
    int port = 8080;
    std::string model_path;
    std::string telemetry;
    std::optional<double> threshold_override;
    std::string fallback_mode;
    std::string backend_url, backend_model, mode_control;
    std::string sim_profile, sim_corpus;
    std::string cache;
    std::size_t hash_dim = 0;  // 0 = follow the model's dim
};

int run_serve(const ServeArgs& args) {
    sr::GatewayConfig config;
    if (!args.config_path.empty()) config = sr::GatewayConfig::from_file(args.config_path);

    // Env between file and flags, matching flags > env > file.
    if (const char* v = std::getenv("SYNAPSE_BACKEND_URL")) config.backend.endpoint_url = v;
    if (const char* v = std::getenv("SYNAPSE_BACKEND_MODEL")) config.backend.model_name = v;
    if (const char* v = std::getenv("SYNAPSE_MODE_CONTROL"))
        config.backend.mode_control = sr::mode_control_from_string(v);
    if (const char* v = std::getenv("SYNAPSE_EMBED_URL")) config.embedding.endpoint_url = v;
    if (const char* v = std::getenv("SYNAPSE_EMBED_MODEL")) config.embedding.model_id = v;
    if (const char* v = std::getenv("SYNAPSE_EMBED_DIM"))
        config.embedding.dimension = std::stoul(v);

    if (!args.model_path.empty()) config.model_path = args.model_path;
    if (!args.telemetry.empty()) config.telemetry_path = fs::path(args.telemetry);
    if (args.threshold_override) config.threshold_override = args.threshold_override;
    if (!args.fallback_mode.empty())
        config.fallback_mode = sr::mode_from_string(args.fallback_mode);
    if (!args.backend_url.empty()) config.backend.endpoint_url = args.backend_url;
    if (!args.backend_model.empty()) config.backend.model_name = args.backend_model;
    if (!args.mode_control.empty())
        config.backend.mode_control = sr::mode_control_from_string(args.mode_control);

    if (config.model_path.empty())
        throw UsageError{"no router model: pass --model or set model_path in the config file"};
    const sr::RouterModel model = sr::load_model(config.model_path);

    std::shared_ptr<sr::Backend> backend;
    if (!args.sim_profile.empty()) {
        if (args.sim_corpus.empty())
            throw UsageError{"--sim needs --sim-corpus so requests can be matched to questions"};
        backend = std::make_shared<sr::SimBackend>(sr::SimProfile::load(args.sim_profile),
                                                   sr::read_questions(args.sim_corpus));
        config.backend = backend->config();
    } else {
        if (config.backend.endpoint_url.empty())
            throw UsageError{"no backend configured: pass --backend-url, use --sim, or set "
                             "SYNAPSE_BACKEND_URL"};
        backend = std::make_shared<sr::HttpBackend>(config.backend);
    }

    std::shared_ptr<sr::EmbeddingService> service;
    if (!config.embedding.endpoint_url.empty())
        service = std::make_shared<sr::HttpEmbeddingService>(config.embedding);
    else
        service = std::make_shared<sr::HashingEmbeddingService>(
            args.hash_dim > 0 ? args.hash_dim : model.dim);
    std::optional<fs::path> cache;
    if (!args.cache.empty()) cache = fs::path(args.cache);
    auto embedder = std::make_shared<sr::Embedder>(std::move(service), std::move(cache));

    if (embedder->model_id() != model.embedding_model_id)
        log_info("embedding service differs from the one the model was trained with",
                 {{"serving", embedder->model_id()}, {"trained", model.embedding_model_id}});

    auto gateway =
        std::make_shared<sr::Gateway>(model, std::move(embedder), std::move(backend), config);
    sr::GatewayServer server(gateway);
    log_info("gateway listening", {{"host", args.host},
                                   {"port", args.port},
                                   {"threshold", gateway->effective_threshold()},
                                   {"model_dim", model.dim}});
    if (!server.run(args.host, args.port))
        throw sr::IoError("cannot listen on " + args.host + ":" + std::to_string(args.port));
    return 0;
}

// --- simulate ---------------------------------------------------------------

struct SimulateArgs {
    std::size_t n = 1000;
    std::string dist = "0.5775,0.3474,0.0751";
    std::optional<std::uint64_t> seed;
    fs::path out_dir;
    bool experiment = false;
    std::string model_path;
    std::size_t hash_dim = 256;
    std::string cache;
};

std::array<double, 3> parse_dist(const std::string& text) {
    std::array<double, 3> dist{};
    std::stringstream ss(text);
    std::string part;
    std::size_t i = 0;
    while (std::getline(ss, part, ',')) {
        if (i >= 3) throw UsageError{"--dist needs exactly three comma-separated fractions"};
        try {
            dist[i++] = std::stod(part);
        } catch (const std::exception&) {
            throw UsageError{"--dist fraction '" + part + "' is not a number"};
        }
    }
    if (i != 3) throw UsageError{"--dist needs exactly three comma-separated fractions"};
    return dist;
}

int run_simulate(const SimulateArgs& args) {
    const auto dist = parse_dist(args.dist);
    const std::uint64_t seed = resolve_seed(args.seed);
    auto [questions, profile] = sr::sim_from_distribution(args.n, dist[0], dist[1], dist[2], seed);

    fs::create_directories(args.out_dir);
    const fs::path questions_path = args.out_dir / "questions.jsonl";
    const fs::path profile_path = args.out_dir / "sim_profile.json";
    sr::write_questions(questions_path, questions);
    profile.save(profile_path);
    log_info("synthesized corpus", {{"n", questions.size()},
                                    {"questions", questions_path.string()},
                                    {"profile", profile_path.string()},
                                    {"seed", seed}});
    if (!args.experiment) return 0;

    if (args.model_path.empty()) throw UsageError{"--experiment needs --model <model.json>"};
    const sr::RouterModel model = sr::load_model(args.model_path);
    const auto embedder = make_embedder(args.hash_dim > 0 ? args.hash_dim : model.dim, args.cache);
    if (embedder->model_id() != model.embedding_model_id)
        log_info("embedding service differs from the one the model was trained with",
                 {{"serving", embedder->model_id()}, {"trained", model.embedding_model_id}});
    auto backend = std::make_shared<sr::SimBackend>(profile, questions);

    const std::vector<std::pair<std::string, std::optional<double>>> passes = {
        {"non_thinking", 1.0},  // probability never reaches a threshold of 1
        {"thinking", 0.0},      // every probability clears a threshold of 0
        {"dynamic", std::nullopt},
    };
    for (const auto& [mode_name, override_value] : passes) {
        sr::GatewayConfig config;
        config.backend = backend->config();
        config.threshold_override = override_value;
        sr::Gateway gateway(model, embedder, backend, config);

        const fs::path log_path = args.out_dir / (mode_name + ".jsonl");
        std::ofstream out(log_path);
        if (!out) throw sr::IoError("cannot open " + log_path.string());
        for (const sr::QuestionRecord& q : questions) {
            auto [result, decision] = gateway.route(sr::question_text(q));
            sr::EvalRecord rec;
            rec.question_id = q.id;
            rec.prediction = sr::parse_answer_letter(result.raw_output, q.option_letters());
            rec.gold = q.gold;
            rec.correct = rec.prediction && *rec.prediction == q.gold;
            rec.completion_tokens = result.completion_tokens;
            rec.latency_ms = result.latency_ms;
            sr::json line(rec);
            line["mode"] = mode_name;
            out << line.dump() << '\n';
        }
        log_info("experiment pass complete", {{"mode", mode_name}, {"log", log_path.string()}});
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"SynapseRoute: dual-mode routing for medical question answering"};
    app.require_subcommand(1);
    app.fallthrough();
    app.add_flag("--json-logs", g_json_logs, "emit machine-readable progress on stderr");

    // ingest
    std::string ingest_source;
    fs::path ingest_in, ingest_out;
    CLI::App* ingest = app.add_subcommand("ingest", "standardize a raw dataset into JSONL");
    ingest->add_option("--source", ingest_source, "dataset source")
        ->required()
        ->check(CLI::IsMember({"usmle", "medmcqa", "pubmedqa", "careqa", "synthetic"}));
    ingest->add_option("--in", ingest_in, "raw dataset file (JSON array, dict, or JSONL)")
        ->required()
        ->check(CLI::ExistingFile);
    ingest->add_option("--out", ingest_out, "standardized questions JSONL")->required();

    // sample
    fs::path sample_in, sample_out;
    std::size_t sample_n = 0;
    std::optional<std::uint64_t> sample_seed;
    CLI::App* sample = app.add_subcommand("sample", "source-stratified subsample");
    sample->add_option("--in", sample_in)->required()->check(CLI::ExistingFile);
    sample->add_option("--out", sample_out)->required();
    sample->add_option("--n", sample_n, "target sample size")->required();
    sample->add_option("--seed", sample_seed, "RNG seed (random if omitted)");

    // label
    LabelArgs label_args;
    CLI::App* label = app.add_subcommand("label", "probe both modes and annotate each question");
    label->add_option("--in", label_args.in)->required()->check(CLI::ExistingFile);
    label->add_option("--out", label_args.out)->required();
    label->add_option("--parallelism", label_args.parallelism)->check(CLI::PositiveNumber);
    label->add_flag("--resume", label_args.resume, "skip questions already in --out");
    label->add_option("--sim", label_args.sim_profile, "simulator profile JSON (offline backend)")
        ->check(CLI::ExistingFile);
    label->add_option("--backend-url", label_args.backend_url, "chat backend base URL");
    label->add_option("--backend-model", label_args.backend_model);
    label->add_option("--mode-control", label_args.mode_control)
        ->check(CLI::IsMember({"parameter_flag", "prompt_suffix"}));
    label->add_option("--stats-out", label_args.stats_out, "stats JSON (default <out>.stats.json)");
    label->add_option("--max-consecutive-failures", label_args.max_consecutive_failures);

    // train
    TrainArgs train_args;
    CLI::App* train = app.add_subcommand("train", "train the logistic router on labeled data");
    train->add_option("--in", train_args.in)->required()->check(CLI::ExistingFile);
    train->add_option("--out", train_args.out)->required();
    train->add_option("--l2", train_args.l2_lambda, "L2 penalty weight");
    train->add_option("--max-iters", train_args.max_iters)->check(CLI::PositiveNumber);
    train->add_option("--tolerance", train_args.tolerance);
    train->add_option("--seed", train_args.seed, "RNG seed (random if omitted)");
    train->add_option("--val-fraction", train_args.val_fraction,
                      "stratified carve-out used to pick the decision threshold");
    train->add_option("--hash-dim", train_args.hash_dim,
                      "dimension of the offline hashing embedder");
    train->add_option("--cache", train_args.cache, "embedding cache JSONL path");
    train->add_option("--max-in-flight", train_args.max_in_flight)->check(CLI::PositiveNumber);

    // eval
    EvalArgs eval_args;
    CLI::App* eval = app.add_subcommand("eval", "cross-mode comparison report");
    eval->add_option("--logs", eval_args.logs, "per-mode eval logs (JSONL)")
        ->required()
        ->expected(1, 8)
        ->check(CLI::ExistingFile);
    eval->add_option("--out", eval_args.out, "report JSON")->required();
    eval->add_option("--csv", eval_args.csv, "also write a flat CSV");
    eval->add_option("--iterations", eval_args.iterations, "bootstrap iterations");
    eval->add_option("--confidence", eval_args.confidence, "CI level");
    eval->add_option("--seed", eval_args.seed, "RNG seed (random if omitted)");
    eval->add_option("--threads", eval_args.threads, "bootstrap worker threads");

    // serve
    ServeArgs serve_args;
    CLI::App* serve = app.add_subcommand("serve", "run the routing gateway");
    serve->add_option("--config", serve_args.config_path, "gateway config JSON")
        ->check(CLI::ExistingFile);
    serve->add_option("--host", serve_args.host);
    serve->add_option("--port", serve_args.port)->check(CLI::Range(1, 65535));
    serve->add_option("--model", serve_args.model_path, "router model JSON");
    serve->add_option("--telemetry", serve_args.telemetry, "telemetry JSONL path");
    serve->add_option("--threshold-override", serve_args.threshold_override)
        ->check(CLI::Range(0.0, 1.0));
    serve->add_option("--fallback-mode", serve_args.fallback_mode)
        ->check(CLI::IsMember({"thinking", "non_thinking"}));
    serve->add_option("--backend-url", serve_args.backend_url);
    serve->add_option("--backend-model", serve_args.backend_model);
    serve->add_option("--mode-control", serve_args.mode_control)
        ->check(CLI::IsMember({"parameter_flag", "prompt_suffix"}));
    serve->add_option("--sim", serve_args.sim_profile, "simulator profile (offline backend)")
        ->check(CLI::ExistingFile);
    serve->add_option("--sim-corpus", serve_args.sim_corpus, "questions JSONL for the simulator")
        ->check(CLI::ExistingFile);
    serve->add_option("--cache", serve_args.cache, "embedding cache JSONL path");
    serve->add_option("--hash-dim", serve_args.hash_dim, "hashing embedder dim (0 = model dim)");

    // simulate
    SimulateArgs sim_args;
    CLI::App* simulate = app.add_subcommand("simulate", "synthesize a corpus + simulator profile");
    simulate->add_option("--n", sim_args.n, "corpus size")->required()->check(CLI::PositiveNumber);
    simulate->add_option("--dist", sim_args.dist,
                         "fractions: non-thinking-only,thinking-only,fail");
    simulate->add_option("--seed", sim_args.seed, "RNG seed (random if omitted)");
    simulate->add_option("--out", sim_args.out_dir, "output directory")->required();
    simulate->add_flag("--experiment", sim_args.experiment,
                       "also run the three-mode routing experiment");
    simulate->add_option("--model", sim_args.model_path, "router model (with --experiment)");
    simulate->add_option("--hash-dim", sim_args.hash_dim);
    simulate->add_option("--cache", sim_args.cache, "embedding cache JSONL path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (ingest->parsed()) return run_ingest(ingest_source, ingest_in, ingest_out);
        if (sample->parsed()) return run_sample(sample_in, sample_out, sample_n, sample_seed);
        if (label->parsed()) return run_label(label_args);
        if (train->parsed()) return run_train(train_args);
        if (eval->parsed()) return run_eval(eval_args);
        if (serve->parsed()) return run_serve(serve_args);
        if (simulate->parsed()) return run_simulate(sim_args);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.message << "\n";
        return 1;
    } catch (const std::exception& e) {
        if (g_json_logs)
            std::cerr << sr::json{{"level", "error"}, {"msg", e.what()}}.dump() << "\n";
        else
            std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
