#include "synapseroute/simulator.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>

#include "synapseroute/answer.hpp"
#include "synapseroute/errors.hpp"
#include "synapseroute/jsonl.hpp"
#include "synapseroute/rng.hpp"
#include "synapseroute/sampling.hpp"

namespace synapseroute {

namespace {

constexpr int kSchemaVersion = 1;

// Thinking-mode completion lengths: right-skewed around a median of 618
// tokens so the mean lands near 800, clipped to the observed range.
constexpr double kThinkingLogMedian = 6.4265;  // ln(618)
constexpr double kThinkingLogSigma = 0.717;
constexpr std::int64_t kThinkingMinTokens = 128;
constexpr std::int64_t kThinkingMaxTokens = 8277;
constexpr double kThinkingMsPerToken = 21.57;

constexpr std::int64_t kNonThinkingTokens = 5;
constexpr std::int64_t kNonThinkingBaseMs = 620;
constexpr double kNonThinkingTailMs = 630.0;
constexpr std::int64_t kNonThinkingMaxMs = 20000;

std::int64_t draw_thinking_tokens(Rng& rng) {
    const double z = rng.next_normal();
    const double raw = std::exp(kThinkingLogMedian + kThinkingLogSigma * z);
    auto tokens = static_cast<std::int64_t>(std::llround(raw));
    return std::clamp(tokens, kThinkingMinTokens, kThinkingMaxTokens);
}

SimOutcome draw_thinking_outcome(Rng& rng, bool correct) {
    SimOutcome out;
    out.correct = correct;
    out.tokens = draw_thinking_tokens(rng);
    out.latency_ms = static_cast<std::int64_t>(std::llround(double(out.tokens) * kThinkingMsPerToken));
    return out;
}

SimOutcome draw_non_thinking_outcome(Rng& rng, bool correct) {
    SimOutcome out;
    out.correct = correct;
    out.tokens = kNonThinkingTokens;
    const double tail = -kNonThinkingTailMs * std::log(1.0 - rng.next_unit());
    out.latency_ms = std::min(kNonThinkingBaseMs + static_cast<std::int64_t>(std::llround(tail)),
                              kNonThinkingMaxMs);
    return out;
}

}  // namespace

void to_json(json& j, const SimOutcome& o) {
    j = json{{"correct", o.correct}, {"tokens", o.tokens}, {"latency_ms", o.latency_ms}};
}

void from_json(const json& j, SimOutcome& o) {
    j.at("correct").get_to(o.correct);
    j.at("tokens").get_to(o.tokens);
    j.at("latency_ms").get_to(o.latency_ms);
}

void to_json(json& j, const SimEntry& e) {
    j = json{{"thinking", e.thinking}, {"non_thinking", e.non_thinking}};
}

void from_json(const json& j, SimEntry& e) {
    j.at("thinking").get_to(e.thinking);
    j.at("non_thinking").get_to(e.non_thinking);
}

SimEntry SimProfile::resolve(const std::string& question_id) const {
    auto it = questions.find(question_id);
    if (it != questions.end()) return it->second;
    return default_entry(question_id);
}

SimEntry SimProfile::default_entry(const std::string& key) const {
    const std::uint64_t base = splitmix64(fnv1a64(key) ^ splitmix64(default_seed));
    const std::uint64_t t_bits = splitmix64(base);
    const std::uint64_t nt_bits = splitmix64(base + 1);

    SimEntry entry;
    entry.thinking.correct = t_bits % 100 < 80;
    entry.thinking.tokens = kThinkingMinTokens + static_cast<std::int64_t>(t_bits >> 8) % 1473;
    entry.thinking.latency_ms =
        static_cast<std::int64_t>(std::llround(double(entry.thinking.tokens) * kThinkingMsPerToken));
    entry.non_thinking.correct = nt_bits % 100 < 55;
    entry.non_thinking.tokens = kNonThinkingTokens;
    entry.non_thinking.latency_ms = kNonThinkingBaseMs + static_cast<std::int64_t>(nt_bits >> 8) % 1200;
    return entry;
}

void to_json(json& j, const SimProfile& p) {
    json questions = json::object();
    for (const auto& [id, entry] : p.questions) questions[id] = entry;
    j = json{{"schema_version", kSchemaVersion},
             {"default_seed", p.default_seed},
             {"questions", std::move(questions)}};
}

void from_json(const json& j, SimProfile& p) {
    const int version = j.at("schema_version").get<int>();
    if (version != kSchemaVersion)
        throw SchemaVersionMismatch("unsupported simulator profile schema_version " +
                                    std::to_string(version));
    j.at("default_seed").get_to(p.default_seed);
    p.questions.clear();
    for (const auto& [id, entry] : j.at("questions").items())
        p.questions[id] = entry.get<SimEntry>();
}

void SimProfile::save(const std::filesystem::path& path) const {
    write_json_file(path, json(*this));
}

SimProfile SimProfile::load(const std::filesystem::path& path) {
    return read_json_file(path).get<SimProfile>();
}

BackendConfig SimBackend::default_config() {
    BackendConfig config;
    config.endpoint_url = "sim://local";
    config.model_name = "sim-dual-mode";
    return config;
}

SimBackend::SimBackend(SimProfile profile, const std::vector<QuestionRecord>& corpus,
                       BackendConfig config)
    : Backend(std::move(config)), profile_(std::move(profile)), corpus_(corpus) {
    for (std::size_t i = 0; i < corpus_.size(); ++i) {
        const QuestionRecord& q = corpus_[i];
        const std::string text = question_text(q);
        by_text_.emplace(text, i);
        by_text_.emplace(text + "\n" + kAnswerInstruction, i);
        by_text_.emplace(q.stem, i);
    }
}

const QuestionRecord* SimBackend::find_question(const std::string& user_content) const {
    auto it = by_text_.find(user_content);
    if (it == by_text_.end()) return nullptr;
    return &corpus_[it->second];
}

ChatResult SimBackend::complete(const ChatRequest& request) {
    const std::string* user_ptr = request.last_user_content();
    if (user_ptr == nullptr || user_ptr->empty())
        throw BackendProtocol("simulator request has no user message");
    const std::string& user = *user_ptr;

    const QuestionRecord* q = find_question(user);
    const SimEntry entry = q ? profile_.resolve(q->id) : profile_.default_entry(user);
    const SimOutcome& out = entry.at(request.mode);

    char letter;
    if (q != nullptr) {
        if (out.correct) {
            letter = q->gold;
        } else {
            const std::string letters = q->option_letters();
            const std::size_t pos = letters.find(q->gold);
            letter = letters[(pos + 1) % letters.size()];
        }
    } else {
        letter = static_cast<char>('A' + splitmix64(fnv1a64(user)) % 4);
    }

    std::string raw;
    if (request.mode == ModeKind::thinking) {
        raw = "<think>\nWeighing each option against the presentation before committing.\n</think>\n\n"
              "The answer is ";
        raw += letter;
        raw += '.';
    } else {
        raw.assign(1, letter);
    }

    const int slot = request.mode == ModeKind::thinking ? 0 : 1;
    tokens_[slot].fetch_add(out.tokens, std::memory_order_relaxed);
    requests_[slot].fetch_add(1, std::memory_order_relaxed);
    return ChatResult{std::move(raw), out.tokens, out.latency_ms};
}

std::int64_t SimBackend::served_tokens(ModeKind mode) const {
    return tokens_[mode == ModeKind::thinking ? 0 : 1].load(std::memory_order_relaxed);
}

std::int64_t SimBackend::served_requests(ModeKind mode) const {
    return requests_[mode == ModeKind::thinking ? 0 : 1].load(std::memory_order_relaxed);
}

namespace {

enum class SimClass { non_thinking_only = 0, thinking_only = 1, fail = 2, both = 3 };

const char* const kRecallSubjects[] = {
    "sinoatrial node",      "hepatic portal vein", "islets of Langerhans", "loop of Henle",
    "mitral valve",         "basal ganglia",       "thyroid gland",        "femoral nerve",
    "alveolar epithelium",  "gastric parietal cells", "corpus callosum",   "adrenal cortex",
    "optic chiasm",         "brachial plexus",     "pulmonary artery",     "sciatic nerve",
    "pituitary stalk",      "carotid sinus",       "vagus nerve",          "patellar tendon",
};

const char* const kRecallTemplates[] = {
    "What is the primary function of the %s?",
    "Which structure lies immediately adjacent to the %s?",
    "Which hormone acts directly on the %s?",
    "Damage to the %s most commonly produces which deficit?",
    "Which artery supplies the %s?",
};

const char* const kVignetteSymptoms[] = {
    "crushing substernal chest pain",  "progressive exertional dyspnea",
    "episodic vertigo",                "bilateral leg swelling",
    "night sweats and weight loss",    "severe epigastric pain radiating to the back",
    "acute confusion",                 "intermittent palpitations",
    "productive cough with hemoptysis", "ascending muscle weakness",
};

const char* const kVignetteSigns[] = {
    "a diastolic murmur at the apex", "diminished breath sounds at the right base",
    "a palpable spleen tip",          "asterixis",
    "jugular venous distension",      "a positive Murphy sign",
    "nuchal rigidity",                "periorbital edema",
};

const char* const kVignetteLabs[] = {
    "an elevated troponin",          "a creatinine of 3.1 mg/dL",
    "a leukocyte count of 18,000",   "a lactate of 4.2 mmol/L",
    "a hemoglobin A1c of 11.2%",     "a TSH below 0.01",
    "a d-dimer above 4,000 ng/mL",   "a mixed respiratory acidosis",
};

const char* const kVignetteOnsets[] = {"three hours", "two days", "one week", "several months"};

const char* const kVignetteAsks[] = {"diagnosis", "next step in management",
                                     "underlying mechanism", "initial pharmacotherapy"};

const char* const kTrialInterventions[] = {
    "adjuvant probiotic therapy",      "low-dose aspirin prophylaxis",
    "early mobilization protocols",    "intermittent fasting",
    "perioperative statin loading",    "home telemonitoring",
    "vitamin D supplementation",       "mindfulness-based stress reduction",
};

const char* const kTrialOutcomes[] = {
    "long-term graft survival",        "thirty-day readmission rates",
    "progression-free survival",      "postoperative delirium incidence",
    "glycemic variability",           "all-cause mortality",
};

const char* const kTrialConditions[] = {
    "idiopathic pulmonary fibrosis",   "refractory ulcerative colitis",
    "stage III melanoma",              "chronic kidney disease",
    "treatment-resistant depression",  "recurrent Clostridioides difficile infection",
};

const char* const kAnswerBank[] = {
    "Increased sodium reabsorption",   "Beta-blocker therapy",
    "Community-acquired pneumonia",    "Autoimmune demyelination",
    "Acute pancreatitis",              "Intravenous fluid resuscitation",
    "Left anterior descending artery", "Hyperthyroidism",
    "Bacterial endocarditis",          "Supportive care alone",
    "Renal artery stenosis",           "Hepatocellular carcinoma",
    "Immediate surgical exploration",  "Vitamin B12 deficiency",
    "Pulmonary embolism",              "Observation with repeat imaging",
};

template <std::size_t N>
const char* pick(Rng& rng, const char* const (&bank)[N]) {
    return bank[rng.next_below(N)];
}

std::string format_stem(const char* fmt, auto&&... args) {
    char buffer[512];
    std::snprintf(buffer, sizeof(buffer), fmt, args...);
    return std::string(buffer);
}

std::string make_stem(SimClass cls, Rng& rng) {
    switch (cls) {
        case SimClass::non_thinking_only:
        case SimClass::both:
            return format_stem(pick(rng, kRecallTemplates), pick(rng, kRecallSubjects));
        case SimClass::thinking_only: {
            const int age = 18 + static_cast<int>(rng.next_below(70));
            return format_stem(
                "A %d-year-old patient presents with %s and %s that began %s ago. Examination "
                "reveals %s, and laboratory studies show %s. Which of the following is the most "
                "likely %s?",
                age, pick(rng, kVignetteSymptoms), pick(rng, kVignetteSymptoms),
                pick(rng, kVignetteOnsets), pick(rng, kVignetteSigns), pick(rng, kVignetteLabs),
                pick(rng, kVignetteAsks));
        }
        case SimClass::fail:
            return format_stem("Does %s meaningfully improve %s in patients with %s?",
                               pick(rng, kTrialInterventions), pick(rng, kTrialOutcomes),
                               pick(rng, kTrialConditions));
    }
    throw std::logic_error("unreachable simulator class");
}

std::vector<std::pair<char, std::string>> make_options(Rng& rng) {
    constexpr std::size_t bank_size = std::size(kAnswerBank);
    std::vector<std::size_t> order(bank_size);
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(order);
    std::vector<std::pair<char, std::string>> options;
    for (std::size_t i = 0; i < 4; ++i)
        options.emplace_back(static_cast<char>('A' + i), kAnswerBank[order[i]]);
    return options;
}

SimEntry make_entry(SimClass cls, Rng& rng) {
    const bool t_correct = cls == SimClass::thinking_only || cls == SimClass::both;
    const bool nt_correct = cls == SimClass::non_thinking_only || cls == SimClass::both;
    SimEntry entry;
    entry.thinking = draw_thinking_outcome(rng, t_correct);
    entry.non_thinking = draw_non_thinking_outcome(rng, nt_correct);
    return entry;
}

}  // namespace

std::pair<std::vector<QuestionRecord>, SimProfile> sim_from_distribution(
    std::size_t n, double frac_non_thinking_only, double frac_thinking_only, double frac_fail,
    std::uint64_t seed) {
    const double fracs[3] = {frac_non_thinking_only, frac_thinking_only, frac_fail};
    double sum = 0.0;
    for (double f : fracs) {
        if (!(f >= 0.0 && f <= 1.0)) throw BadFractions("class fractions must lie in [0, 1]");
        sum += f;
    }
    if (sum > 1.0 + 1e-9) throw BadFractions("class fractions must sum to at most 1");
    if (n == 0) throw EmptyInput("cannot synthesize an empty corpus");

    const double nd = static_cast<double>(n);
    const std::vector<double> ideals = {nd * fracs[0], nd * fracs[1], nd * fracs[2],
                                        nd * std::max(0.0, 1.0 - sum)};
    const std::vector<std::size_t> counts = largest_remainder_allocate(ideals, n);

    std::vector<SimClass> classes;
    classes.reserve(n);
    for (std::size_t cls = 0; cls < counts.size(); ++cls)
        classes.insert(classes.end(), counts[cls], static_cast<SimClass>(cls));
    Rng assign_rng = Rng::stream(seed, n);
    assign_rng.shuffle(classes);

    std::vector<QuestionRecord> questions;
    questions.reserve(n);
    SimProfile profile;
    profile.default_seed = seed;

    for (std::size_t i = 0; i < n; ++i) {
        Rng rng = Rng::stream(seed, i);
        QuestionRecord q;
        char id[32];
        std::snprintf(id, sizeof(id), "sim-%06zu", i + 1);
        q.id = id;
        q.source = Source::synthetic;
        q.stem = make_stem(classes[i], rng);
        q.options = make_options(rng);
        q.gold = static_cast<char>('A' + rng.next_below(q.options.size()));
        q.validate();
        profile.questions[q.id] = make_entry(classes[i], rng);
        questions.push_back(std::move(q));
    }
    return {std::move(questions), std::move(profile)};
}

}  // namespace synapseroute
