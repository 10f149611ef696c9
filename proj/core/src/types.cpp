#include "synapseroute/types.hpp"

#include "synapseroute/errors.hpp"

namespace synapseroute {

std::string to_string(Source s) {
    switch (s) {
        case Source::usmle: return "usmle";
        case Source::medmcqa: return "medmcqa";
        case Source::pubmedqa: return "pubmedqa";
        case Source::careqa: return "careqa";
        case Source::synthetic: return "synthetic";
    }
    throw MalformedRecord("unknown source enum value");
}

Source source_from_string(const std::string& s) {
    if (s == "usmle") return Source::usmle;
    if (s == "medmcqa") return Source::medmcqa;
    if (s == "pubmedqa") return Source::pubmedqa;
    if (s == "careqa") return Source::careqa;
    if (s == "synthetic") return Source::synthetic;
    throw MalformedRecord("unknown source: " + s);
}

std::string to_string(ModeKind m) {
    return m == ModeKind::thinking ? "thinking" : "non_thinking";
}

ModeKind mode_from_string(const std::string& s) {
    if (s == "thinking") return ModeKind::thinking;
    if (s == "non_thinking") return ModeKind::non_thinking;
    throw MalformedRecord("unknown mode: " + s);
}

std::string to_string(QuestionLabel l) {
    switch (l) {
        case QuestionLabel::thinking: return "thinking";
        case QuestionLabel::non_thinking: return "non_thinking";
        case QuestionLabel::fail: return "fail";
    }
    throw MalformedRecord("unknown label enum value");
}

QuestionLabel label_from_string(const std::string& s) {
    if (s == "thinking") return QuestionLabel::thinking;
    if (s == "non_thinking") return QuestionLabel::non_thinking;
    if (s == "fail") return QuestionLabel::fail;
    throw MalformedRecord("unknown label: " + s);
}

std::string QuestionRecord::option_letters() const {
    std::string letters;
    letters.reserve(options.size());
    for (const auto& [letter, text] : options) letters.push_back(letter);
    return letters;
}

const std::string& QuestionRecord::option_text(char letter) const {
    for (const auto& [l, text] : options) {
        if (l == letter) return text;
    }
    throw MalformedRecord(std::string("no option with letter ") + letter + " in question " + id);
}

void QuestionRecord::validate() const {
    if (id.empty()) throw MalformedRecord("question has empty id");
    if (options.size() < 2 || options.size() > 5) {
        throw MalformedRecord("question " + id + " has " + std::to_string(options.size()) +
                              " options; expected 2 to 5");
    }
    for (std::size_t i = 0; i < options.size(); ++i) {
        const char expected = static_cast<char>('A' + i);
        if (options[i].first != expected) {
            throw MalformedRecord("question " + id + " option keys are not consecutive letters from A");
        }
    }
    bool gold_found = false;
    for (const auto& [l, text] : options) gold_found = gold_found || l == gold;
    if (!gold_found) {
        throw MalformedRecord("question " + id + " gold '" + std::string(1, gold) +
                              "' is not an option key");
    }
}

void DualProbeRecord::validate() const {
    if (thinking.mode != ModeKind::thinking || non_thinking.mode != ModeKind::non_thinking) {
        throw MalformedRecord("probe record for " + question_id + " has outcomes under the wrong mode");
    }
}

void to_json(json& j, const QuestionRecord& q) {
    json opts = json::object();
    for (const auto& [letter, text] : q.options) opts[std::string(1, letter)] = text;
    j = json{{"id", q.id},
             {"source", to_string(q.source)},
             {"stem", q.stem},
             {"options", std::move(opts)},
             {"gold", std::string(1, q.gold)}};
}

void from_json(const json& j, QuestionRecord& q) {
    q.id = j.at("id").get<std::string>();
    q.source = source_from_string(j.at("source").get<std::string>());
    q.stem = j.at("stem").get<std::string>();
    q.options.clear();
    const auto& opts = j.at("options");
    if (!opts.is_object()) throw MalformedRecord("question " + q.id + ": options is not an object");
    // nlohmann::json orders object keys lexicographically, which for the
    // A.. letter keys is also the option order.
    for (auto it = opts.begin(); it != opts.end(); ++it) {
        if (it.key().size() != 1) {
            throw MalformedRecord("question " + q.id + ": option key '" + it.key() + "' is not a letter");
        }
        q.options.emplace_back(it.key()[0], it.value().get<std::string>());
    }
    const auto gold = j.at("gold").get<std::string>();
    if (gold.size() != 1) throw MalformedRecord("question " + q.id + ": gold is not a single letter");
    q.gold = gold[0];
    q.validate();
}

void to_json(json& j, const InferenceOutcome& o) {
    j = json{{"mode", to_string(o.mode)},
             {"raw_output", o.raw_output},
             {"parsed_answer", o.parsed_answer ? json(std::string(1, *o.parsed_answer)) : json(nullptr)},
             {"correct", o.correct},
             {"completion_tokens", o.completion_tokens},
             {"latency_ms", o.latency_ms}};
}

void from_json(const json& j, InferenceOutcome& o) {
    o.mode = mode_from_string(j.at("mode").get<std::string>());
    o.raw_output = j.at("raw_output").get<std::string>();
    const auto& parsed = j.at("parsed_answer");
    if (parsed.is_null()) {
        o.parsed_answer.reset();
    } else {
        const auto s = parsed.get<std::string>();
        if (s.size() != 1) throw MalformedRecord("parsed_answer is not a single letter");
        o.parsed_answer = s[0];
    }
    o.correct = j.at("correct").get<bool>();
    o.completion_tokens = j.at("completion_tokens").get<std::int64_t>();
    o.latency_ms = j.at("latency_ms").get<std::int64_t>();
    if (o.completion_tokens < 0 || o.latency_ms < 0) {
        throw MalformedRecord("outcome has negative token or latency value");
    }
}

void to_json(json& j, const DualProbeRecord& p) {
    j = json{{"question_id", p.question_id},
             {"thinking", p.thinking},
             {"non_thinking", p.non_thinking}};
}

void from_json(const json& j, DualProbeRecord& p) {
    p.question_id = j.at("question_id").get<std::string>();
    p.thinking = j.at("thinking").get<InferenceOutcome>();
    p.non_thinking = j.at("non_thinking").get<InferenceOutcome>();
    p.validate();
}

void to_json(json& j, const LabeledQuestion& l) {
    to_json(j, l.question);
    j["probe"] = l.probe;
    j["label"] = to_string(l.label);
}

void from_json(const json& j, LabeledQuestion& l) {
    from_json(j, l.question);
    l.probe = j.at("probe").get<DualProbeRecord>();
    l.label = label_from_string(j.at("label").get<std::string>());
}

}  // namespace synapseroute
