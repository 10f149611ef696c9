#include "synapseroute/standardize.hpp"

#include <algorithm>
#include <cctype>

#include "synapseroute/errors.hpp"

namespace synapseroute {

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

std::string strip(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

bool is_pubmed_decision(const std::string& gold) {
    const std::string g = lower(strip(gold));
    return g == "yes" || g == "no" || g == "maybe";
}

}  // namespace

QuestionRecord standardize_record(const RawRecord& raw) {
    if (strip(raw.stem).empty()) throw MalformedRecord("record " + raw.id + ": missing stem");
    if (strip(raw.gold).empty()) throw MalformedRecord("record " + raw.id + ": missing gold answer");

    QuestionRecord q;
    q.id = raw.id;
    q.source = raw.source;
    q.stem = raw.stem;

    if (raw.source == Source::pubmedqa && is_pubmed_decision(raw.gold)) {
        q.options = {{'A', "yes"}, {'B', "no"}, {'C', "maybe"}};
        const std::string g = lower(strip(raw.gold));
        q.gold = g == "yes" ? 'A' : g == "no" ? 'B' : 'C';
        q.validate();
        return q;
    }

    if (raw.options.size() > 5) {
        throw MalformedRecord("record " + raw.id + ": " + std::to_string(raw.options.size()) +
                              " options exceed the maximum of 5");
    }
    if (raw.options.size() < 2) {
        throw MalformedRecord("record " + raw.id + ": fewer than 2 answer candidates");
    }

    const std::string gold_key = lower(strip(raw.gold));
    int gold_index = -1;
    for (std::size_t i = 0; i < raw.options.size(); ++i) {
        const auto& [key, text] = raw.options[i];
        q.options.emplace_back(static_cast<char>('A' + i), text);
        if (gold_index < 0 && !key.empty() && lower(strip(key)) == gold_key) {
            gold_index = static_cast<int>(i);
        }
    }
    if (gold_index < 0) {
        // Fall back to matching the gold against an option text.
        for (std::size_t i = 0; i < raw.options.size(); ++i) {
            if (lower(strip(raw.options[i].second)) == gold_key) {
                gold_index = static_cast<int>(i);
                break;
            }
        }
    }
    if (gold_index < 0) {
        throw MalformedRecord("record " + raw.id + ": gold '" + raw.gold +
                              "' is not among the candidates");
    }
    q.gold = static_cast<char>('A' + gold_index);
    q.validate();
    return q;
}

namespace {

std::string first_string(const json& j, std::initializer_list<const char*> keys) {
    for (const char* key : keys) {
        if (j.contains(key)) {
            const auto& v = j.at(key);
            if (v.is_string()) return v.get<std::string>();
            if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
        }
    }
    return "";
}

void read_options(const json& j, RawRecord& raw) {
    if (j.contains("options") && j.at("options").is_object()) {
        for (auto it = j.at("options").begin(); it != j.at("options").end(); ++it) {
            raw.options.emplace_back(it.key(), it.value().get<std::string>());
        }
        return;
    }
    if (j.contains("options") && j.at("options").is_array()) {
        for (const auto& v : j.at("options")) raw.options.emplace_back("", v.get<std::string>());
        return;
    }
    if (j.contains("choices") && j.at("choices").is_array()) {
        for (const auto& v : j.at("choices")) raw.options.emplace_back("", v.get<std::string>());
        return;
    }
    // MedMCQA style opa..ope columns.
    static constexpr const char* kCols[] = {"opa", "opb", "opc", "opd", "ope"};
    for (std::size_t i = 0; i < 5; ++i) {
        if (j.contains(kCols[i]) && j.at(kCols[i]).is_string()) {
            raw.options.emplace_back(std::string(1, static_cast<char>('a' + i)),
                                     j.at(kCols[i]).get<std::string>());
        }
    }
}

}  // namespace

RawRecord raw_from_json(const json& j, Source source, const std::string& fallback_id) {
    RawRecord raw;
    raw.source = source;
    raw.id = first_string(j, {"id", "qid", "question_id"});
    if (raw.id.empty()) raw.id = fallback_id;
    raw.stem = first_string(j, {"stem", "question", "QUESTION"});
    read_options(j, raw);

    raw.gold = first_string(j, {"gold", "answer", "answer_idx", "final_decision", "correct_answer"});
    if (raw.gold.empty() && j.contains("cop") && j.at("cop").is_number_integer()) {
        // MedMCQA's "cop" is a 0-based option index.
        const auto idx = j.at("cop").get<std::int64_t>();
        if (idx >= 0 && static_cast<std::size_t>(idx) < raw.options.size()) {
            raw.gold = std::string(1, static_cast<char>('A' + idx));
        }
    }
    if (!raw.gold.empty() && raw.gold.size() > 1 &&
        std::all_of(raw.gold.begin(), raw.gold.end(),
                    [](unsigned char c) { return std::isdigit(c); }) &&
        !raw.options.empty()) {
        // Multi-digit numeric gold: treat as a 0-based index.
        const auto idx = std::stoll(raw.gold);
        if (idx >= 0 && static_cast<std::size_t>(idx) < raw.options.size()) {
            raw.gold = std::string(1, static_cast<char>('A' + idx));
        }
    }

    // Positional options get letter keys so a letter gold can resolve.
    char next = 'A';
    for (auto& [key, text] : raw.options) {
        if (key.empty()) key = std::string(1, next);
        ++next;
    }
    // Single-digit numeric gold against lettered options: 0-based index.
    if (raw.gold.size() == 1 && std::isdigit(static_cast<unsigned char>(raw.gold[0]))) {
        const int idx = raw.gold[0] - '0';
        if (idx >= 0 && static_cast<std::size_t>(idx) < raw.options.size()) {
            raw.gold = std::string(1, static_cast<char>('A' + idx));
        }
    }
    return raw;
}

}  // namespace synapseroute
