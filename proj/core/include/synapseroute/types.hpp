#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace synapseroute {

using json = nlohmann::json;

enum class Source { usmle, medmcqa, pubmedqa, careqa, synthetic };

std::string to_string(Source s);
Source source_from_string(const std::string& s);

enum class ModeKind { thinking, non_thinking };

// Serialized as "thinking" / "non_thinking".
std::string to_string(ModeKind m);
ModeKind mode_from_string(const std::string& s);

enum class QuestionLabel { thinking, non_thinking, fail };

std::string to_string(QuestionLabel l);
QuestionLabel label_from_string(const std::string& s);

// One standardized multiple-choice item. Options are consecutive letters
// starting at 'A' (2 to 5 entries) and gold is one of them.
struct QuestionRecord {
    std::string id;
    Source source = Source::synthetic;
    std::string stem;
    std::vector<std::pair<char, std::string>> options;
    char gold = 'A';

    // Option letters in order, e.g. "ABCD".
    std::string option_letters() const;
    const std::string& option_text(char letter) const;

    // Throws MalformedRecord when an invariant does not hold.
    void validate() const;

    bool operator==(const QuestionRecord&) const = default;
};

struct InferenceOutcome {
    ModeKind mode = ModeKind::non_thinking;
    std::string raw_output;
    std::optional<char> parsed_answer;
    bool correct = false;
    std::int64_t completion_tokens = 0;
    std::int64_t latency_ms = 0;

    bool operator==(const InferenceOutcome&) const = default;
};

struct DualProbeRecord {
    std::string question_id;
    InferenceOutcome thinking;
    InferenceOutcome non_thinking;

    void validate() const;

    bool operator==(const DualProbeRecord&) const = default;
};

struct LabeledQuestion {
    QuestionRecord question;
    DualProbeRecord probe;
    QuestionLabel label = QuestionLabel::fail;

    bool operator==(const LabeledQuestion&) const = default;
};

// JSON shapes match the dataset file formats: a QuestionRecord object has the
// fields {id, source, stem, options, gold}; a labeled line carries the same
// fields plus "probe" and "label".
void to_json(json& j, const QuestionRecord& q);
void from_json(const json& j, QuestionRecord& q);
void to_json(json& j, const InferenceOutcome& o);
void from_json(const json& j, InferenceOutcome& o);
void to_json(json& j, const DualProbeRecord& p);
void from_json(const json& j, DualProbeRecord& p);
void to_json(json& j, const LabeledQuestion& l);
void from_json(const json& j, LabeledQuestion& l);

}  // namespace synapseroute
