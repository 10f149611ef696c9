#pragma once

#include <string>
#include <vector>

#include "synapseroute/types.hpp"

namespace synapseroute {

// A source-specific record before standardization. Option keys may carry the
// raw dataset's labels (any case) or be empty for positional options; gold may
// be an option key, an option text, or a PubMedQA yes/no/maybe decision.
struct RawRecord {
    std::string id;
    Source source = Source::synthetic;
    std::string stem;
    std::vector<std::pair<std::string, std::string>> options;
    std::string gold;
};

// Normalizes a raw record into a QuestionRecord: options are re-lettered
// A.. in their original order and PubMedQA yes/no/maybe golds map to the
// fixed option set {A: yes, B: no, C: maybe}. Idempotent on its own output.
// Throws MalformedRecord for >5 options, <2 options, a missing stem or gold,
// or a gold that matches no candidate.
QuestionRecord standardize_record(const RawRecord& raw);

// Extracts a RawRecord from one dataset JSON object, tolerating the field
// spellings of the supported corpora (answer_idx, opa..ope, cop,
// final_decision, plain options maps/arrays).
RawRecord raw_from_json(const json& j, Source source, const std::string& fallback_id);

}  // namespace synapseroute
