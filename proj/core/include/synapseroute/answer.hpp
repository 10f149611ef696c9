#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace synapseroute {

// Extracts the chosen option letter from a model output, or nullopt when no
// single letter can be confidently extracted. `allowed` is the set of valid
// option letters, e.g. "ABCD" (must be a nonempty subset of A..E).
//
// Extraction stages, in order:
//   1. the whole output equals one allowed letter after trimming
//      whitespace/punctuation;
//   2. the last "answer is X" / "Answer: X" pattern with an allowed X;
//   3. the final line contains exactly one standalone allowed-letter token.
std::optional<char> parse_answer_letter(std::string_view raw_output, std::string_view allowed);

}  // namespace synapseroute
