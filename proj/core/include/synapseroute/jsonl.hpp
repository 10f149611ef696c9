#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "synapseroute/types.hpp"

namespace synapseroute {

// Calls `fn` with each parsed line of a JSON-lines file. Blank lines are
// skipped; a parse failure raises MalformedRecord with the line number.
void for_each_jsonl(const std::filesystem::path& path, const std::function<void(const json&)>& fn);

// Reads a question dataset file, enforcing id uniqueness within the file.
std::vector<QuestionRecord> read_questions(const std::filesystem::path& path);
void write_questions(const std::filesystem::path& path, const std::vector<QuestionRecord>& qs);

std::vector<LabeledQuestion> read_labeled(const std::filesystem::path& path);
void write_labeled(const std::filesystem::path& path, const std::vector<LabeledQuestion>& items);
void append_labeled(std::ostream& out, const LabeledQuestion& item);

void write_json_file(const std::filesystem::path& path, const json& j, int indent = 2);
json read_json_file(const std::filesystem::path& path);

}  // namespace synapseroute
