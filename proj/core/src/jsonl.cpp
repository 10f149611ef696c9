#include "synapseroute/jsonl.hpp"

#include <fstream>
#include <unordered_set>

#include "synapseroute/errors.hpp"

namespace synapseroute {

void for_each_jsonl(const std::filesystem::path& path,
                    const std::function<void(const json&)>& fn) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded()) {
            throw MalformedRecord(path.string() + ":" + std::to_string(line_no) +
                                  ": invalid JSON");
        }
        fn(j);
    }
}

std::vector<QuestionRecord> read_questions(const std::filesystem::path& path) {
    std::vector<QuestionRecord> out;
    std::unordered_set<std::string> seen;
    for_each_jsonl(path, [&](const json& j) {
        QuestionRecord q = j.get<QuestionRecord>();
        if (!seen.insert(q.id).second) {
            throw MalformedRecord(path.string() + ": duplicate question id '" + q.id + "'");
        }
        out.push_back(std::move(q));
    });
    return out;
}

void write_questions(const std::filesystem::path& path, const std::vector<QuestionRecord>& qs) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    for (const auto& q : qs) out << json(q).dump() << '\n';
}

std::vector<LabeledQuestion> read_labeled(const std::filesystem::path& path) {
    std::vector<LabeledQuestion> out;
    std::unordered_set<std::string> seen;
    for_each_jsonl(path, [&](const json& j) {
        LabeledQuestion l = j.get<LabeledQuestion>();
        if (!seen.insert(l.question.id).second) {
            throw MalformedRecord(path.string() + ": duplicate question id '" + l.question.id + "'");
        }
        out.push_back(std::move(l));
    });
    return out;
}

void write_labeled(const std::filesystem::path& path, const std::vector<LabeledQuestion>& items) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    for (const auto& l : items) out << json(l).dump() << '\n';
}

void append_labeled(std::ostream& out, const LabeledQuestion& item) {
    out << json(item).dump() << '\n';
    out.flush();
}

void write_json_file(const std::filesystem::path& path, const json& j, int indent) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << j.dump(indent) << '\n';
}

json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded()) throw MalformedRecord(path.string() + ": invalid JSON");
    return j;
}

}  // namespace synapseroute
