#include "synapseroute/answer.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>
#include <vector>

namespace synapseroute {

namespace {

constexpr std::string_view kTrimChars = " \t\r\n\f\v.,:;!?\"'`()[]{}<>*_-|#~+=/\\";

bool is_trim_char(char c) { return kTrimChars.find(c) != std::string_view::npos; }

std::string_view trim(std::string_view s) {
    while (!s.empty() && is_trim_char(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_trim_char(s.back())) s.remove_suffix(1);
    return s;
}

char to_upper(char c) { return static_cast<char>(std::toupper(static_cast<unsigned char>(c))); }
char to_lower(char c) { return static_cast<char>(std::tolower(static_cast<unsigned char>(c))); }

bool is_allowed(char c, std::string_view allowed) {
    return allowed.find(to_upper(c)) != std::string_view::npos;
}

bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

// Finds the letter following an anchor like "answer is" at position `pos`
// (the index just past the anchor). Skips spaces and opening punctuation.
std::optional<char> letter_after(std::string_view text, std::size_t pos, std::string_view allowed) {
    while (pos < text.size() && (is_trim_char(text[pos]))) ++pos;
    if (pos >= text.size()) return std::nullopt;
    const char c = text[pos];
    if (!is_allowed(c, allowed)) return std::nullopt;
    if (pos + 1 < text.size() && is_word_char(text[pos + 1])) return std::nullopt;
    return to_upper(c);
}

std::optional<char> scan_answer_anchors(std::string_view raw, std::string_view allowed) {
    std::string lower(raw.size(), '\0');
    std::transform(raw.begin(), raw.end(), lower.begin(), to_lower);

    static constexpr std::string_view anchors[] = {"answer is", "answer:"};
    std::optional<char> found;
    std::size_t found_pos = 0;
    for (std::string_view anchor : anchors) {
        std::size_t pos = 0;
        while ((pos = lower.find(anchor, pos)) != std::string::npos) {
            const auto letter = letter_after(raw, pos + anchor.size(), allowed);
            if (letter && (!found || pos >= found_pos)) {
                found = letter;
                found_pos = pos;
            }
            ++pos;
        }
    }
    return found;
}

std::optional<char> scan_final_line(std::string_view raw, std::string_view allowed) {
    // Locate the last non-empty line.
    std::size_t end = raw.size();
    while (true) {
        const std::size_t begin = raw.find_last_of('\n', end == 0 ? std::string_view::npos : end - 1);
        const std::size_t line_start = begin == std::string_view::npos ? 0 : begin + 1;
        std::string_view line = trim(raw.substr(line_start, end - line_start));
        if (!line.empty()) {
            std::vector<char> letters;
            std::size_t i = 0;
            while (i < line.size()) {
                while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
                std::size_t j = i;
                while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
                const std::string_view token = trim(line.substr(i, j - i));
                if (token.size() == 1 && is_allowed(token[0], allowed)) {
                    letters.push_back(to_upper(token[0]));
                }
                i = j;
            }
            if (letters.size() == 1) return letters[0];
            return std::nullopt;
        }
        if (begin == std::string_view::npos) return std::nullopt;
        end = begin;
    }
}

}  // namespace

std::optional<char> parse_answer_letter(std::string_view raw_output, std::string_view allowed) {
    if (allowed.empty()) throw std::invalid_argument("allowed letter set is empty");
    for (char c : allowed) {
        if (c < 'A' || c > 'E') throw std::invalid_argument("allowed letters must be within A..E");
    }

    const std::string_view trimmed = trim(raw_output);
    if (trimmed.size() == 1 && is_allowed(trimmed[0], allowed)) return to_upper(trimmed[0]);

    if (const auto anchored = scan_answer_anchors(raw_output, allowed)) return anchored;

    return scan_final_line(raw_output, allowed);
}

}  // namespace synapseroute
