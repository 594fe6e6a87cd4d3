#pragma once
// Response-cleaning rules: numbered-list parsing, first-digit score parsing,
// explanation stripping for succinct-style replies, and exact substring
// containment. All functions are pure and total unless noted; problems
// surface as flags, not exceptions.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace idiomct::textparse {

struct ParsedList {
    std::vector<std::string> items;    // markers stripped, trimmed, non-empty
    std::vector<std::string> dropped;  // non-blank fragments that failed the item heuristic
    bool count_mismatch = false;       // expected_n given and parsed count differed
    bool truncated = false;            // more than expected_n items arrived
};

// Splits a model response into list items. A line is an item if it begins
// with an enumeration marker ("1.", "1)", "-", "•"); when no line anywhere
// carries a marker, every non-blank line is an item. With expected_n set,
// extra items are truncated (and flagged); a shortfall is flagged but kept.
ParsedList parse_numbered_list(std::string_view text,
                               std::optional<int> expected_n = std::nullopt);

struct ScoreParse {
    enum class Status { Ok, NoDigit, OutOfRange };
    Status status = Status::NoDigit;
    int value = 0;               // meaningful when status == Ok
    char digit = 0;              // first digit character seen, for diagnostics
    bool adjacent_digit = false; // first digit is followed by another digit ("10" -> 1)

    bool ok() const { return status == Status::Ok; }
};

// The first decimal digit in the text is the score; no digit or a digit
// outside [1,5] marks the judge response unusable. Applied literally, so
// "10" parses as 1 with adjacent_digit set for the caller to log.
ScoreParse parse_score(std::string_view text);

// Reduces a translation response that carries a trailing explanation to the
// translation alone: keeps the first blank-line-separated block, and inside
// it prefers a quoted segment when one exists. Throws std::invalid_argument
// on empty input.
std::string strip_explanation(std::string_view text);

// Exact code-point substring test; no case folding, no normalization.
// Throws std::invalid_argument on an empty needle.
bool contains_exact(std::string_view haystack, std::string_view needle);

// ASCII whitespace trim.
std::string_view trim(std::string_view s);

}  // namespace idiomct::textparse
