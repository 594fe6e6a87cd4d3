#include "idiomct/textparse.hpp"

#include <cctype>
#include <stdexcept>

namespace idiomct::textparse {

namespace {

bool is_space(char c) {
    return std::isspace(static_cast<unsigned char>(c)) != 0;
}

std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t nl = text.find('\n', start);
        if (nl == std::string_view::npos) {
            lines.push_back(text.substr(start));
            break;
        }
        std::string_view line = text.substr(start, nl - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        lines.push_back(line);
        start = nl + 1;
    }
    return lines;
}

// UTF-8 bullet: U+2022.
constexpr std::string_view kBullet = "\xe2\x80\xa2";

// Returns the item content after an enumeration marker, or nullopt when the
// line carries no marker.
std::optional<std::string_view> strip_marker(std::string_view line) {
    std::string_view s = trim(line);
    if (s.empty()) return std::nullopt;
    if (std::isdigit(static_cast<unsigned char>(s.front()))) {
        std::size_t i = 0;
        while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
        if (i < s.size() && (s[i] == '.' || s[i] == ')')) {
            return trim(s.substr(i + 1));
        }
        return std::nullopt;
    }
    if (s.front() == '-') return trim(s.substr(1));
    if (s.substr(0, kBullet.size()) == kBullet) return trim(s.substr(kBullet.size()));
    return std::nullopt;
}

}  // namespace

std::string_view trim(std::string_view s) {
    while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
    return s;
}

ParsedList parse_numbered_list(std::string_view text, std::optional<int> expected_n) {
    ParsedList result;
    auto lines = split_lines(text);

    bool any_marker = false;
    for (std::string_view line : lines) {
        if (strip_marker(line).has_value()) {
            any_marker = true;
            break;
        }
    }

    for (std::string_view line : lines) {
        std::string_view trimmed = trim(line);
        if (trimmed.empty()) continue;
        if (any_marker) {
            auto item = strip_marker(line);
            if (item.has_value() && !item->empty()) {
                result.items.emplace_back(*item);
            } else {
                result.dropped.emplace_back(trimmed);
            }
        } else {
            result.items.emplace_back(trimmed);
        }
    }

    if (expected_n.has_value()) {
        auto n = static_cast<std::size_t>(*expected_n);
        if (result.items.size() > n) {
            result.items.resize(n);
            result.truncated = true;
            result.count_mismatch = true;
        } else if (result.items.size() < n) {
            result.count_mismatch = true;
        }
    }
    return result;
}

ScoreParse parse_score(std::string_view text) {
    ScoreParse out;
    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (c < '0' || c > '9') continue;
        out.digit = c;
        out.adjacent_digit =
            i + 1 < text.size() && text[i + 1] >= '0' && text[i + 1] <= '9';
        int value = c - '0';
        if (value >= 1 && value <= 5) {
            out.status = ScoreParse::Status::Ok;
            out.value = value;
        } else {
            out.status = ScoreParse::Status::OutOfRange;
        }
        return out;
    }
    out.status = ScoreParse::Status::NoDigit;
    return out;
}

std::string strip_explanation(std::string_view text) {
    if (trim(text).empty()) {
        throw std::invalid_argument("strip_explanation: empty input");
    }

    // First blank-line-separated block.
    auto lines = split_lines(text);
    std::vector<std::string_view> block;
    bool seen_content = false;
    for (std::string_view line : lines) {
        if (trim(line).empty()) {
            if (seen_content) break;
            continue;  // skip leading blank lines
        }
        seen_content = true;
        block.push_back(line);
    }
    std::string first_block;
    for (std::size_t i = 0; i < block.size(); ++i) {
        if (i > 0) first_block += '\n';
        first_block += std::string(block[i]);
    }

    // A quoted translation inside the block wins over the block itself.
    auto quoted = [&](std::string_view open, std::string_view close)
        -> std::optional<std::string> {
        std::size_t a = first_block.find(open);
        if (a == std::string::npos) return std::nullopt;
        std::size_t b = first_block.find(close, a + open.size());
        if (b == std::string::npos) return std::nullopt;
        std::string_view inner(first_block.data() + a + open.size(),
                               b - a - open.size());
        inner = trim(inner);
        if (inner.empty()) return std::nullopt;
        return std::string(inner);
    };
    if (auto q = quoted("\"", "\"")) return *q;
    if (auto q = quoted("\xe2\x80\x9c", "\xe2\x80\x9d")) return *q;  // curly quotes

    return std::string(trim(first_block));
}

bool contains_exact(std::string_view haystack, std::string_view needle) {
    if (needle.empty()) {
        throw std::invalid_argument("contains_exact: empty needle");
    }
    // Byte search is code-point exact for valid UTF-8: the encoding is
    // self-synchronizing, so a byte match always aligns on boundaries.
    return haystack.find(needle) != std::string_view::npos;
}

}  // namespace idiomct::textparse
