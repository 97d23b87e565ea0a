#pragma once

// Tolerant reader for the JSON-like payloads chat models emit: single or
// double quoted strings, Python literals (True/False/None), trailing commas,
// raw newlines and stray unescaped quotes inside strings, and prose before
// or after the payload.

#include <optional>
#include <string_view>

#include <json.hpp>

namespace seedforge::lenient {

enum class Want { array, object, any };

// Parses one value that starts exactly at text[pos] ('[' or '{'). On success
// sets `end` to one past the closing bracket.
std::optional<nlohmann::json> parse_value_at(std::string_view text, std::size_t pos,
                                             std::size_t& end);

// Scans left to right for the first bracketed value of the wanted kind that
// parses and satisfies `accept`. Returns nullopt when there is none.
template <typename Accept>
std::optional<nlohmann::json> find_first(std::string_view text, Want want, Accept&& accept) {
    for (std::size_t pos = 0; pos < text.size(); ++pos) {
        const char c = text[pos];
        if (c != '[' && c != '{') continue;
        if (want == Want::array && c != '[') continue;
        if (want == Want::object && c != '{') continue;
        std::size_t end = 0;
        if (auto v = parse_value_at(text, pos, end); v && accept(*v)) return v;
    }
    return std::nullopt;
}

inline std::optional<nlohmann::json> find_first(std::string_view text, Want want) {
    return find_first(text, want, [](const nlohmann::json&) { return true; });
}

}  // namespace seedforge::lenient
