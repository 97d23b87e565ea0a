#include "seedforge/gateway/wikitext.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <sstream>

#include "seedforge/util/utf8.hpp"

namespace seedforge::wikitext {

namespace {

bool starts_with_at(std::string_view s, std::size_t pos, std::string_view prefix) {
    return s.substr(pos, prefix.size()) == prefix;
}

std::string ascii_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

// Parses "== Heading ==" lines. Returns level 0 when the line is not a heading.
int heading_level(std::string_view line, std::string& heading) {
    std::size_t end = line.size();
    while (end > 0 && (line[end - 1] == ' ' || line[end - 1] == '\t' || line[end - 1] == '\r')) {
        --end;
    }
    line = line.substr(0, end);
    if (line.size() < 3 || line.front() != '=' || line.back() != '=') return 0;
    int lead = 0;
    while (lead < static_cast<int>(line.size()) && line[lead] == '=') ++lead;
    int trail = 0;
    while (trail < static_cast<int>(line.size()) && line[line.size() - 1 - trail] == '=') ++trail;
    const int level = std::min({lead, trail, 6});
    if (2 * level >= static_cast<int>(line.size())) return 0;
    heading = utf8::trim(line.substr(level, line.size() - 2 * level));
    if (heading.empty()) return 0;
    return level;
}

std::string remove_between(std::string_view text, std::string_view open, std::string_view close) {
    std::string out;
    std::size_t pos = 0;
    while (pos < text.size()) {
        const std::size_t start = text.find(open, pos);
        if (start == std::string_view::npos) break;
        out.append(text.substr(pos, start - pos));
        const std::size_t stop = text.find(close, start + open.size());
        if (stop == std::string_view::npos) {
            pos = text.size();
            break;
        }
        pos = stop + close.size();
    }
    if (pos < text.size()) out.append(text.substr(pos));
    return out;
}

// Drops <ref .../> and <ref ...>...</ref>.
std::string remove_refs(std::string_view text) {
    std::string out;
    std::size_t pos = 0;
    const std::string lower = ascii_lower(text);
    while (pos < text.size()) {
        const std::size_t start = lower.find("<ref", pos);
        if (start == std::string::npos) break;
        const char after = start + 4 < lower.size() ? lower[start + 4] : '\0';
        if (after != '>' && after != ' ' && after != '/') {
            out.append(text.substr(pos, start + 4 - pos));
            pos = start + 4;
            continue;
        }
        out.append(text.substr(pos, start - pos));
        const std::size_t tag_end = lower.find('>', start);
        if (tag_end == std::string::npos) {
            pos = text.size();
            break;
        }
        if (lower[tag_end - 1] == '/') {
            pos = tag_end + 1;
            continue;
        }
        const std::size_t close = lower.find("</ref>", tag_end);
        pos = close == std::string::npos ? text.size() : close + 6;
    }
    if (pos < text.size()) out.append(text.substr(pos));
    return out;
}

// Removes balanced open..close spans, honoring nesting.
std::string remove_nested(std::string_view text, std::string_view open, std::string_view close) {
    std::string out;
    int depth = 0;
    std::size_t i = 0;
    while (i < text.size()) {
        if (starts_with_at(text, i, open)) {
            ++depth;
            i += open.size();
        } else if (depth > 0 && starts_with_at(text, i, close)) {
            --depth;
            i += close.size();
        } else {
            if (depth == 0) out.push_back(text[i]);
            ++i;
        }
    }
    return out;
}

bool is_dropped_namespace(std::string_view target) {
    const std::size_t colon = target.find(':');
    if (colon == std::string_view::npos) return false;
    const std::string ns = ascii_lower(utf8::trim(target.substr(0, colon)));
    static constexpr std::array<std::string_view, 9> kDropped = {
        "file", "image", "category", "media", "ไฟล์", "ภาพ", "หมวดหมู่", "แม่แบบ", "template"};
    return std::find(kDropped.begin(), kDropped.end(), ns) != kDropped.end();
}

// [[target|label]] -> label, [[target]] -> target; file/category links vanish.
std::string resolve_internal_links(std::string_view text) {
    std::string out;
    std::size_t i = 0;
    while (i < text.size()) {
        if (!starts_with_at(text, i, "[[")) {
            out.push_back(text[i++]);
            continue;
        }
        int depth = 0;
        std::size_t j = i;
        while (j < text.size()) {
            if (starts_with_at(text, j, "[[")) {
                ++depth;
                j += 2;
            } else if (starts_with_at(text, j, "]]")) {
                --depth;
                j += 2;
                if (depth == 0) break;
            } else {
                ++j;
            }
        }
        if (depth != 0) {
            // Unbalanced: keep the rest verbatim minus the brackets.
            out.append(text.substr(i + 2));
            break;
        }
        const std::string_view inner = text.substr(i + 2, j - i - 4);
        if (!is_dropped_namespace(inner)) {
            const std::size_t bar = inner.rfind('|');
            const std::string_view label = bar == std::string_view::npos ? inner : inner.substr(bar + 1);
            out.append(resolve_internal_links(label));
        }
        i = j;
    }
    return out;
}

// [http://x label] -> label; bare bracketed URLs vanish.
std::string resolve_external_links(std::string_view text) {
    std::string out;
    std::size_t i = 0;
    while (i < text.size()) {
        if (text[i] == '[' && (starts_with_at(text, i + 1, "http://") ||
                               starts_with_at(text, i + 1, "https://") ||
                               starts_with_at(text, i + 1, "//"))) {
            const std::size_t close = text.find(']', i);
            if (close != std::string_view::npos) {
                const std::string_view inner = text.substr(i + 1, close - i - 1);
                const std::size_t space = inner.find(' ');
                if (space != std::string_view::npos) out.append(inner.substr(space + 1));
                i = close + 1;
                continue;
            }
        }
        out.push_back(text[i++]);
    }
    return out;
}

std::string remove_html_tags(std::string_view text) {
    std::string out;
    std::size_t i = 0;
    while (i < text.size()) {
        if (text[i] == '<' && i + 1 < text.size() &&
            (std::isalpha(static_cast<unsigned char>(text[i + 1])) || text[i + 1] == '/')) {
            const std::size_t close = text.find('>', i);
            if (close != std::string_view::npos) {
                i = close + 1;
                continue;
            }
        }
        out.push_back(text[i++]);
    }
    return out;
}

std::string remove_quotes(std::string_view text) {
    std::string out;
    std::size_t i = 0;
    while (i < text.size()) {
        if (starts_with_at(text, i, "''")) {
            while (i < text.size() && text[i] == '\'') ++i;
            continue;
        }
        out.push_back(text[i++]);
    }
    return out;
}

}  // namespace

std::vector<Section> split_sections(std::string_view text) {
    std::vector<Section> sections;
    sections.push_back(Section{0, 0, "", ""});
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string_view::npos) eol = text.size();
        const std::string_view line = text.substr(pos, eol - pos);
        std::string heading;
        if (const int level = heading_level(line, heading); level > 0) {
            sections.push_back(Section{static_cast<int>(sections.size()), level, heading, ""});
        } else {
            auto& body = sections.back().body;
            body.append(line);
            body.push_back('\n');
        }
        if (eol == text.size()) break;
        pos = eol + 1;
    }
    return sections;
}

std::string strip_markup(std::string_view text) {
    std::string s = remove_between(text, "<!--", "-->");
    s = remove_refs(s);
    s = remove_nested(s, "{{", "}}");
    s = remove_nested(s, "{|", "|}");
    s = resolve_internal_links(s);
    s = resolve_external_links(s);
    s = remove_html_tags(s);
    s = remove_quotes(s);

    std::ostringstream out;
    bool first = true;
    std::istringstream lines(s);
    std::string line;
    while (std::getline(lines, line)) {
        std::size_t b = 0;
        while (b < line.size() && (line[b] == '*' || line[b] == '#' || line[b] == ':' ||
                                   line[b] == ';' || line[b] == ' ' || line[b] == '\t')) {
            ++b;
        }
        std::string cleaned = utf8::collapse_whitespace(std::string_view(line).substr(b));
        if (cleaned.empty() || cleaned.find_first_not_of('-') == std::string::npos) continue;
        if (!first) out << '\n';
        out << cleaned;
        first = false;
    }
    return out.str();
}

}  // namespace seedforge::wikitext
