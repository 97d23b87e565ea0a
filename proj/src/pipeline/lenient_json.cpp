#include "seedforge/pipeline/lenient_json.hpp"

#include <cctype>
#include <string>

#include "seedforge/util/utf8.hpp"

namespace seedforge::lenient {

namespace {

using nlohmann::json;

constexpr int kMaxDepth = 64;

class Reader {
public:
    explicit Reader(std::string_view s, std::size_t pos) : s_(s), i_(pos) {}

    std::optional<json> value(int depth) {
        if (depth > kMaxDepth) return std::nullopt;
        skip_ws();
        if (i_ >= s_.size()) return std::nullopt;
        const char c = s_[i_];
        if (c == '[') return array(depth);
        if (c == '{') return object(depth);
        if (c == '"' || c == '\'') {
            auto str = string();
            if (!str) return std::nullopt;
            return json(*str);
        }
        if (c == '-' || std::isdigit(static_cast<unsigned char>(c))) return number();
        return literal();
    }

    std::size_t pos() const { return i_; }

private:
    void skip_ws() {
        while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
    }

    // A quote closes the string only when what follows could continue the
    // enclosing structure; otherwise it is taken as literal text.
    bool closes_here(std::size_t q) const {
        std::size_t j = q + 1;
        while (j < s_.size() && std::isspace(static_cast<unsigned char>(s_[j]))) ++j;
        if (j >= s_.size()) return true;
        const char n = s_[j];
        return n == ',' || n == ']' || n == '}' || n == ':';
    }

    std::optional<std::string> string() {
        const char quote = s_[i_++];
        std::string out;
        while (i_ < s_.size()) {
            const char c = s_[i_];
            if (c == '\\' && i_ + 1 < s_.size()) {
                const char e = s_[i_ + 1];
                i_ += 2;
                switch (e) {
                    case 'n': out.push_back('\n'); break;
                    case 't': out.push_back('\t'); break;
                    case 'r': out.push_back('\r'); break;
                    case 'b': out.push_back('\b'); break;
                    case 'f': out.push_back('\f'); break;
                    case 'u': {
                        auto cp = hex4();
                        if (!cp) return std::nullopt;
                        char32_t code = *cp;
                        if (code >= 0xD800 && code <= 0xDBFF && i_ + 1 < s_.size() &&
                            s_[i_] == '\\' && s_[i_ + 1] == 'u') {
                            i_ += 2;
                            auto lo = hex4();
                            if (!lo) return std::nullopt;
                            if (*lo >= 0xDC00 && *lo <= 0xDFFF) {
                                code = 0x10000 + ((code - 0xD800) << 10) + (*lo - 0xDC00);
                            } else {
                                utf8::append(out, U'�');
                                code = *lo;
                            }
                        }
                        if (code >= 0xD800 && code <= 0xDFFF) code = U'�';
                        utf8::append(out, code);
                        break;
                    }
                    default: out.push_back(e); break;
                }
                continue;
            }
            if (c == quote && closes_here(i_)) {
                ++i_;
                return out;
            }
            out.push_back(c);
            ++i_;
        }
        return std::nullopt;
    }

    std::optional<char32_t> hex4() {
        if (i_ + 4 > s_.size()) return std::nullopt;
        char32_t v = 0;
        for (int k = 0; k < 4; ++k) {
            const char h = s_[i_ + k];
            v <<= 4;
            if (h >= '0' && h <= '9') v |= static_cast<char32_t>(h - '0');
            else if (h >= 'a' && h <= 'f') v |= static_cast<char32_t>(h - 'a' + 10);
            else if (h >= 'A' && h <= 'F') v |= static_cast<char32_t>(h - 'A' + 10);
            else return std::nullopt;
        }
        i_ += 4;
        return v;
    }

    std::optional<json> number() {
        const std::size_t start = i_;
        if (s_[i_] == '-') ++i_;
        while (i_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[i_])) || s_[i_] == '.' ||
                                  s_[i_] == 'e' || s_[i_] == 'E' || s_[i_] == '+' || s_[i_] == '-')) {
            ++i_;
        }
        const json j = json::parse(s_.substr(start, i_ - start), nullptr, false);
        if (j.is_discarded() || !j.is_number()) return std::nullopt;
        return j;
    }

    std::optional<json> literal() {
        static constexpr std::pair<std::string_view, int> kWords[] = {
            {"true", 1}, {"True", 1}, {"false", 0}, {"False", 0}, {"null", -1}, {"None", -1}};
        for (const auto& [word, v] : kWords) {
            if (s_.substr(i_, word.size()) == word) {
                i_ += word.size();
                if (v < 0) return json(nullptr);
                return json(v == 1);
            }
        }
        return std::nullopt;
    }

    std::optional<json> array(int depth) {
        ++i_;
        json out = json::array();
        skip_ws();
        if (i_ < s_.size() && s_[i_] == ']') {
            ++i_;
            return out;
        }
        while (true) {
            auto v = value(depth + 1);
            if (!v) return std::nullopt;
            out.push_back(std::move(*v));
            skip_ws();
            if (i_ >= s_.size()) return std::nullopt;
            if (s_[i_] == ',') {
                ++i_;
                skip_ws();
                if (i_ < s_.size() && s_[i_] == ']') {  // trailing comma
                    ++i_;
                    return out;
                }
                continue;
            }
            if (s_[i_] == ']') {
                ++i_;
                return out;
            }
            return std::nullopt;
        }
    }

    std::optional<json> object(int depth) {
        ++i_;
        json out = json::object();
        skip_ws();
        if (i_ < s_.size() && s_[i_] == '}') {
            ++i_;
            return out;
        }
        while (true) {
            skip_ws();
            if (i_ >= s_.size() || (s_[i_] != '"' && s_[i_] != '\'')) return std::nullopt;
            auto key = string();
            if (!key) return std::nullopt;
            skip_ws();
            if (i_ >= s_.size() || s_[i_] != ':') return std::nullopt;
            ++i_;
            auto v = value(depth + 1);
            if (!v) return std::nullopt;
            out[*key] = std::move(*v);
            skip_ws();
            if (i_ >= s_.size()) return std::nullopt;
            if (s_[i_] == ',') {
                ++i_;
                skip_ws();
                if (i_ < s_.size() && s_[i_] == '}') {
                    ++i_;
                    return out;
                }
                continue;
            }
            if (s_[i_] == '}') {
                ++i_;
                return out;
            }
            return std::nullopt;
        }
    }

    std::string_view s_;
    std::size_t i_;
};

}  // namespace

std::optional<nlohmann::json> parse_value_at(std::string_view text, std::size_t pos,
                                             std::size_t& end) {
    if (pos >= text.size() || (text[pos] != '[' && text[pos] != '{')) return std::nullopt;
    Reader r(text, pos);
    auto v = r.value(0);
    if (v) end = r.pos();
    return v;
}

}  // namespace seedforge::lenient
