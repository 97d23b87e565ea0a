#include "seedforge/eval/tokenizer.hpp"

#include "seedforge/errors.hpp"
#include "seedforge/util/utf8.hpp"

namespace seedforge {

std::string_view to_string(TokenizerMode m) noexcept {
    switch (m) {
        case TokenizerMode::unicode_words: return "unicode_words";
        case TokenizerMode::characters: return "characters";
        case TokenizerMode::whitespace: return "whitespace";
    }
    return "?";
}

TokenizerMode tokenizer_mode_from_string(std::string_view s) {
    if (s == "unicode_words" || s == "words") return TokenizerMode::unicode_words;
    if (s == "characters" || s == "chars") return TokenizerMode::characters;
    if (s == "whitespace") return TokenizerMode::whitespace;
    throw ConfigError("eval.tokenizer", "unknown tokenizer '" + std::string(s) +
                                            "' (expected unicode_words, characters or whitespace)");
}

std::string Tokenizer::name() const {
    return segmenter_ ? name_ : std::string(to_string(mode_));
}

std::vector<std::string> Tokenizer::tokenize(std::string_view text) const {
    if (segmenter_) return segmenter_(text);
    std::vector<std::string> out;
    std::string cur;
    auto flush = [&] {
        if (!cur.empty()) out.push_back(std::move(cur));
        cur.clear();
    };
    for (char32_t cp : utf8::decode(text)) {
        if (utf8::is_space(cp)) {
            flush();
            continue;
        }
        switch (mode_) {
            case TokenizerMode::characters:
                utf8::append(cur, cp);
                flush();
                break;
            case TokenizerMode::whitespace:
                utf8::append(cur, cp);
                break;
            case TokenizerMode::unicode_words:
                if (utf8::is_ideographic(cp) || !utf8::is_word(cp)) {
                    flush();
                    utf8::append(cur, cp);
                    flush();
                } else {
                    utf8::append(cur, cp);
                }
                break;
        }
    }
    flush();
    return out;
}

}  // namespace seedforge
