#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace seedforge {

enum class TokenizerMode {
    // Runs of word characters; each punctuation mark and each ideograph is
    // its own token. Thai runs stay whole (no dictionary).
    unicode_words,
    // Every non-space code point.
    characters,
    whitespace,
};

std::string_view to_string(TokenizerMode m) noexcept;
TokenizerMode tokenizer_mode_from_string(std::string_view s);

class Tokenizer {
public:
    using Segmenter = std::function<std::vector<std::string>(std::string_view)>;

    explicit Tokenizer(TokenizerMode mode = TokenizerMode::unicode_words) : mode_(mode) {}
    // External segmenter (e.g. a Thai dictionary tokenizer); `name` labels
    // reports.
    Tokenizer(std::string name, Segmenter segmenter)
        : mode_(TokenizerMode::unicode_words), name_(std::move(name)), segmenter_(std::move(segmenter)) {}

    std::vector<std::string> tokenize(std::string_view text) const;
    std::string name() const;

private:
    TokenizerMode mode_;
    std::string name_;
    Segmenter segmenter_;
};

}  // namespace seedforge
