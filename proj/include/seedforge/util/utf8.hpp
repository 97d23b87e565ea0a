#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace seedforge::utf8 {

// Decodes UTF-8 into code points. Invalid sequences decode to U+FFFD, one
// replacement per offending byte.
std::vector<char32_t> decode(std::string_view text);

void append(std::string& out, char32_t cp);
std::string encode(const std::vector<char32_t>& cps);

bool is_valid(std::string_view text);

bool is_space(char32_t cp);
bool is_punct(char32_t cp);
// Combining marks (Thai vowel/tone marks, Latin diacritics).
bool is_mark(char32_t cp);
// Letters, digits, marks and connector punctuation: anything that continues
// a word under dictionary-less segmentation.
bool is_word(char32_t cp);
// Scripts written without spaces where each character is its own word
// segment (Han, Hiragana, Katakana).
bool is_ideographic(char32_t cp);

char32_t fold_case(char32_t cp);
std::string fold_case(std::string_view text);

std::string trim(std::string_view text);

// Trims and collapses every run of Unicode whitespace into one ASCII space.
std::string collapse_whitespace(std::string_view text);

// Case-fold + whitespace normalization used for syntactic duplicate checks.
std::string normalize_key(std::string_view text);

}  // namespace seedforge::utf8
