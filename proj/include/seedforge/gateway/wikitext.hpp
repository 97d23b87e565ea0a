#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace seedforge::wikitext {

struct Section {
    int index = 0;  // MediaWiki section index; 0 is the lead
    int level = 0;  // heading level (number of '='), 0 for the lead
    std::string heading;
    std::string body;  // raw wikitext between this heading and the next
};

// Splits article wikitext at headings, numbering sections the way the
// MediaWiki API does (lead = 0, then each heading in document order). The
// lead is always present, possibly with an empty body.
std::vector<Section> split_sections(std::string_view text);

// Reduces wikitext to plain text: drops comments, references, templates,
// tables, file/category links and HTML tags; keeps link labels and the
// text inside bold/italic quotes.
std::string strip_markup(std::string_view text);

}  // namespace seedforge::wikitext
