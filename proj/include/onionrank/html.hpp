#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "onionrank/common.hpp"

namespace onionrank::html {

struct Hyperlink {
    std::string href;
    std::string anchor_text;
};

struct ImageTag {
    std::string src;
    std::string alt;
};

struct InputTag {
    std::string type;
    std::string name;
    std::string id;
};

/// Everything the feature extractors need from one HTML page.
struct ParsedPage {
    std::string visible_text;  // whitespace-collapsed, no markup
    std::vector<Hyperlink> hyperlinks;
    std::vector<ImageTag> images;
    std::vector<InputTag> inputs;
    std::vector<std::string> titles;  // text of each <title>
    std::vector<std::string> h1s;     // text of each <h1>
};

class ParseError : public DataError {
public:
    using DataError::DataError;
};

/// Lenient tag-soup parser. Text inside script, style and comments is
/// dropped; block-level tags separate words. Throws ParseError on binary
/// content (NUL bytes) or markup left unterminated at end of input.
ParsedPage parse_page(std::string_view raw_html);

/// Decode the common named entities and numeric character references.
std::string decode_entities(std::string_view s);

}  // namespace onionrank::html
