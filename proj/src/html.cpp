#include "onionrank/html.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <optional>

namespace onionrank::html {

namespace {

constexpr std::array kBlockTags = {
    "address", "article", "aside",  "blockquote", "body",   "br",     "button", "dd",
    "div",     "dl",      "dt",     "fieldset",   "figure", "footer", "form",   "h1",
    "h2",      "h3",      "h4",     "h5",         "h6",     "head",   "header", "hr",
    "html",    "img",     "input",  "label",      "li",     "main",   "nav",    "ol",
    "option",  "p",       "pre",    "section",    "select", "table",  "tbody",  "td",
    "textarea", "tfoot",  "th",     "thead",      "title",  "tr",     "ul",
};

bool is_block(std::string_view tag) {
    return std::find(kBlockTags.begin(), kBlockTags.end(), tag) != kBlockTags.end();
}

bool is_name_char(char c) {
    auto u = static_cast<unsigned char>(c);
    return std::isalnum(u) || c == '-' || c == '_' || c == ':';
}

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

struct Tag {
    std::string name;
    std::vector<std::pair<std::string, std::string>> attrs;
    bool closing = false;

    std::optional<std::string> attr(std::string_view key) const {
        for (const auto& [k, v] : attrs)
            if (k == key) return v;
        return std::nullopt;
    }
};

std::size_t find_ci(std::string_view hay, std::string_view needle, std::size_t from) {
    if (needle.empty()) return from;
    for (std::size_t i = from; i + needle.size() <= hay.size(); ++i) {
        if (starts_with_ci(hay.substr(i), needle)) return i;
    }
    return std::string_view::npos;
}

// Parses the tag starting at raw[pos] == '<'. Returns the index one past '>'.
std::size_t read_tag(std::string_view raw, std::size_t pos, Tag& tag) {
    std::size_t i = pos + 1;
    if (i < raw.size() && raw[i] == '/') {
        tag.closing = true;
        ++i;
    }
    std::size_t name_start = i;
    while (i < raw.size() && is_name_char(raw[i])) ++i;
    tag.name = to_lower(raw.substr(name_start, i - name_start));

    while (i < raw.size()) {
        while (i < raw.size() && (is_space(raw[i]) || raw[i] == '/')) ++i;
        if (i >= raw.size()) break;
        if (raw[i] == '>') return i + 1;

        std::size_t k = i;
        while (i < raw.size() && !is_space(raw[i]) && raw[i] != '=' && raw[i] != '>' &&
               raw[i] != '/')
            ++i;
        std::string key = to_lower(raw.substr(k, i - k));
        if (key.empty()) {
            ++i;  // stray character such as a lone quote
            continue;
        }
        while (i < raw.size() && is_space(raw[i])) ++i;
        std::string value;
        if (i < raw.size() && raw[i] == '=') {
            ++i;
            while (i < raw.size() && is_space(raw[i])) ++i;
            if (i < raw.size() && (raw[i] == '"' || raw[i] == '\'')) {
                char q = raw[i++];
                std::size_t end = raw.find(q, i);
                if (end == std::string_view::npos)
                    throw ParseError("unterminated attribute value in <" + tag.name + ">");
                value = decode_entities(raw.substr(i, end - i));
                i = end + 1;
            } else {
                std::size_t v = i;
                while (i < raw.size() && !is_space(raw[i]) && raw[i] != '>') ++i;
                value = decode_entities(raw.substr(v, i - v));
            }
        }
        tag.attrs.emplace_back(std::move(key), std::move(value));
    }
    throw ParseError("unterminated tag <" + tag.name);
}

void append_utf8(std::string& out, unsigned long cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x110000) {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

}  // namespace

std::string decode_entities(std::string_view s) {
    static constexpr std::pair<std::string_view, std::string_view> kNamed[] = {
        {"amp", "&"}, {"lt", "<"}, {"gt", ">"}, {"quot", "\""}, {"apos", "'"}, {"nbsp", " "},
    };
    std::string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] != '&') {
            out.push_back(s[i]);
            continue;
        }
        std::size_t semi = s.find(';', i + 1);
        if (semi == std::string_view::npos || semi - i > 10) {
            out.push_back('&');
            continue;
        }
        std::string_view body = s.substr(i + 1, semi - i - 1);
        bool done = false;
        if (!body.empty() && body[0] == '#') {
            unsigned long cp = 0;
            bool hex = body.size() > 1 && (body[1] == 'x' || body[1] == 'X');
            std::string_view digits = body.substr(hex ? 2 : 1);
            bool ok = !digits.empty();
            for (char c : digits) {
                auto u = static_cast<unsigned char>(c);
                if (hex ? !std::isxdigit(u) : !std::isdigit(u)) {
                    ok = false;
                    break;
                }
                cp = cp * (hex ? 16 : 10) +
                     static_cast<unsigned long>(std::isdigit(u) ? c - '0' : std::tolower(u) - 'a' + 10);
                if (cp > 0x10FFFF) {
                    ok = false;
                    break;
                }
            }
            if (ok && cp != 0) {
                append_utf8(out, cp);
                done = true;
            }
        } else {
            for (const auto& [name, repl] : kNamed) {
                if (body == name) {
                    out += repl;
                    done = true;
                    break;
                }
            }
        }
        if (done) {
            i = semi;
        } else {
            out.push_back('&');
        }
    }
    return out;
}

ParsedPage parse_page(std::string_view raw) {
    if (raw.find('\0') != std::string_view::npos)
        throw ParseError("binary content (NUL byte) in HTML");

    ParsedPage page;
    std::string text;
    std::string title_buf, h1_buf;
    int title_depth = 0, h1_depth = 0;
    std::optional<std::size_t> open_anchor;

    auto emit_text = [&](std::string_view chunk) {
        std::string decoded = decode_entities(chunk);
        text += decoded;
        if (title_depth > 0) title_buf += decoded;
        if (h1_depth > 0) h1_buf += decoded;
        if (open_anchor) page.hyperlinks[*open_anchor].anchor_text += decoded;
    };
    auto separate = [&] {
        text.push_back(' ');
        if (title_depth > 0) title_buf.push_back(' ');
        if (h1_depth > 0) h1_buf.push_back(' ');
        if (open_anchor) page.hyperlinks[*open_anchor].anchor_text.push_back(' ');
    };
    auto close_anchor = [&] {
        if (open_anchor) {
            auto& a = page.hyperlinks[*open_anchor].anchor_text;
            a = collapse_whitespace(a);
            open_anchor.reset();
        }
    };

    std::size_t pos = 0;
    while (pos < raw.size()) {
        if (raw[pos] != '<') {
            std::size_t next = raw.find('<', pos);
            if (next == std::string_view::npos) next = raw.size();
            emit_text(raw.substr(pos, next - pos));
            pos = next;
            continue;
        }
        std::string_view rest = raw.substr(pos);
        if (rest.starts_with("<!--")) {
            std::size_t end = raw.find("-->", pos + 4);
            if (end == std::string_view::npos) throw ParseError("unterminated comment");
            pos = end + 3;
            continue;
        }
        if (rest.starts_with("<!") || rest.starts_with("<?")) {
            std::size_t end = raw.find('>', pos);
            if (end == std::string_view::npos) throw ParseError("unterminated declaration");
            pos = end + 1;
            continue;
        }
        bool opens_tag = rest.size() > 1 &&
                         (std::isalpha(static_cast<unsigned char>(rest[1])) ||
                          (rest[1] == '/' && rest.size() > 2 &&
                           std::isalpha(static_cast<unsigned char>(rest[2]))));
        if (!opens_tag) {
            emit_text("<");
            ++pos;
            continue;
        }

        Tag tag;
        pos = read_tag(raw, pos, tag);

        if (!tag.closing && (tag.name == "script" || tag.name == "style")) {
            std::size_t end = find_ci(raw, "</" + tag.name, pos);
            if (end == std::string_view::npos) throw ParseError("unterminated <" + tag.name + ">");
            std::size_t gt = raw.find('>', end);
            if (gt == std::string_view::npos) throw ParseError("unterminated </" + tag.name);
            pos = gt + 1;
            separate();
            continue;
        }

        if (is_block(tag.name)) separate();

        if (tag.name == "a") {
            close_anchor();
            if (!tag.closing) {
                if (auto href = tag.attr("href")) {
                    page.hyperlinks.push_back({std::string(trim(*href)), {}});
                    open_anchor = page.hyperlinks.size() - 1;
                }
            }
        } else if (tag.name == "title") {
            if (!tag.closing) {
                ++title_depth;
            } else if (title_depth > 0 && --title_depth == 0) {
                page.titles.push_back(collapse_whitespace(title_buf));
                title_buf.clear();
            }
        } else if (tag.name == "h1") {
            if (!tag.closing) {
                ++h1_depth;
            } else if (h1_depth > 0 && --h1_depth == 0) {
                page.h1s.push_back(collapse_whitespace(h1_buf));
                h1_buf.clear();
            }
        } else if (tag.name == "img" && !tag.closing) {
            page.images.push_back({tag.attr("src").value_or(""), tag.attr("alt").value_or("")});
        } else if (tag.name == "input" && !tag.closing) {
            page.inputs.push_back({to_lower(tag.attr("type").value_or("")),
                                   tag.attr("name").value_or(""), tag.attr("id").value_or("")});
        }
    }
    close_anchor();
    if (title_depth > 0) page.titles.push_back(collapse_whitespace(title_buf));
    if (h1_depth > 0) page.h1s.push_back(collapse_whitespace(h1_buf));

    page.visible_text = collapse_whitespace(text);
    return page;
}

}  // namespace onionrank::html
