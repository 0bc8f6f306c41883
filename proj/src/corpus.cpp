#include "onionrank/corpus.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "json.hpp"

namespace onionrank::corpus {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

bool read_digits(std::string_view s, std::size_t pos, std::size_t count, int& out) {
    if (pos + count > s.size()) return false;
    int v = 0;
    for (std::size_t i = pos; i < pos + count; ++i) {
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
        v = v * 10 + (s[i] - '0');
    }
    out = v;
    return true;
}

std::optional<std::string> read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) return std::nullopt;
    return ss.str();
}

}  // namespace

std::optional<Timestamp> parse_rfc3339(std::string_view s) {
    using namespace std::chrono;
    s = trim(s);
    int y, mo, d, h = 0, mi = 0, sec = 0;
    if (!read_digits(s, 0, 4, y) || s.size() < 10 || s[4] != '-' || !read_digits(s, 5, 2, mo) ||
        s[7] != '-' || !read_digits(s, 8, 2, d))
        return std::nullopt;
    year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
    if (!ymd.ok()) return std::nullopt;
    std::size_t pos = 10;
    long offset_minutes = 0;
    if (pos < s.size()) {
        if (s[pos] != 'T' && s[pos] != 't' && s[pos] != ' ') return std::nullopt;
        if (!read_digits(s, pos + 1, 2, h) || s.size() < pos + 9 || s[pos + 3] != ':' ||
            !read_digits(s, pos + 4, 2, mi) || s[pos + 6] != ':' || !read_digits(s, pos + 7, 2, sec))
            return std::nullopt;
        if (h > 23 || mi > 59 || sec > 60) return std::nullopt;
        pos += 9;
        if (pos < s.size() && s[pos] == '.') {
            ++pos;
            while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
        }
        if (pos >= s.size()) return std::nullopt;
        if (s[pos] == 'Z' || s[pos] == 'z') {
            ++pos;
        } else if (s[pos] == '+' || s[pos] == '-') {
            int oh, om;
            if (!read_digits(s, pos + 1, 2, oh) || s.size() < pos + 6 || s[pos + 3] != ':' ||
                !read_digits(s, pos + 4, 2, om))
                return std::nullopt;
            offset_minutes = (s[pos] == '+' ? 1 : -1) * (oh * 60L + om);
            pos += 6;
        } else {
            return std::nullopt;
        }
        if (pos != s.size()) return std::nullopt;
    }
    sys_seconds t = sys_days{ymd} + hours{h} + minutes{mi} + seconds{sec};
    return t - minutes{offset_minutes};
}

std::string format_rfc3339(Timestamp t) {
    using namespace std::chrono;
    auto day_point = floor<days>(t);
    year_month_day ymd{day_point};
    hh_mm_ss<seconds> hms{t - day_point};
    char buf[96];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02ld:%02ld:%02ldZ", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<long>(hms.hours().count()), static_cast<long>(hms.minutes().count()),
                  static_cast<long>(hms.seconds().count()));
    return buf;
}

std::string Domain::text(bool landing_only) const {
    std::string out;
    for (const auto& p : scoped_pages(landing_only)) {
        if (!out.empty()) out.push_back('\n');
        out += p.visible_text();
    }
    return out;
}

const PageDocument& Domain::landing_page() const {
    for (const auto& p : pages)
        if (p.page_id == "index") return p;
    return pages.front();
}

std::span<const PageDocument> Domain::scoped_pages(bool landing_only) const {
    if (!landing_only || pages.empty()) return pages;
    const PageDocument& landing = landing_page();
    return {&landing, 1};
}

void IngestReport::write(std::ostream& out) const {
    out << "ingest: " << domains_loaded << " domains, " << pages_loaded << " pages loaded\n";
    out << "ingest: " << domain_errors.size() << " domain errors, " << skipped_pages.size()
        << " pages skipped\n";
    for (const auto& w : warnings) out << "  warning: " << w << '\n';
    for (const auto& e : domain_errors) out << "  domain error: " << e << '\n';
    for (const auto& s : skipped_pages) out << "  skipped page: " << s << '\n';
}

const Domain* Corpus::find(std::string_view domain_id) const {
    auto it = std::lower_bound(domains.begin(), domains.end(), domain_id,
                               [](const Domain& d, std::string_view id) { return d.domain_id < id; });
    if (it == domains.end() || it->domain_id != domain_id) return nullptr;
    return &*it;
}

std::vector<std::string> Corpus::domain_ids() const {
    std::vector<std::string> ids;
    ids.reserve(domains.size());
    for (const auto& d : domains) ids.push_back(d.domain_id);
    return ids;
}

IngestResult ingest_corpus(const fs::path& root) {
    if (!fs::is_directory(root)) throw DataError("corpus root is not a directory: " + root.string());

    std::vector<fs::path> dirs;
    for (const auto& entry : fs::directory_iterator(root))
        if (entry.is_directory()) dirs.push_back(entry.path());
    std::sort(dirs.begin(), dirs.end());

    IngestResult result;
    auto& report = result.report;
    if (dirs.empty()) report.warnings.push_back("no domain directories under " + root.string());

    for (const auto& dir : dirs) {
        Domain dom;
        dom.domain_id = dir.filename().string();
        const std::string& id = dom.domain_id;

        auto meta_text = read_file(dir / "meta.json");
        if (!meta_text) {
            report.domain_errors.push_back(id + ": missing meta.json");
            continue;
        }
        json meta = json::parse(*meta_text, nullptr, false);
        if (meta.is_discarded() || !meta.is_object()) {
            report.domain_errors.push_back(id + ": meta.json is not a JSON object");
            continue;
        }
        if (!meta.contains("address") || !meta["address"].is_string() ||
            trim(meta["address"].get<std::string>()).empty()) {
            report.domain_errors.push_back(id + ": meta.json lacks a non-empty \"address\"");
            continue;
        }
        dom.address = std::string(trim(meta["address"].get<std::string>()));
        std::optional<Timestamp> scraped;
        if (meta.contains("scrape_time") && meta["scrape_time"].is_string())
            scraped = parse_rfc3339(meta["scrape_time"].get<std::string>());
        if (!scraped) {
            report.domain_errors.push_back(id + ": meta.json lacks a valid RFC-3339 \"scrape_time\"");
            continue;
        }
        dom.scrape_time = *scraped;

        std::vector<fs::path> files;
        if (fs::is_directory(dir / "pages")) {
            for (const auto& entry : fs::directory_iterator(dir / "pages"))
                if (entry.is_regular_file() && entry.path().extension() == ".html")
                    files.push_back(entry.path());
        }
        std::sort(files.begin(), files.end());

        for (const auto& file : files) {
            std::string page_id = file.stem().string();
            auto raw = read_file(file);
            if (!raw) {
                report.skipped_pages.push_back(id + "/" + page_id + ": unreadable");
                continue;
            }
            try {
                PageDocument page{page_id, *raw, html::parse_page(*raw)};
                dom.pages.push_back(std::move(page));
            } catch (const html::ParseError& e) {
                report.skipped_pages.push_back(id + "/" + page_id + ": " + e.what());
            }
        }
        if (dom.pages.empty()) {
            report.domain_errors.push_back(id + ": no readable pages");
            continue;
        }
        report.pages_loaded += dom.pages.size();
        result.corpus.domains.push_back(std::move(dom));
    }
    report.domains_loaded = result.corpus.domains.size();
    return result;
}

std::string serialize(const Corpus& corpus) {
    json out = json::array();
    for (const auto& d : corpus.domains) {
        json pages = json::array();
        for (const auto& p : d.pages) {
            json links = json::array();
            for (const auto& l : p.hyperlinks()) links.push_back({l.href, l.anchor_text});
            pages.push_back(
                {{"page_id", p.page_id}, {"visible_text", p.visible_text()}, {"hyperlinks", links}});
        }
        out.push_back({{"domain_id", d.domain_id},
                       {"address", d.address},
                       {"scrape_time", format_rfc3339(d.scrape_time)},
                       {"pages", pages}});
    }
    return out.dump(1);
}

std::string href_host(std::string_view href) {
    std::string s = to_lower(trim(href));
    std::string_view rest;
    if (s.starts_with("//")) {
        rest = std::string_view(s).substr(2);
    } else {
        auto colon = s.find(':');
        auto slash = s.find('/');
        if (colon == std::string::npos || (slash != std::string::npos && slash < colon))
            return {};  // relative reference
        std::string_view scheme = std::string_view(s).substr(0, colon);
        if (scheme != "http" && scheme != "https") return {};
        if (s.compare(colon, 3, "://") != 0) return {};
        rest = std::string_view(s).substr(colon + 3);
    }
    auto end = rest.find_first_of("/?#");
    std::string_view authority = rest.substr(0, end);
    if (auto at = authority.rfind('@'); at != std::string_view::npos)
        authority = authority.substr(at + 1);
    if (auto colon = authority.find(':'); colon != std::string_view::npos) {
        std::string_view port = authority.substr(colon + 1);
        if (!std::all_of(port.begin(), port.end(),
                         [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
            return {};
        authority = authority.substr(0, colon);
    }
    while (!authority.empty() && authority.back() == '.') authority.remove_suffix(1);
    if (authority.empty()) return {};
    for (char c : authority) {
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '.')) return {};
    }
    if (authority.starts_with("www.")) authority.remove_prefix(4);
    return std::string(authority);
}

std::string host_key(std::string_view host) {
    std::string k = to_lower(trim(host));
    while (!k.empty() && k.back() == '.') k.pop_back();
    if (k.starts_with("www.")) k.erase(0, 4);
    if (k.ends_with(".onion")) k.erase(k.size() - 6);
    return k;
}

graph::Digraph derive_link_graph(const Corpus& corpus) {
    graph::Digraph g(corpus.domain_ids());
    std::map<std::string, graph::NodeId> by_host;
    for (graph::NodeId i = 0; i < corpus.domains.size(); ++i)
        by_host.emplace(host_key(corpus.domains[i].address), i);

    for (graph::NodeId src = 0; src < corpus.domains.size(); ++src) {
        for (const auto& page : corpus.domains[src].pages) {
            for (const auto& link : page.hyperlinks()) {
                std::string host = href_host(link.href);
                if (host.empty()) continue;
                auto it = by_host.find(host_key(host));
                if (it != by_host.end()) g.add_edge(src, it->second);
            }
        }
    }
    return g;
}

namespace {

constexpr std::array<std::pair<VisualCategory, std::string_view>, 9> kCategoryNames{{
    {VisualCategory::CounterfeitCreditCards, "Counterfeit Credit Cards"},
    {VisualCategory::CounterfeitMoney, "Counterfeit Money"},
    {VisualCategory::CounterfeitPersonalIdentification, "Counterfeit Personal Identification"},
    {VisualCategory::Cryptocurrency, "Cryptocurrency"},
    {VisualCategory::Drugs, "Drugs"},
    {VisualCategory::Pornography, "Pornography"},
    {VisualCategory::Violence, "Violence"},
    {VisualCategory::Hacking, "Hacking"},
    {VisualCategory::Others, "Others"},
}};

std::string normalize_category(std::string_view s) {
    std::string t = to_lower(s);
    for (char& c : t)
        if (c == '_' || c == '-') c = ' ';
    return collapse_whitespace(t);
}

}  // namespace

std::optional<VisualCategory> parse_visual_category(std::string_view name) {
    std::string key = normalize_category(name);
    for (const auto& [cat, n] : kCategoryNames)
        if (normalize_category(n) == key) return cat;
    return std::nullopt;
}

std::string_view visual_category_name(VisualCategory c) {
    for (const auto& [cat, n] : kCategoryNames)
        if (cat == c) return n;
    return "Others";
}

VisualLoadResult parse_visual_records(std::istream& in, std::span<const std::string> domain_ids) {
    VisualLoadResult res;
    for (const auto& id : domain_ids) res.records[id];

    std::string line;
    std::size_t lineno = 0;
    auto reject = [&](const std::string& why) {
        std::string msg = "line " + std::to_string(lineno) + ": " + why;
        std::cerr << "visual records: rejected " << msg << '\n';
        res.rejected.push_back(std::move(msg));
    };
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object()) {
            reject("not a JSON object");
            continue;
        }
        auto str_field = [&](const char* key) -> std::optional<std::string> {
            if (!j.contains(key) || !j[key].is_string()) return std::nullopt;
            return j[key].get<std::string>();
        };
        auto domain = str_field("domain_id");
        auto image = str_field("image_ref");
        auto category = str_field("category");
        if (!domain || !image || !category || !j.contains("confidence") ||
            !j["confidence"].is_number()) {
            reject("missing or mistyped field");
            continue;
        }
        auto cat = parse_visual_category(*category);
        if (!cat) {
            reject("unknown category \"" + *category + "\"");
            continue;
        }
        double conf = j["confidence"].get<double>();
        if (!std::isfinite(conf) || conf < 0.0 || conf > 1.0) {
            reject("confidence " + format_double(conf) + " outside [0,1]");
            continue;
        }
        res.records[*domain].push_back(
            {*domain, *image, *cat, conf, *cat != VisualCategory::Others});
    }
    return res;
}

VisualLoadResult load_visual_records(const fs::path& path, std::span<const std::string> domain_ids) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open visual records file: " + path.string());
    return parse_visual_records(in, domain_ids);
}

}  // namespace onionrank::corpus
