#pragma once

#include <chrono>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "onionrank/graph.hpp"
#include "onionrank/html.hpp"

namespace onionrank::corpus {

using Timestamp = std::chrono::sys_seconds;

/// Parses RFC-3339 (`2019-03-01T12:00:00Z`, offsets and fractional seconds
/// accepted) into UTC. A bare date means midnight UTC.
std::optional<Timestamp> parse_rfc3339(std::string_view s);
std::string format_rfc3339(Timestamp t);

struct PageDocument {
    std::string page_id;
    std::string raw_html;
    html::ParsedPage parsed;

    const std::string& visible_text() const { return parsed.visible_text; }
    const std::vector<html::Hyperlink>& hyperlinks() const { return parsed.hyperlinks; }
};

struct Domain {
    std::string domain_id;
    std::string address;
    Timestamp scrape_time{};
    std::vector<PageDocument> pages;  // sorted by page_id

    /// Visible text of all pages joined by newlines, in page_id order. With
    /// `landing_only`, just the landing page (see landing_page()).
    std::string text(bool landing_only = false) const;

    /// Page named "index" if present, else the first page.
    const PageDocument& landing_page() const;

    /// Pages considered for features under the given page scope.
    std::span<const PageDocument> scoped_pages(bool landing_only) const;
};

struct IngestReport {
    std::size_t domains_loaded = 0;
    std::size_t pages_loaded = 0;
    std::vector<std::string> domain_errors;  // "<id>: reason"
    std::vector<std::string> skipped_pages;  // "<id>/<page>: reason"
    std::vector<std::string> warnings;

    void write(std::ostream& out) const;
};

/// Immutable after ingestion; domains sorted by domain_id.
struct Corpus {
    std::vector<Domain> domains;

    const Domain* find(std::string_view domain_id) const;
    std::vector<std::string> domain_ids() const;
};

struct IngestResult {
    Corpus corpus;
    IngestReport report;
};

/// Reads `<root>/<domain_id>/meta.json` and `<root>/<domain_id>/pages/*.html`.
/// Per-domain problems end up in the report; only a missing root throws.
IngestResult ingest_corpus(const std::filesystem::path& root);

/// Stable JSON serialization (used to check ingestion determinism).
std::string serialize(const Corpus& corpus);

/// Host part of an href, lowercased, without scheme, userinfo, port, path
/// or leading "www.". Empty for relative or malformed references.
std::string href_host(std::string_view href);

/// Comparable key for a host or address: lowercase, no "www.", no ".onion".
std::string host_key(std::string_view host);

/// Directed domain-level graph; nodes are domain ids in corpus order.
graph::Digraph derive_link_graph(const Corpus& corpus);

enum class VisualCategory {
    CounterfeitCreditCards,
    CounterfeitMoney,
    CounterfeitPersonalIdentification,
    Cryptocurrency,
    Drugs,
    Pornography,
    Violence,
    Hacking,
    Others,
};

std::optional<VisualCategory> parse_visual_category(std::string_view name);
std::string_view visual_category_name(VisualCategory c);

struct VisualRecord {
    std::string domain_id;
    std::string image_ref;
    VisualCategory category = VisualCategory::Others;
    double confidence = 0.0;
    bool suspicious = false;  // every category except Others
};

using VisualIndex = std::map<std::string, std::vector<VisualRecord>>;

struct VisualLoadResult {
    VisualIndex records;
    std::vector<std::string> rejected;  // "line N: reason"
};

/// Newline-delimited JSON sidecar. Every id in `domain_ids` gets an entry,
/// possibly empty. Invalid records are rejected and logged to stderr.
VisualLoadResult load_visual_records(const std::filesystem::path& path,
                                     std::span<const std::string> domain_ids);
VisualLoadResult parse_visual_records(std::istream& in, std::span<const std::string> domain_ids);

}  // namespace onionrank::corpus
