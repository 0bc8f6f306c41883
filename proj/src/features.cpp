#include "onionrank/features.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <regex>
#include <set>

namespace onionrank::features {

std::string_view group_name(FeatureGroup g) {
    switch (g) {
        case FeatureGroup::Text: return "text";
        case FeatureGroup::Ner: return "ner";
        case FeatureGroup::Html: return "html";
        case FeatureGroup::Visual: return "visual";
        case FeatureGroup::Graph: return "graph";
    }
    return "?";
}

std::optional<FeatureGroup> parse_group(std::string_view s) {
    std::string k = to_lower(trim(s));
    for (FeatureGroup g : kAllGroups)
        if (group_name(g) == k) return g;
    return std::nullopt;
}

std::vector<FeatureGroup> parse_groups(std::string_view list) {
    std::set<FeatureGroup> chosen;
    for (const auto& part : split(list, ',')) {
        std::string_view p = trim(part);
        if (p.empty()) continue;
        if (to_lower(p) == "all") {
            chosen.insert(kAllGroups.begin(), kAllGroups.end());
            continue;
        }
        auto g = parse_group(p);
        if (!g) throw DataError("unknown feature group \"" + std::string(p) + "\"");
        chosen.insert(*g);
    }
    if (chosen.empty()) throw DataError("no feature groups selected");
    return {chosen.begin(), chosen.end()};
}

std::string format_groups(std::span<const FeatureGroup> groups) {
    std::string out;
    for (FeatureGroup g : groups) {
        if (!out.empty()) out += ',';
        out += group_name(g);
    }
    return out;
}

std::pair<std::size_t, std::size_t> group_columns(FeatureGroup g) {
    switch (g) {
        case FeatureGroup::Text: return {0, 9};
        case FeatureGroup::Ner: return {9, 19};
        case FeatureGroup::Html: return {19, 27};
        case FeatureGroup::Visual: return {27, 33};
        case FeatureGroup::Graph: return {33, 40};
    }
    return {0, 0};
}

corpus::Timestamp FeatureConfig::recency_threshold() const {
    return reference_date - std::chrono::days{recency_days};
}

namespace {

double sum_weights(const text::TfIdfModel& tfidf, const text::DocVector& vec,
                   const std::set<std::string>& tokens) {
    double s = 0.0;
    for (const auto& t : tokens) s += tfidf.weight(vec, t);
    return s;
}

void add_tokens(std::set<std::string>& into, std::string_view text) {
    for (auto& t : tokenize(text)) into.insert(std::move(t));
}

}  // namespace

TextFeatures extract_text_features(const corpus::Domain& domain, const text::TfIdfModel& tfidf,
                                   const text::CloneIndex& clones, const text::Lexicon& lexicon,
                                   const FeatureConfig& config) {
    TextFeatures f{};
    const std::string body = domain.text(config.landing_only);

    auto stamps = text::parse_timestamps(body);
    const auto threshold = config.recency_threshold();
    f[0] = std::any_of(stamps.begin(), stamps.end(), [&](auto t) { return t >= threshold; }) ? 1.0 : 0.0;
    f[1] = static_cast<double>(stamps.size());

    double words = 0.0, letters = 0.0;
    for (const auto& seg : text::segment_address(domain.address, lexicon)) {
        if (!seg.in_lexicon) continue;
        words += 1.0;
        letters += static_cast<double>(seg.text.size());
    }
    f[2] = words;
    f[3] = letters;

    auto it = clones.find(text::text_fingerprint(body));
    f[4] = it == clones.end() ? 1.0 : static_cast<double>(std::max<std::size_t>(it->second, 1));

    auto tokens = tokenize(body);
    auto vec = tfidf.vectorize(tokens);
    double keyword_num = static_cast<double>(vec.size());
    double keyword_weight = 0.0;
    for (const auto& [idx, w] : vec) keyword_weight += w;
    f[5] = keyword_num;
    f[6] = keyword_weight;
    if (keyword_num > 0.0) {
        f[7] = keyword_weight / keyword_num;
        double total = static_cast<double>(tokens.size());
        f[8] = config.invert_keyword_ratio ? keyword_num / total : total / keyword_num;
    }
    return f;
}

NeFeatures extract_ne_features(const corpus::Domain& domain, const ner::EntityRecognizer& recognizer,
                               const text::TfIdfModel& tfidf, const ner::EmergingIndex& emerging,
                               std::size_t popularity_threshold, bool landing_only) {
    NeFeatures f{};
    auto tokens = tokenize(domain.text(landing_only));
    auto mentions = recognizer.recognize(tokens);
    auto vec = tfidf.vectorize(tokens);

    struct Tally {
        ner::EntityCategory category;
        std::size_t count = 0;
    };
    std::map<std::string, Tally> tally;
    std::size_t emerging_mentions = 0;
    for (const auto& m : mentions) {
        auto [it, _] = tally.try_emplace(m.key, Tally{m.category});
        ++it->second.count;
        if (emerging.contains(m.key)) ++emerging_mentions;
    }

    std::set<std::string> entity_tokens, popular_tokens;
    for (const auto& [key, t] : tally) {
        bool popular = t.count >= popularity_threshold;
        if (popular) f[static_cast<std::size_t>(t.category)] = 1.0;
        for (auto& tok : split(key, ' ')) {
            if (popular) popular_tokens.insert(tok);
            entity_tokens.insert(std::move(tok));
        }
    }
    f[6] = static_cast<double>(mentions.size());
    f[7] = sum_weights(tfidf, vec, entity_tokens);
    f[8] = sum_weights(tfidf, vec, popular_tokens);
    f[9] = static_cast<double>(emerging_mentions);
    return f;
}

namespace {

enum class LinkKind { Internal, External, Ignored };

LinkKind classify_href(std::string_view href, const std::string& own_key) {
    std::string h = to_lower(trim(href));
    if (h.empty() || h.starts_with('#')) return LinkKind::Ignored;
    auto colon = h.find(':');
    auto slash = h.find('/');
    bool has_scheme = colon != std::string::npos && (slash == std::string::npos || colon < slash);
    if (!has_scheme && !h.starts_with("//")) return LinkKind::Internal;  // relative reference
    std::string host = corpus::href_host(h);
    if (host.empty()) return LinkKind::Ignored;  // mailto:, javascript:, malformed
    return corpus::host_key(host) == own_key ? LinkKind::Internal : LinkKind::External;
}

bool looks_like_credential_input(const html::InputTag& in) {
    static const std::regex pattern("login|user|pass|signin", std::regex::icase);
    if (in.type == "password") return true;
    return std::regex_search(in.name, pattern) || std::regex_search(in.id, pattern);
}

bool has_text(const std::vector<std::string>& v) {
    return std::any_of(v.begin(), v.end(), [](const std::string& s) { return !trim(s).empty(); });
}

}  // namespace

HtmlFeatures extract_html_features(const corpus::Domain& domain, const text::TfIdfModel& tfidf,
                                   bool landing_only) {
    HtmlFeatures f{};
    const std::string own_key = corpus::host_key(domain.address);
    std::set<std::string> internal, external, heading_tokens, alt_tokens;
    double images = 0.0;
    bool credential = false, title = false, h1 = false;

    for (const auto& page : domain.scoped_pages(landing_only)) {
        const auto& p = page.parsed;
        for (const auto& link : p.hyperlinks) {
            switch (classify_href(link.href, own_key)) {
                case LinkKind::Internal: internal.insert(link.href); break;
                case LinkKind::External: external.insert(link.href); break;
                case LinkKind::Ignored: break;
            }
        }
        images += static_cast<double>(p.images.size());
        credential = credential ||
                     std::any_of(p.inputs.begin(), p.inputs.end(), looks_like_credential_input);
        title = title || has_text(p.titles);
        h1 = h1 || has_text(p.h1s);
        for (const auto& t : p.titles) add_tokens(heading_tokens, t);
        for (const auto& t : p.h1s) add_tokens(heading_tokens, t);
        for (const auto& img : p.images) add_tokens(alt_tokens, img.alt);
    }

    auto vec = tfidf.vectorize(tokenize(domain.text(landing_only)));
    f[0] = static_cast<double>(internal.size());
    f[1] = static_cast<double>(external.size());
    f[2] = images;
    f[3] = credential ? 1.0 : 0.0;
    f[4] = title ? 1.0 : 0.0;
    f[5] = h1 ? 1.0 : 0.0;
    f[6] = sum_weights(tfidf, vec, heading_tokens);
    f[7] = sum_weights(tfidf, vec, alt_tokens);
    return f;
}

VisualFeatures extract_visual_features(std::span<const corpus::VisualRecord> records) {
    VisualFeatures f{};
    double suspicious = 0.0, noise = 0.0, susp_conf = 0.0, noise_conf = 0.0;
    for (const auto& r : records) {
        if (r.suspicious) {
            suspicious += 1.0;
            susp_conf += r.confidence;
        } else {
            noise += 1.0;
            noise_conf += r.confidence;
        }
    }
    f[0] = suspicious;
    f[1] = noise;
    f[2] = suspicious + noise;
    f[3] = suspicious > 0.0 ? susp_conf / suspicious : 0.0;
    f[4] = noise > 0.0 ? noise_conf / noise : 0.0;
    f[5] = suspicious > noise ? 1.0 : 0.0;
    return f;
}

GraphContext build_graph_context(graph::Digraph g, double torank_alpha, double torank_beta) {
    GraphContext ctx;
    ctx.graph = std::move(g);
    if (ctx.graph.size() == 0) return ctx;
    ctx.centrality = graph::centralities(ctx.graph);
    ctx.torank = graph::torank(ctx.graph, torank_alpha, torank_beta);
    ctx.torank_rank = ctx.torank.ranks(ctx.graph.size());
    return ctx;
}

GraphFeatures extract_graph_features(std::string_view domain_id, const GraphContext& ctx,
                                     std::size_t top_x) {
    GraphFeatures f{};
    graph::NodeId v = ctx.graph.find(std::string(domain_id));
    if (v == ctx.graph.size()) return f;
    f[0] = static_cast<double>(ctx.graph.in(v).size());
    f[1] = static_cast<double>(ctx.graph.out(v).size());
    f[2] = ctx.centrality.closeness[v];
    f[3] = ctx.centrality.betweenness[v];
    f[4] = ctx.centrality.eigenvector[v];
    f[5] = static_cast<double>(ctx.torank_rank[v]);
    f[6] = ctx.torank_rank[v] <= top_x ? 1.0 : 0.0;
    return f;
}

FeatureMatrix FeatureMatrix::select_rows(std::span<const std::size_t> idx) const {
    FeatureMatrix out;
    out.columns = columns;
    out.values.reserve(idx.size() * cols());
    for (std::size_t r : idx) {
        out.row_ids.push_back(row_ids[r]);
        auto row_values = row(r);
        out.values.insert(out.values.end(), row_values.begin(), row_values.end());
    }
    return out;
}

std::size_t FeatureMatrix::find_row(std::string_view id) const {
    for (std::size_t r = 0; r < rows(); ++r)
        if (row_ids[r] == id) return r;
    return rows();
}

void write_csv(std::ostream& out, const FeatureMatrix& m) {
    out << "domain_id";
    for (const auto& c : m.columns) out << ',' << c;
    out << '\n';
    for (std::size_t r = 0; r < m.rows(); ++r) {
        out << m.row_ids[r];
        for (double v : m.row(r)) out << ',' << format_double(v);
        out << '\n';
    }
}

FeatureMatrix read_csv(std::istream& in) {
    FeatureMatrix m;
    std::string line;
    if (!std::getline(in, line)) throw DataError("feature CSV is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto header = split(line, ',');
    if (header.empty() || header[0] != "domain_id")
        throw DataError("feature CSV must start with a domain_id column");
    m.columns.assign(header.begin() + 1, header.end());
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        auto cells = split(line, ',');
        if (cells.size() != header.size())
            throw DataError("feature CSV line " + std::to_string(lineno) + ": expected " +
                            std::to_string(header.size()) + " cells");
        m.row_ids.push_back(cells[0]);
        for (std::size_t c = 1; c < cells.size(); ++c) {
            char* end = nullptr;
            double v = std::strtod(cells[c].c_str(), &end);
            if (cells[c].empty() || end != cells[c].c_str() + cells[c].size())
                throw DataError("feature CSV line " + std::to_string(lineno) + ": bad number \"" +
                                cells[c] + "\"");
            m.values.push_back(v);
        }
    }
    return m;
}

ExtractionInputs prepare_inputs(const corpus::Corpus& corpus, text::Lexicon lexicon,
                                const ner::EntityRecognizer& recognizer,
                                corpus::VisualIndex visual, const FeatureConfig& config) {
    ExtractionInputs in{
        text::build_tfidf_model(corpus, config.vocab_size, config.min_df, config.landing_only),
        text::build_clone_index(corpus, config.landing_only),
        std::move(lexicon),
        &recognizer,
        {},
        std::move(visual),
        {},
    };
    std::vector<std::vector<ner::EntityMention>> mentions;
    mentions.reserve(corpus.domains.size());
    for (const auto& d : corpus.domains)
        mentions.push_back(recognizer.recognize(tokenize(d.text(config.landing_only))));
    in.emerging = ner::build_emerging_index(mentions);
    in.graph = build_graph_context(corpus::derive_link_graph(corpus));
    return in;
}

FeatureMatrix assemble_feature_matrix(const corpus::Corpus& corpus, const ExtractionInputs& inputs,
                                      std::span<const FeatureGroup> groups,
                                      const FeatureConfig& config) {
    if (groups.empty()) throw DataError("no feature groups selected");
    std::vector<FeatureGroup> chosen(groups.begin(), groups.end());
    std::sort(chosen.begin(), chosen.end());
    chosen.erase(std::unique(chosen.begin(), chosen.end()), chosen.end());

    FeatureMatrix m;
    for (FeatureGroup g : chosen) {
        auto [first, last] = group_columns(g);
        for (std::size_t c = first; c < last; ++c) m.columns.emplace_back(kFeatureNames[c]);
    }
    m.values.reserve(corpus.domains.size() * m.cols());

    static const std::vector<corpus::VisualRecord> kNoRecords;
    for (const auto& d : corpus.domains) {
        m.row_ids.push_back(d.domain_id);
        auto append = [&](const auto& arr) { m.values.insert(m.values.end(), arr.begin(), arr.end()); };
        for (FeatureGroup g : chosen) {
            switch (g) {
                case FeatureGroup::Text:
                    append(extract_text_features(d, inputs.tfidf, inputs.clones, inputs.lexicon, config));
                    break;
                case FeatureGroup::Ner:
                    append(extract_ne_features(d, *inputs.recognizer, inputs.tfidf, inputs.emerging,
                                               config.popularity_threshold, config.landing_only));
                    break;
                case FeatureGroup::Html:
                    append(extract_html_features(d, inputs.tfidf, config.landing_only));
                    break;
                case FeatureGroup::Visual: {
                    auto it = inputs.visual.find(d.domain_id);
                    append(extract_visual_features(it == inputs.visual.end() ? kNoRecords : it->second));
                    break;
                }
                case FeatureGroup::Graph:
                    append(extract_graph_features(d.domain_id, inputs.graph, config.top_x));
                    break;
            }
        }
    }
    return m;
}

std::pair<FeatureMatrix, StandardizationStats> standardize(
    const FeatureMatrix& m, const std::optional<StandardizationStats>& stats) {
    const std::size_t rows = m.rows(), cols = m.cols();
    StandardizationStats s;
    if (stats) {
        if (stats->mean.size() != cols || stats->stddev.size() != cols)
            throw DataError("standardization stats have " + std::to_string(stats->mean.size()) +
                            " columns, matrix has " + std::to_string(cols));
        s = *stats;
    } else {
        if (rows == 0) throw DataError("cannot fit standardization on an empty matrix");
        s.mean.assign(cols, 0.0);
        s.stddev.assign(cols, 0.0);
        for (std::size_t c = 0; c < cols; ++c) {
            double sum = 0.0;
            for (std::size_t r = 0; r < rows; ++r) sum += m.at(r, c);
            double mean = sum / static_cast<double>(rows);
            double ss = 0.0;
            for (std::size_t r = 0; r < rows; ++r) ss += (m.at(r, c) - mean) * (m.at(r, c) - mean);
            s.mean[c] = mean;
            s.stddev[c] = std::sqrt(ss / static_cast<double>(rows));
        }
    }
    FeatureMatrix out = m;
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c)
            out.at(r, c) = s.stddev[c] > 0.0 ? (m.at(r, c) - s.mean[c]) / s.stddev[c] : 0.0;
    return {std::move(out), std::move(s)};
}

}  // namespace onionrank::features
