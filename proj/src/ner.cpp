#include "onionrank/ner.hpp"

#include <algorithm>
#include <fstream>
#include <map>

#include "onionrank/common.hpp"
#include "onionrank/graph.hpp"

namespace onionrank::ner {

std::optional<EntityCategory> parse_category(std::string_view s) {
    std::string c = to_lower(trim(s));
    if (c == "per" || c == "person") return EntityCategory::PER;
    if (c == "loc" || c == "location") return EntityCategory::LOC;
    if (c == "org" || c == "organization" || c == "cor" || c == "corporation")
        return EntityCategory::ORG;
    if (c == "prd" || c == "product") return EntityCategory::PRD;
    if (c == "crtv" || c == "creative-work" || c == "creative_work") return EntityCategory::CRTV;
    if (c == "grp" || c == "group") return EntityCategory::GRP;
    return std::nullopt;
}

std::string_view category_name(EntityCategory c) {
    switch (c) {
        case EntityCategory::PER: return "PER";
        case EntityCategory::LOC: return "LOC";
        case EntityCategory::ORG: return "ORG";
        case EntityCategory::PRD: return "PRD";
        case EntityCategory::CRTV: return "CRTV";
        case EntityCategory::GRP: return "GRP";
    }
    return "?";
}

bool Gazetteer::add(std::string_view surface_form, EntityCategory category) {
    auto tokens = tokenize(surface_form);
    if (tokens.empty()) return false;
    std::string key = tokens.front();
    for (std::size_t i = 1; i < tokens.size(); ++i) key += ' ' + tokens[i];
    if (!keys_.insert(key).second) return false;

    std::size_t idx = entries_.size();
    entries_.push_back({tokens, category, key});
    auto& bucket = by_first_[tokens.front()];
    bucket.push_back(idx);
    std::stable_sort(bucket.begin(), bucket.end(), [&](std::size_t a, std::size_t b) {
        return entries_[a].tokens.size() > entries_[b].tokens.size();
    });
    return true;
}

std::vector<EntityMention> Gazetteer::recognize(std::span<const std::string> tokens) const {
    std::vector<EntityMention> mentions;
    std::size_t i = 0;
    while (i < tokens.size()) {
        const Entry* match = nullptr;
        if (auto it = by_first_.find(tokens[i]); it != by_first_.end()) {
            for (std::size_t idx : it->second) {
                const auto& e = entries_[idx];
                if (i + e.tokens.size() > tokens.size()) continue;
                if (std::equal(e.tokens.begin(), e.tokens.end(), tokens.begin() + static_cast<long>(i))) {
                    match = &e;
                    break;
                }
            }
        }
        if (match) {
            mentions.push_back({match->key, match->category, i, i + match->tokens.size()});
            i += match->tokens.size();
        } else {
            ++i;
        }
    }
    return mentions;
}

Gazetteer parse_gazetteer(std::istream& in) {
    Gazetteer g;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty() || line[0] == '#') continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos)
            throw DataError("gazetteer line " + std::to_string(lineno) + ": expected surface<TAB>category");
        auto cat = parse_category(line.substr(tab + 1));
        if (!cat)
            throw DataError("gazetteer line " + std::to_string(lineno) + ": unknown category \"" +
                            line.substr(tab + 1) + "\"");
        g.add(line.substr(0, tab), *cat);
    }
    return g;
}

Gazetteer load_gazetteer(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open gazetteer: " + path.string());
    return parse_gazetteer(in);
}

EmergingIndex build_emerging_index(std::span<const std::vector<EntityMention>> mentions_per_domain) {
    std::map<std::string, graph::NodeId> ids;
    std::vector<std::vector<graph::NodeId>> per_domain;
    for (const auto& mentions : mentions_per_domain) {
        std::vector<graph::NodeId> present;
        for (const auto& m : mentions) {
            if (m.category != EntityCategory::PRD) continue;
            auto [it, inserted] = ids.emplace(m.key, ids.size());
            present.push_back(it->second);
        }
        std::sort(present.begin(), present.end());
        present.erase(std::unique(present.begin(), present.end()), present.end());
        per_domain.push_back(std::move(present));
    }
    EmergingIndex index;
    if (ids.empty()) return index;

    graph::UndirectedGraph g(ids.size());
    for (const auto& present : per_domain) {
        for (std::size_t a = 0; a < present.size(); ++a)
            for (std::size_t b = a + 1; b < present.size(); ++b) {
                g[present[a]].push_back(present[b]);
                g[present[b]].push_back(present[a]);
            }
    }
    for (auto& adj : g) {
        std::sort(adj.begin(), adj.end());
        adj.erase(std::unique(adj.begin(), adj.end()), adj.end());
    }
    auto shells = graph::kshell(g);
    std::size_t lowest = *std::min_element(shells.begin(), shells.end());
    for (const auto& [key, id] : ids)
        if (shells[id] == lowest) index.emerging.insert(key);
    return index;
}

}  // namespace onionrank::ner
