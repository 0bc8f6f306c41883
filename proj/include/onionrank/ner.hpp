#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace onionrank::ner {

/// The six categories behind the popular_NE_* flags. Corporations (COR)
/// are folded into ORG when a gazetteer is loaded.
enum class EntityCategory { PER, LOC, ORG, PRD, CRTV, GRP };
inline constexpr std::size_t kCategoryCount = 6;
inline constexpr std::array<EntityCategory, kCategoryCount> kCategories = {
    EntityCategory::PER, EntityCategory::LOC,  EntityCategory::ORG,
    EntityCategory::PRD, EntityCategory::CRTV, EntityCategory::GRP,
};

std::optional<EntityCategory> parse_category(std::string_view s);
std::string_view category_name(EntityCategory c);

struct EntityMention {
    std::string key;  // normalized surface form: tokens joined by single spaces
    EntityCategory category;
    std::size_t token_begin;
    std::size_t token_end;
};

/// Anything that finds entity mentions in a token stream.
class EntityRecognizer {
public:
    virtual ~EntityRecognizer() = default;
    virtual std::vector<EntityMention> recognize(std::span<const std::string> tokens) const = 0;
};

/// Dictionary NER: left-to-right scan taking the longest surface form that
/// starts at each token. Matching is case-insensitive on token boundaries.
class Gazetteer : public EntityRecognizer {
public:
    /// Returns false when the surface form is empty or already present.
    bool add(std::string_view surface_form, EntityCategory category);
    std::size_t size() const { return entries_.size(); }

    std::vector<EntityMention> recognize(std::span<const std::string> tokens) const override;

private:
    struct Entry {
        std::vector<std::string> tokens;
        EntityCategory category;
        std::string key;
    };
    std::vector<Entry> entries_;
    std::set<std::string> keys_;
    // first token -> entry indices, longest first
    std::unordered_map<std::string, std::vector<std::size_t>> by_first_;
};

/// UTF-8 TSV, `surface_form<TAB>category`. Throws DataError for a missing
/// file, a malformed line or an unknown category.
Gazetteer load_gazetteer(const std::filesystem::path& path);
Gazetteer parse_gazetteer(std::istream& in);

/// PRD entity keys judged emerging: nodes of the lowest k-shell in the
/// corpus-wide PRD co-occurrence graph.
struct EmergingIndex {
    std::set<std::string> emerging;
    bool contains(const std::string& key) const { return emerging.contains(key); }
};

/// `mentions_per_domain[i]` holds the mentions found in domain i.
EmergingIndex build_emerging_index(std::span<const std::vector<EntityMention>> mentions_per_domain);

}  // namespace onionrank::ner
