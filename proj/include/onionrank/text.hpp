#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "onionrank/corpus.hpp"

namespace onionrank::text {

/// Sparse L2-normalized tf-idf vector keyed by vocabulary index.
using DocVector = std::map<std::size_t, double>;

struct TfIdfModel {
    std::vector<std::string> vocabulary;        // descending df, ties lexicographic
    std::vector<std::size_t> document_frequency;  // parallel to vocabulary
    std::size_t n_documents = 0;

    /// Vocabulary index of `term`, or vocabulary.size() when absent.
    std::size_t index_of(std::string_view term) const;
    bool contains(std::string_view term) const { return index_of(term) != vocabulary.size(); }

    /// Smoothed inverse document frequency: ln((1+n)/(1+df)) + 1.
    double idf(std::size_t term_index) const;

    /// tf * idf over in-vocabulary tokens, then L2-normalized.
    DocVector vectorize(std::span<const std::string> tokens) const;

    /// Weight of `term` in `vec` (0 when absent).
    double weight(const DocVector& vec, std::string_view term) const;

private:
    friend TfIdfModel build_tfidf_model(std::span<const std::string>, std::size_t, std::size_t);
    std::unordered_map<std::string, std::size_t> index_;
};

/// Keeps the `vocab_size` terms of highest document frequency among terms
/// with df >= min_df. Throws DataError on an empty document set.
TfIdfModel build_tfidf_model(std::span<const std::string> documents, std::size_t vocab_size = 10000,
                             std::size_t min_df = 3);
TfIdfModel build_tfidf_model(const corpus::Corpus& corpus, std::size_t vocab_size = 10000,
                             std::size_t min_df = 3, bool landing_only = false);

/// Unigram word list ranked by descending frequency.
class Lexicon {
public:
    explicit Lexicon(std::vector<std::string> words_by_frequency);

    std::size_t size() const { return words_.size(); }
    bool contains(std::string_view w) const { return rank_.contains(std::string(w)); }
    /// 1-based rank; 0 when absent.
    std::size_t rank(std::string_view w) const;
    /// ln(rank * ln(size)); only meaningful for words in the lexicon.
    double cost(std::string_view w) const;
    std::size_t max_word_length() const { return max_len_; }

private:
    std::vector<std::string> words_;
    std::unordered_map<std::string, std::size_t> rank_;
    std::size_t max_len_ = 0;
};

/// One word per line, most frequent first. Duplicates keep their first rank.
Lexicon load_lexicon(const std::filesystem::path& path);

struct Segment {
    std::string text;
    bool in_lexicon = false;
};

/// Cost per character of a piece that is not a lexicon word.
inline constexpr double kUnknownCharCost = 10.0;

/// Minimum-cost split of `address` (lowercased, ".onion" dropped) into
/// lexicon words and unknown runs. Ties prefer fewer pieces, then the
/// lexicographically smaller piece sequence.
std::vector<Segment> segment_address(std::string_view address, const Lexicon& lexicon);

/// Distinct timestamps found in free text: ISO dates (optionally with
/// time), DD/MM/YYYY falling back to MM/DD/YYYY, and "Month DD, YYYY".
std::vector<corpus::Timestamp> parse_timestamps(std::string_view text);

/// Lowercased, whitespace-collapsed text used for clone detection.
std::string normalize_for_fingerprint(std::string_view text);

/// Hex MD5 digest.
std::string md5_hex(std::string_view data);

/// Fingerprint -> number of domains sharing it.
using CloneIndex = std::unordered_map<std::string, std::size_t>;
CloneIndex build_clone_index(const corpus::Corpus& corpus, bool landing_only = false);
std::string text_fingerprint(std::string_view text);

}  // namespace onionrank::text
