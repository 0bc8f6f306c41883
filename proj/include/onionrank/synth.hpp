#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "onionrank/corpus.hpp"
#include "onionrank/groundtruth.hpp"

namespace onionrank::synth {

struct SynthConfig {
    std::size_t n_domains = 290;
    std::uint64_t seed = 0;
    double sigma = 0.1;          // per-answer flip probability of each simulated annotator
    double link_density = 0.02;  // base probability of a domain-to-domain link
    double signal = 0.8;         // weight of the latent value in each feature family, rest is noise
    std::size_t n_annotators = 13;
    corpus::Timestamp scrape_time = corpus::Timestamp{std::chrono::seconds{1551398400}};  // 2019-03-01

    /// Throws DataError when out of range.
    void validate() const;
};

struct SynthDomain {
    std::string domain_id;
    std::string address;
    double latent = 0.0;    // uniform on [0, 23]
    int planted_gain = 0;   // round(latent)
    gt::Answers planted_answers{};
};

struct SynthOutput {
    std::vector<SynthDomain> domains;                          // sorted by id
    std::vector<std::pair<std::string, std::string>> edges;   // planted links, sorted
    std::vector<gt::AnnotationRecord> annotations;
};

/// Writes into `out_dir`:
///   corpus/<id>/meta.json, corpus/<id>/pages/*.html
///   annotations.jsonl, planted.csv, planted_edges.tsv,
///   visual.jsonl, gazetteer.tsv, lexicon.txt
/// Output is byte-identical for equal configs.
SynthOutput generate_corpus(const SynthConfig& config, const std::filesystem::path& out_dir);

}  // namespace onionrank::synth
