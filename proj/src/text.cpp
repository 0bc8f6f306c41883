#include "onionrank/text.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <regex>
#include <set>

namespace onionrank::text {

std::size_t TfIdfModel::index_of(std::string_view term) const {
    auto it = index_.find(std::string(term));
    return it == index_.end() ? vocabulary.size() : it->second;
}

double TfIdfModel::idf(std::size_t term_index) const {
    double n = static_cast<double>(n_documents);
    double df = static_cast<double>(document_frequency[term_index]);
    return std::log((1.0 + n) / (1.0 + df)) + 1.0;
}

DocVector TfIdfModel::vectorize(std::span<const std::string> tokens) const {
    DocVector vec;
    for (const auto& t : tokens) {
        std::size_t idx = index_of(t);
        if (idx != vocabulary.size()) vec[idx] += 1.0;
    }
    double norm = 0.0;
    for (auto& [idx, w] : vec) {
        w *= idf(idx);
        norm += w * w;
    }
    norm = std::sqrt(norm);
    if (norm > 0.0)
        for (auto& [idx, w] : vec) w /= norm;
    return vec;
}

double TfIdfModel::weight(const DocVector& vec, std::string_view term) const {
    std::size_t idx = index_of(term);
    if (idx == vocabulary.size()) return 0.0;
    auto it = vec.find(idx);
    return it == vec.end() ? 0.0 : it->second;
}

TfIdfModel build_tfidf_model(std::span<const std::string> documents, std::size_t vocab_size,
                             std::size_t min_df) {
    if (documents.empty()) throw DataError("tf-idf: cannot build a model from an empty corpus");
    std::unordered_map<std::string, std::size_t> df;
    for (const auto& doc : documents) {
        auto tokens = tokenize(doc);
        std::sort(tokens.begin(), tokens.end());
        tokens.erase(std::unique(tokens.begin(), tokens.end()), tokens.end());
        for (auto& t : tokens) ++df[t];
    }
    std::vector<std::pair<std::string, std::size_t>> terms;
    for (auto& [t, c] : df)
        if (c >= min_df) terms.emplace_back(t, c);
    std::sort(terms.begin(), terms.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (terms.size() > vocab_size) terms.resize(vocab_size);

    TfIdfModel model;
    model.n_documents = documents.size();
    for (auto& [t, c] : terms) {
        model.index_.emplace(t, model.vocabulary.size());
        model.vocabulary.push_back(t);
        model.document_frequency.push_back(c);
    }
    return model;
}

TfIdfModel build_tfidf_model(const corpus::Corpus& corpus, std::size_t vocab_size,
                             std::size_t min_df, bool landing_only) {
    std::vector<std::string> docs;
    docs.reserve(corpus.domains.size());
    for (const auto& d : corpus.domains) docs.push_back(d.text(landing_only));
    return build_tfidf_model(docs, vocab_size, min_df);
}

Lexicon::Lexicon(std::vector<std::string> words_by_frequency) {
    for (auto& w : words_by_frequency) {
        std::string word = to_lower(trim(w));
        if (word.empty() || rank_.contains(word)) continue;
        max_len_ = std::max(max_len_, word.size());
        words_.push_back(word);
        rank_.emplace(std::move(word), words_.size());
    }
    if (words_.empty()) throw DataError("lexicon is empty");
}

std::size_t Lexicon::rank(std::string_view w) const {
    auto it = rank_.find(std::string(w));
    return it == rank_.end() ? 0 : it->second;
}

double Lexicon::cost(std::string_view w) const {
    // A one-word lexicon would give ln(0); treat it as two words.
    double log_size = std::log(static_cast<double>(std::max<std::size_t>(words_.size(), 2)));
    return std::log(static_cast<double>(rank(w)) * log_size);
}

Lexicon load_lexicon(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open lexicon: " + path.string());
    std::vector<std::string> words;
    std::string line;
    while (std::getline(in, line)) words.push_back(line);
    return Lexicon(std::move(words));
}

std::vector<Segment> segment_address(std::string_view address, const Lexicon& lexicon) {
    std::string s = to_lower(trim(address));
    if (s.ends_with(".onion")) s.erase(s.size() - 6);
    const std::size_t n = s.size();
    if (n == 0) return {};

    struct Best {
        double cost = 0.0;
        std::size_t pieces = 0;
        std::vector<std::string> seq;
    };
    constexpr double kTieEps = 1e-9;
    std::vector<Best> best(n + 1);
    for (std::size_t i = n; i-- > 0;) {
        bool have = false;
        Best chosen;
        for (std::size_t j = i + 1; j <= n; ++j) {
            std::string piece = s.substr(i, j - i);
            double c = lexicon.contains(piece) ? lexicon.cost(piece)
                                               : kUnknownCharCost * static_cast<double>(piece.size());
            double total = c + best[j].cost;
            std::size_t pieces = 1 + best[j].pieces;
            bool better;
            if (!have) {
                better = true;
            } else if (total < chosen.cost - kTieEps) {
                better = true;
            } else if (total > chosen.cost + kTieEps) {
                better = false;
            } else if (pieces != chosen.pieces) {
                better = pieces < chosen.pieces;
            } else {
                // Same cost and length: compare [piece, rest...] lexicographically.
                std::vector<std::string> cand;
                cand.reserve(pieces);
                cand.push_back(piece);
                cand.insert(cand.end(), best[j].seq.begin(), best[j].seq.end());
                better = cand < chosen.seq;
            }
            if (better) {
                have = true;
                chosen.cost = total;
                chosen.pieces = pieces;
                chosen.seq.clear();
                chosen.seq.push_back(piece);
                chosen.seq.insert(chosen.seq.end(), best[j].seq.begin(), best[j].seq.end());
            }
        }
        best[i] = std::move(chosen);
    }

    std::vector<Segment> out;
    for (auto& w : best[0].seq) {
        bool known = lexicon.contains(w);
        out.push_back({std::move(w), known});
    }
    return out;
}

namespace {

using corpus::Timestamp;

std::optional<Timestamp> make_time(int y, int m, int d, int hh = 0, int mm = 0, int ss = 0) {
    using namespace std::chrono;
    if (m < 1 || m > 12 || d < 1 || d > 31) return std::nullopt;
    year_month_day ymd{year{y}, month{static_cast<unsigned>(m)}, day{static_cast<unsigned>(d)}};
    if (!ymd.ok() || hh > 23 || mm > 59 || ss > 60) return std::nullopt;
    return sys_days{ymd} + hours{hh} + minutes{mm} + seconds{ss};
}

int month_from_name(std::string name) {
    static const char* kMonths[] = {"jan", "feb", "mar", "apr", "may", "jun",
                                    "jul", "aug", "sep", "oct", "nov", "dec"};
    name = to_lower(name);
    for (int i = 0; i < 12; ++i)
        if (name.starts_with(kMonths[i])) return i + 1;
    return 0;
}

}  // namespace

std::vector<corpus::Timestamp> parse_timestamps(std::string_view text) {
    static const std::regex iso(
        R"((?:^|[^0-9])(\d{4})-(\d{1,2})-(\d{1,2})(?:[T ](\d{1,2}):(\d{2})(?::(\d{2}))?)?)");
    static const std::regex slashed(R"((?:^|[^0-9/])(\d{1,2})/(\d{1,2})/(\d{4})(?![0-9]))");
    static const std::regex named(
        R"(\b(january|february|march|april|may|june|july|august|september|october|november|december|jan|feb|mar|apr|jun|jul|aug|sept|sep|oct|nov|dec)\.?\s+(\d{1,2})(?:st|nd|rd|th)?,?\s+(\d{4})(?![0-9]))",
        std::regex::icase);

    std::set<Timestamp> found;
    const std::string s(text);
    auto to_int = [](const std::ssub_match& m) { return m.matched ? std::stoi(m.str()) : 0; };

    for (std::sregex_iterator it(s.begin(), s.end(), iso), end; it != end; ++it) {
        const auto& m = *it;
        if (auto t = make_time(to_int(m[1]), to_int(m[2]), to_int(m[3]), to_int(m[4]), to_int(m[5]),
                               to_int(m[6])))
            found.insert(*t);
    }
    for (std::sregex_iterator it(s.begin(), s.end(), slashed), end; it != end; ++it) {
        const auto& m = *it;
        int a = to_int(m[1]), b = to_int(m[2]), y = to_int(m[3]);
        if (auto t = make_time(y, b, a)) {
            found.insert(*t);  // DD/MM/YYYY
        } else if (auto u = make_time(y, a, b)) {
            found.insert(*u);  // MM/DD/YYYY
        }
    }
    for (std::sregex_iterator it(s.begin(), s.end(), named), end; it != end; ++it) {
        const auto& m = *it;
        if (auto t = make_time(to_int(m[3]), month_from_name(m[1].str()), to_int(m[2])))
            found.insert(*t);
    }
    return {found.begin(), found.end()};
}

std::string normalize_for_fingerprint(std::string_view text) {
    return collapse_whitespace(to_lower(text));
}

std::string md5_hex(std::string_view data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_md5(), nullptr) != 1)
        throw std::runtime_error("MD5 digest failed");
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(kHex[digest[i] >> 4]);
        out.push_back(kHex[digest[i] & 0xF]);
    }
    return out;
}

std::string text_fingerprint(std::string_view text) {
    return md5_hex(normalize_for_fingerprint(text));
}

CloneIndex build_clone_index(const corpus::Corpus& corpus, bool landing_only) {
    CloneIndex index;
    for (const auto& d : corpus.domains) ++index[text_fingerprint(d.text(landing_only))];
    return index;
}

}  // namespace onionrank::text
