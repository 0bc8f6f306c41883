#include <cmath>
#include <random>

#include "doctest.h"
#include "onionrank/text.hpp"
#include "test_util.hpp"

using namespace onionrank;
using namespace onionrank::text;

namespace {

corpus::Timestamp ymd(int y, unsigned m, unsigned d, int h = 0, int mi = 0) {
    using namespace std::chrono;
    return sys_days(year{y} / month{m} / day{d}) + hours{h} + minutes{mi};
}

struct Split {
    double cost;
    std::size_t pieces;
    std::vector<std::string> seq;
};

// Every way to cut `s` into pieces, scored like the segmenter.
Split best_split_by_enumeration(const std::string& s, const Lexicon& lex) {
    const std::size_t n = s.size();
    Split best{1e300, 0, {}};
    for (std::uint32_t mask = 0; mask < (1u << (n - 1)); ++mask) {
        Split cur{0.0, 0, {}};
        std::size_t start = 0;
        for (std::size_t i = 1; i <= n; ++i) {
            if (i == n || (mask >> (i - 1)) & 1u) {
                std::string piece = s.substr(start, i - start);
                cur.cost += lex.contains(piece) ? lex.cost(piece) : kUnknownCharCost * double(piece.size());
                cur.seq.push_back(piece);
                start = i;
            }
        }
        cur.pieces = cur.seq.size();
        bool better = cur.cost < best.cost - 1e-9 ||
                      (std::abs(cur.cost - best.cost) <= 1e-9 &&
                       (cur.pieces < best.pieces || (cur.pieces == best.pieces && cur.seq < best.seq)));
        if (better) best = cur;
    }
    return best;
}

}  // namespace

TEST_CASE("tf-idf on a hand-computed table") {
    std::vector<std::string> docs{"a b", "a c", "a b b", "d"};
    auto m = build_tfidf_model(docs, 10, 1);
    CHECK(m.vocabulary == std::vector<std::string>{"a", "b", "c", "d"});
    CHECK(m.document_frequency == std::vector<std::size_t>{3, 2, 1, 1});
    CHECK(m.idf(0) == doctest::Approx(std::log(5.0 / 4.0) + 1));
    CHECK(m.idf(1) == doctest::Approx(std::log(5.0 / 3.0) + 1));

    std::vector<std::string> tokens{"a", "b", "b", "zzz"};
    auto v = m.vectorize(tokens);
    double wa = std::log(5.0 / 4.0) + 1, wb = 2 * (std::log(5.0 / 3.0) + 1);
    double norm = std::sqrt(wa * wa + wb * wb);
    CHECK(m.weight(v, "a") == doctest::Approx(wa / norm));
    CHECK(m.weight(v, "b") == doctest::Approx(wb / norm));
    CHECK(m.weight(v, "c") == 0.0);
    CHECK(m.weight(v, "zzz") == 0.0);

    // min_df and vocabulary cap
    auto m2 = build_tfidf_model(docs, 1, 2);
    CHECK(m2.vocabulary == std::vector<std::string>{"a"});
    auto m3 = build_tfidf_model(docs, 10, 2);
    CHECK(m3.vocabulary == std::vector<std::string>{"a", "b"});

    std::vector<std::string> none;
    CHECK_THROWS_AS(build_tfidf_model(none, 10, 1), DataError);
    CHECK(m.vectorize(none).empty());
}

TEST_CASE("tf-idf vectors are unit length") {
    std::mt19937_64 rng(4);
    std::vector<std::string> docs;
    for (int d = 0; d < 30; ++d) {
        std::string doc;
        for (int w = 0; w < 20; ++w) doc += "w" + std::to_string(rng() % 15) + " ";
        docs.push_back(doc);
    }
    auto m = build_tfidf_model(docs, 100, 1);
    for (const auto& d : docs) {
        auto v = m.vectorize(tokenize(d));
        double s = 0;
        for (auto& [i, w] : v) {
            CHECK(w > 0);
            s += w * w;
        }
        CHECK(s == doctest::Approx(1.0));
    }
}

TEST_CASE("lexicon") {
    Lexicon lex({"The", "shop", "the", " drug "});
    CHECK(lex.size() == 3);
    CHECK(lex.rank("the") == 1);
    CHECK(lex.rank("drug") == 3);
    CHECK(lex.rank("nope") == 0);
    CHECK(lex.cost("shop") == doctest::Approx(std::log(2 * std::log(3.0))));
    CHECK(lex.max_word_length() == 4);
    CHECK_THROWS_AS(Lexicon(std::vector<std::string>{"", "  "}), DataError);
}

TEST_CASE("address segmentation") {
    Lexicon lex({"the", "best", "drug", "shop", "drugs", "hop", "be", "st", "a"});
    auto seg = segment_address("BestDrugShop.onion", lex);
    REQUIRE(seg.size() == 3);
    CHECK(seg[0].text == "best");
    CHECK(seg[1].text == "drug");
    CHECK(seg[2].text == "shop");
    for (auto& s : seg) CHECK(s.in_lexicon);

    auto mixed = segment_address("xq7bestzz", lex);
    REQUIRE(mixed.size() == 3);
    CHECK(mixed[0].text == "xq7");
    CHECK_FALSE(mixed[0].in_lexicon);
    CHECK(mixed[1].text == "best");
    CHECK(mixed[2].text == "zz");
    CHECK(segment_address("", lex).empty());
}

TEST_CASE("segmentation is optimal over every split") {
    Lexicon lex({"a", "ab", "b", "ba", "abc", "c", "bc", "cab", "ca"});
    std::mt19937_64 rng(6);
    for (int t = 0; t < 300; ++t) {
        std::size_t n = 1 + rng() % 12;
        std::string s;
        for (std::size_t i = 0; i < n; ++i) s.push_back("abcx"[rng() % 4]);
        auto want = best_split_by_enumeration(s, lex);
        auto got = segment_address(s, lex);
        std::vector<std::string> seq;
        for (auto& g : got) seq.push_back(g.text);
        REQUIRE(seq == want.seq);
    }
}

TEST_CASE("timestamps in free text") {
    auto ts = parse_timestamps("Updated 2019-02-14 and again 2019-02-14T10:30, then 03/04/2018.");
    REQUIRE(ts.size() == 3);
    CHECK(ts[0] == ymd(2018, 4, 3));  // day first
    CHECK(ts[1] == ymd(2019, 2, 14));
    CHECK(ts[2] == ymd(2019, 2, 14, 10, 30));

    // 12/25 cannot be day/month, so month/day applies
    auto us = parse_timestamps("shipped 12/25/2018");
    REQUIRE(us.size() == 1);
    CHECK(us[0] == ymd(2018, 12, 25));

    auto named = parse_timestamps("Since March 5, 2017 and sept. 21st 2018");
    REQUIRE(named.size() == 2);
    CHECK(named[0] == ymd(2017, 3, 5));
    CHECK(named[1] == ymd(2018, 9, 21));

    CHECK(parse_timestamps("2019-13-40 99/99/2019 nothing").empty());
    // distinct: repeats collapse
    CHECK(parse_timestamps("2020-01-01 2020-01-01").size() == 1);
}

TEST_CASE("md5 and fingerprints") {
    CHECK(md5_hex("") == "d41d8cd98f00b204e9800998ecf8427e");
    CHECK(md5_hex("abc") == "900150983cd24fb0d6963f7d28e17f72");
    CHECK(md5_hex("The quick brown fox jumps over the lazy dog") == "9e107d9d372bb6826bd81d3542a419d6");
    CHECK(text_fingerprint("Hello   World") == text_fingerprint("hello world"));
    CHECK(text_fingerprint("hello world") != text_fingerprint("hello there"));
}

TEST_CASE("clone index counts identical pages across domains") {
    testutil::TempDir dir("clones");
    testutil::add_domain(dir.path(), "d1", "aaa.onion", {{"index", "<p>Same   text</p>"}});
    testutil::add_domain(dir.path(), "d2", "bbb.onion", {{"index", "<p>same text</p>"}});
    testutil::add_domain(dir.path(), "d3", "ccc.onion", {{"index", "<p>other</p>"}});
    auto c = corpus::ingest_corpus(dir.path()).corpus;
    auto idx = build_clone_index(c);
    CHECK(idx.at(text_fingerprint("same text")) == 2);
    CHECK(idx.at(text_fingerprint("other")) == 1);
}
