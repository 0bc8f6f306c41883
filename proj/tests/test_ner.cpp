#include <sstream>

#include "doctest.h"
#include "onionrank/common.hpp"
#include "onionrank/ner.hpp"

using namespace onionrank;
using namespace onionrank::ner;

TEST_CASE("gazetteer longest match") {
    Gazetteer g;
    CHECK(g.add("New York", EntityCategory::LOC));
    CHECK(g.add("New York Times", EntityCategory::ORG));
    CHECK(g.add("bitcoin", EntityCategory::PRD));
    CHECK_FALSE(g.add("BITCOIN", EntityCategory::PRD));
    CHECK_FALSE(g.add("  ", EntityCategory::PER));
    CHECK(g.size() == 3);

    auto tokens = tokenize("Read the New York Times, pay in Bitcoin in new york.");
    auto m = g.recognize(tokens);
    REQUIRE(m.size() == 3);
    CHECK(m[0].key == "new york times");
    CHECK(m[0].category == EntityCategory::ORG);
    CHECK(m[0].token_begin == 2);
    CHECK(m[0].token_end == 5);
    CHECK(m[1].key == "bitcoin");
    CHECK(m[2].key == "new york");
    CHECK(m[2].category == EntityCategory::LOC);

    // partial prefix does not match
    CHECK(g.recognize(tokenize("new")).empty());
}

TEST_CASE("gazetteer file") {
    std::istringstream ok("# comment\nJohn Smith\tPER\nAcme Corp\tCOR\n\nsilk road\tORG\n");
    auto g = parse_gazetteer(ok);
    CHECK(g.size() == 3);
    auto m = g.recognize(tokenize("acme corp"));
    REQUIRE(m.size() == 1);
    CHECK(m[0].category == EntityCategory::ORG);

    std::istringstream bad_cat("x\tALIEN\n");
    CHECK_THROWS_AS(parse_gazetteer(bad_cat), DataError);
    std::istringstream no_tab("just words\n");
    CHECK_THROWS_AS(parse_gazetteer(no_tab), DataError);
    CHECK_THROWS_AS(load_gazetteer("/nonexistent/gaz.tsv"), DataError);
}

TEST_CASE("category names") {
    for (auto c : kCategories) CHECK(parse_category(category_name(c)) == c);
    CHECK(parse_category("COR") == EntityCategory::ORG);
    CHECK_FALSE(parse_category("XYZ"));
}

TEST_CASE("emerging products are the lowest k-shell") {
    auto prd = [](std::string k) { return EntityMention{std::move(k), EntityCategory::PRD, 0, 1}; };
    // a, b, c co-occur pairwise (a triangle, shell 2); d hangs off a (shell 1)
    std::vector<std::vector<EntityMention>> per_domain{
        {prd("a"), prd("b"), prd("c")},
        {prd("a"), prd("d"), EntityMention{"x", EntityCategory::PER, 0, 1}},
        {prd("b"), prd("b")},
    };
    auto idx = build_emerging_index(per_domain);
    CHECK(idx.emerging == std::set<std::string>{"d"});
    CHECK_FALSE(idx.contains("x"));

    // a product that never co-occurs has shell 0 and is the only emerging one
    per_domain.push_back({prd("lonely")});
    CHECK(build_emerging_index(per_domain).emerging == std::set<std::string>{"lonely"});

    CHECK(build_emerging_index(std::vector<std::vector<EntityMention>>{}).emerging.empty());
}
