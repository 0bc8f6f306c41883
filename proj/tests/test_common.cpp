#include <random>

#include "doctest.h"
#include "onionrank/common.hpp"

using namespace onionrank;

TEST_CASE("string helpers") {
    CHECK(to_lower("AbC-9") == "abc-9");
    CHECK(trim("  \t x y \n") == "x y");
    CHECK(trim("   ").empty());
    CHECK(collapse_whitespace("  a \n\n b\tc  ") == "a b c");
    CHECK(tokenize("Hello, World42! it's") == std::vector<std::string>{"hello", "world42", "it", "s"});
    CHECK(tokenize("").empty());
    CHECK(split("a,,b", ',') == std::vector<std::string>{"a", "", "b"});
    CHECK(starts_with_ci("HTTP://x", "http://"));
    CHECK_FALSE(starts_with_ci("ht", "http"));
}

TEST_CASE("format_double round-trips") {
    std::mt19937_64 rng(1);
    for (int i = 0; i < 1000; ++i) {
        double v = (uniform01(rng) - 0.5) * std::pow(10.0, double(int(rng() % 40) - 20));
        CHECK(std::stod(format_double(v)) == v);
    }
    CHECK(format_double(0.5) == "0.5");
    CHECK(format_double(3) == "3");
}

TEST_CASE("deterministic rng helpers") {
    std::mt19937_64 a(42), b(42);
    for (int i = 0; i < 100; ++i) {
        double x = uniform01(a);
        CHECK(x >= 0.0);
        CHECK(x < 1.0);
        CHECK(x == uniform01(b));
    }
    std::vector<int> v(50), w;
    for (int i = 0; i < 50; ++i) v[i] = i;
    w = v;
    std::mt19937_64 r1(3), r2(3);
    deterministic_shuffle(v, r1);
    deterministic_shuffle(w, r2);
    CHECK(v == w);
    auto sorted = v;
    std::sort(sorted.begin(), sorted.end());
    for (int i = 0; i < 50; ++i) CHECK(sorted[i] == i);
}
