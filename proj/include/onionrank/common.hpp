#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace onionrank {

/// Raised for bad input data (malformed files, inconsistent dimensions, ...).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Lowercase ASCII copy.
std::string to_lower(std::string_view s);

/// Strip leading/trailing ASCII whitespace.
std::string_view trim(std::string_view s);

/// Collapse runs of whitespace into one space and trim the ends.
std::string collapse_whitespace(std::string_view s);

/// Lowercase alphanumeric runs; every other byte is a separator.
std::vector<std::string> tokenize(std::string_view text);

std::vector<std::string> split(std::string_view s, char sep);

/// `%.17g`: enough digits for any double to round-trip exactly.
std::string format_double(double v);

bool starts_with_ci(std::string_view s, std::string_view prefix);

/// Deterministic uniform double in [0,1) drawn from the top 53 bits.
template <class Rng>
double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Integer in [0, n), n > 0. Modulo bias is negligible for the small n used here.
template <class Rng>
std::size_t uniform_index(Rng& rng, std::size_t n) {
    return static_cast<std::size_t>(rng() % n);
}

/// Fisher-Yates with the helpers above so results do not depend on the
/// standard library's distribution implementations.
template <class T, class Rng>
void deterministic_shuffle(std::vector<T>& v, Rng& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        std::size_t j = uniform_index(rng, i);
        std::swap(v[i - 1], v[j]);
    }
}

}  // namespace onionrank
