#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <string_view>

namespace testutil {

namespace fs = std::filesystem;

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(std::string_view tag) {
        static std::mt19937_64 rng(std::random_device{}());
        path_ = fs::temp_directory_path() / ("onionrank-" + std::string(tag) + "-" + std::to_string(rng()));
        fs::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const fs::path& path() const { return path_; }
    fs::path operator/(std::string_view rel) const { return path_ / rel; }

private:
    fs::path path_;
};

inline void write_file(const fs::path& p, std::string_view content) {
    fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    out << content;
}

inline std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Adds a domain directory in the on-disk corpus layout.
inline void add_domain(const fs::path& root, const std::string& id, const std::string& address,
                       std::initializer_list<std::pair<std::string, std::string>> pages,
                       const std::string& scrape_time = "2019-03-01T00:00:00Z") {
    write_file(root / id / "meta.json",
               "{\"address\": \"" + address + "\", \"scrape_time\": \"" + scrape_time + "\"}\n");
    for (const auto& [pid, html] : pages) write_file(root / id / "pages" / (pid + ".html"), html);
}

// Relative error with a floor on the denominator so that two values that are
// both essentially zero compare as equal.
inline double rel_err(double a, double b) {
    return std::abs(a - b) / std::max({1e-6, std::abs(a), std::abs(b)});
}

}  // namespace testutil
