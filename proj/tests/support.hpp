#pragma once

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "cp2d/common.hpp"
#include "cp2d/tokenizer.hpp"

namespace cp2d::testing {

/// Scratch directory removed on scope exit.
class TempDir {
public:
    TempDir() {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("cp2d_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

private:
    std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    out << content;
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline std::string random_text(Rng& rng, std::string_view alphabet, std::size_t length) {
    std::string out(length, ' ');
    for (auto& c : out) c = alphabet[rng.below(alphabet.size())];
    return out;
}

/// Token sequence over `types` symbols with a skewed (roughly Zipfian) law.
inline std::vector<TypeId> random_sequence(Rng& rng, std::size_t length, std::size_t types) {
    std::vector<TypeId> out(length);
    for (auto& id : out) {
        const double u = rng.uniform_open();
        id = static_cast<TypeId>(static_cast<std::size_t>(std::pow(static_cast<double>(types), u)) - 1);
    }
    return out;
}

inline double uniform_in(Rng& rng, double lo, double hi) { return lo + (hi - lo) * rng.uniform(); }

}  // namespace cp2d::testing
