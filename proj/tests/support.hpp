#pragma once

#include "brainalign/common.hpp"
#include "brainalign/rng.hpp"

#include <atomic>
#include <filesystem>
#include <string>
#include <unistd.h>

namespace testing {

namespace fs = std::filesystem;

// Fresh directory under the system temp dir, removed on scope exit.
class TempDir {
public:
    explicit TempDir(const std::string& tag)
    {
        static std::atomic<int> counter{0};
        path_ = fs::temp_directory_path() /
                ("brainalign-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir()
    {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const fs::path& path() const { return path_; }
    fs::path operator/(const std::string& name) const { return path_ / name; }

private:
    fs::path path_;
};

inline brainalign::Matrix gaussian(brainalign::Index rows, brainalign::Index cols, std::uint64_t seed,
                                   std::uint64_t stream = 0)
{
    brainalign::RandomStream rng(seed, stream);
    brainalign::Matrix m(rows, cols);
    for (brainalign::Index i = 0; i < rows; ++i)
        for (brainalign::Index j = 0; j < cols; ++j)
            m(i, j) = rng.normal();
    return m;
}

} // namespace testing
