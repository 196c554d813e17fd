#pragma once

// Small mask-building helpers shared by the unit tests.

#include <filesystem>
#include <random>
#include <string>

#include "cervdx.hpp"

namespace fixture {

using namespace cervdx;

template <typename T>
void fill_rect(Grid<T>& g, int y0, int x0, int y1, int x1, T value) {
    for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) {
            if (g.contains(y, x)) g(y, x) = value;
        }
    }
}

/// Default phantom (straight column, no pathology).
inline phantom::Phantom plain_phantom() { return phantom::generate(phantom::PhantomSpec{}); }

/// Fresh scratch directory under the system temp path.
inline std::filesystem::path scratch_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("cervdx_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline std::string slurp(const std::filesystem::path& p) { return read_text_file(p); }

}  // namespace fixture
