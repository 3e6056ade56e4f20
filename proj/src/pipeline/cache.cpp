// SPDX-License-Identifier: Apache-2.0
#include "pipeline/cache.hpp"

#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>

namespace fbsde {
namespace {

constexpr char kMagic[8] = {'F', 'B', 'S', 'D', 'E', 'P', 'D', '1'};

template <class T>
void put(std::ofstream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
bool get(std::ifstream& in, T& v) {
    return static_cast<bool>(in.read(reinterpret_cast<char*>(&v), sizeof(T)));
}

}  // namespace

std::string SolutionCache::default_dir(const std::string& out_dir) {
    if (const char* env = std::getenv("FBSDE_GAUSS_CACHE"); env && *env) return env;
    return (std::filesystem::path(out_dir) / "cache").string();
}

std::string SolutionCache::path(const std::string& key) const {
    return (std::filesystem::path(dir_) / (key + ".pde")).string();
}

std::optional<PdeSolution> SolutionCache::load(const std::string& key, const Grid& grid) const {
    if (!enabled()) return std::nullopt;
    std::ifstream in(path(key), std::ios::binary);
    if (!in) return std::nullopt;
    char magic[8];
    std::int64_t J = 0, K = 0;
    if (!in.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0 || !get(in, J) || !get(in, K)) return std::nullopt;
    if (J != grid.J || K != grid.K) return std::nullopt;
    std::vector<double> theta(grid.nodes() * grid.levels());
    std::vector<int> iterations(static_cast<std::size_t>(grid.K));
    if (!in.read(reinterpret_cast<char*>(theta.data()), static_cast<std::streamsize>(theta.size() * sizeof(double))) ||
        !in.read(reinterpret_cast<char*>(iterations.data()),
                 static_cast<std::streamsize>(iterations.size() * sizeof(int)))) {
        return std::nullopt;
    }
    try {
        return PdeSolution(grid, std::move(theta), std::move(iterations));
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

void SolutionCache::store(const std::string& key, const PdeSolution& sol) const {
    if (!enabled()) return;
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) return;
    // Write under a temporary name, then rename.
    const std::string final_path = path(key);
    const std::string tmp = final_path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) return;
        out.write(kMagic, 8);
        put(out, static_cast<std::int64_t>(sol.grid().J));
        put(out, static_cast<std::int64_t>(sol.grid().K));
        for (int k = 0; k <= sol.grid().K; ++k) {
            const auto level = sol.theta_level(k);
            out.write(reinterpret_cast<const char*>(level.data()),
                      static_cast<std::streamsize>(level.size() * sizeof(double)));
        }
        std::vector<int> iterations = sol.newton_iterations();
        iterations.resize(static_cast<std::size_t>(sol.grid().K), 0);
        out.write(reinterpret_cast<const char*>(iterations.data()),
                  static_cast<std::streamsize>(iterations.size() * sizeof(int)));
        if (!out) return;
    }
    std::filesystem::rename(tmp, final_path, ec);
}

}  // namespace fbsde
