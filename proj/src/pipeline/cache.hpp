// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "pde/solution.hpp"

#include <optional>
#include <string>

namespace fbsde {

/// Content-addressed store for PDE solutions. Entries are raw little-endian
/// doubles, so a hit reproduces the computed solution bit for bit.
class SolutionCache {
public:
    /// `dir` empty disables the cache.
    explicit SolutionCache(std::string dir) : dir_(std::move(dir)) {}

    /// $FBSDE_GAUSS_CACHE when set, otherwise <out_dir>/cache.
    static std::string default_dir(const std::string& out_dir);

    bool enabled() const noexcept { return !dir_.empty(); }
    const std::string& dir() const noexcept { return dir_; }

    /// Theta field and Newton counts for `key`; derivative fields are recomputed by the caller.
    std::optional<PdeSolution> load(const std::string& key, const Grid& grid) const;
    void store(const std::string& key, const PdeSolution& sol) const;

private:
    std::string path(const std::string& key) const;
    std::string dir_;
};

}  // namespace fbsde
