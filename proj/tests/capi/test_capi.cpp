// SPDX-License-Identifier: Apache-2.0
#include "doctest.h"

#include "fbsde/fbsde.h"

#include <cstdio>
#include <filesystem>
#include <string>

namespace fs = std::filesystem;

namespace {

const char* kHeat = R"(
coefficients: {f: "0", sigma: "1", g: "0", h: "x"}
grid: {J: 120, K: 60}
mc: {paths: 2000, steps: 40, malliavin_paths: 200}
envelope: {X: theoretical, Y: empirical, Z: empirical}
verify: {bootstrap: 20}
)";

std::string scratch(const char* name) {
    const fs::path p = fs::temp_directory_path() / (std::string("fbsde_test_capi_") + name);
    fs::remove_all(p);
    return p.string();
}

}  // namespace

TEST_CASE("open reports config errors with a pointer") {
    fbsde_run* run = reinterpret_cast<fbsde_run*>(0x1);
    CHECK(fbsde_open_text("coefficients: {h: x}\nmc: {pathz: 3}\n", &run) == FBSDE_ERR_CONFIG);
    CHECK(run == nullptr);
    CHECK(std::string(fbsde_last_error_pointer()) == "/mc/pathz");
    CHECK(std::string(fbsde_last_error()).find("unknown key") != std::string::npos);
    CHECK(fbsde_open("/nonexistent/config.yaml", &run) != FBSDE_OK);
    CHECK(run == nullptr);
}

TEST_CASE("null arguments are rejected") {
    int code = 0;
    CHECK(fbsde_open_text(kHeat, nullptr) == FBSDE_ERR_ARGUMENT);
    CHECK(fbsde_run_stage(nullptr, "check", &code) == FBSDE_ERR_ARGUMENT);
    CHECK(code == FBSDE_EXIT_ERROR);
    CHECK(fbsde_set_threads(nullptr, 1) == FBSDE_ERR_ARGUMENT);
    CHECK(std::string(fbsde_summary(nullptr)).empty());
    fbsde_close(nullptr);
}

TEST_CASE("stages run through the handle") {
    fbsde_run* run = nullptr;
    REQUIRE(fbsde_open_text(kHeat, &run) == FBSDE_OK);
    const std::string out = scratch("stages");
    CHECK(fbsde_set_out_dir(run, out.c_str()) == FBSDE_OK);
    CHECK(fbsde_set_threads(run, 2) == FBSDE_OK);

    const std::string hash = fbsde_config_hash(run);
    CHECK(hash.size() == 64);
    CHECK(fbsde_set_seed(run, 99) == FBSDE_OK);
    CHECK(std::string(fbsde_config_hash(run)) != hash);
    CHECK(std::string(fbsde_resolved_config(run)).find("\"seed\":99") != std::string::npos);

    int code = -1;
    CHECK(fbsde_run_stage(run, "check", &code) == FBSDE_OK);
    CHECK(code == FBSDE_EXIT_PASS);
    CHECK(std::string(fbsde_summary(run)).find("\"blocking\"") != std::string::npos);

    CHECK(fbsde_run_stage(run, "plot", &code) == FBSDE_ERR_ARGUMENT);
    CHECK(code == FBSDE_EXIT_ERROR);

    CHECK(fbsde_run_stage(run, "verify", &code) == FBSDE_OK);
    CHECK(code == FBSDE_EXIT_PASS);
    CHECK(fs::exists(fs::path(out) / "report.json"));
    fbsde_close(run);
}

TEST_CASE("assumption failures surface as exit code 3") {
    fbsde_run* run = nullptr;
    REQUIRE(fbsde_open_text("coefficients: {sigma: \"x\", h: \"x\"}\nx0: 1\n", &run) == FBSDE_OK);
    const std::string out = scratch("sigma_x");
    fbsde_set_out_dir(run, out.c_str());
    fbsde_set_cache_dir(run, "");
    int code = -1;
    CHECK(fbsde_run_stage(run, "verify", &code) == FBSDE_OK);
    CHECK(code == FBSDE_EXIT_ASSUMPTION_FAILED);
    fbsde_close(run);
}
