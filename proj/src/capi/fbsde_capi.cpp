// SPDX-License-Identifier: Apache-2.0
#include "fbsde/fbsde.h"

#include "common/error.hpp"
#include "pipeline/config.hpp"
#include "pipeline/runner.hpp"

#include <filesystem>
#include <new>
#include <string>

struct fbsde_run {
    fbsde::RunConfig config;
    fbsde::RunOptions options;
    std::string hash;
    std::string resolved;
    std::string summary;
    std::string message;
};

namespace {

thread_local std::string g_error;
thread_local std::string g_pointer;

fbsde_status fail(fbsde_status s, const std::string& msg, const std::string& pointer = {}) {
    g_error = msg;
    g_pointer = pointer;
    return s;
}

void clear_error() {
    g_error.clear();
    g_pointer.clear();
}

template <class Body>
fbsde_status guarded(Body&& body) {
    clear_error();
    try {
        return body();
    } catch (const fbsde::ConfigError& e) {
        return fail(FBSDE_ERR_CONFIG, e.what(), e.pointer());
    } catch (const fbsde::ParseError& e) {
        return fail(FBSDE_ERR_PARSE, e.what());
    } catch (const fbsde::NumericalError& e) {
        return fail(FBSDE_ERR_NUMERICAL, e.what());
    } catch (const fbsde::EvalError& e) {
        return fail(FBSDE_ERR_NUMERICAL, e.what());
    } catch (const fbsde::ArgumentError& e) {
        return fail(FBSDE_ERR_ARGUMENT, e.what());
    } catch (const fbsde::Error& e) {
        return fail(FBSDE_ERR_INTERNAL, e.what());
    } catch (const std::filesystem::filesystem_error& e) {
        return fail(FBSDE_ERR_IO, e.what());
    } catch (const std::bad_alloc&) {
        return fail(FBSDE_ERR_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return fail(FBSDE_ERR_INTERNAL, e.what());
    } catch (...) {
        return fail(FBSDE_ERR_INTERNAL, "unknown error");
    }
}

void refresh(fbsde_run* run) {
    run->hash = run->config.hash();
    run->resolved = fbsde::canonical_dump(run->config.to_json());
}

fbsde_status open_with(fbsde::RunConfig (*parse)(const std::string&), const char* arg, fbsde_run** out) {
    if (!out) return fail(FBSDE_ERR_ARGUMENT, "null output pointer");
    *out = nullptr;
    if (!arg) return fail(FBSDE_ERR_ARGUMENT, "null config argument");
    return guarded([&] {
        auto* run = new fbsde_run{parse(arg), {}, {}, {}, {}, {}};
        run->options.out_dir = run->config.out_dir;
        refresh(run);
        *out = run;
        return FBSDE_OK;
    });
}

}  // namespace

extern "C" {

const char* fbsde_version(void) { return "1.0.0"; }

fbsde_status fbsde_open(const char* config_path, fbsde_run** out) {
    return open_with(&fbsde::load_config, config_path, out);
}

fbsde_status fbsde_open_text(const char* config_text, fbsde_run** out) {
    return open_with(&fbsde::parse_config, config_text, out);
}

void fbsde_close(fbsde_run* run) { delete run; }

fbsde_status fbsde_set_out_dir(fbsde_run* run, const char* dir) {
    if (!run || !dir || !*dir) return fail(FBSDE_ERR_ARGUMENT, "null handle or empty directory");
    run->options.out_dir = dir;
    return FBSDE_OK;
}

fbsde_status fbsde_set_threads(fbsde_run* run, unsigned threads) {
    if (!run) return fail(FBSDE_ERR_ARGUMENT, "null handle");
    run->options.threads = threads;
    return FBSDE_OK;
}

fbsde_status fbsde_set_seed(fbsde_run* run, uint64_t seed) {
    if (!run) return fail(FBSDE_ERR_ARGUMENT, "null handle");
    return guarded([&] {
        run->config.mc.seed = seed;
        refresh(run);
        return FBSDE_OK;
    });
}

fbsde_status fbsde_set_cache_dir(fbsde_run* run, const char* dir) {
    if (!run) return fail(FBSDE_ERR_ARGUMENT, "null handle");
    if (!dir) {
        run->options.cache_dir.clear();
        run->options.use_cache = true;
    } else if (!*dir) {
        run->options.use_cache = false;
    } else {
        run->options.cache_dir = dir;
        run->options.use_cache = true;
    }
    return FBSDE_OK;
}

fbsde_status fbsde_set_command(fbsde_run* run, const char* command) {
    if (!run || !command) return fail(FBSDE_ERR_ARGUMENT, "null argument");
    run->options.command = command;
    return FBSDE_OK;
}

fbsde_status fbsde_run_stage(fbsde_run* run, const char* stage, int* exit_code) {
    if (exit_code) *exit_code = FBSDE_EXIT_ERROR;
    if (!run || !stage) return fail(FBSDE_ERR_ARGUMENT, "null argument");
    run->summary.clear();
    run->message.clear();
    const fbsde_status s = guarded([&] {
        const fbsde::RunOutcome o = fbsde::run_stage(fbsde::stage_from_string(stage), run->config, run->options);
        run->summary = o.summary;
        run->message = o.message;
        if (exit_code) *exit_code = o.exit_code;
        return FBSDE_OK;
    });
    if (s != FBSDE_OK) run->message = g_error;
    return s;
}

const char* fbsde_summary(const fbsde_run* run) { return run ? run->summary.c_str() : ""; }
const char* fbsde_message(const fbsde_run* run) { return run ? run->message.c_str() : ""; }
const char* fbsde_config_hash(const fbsde_run* run) { return run ? run->hash.c_str() : ""; }
const char* fbsde_resolved_config(const fbsde_run* run) { return run ? run->resolved.c_str() : ""; }
const char* fbsde_last_error(void) { return g_error.c_str(); }
const char* fbsde_last_error_pointer(void) { return g_pointer.c_str(); }

}  // extern "C"
