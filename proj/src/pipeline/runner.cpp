// SPDX-License-Identifier: Apache-2.0
#include "pipeline/runner.hpp"

#include "assumptions/checks.hpp"
#include "assumptions/report_json.hpp"
#include "bounds/bounds.hpp"
#include "common/digest.hpp"
#include "common/error.hpp"
#include "common/format.hpp"
#include "common/parallel.hpp"
#include "pde/lower_bounds.hpp"
#include "pde/quasilinear_solver.hpp"
#include "pipeline/cache.hpp"
#include "sde/paths.hpp"
#include "verify/checks.hpp"
#include "verify/density.hpp"
#include "verify/oracle.hpp"
#include "verify/svg.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>

namespace fbsde {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr const char* kVersion = "1.0.0";
constexpr const char* kPdeCacheTag = "pde-1";
constexpr double kDegenerateVariance = 1e-12;
constexpr std::array<Component, 3> kComponents{Component::X, Component::Y, Component::Z};

std::string utc_now() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string time_tag(double t) { return format_double(t); }

struct WindowSups {
    double u = 0.0;
    double ux = 0.0;
};

WindowSups window_sups(const PdeSolution& sol, double lo, double hi) {
    WindowSups s;
    const auto [j0, j1] = sol.trusted_nodes(lo, hi);
    for (int k = 0; k <= sol.grid().K; ++k) {
        for (int j = j0; j <= j1; ++j) {
            s.u = std::max(s.u, std::abs(sol.u(k, j)));
            s.ux = std::max(s.ux, std::abs(sol.ux(k, j)));
        }
    }
    return s;
}

struct SampleStats {
    std::size_t n = 0;
    double mean = 0.0;
    double variance = 0.0;
    double absdev = 0.0;
    double absdev_stderr = 0.0;
};

SampleStats sample_stats(const std::vector<double>& v) {
    SampleStats s;
    s.n = v.size();
    if (s.n == 0) return s;
    double sum = 0.0;
    for (double x : v) sum += x;
    s.mean = sum / static_cast<double>(s.n);
    double ss = 0.0;
    double sa = 0.0;
    for (double x : v) {
        ss += (x - s.mean) * (x - s.mean);
        sa += std::abs(x - s.mean);
    }
    s.variance = s.n > 1 ? ss / static_cast<double>(s.n - 1) : 0.0;
    s.absdev = sa / static_cast<double>(s.n);
    double sd = 0.0;
    for (double x : v) sd += (std::abs(x - s.mean) - s.absdev) * (std::abs(x - s.mean) - s.absdev);
    s.absdev_stderr = s.n > 1 ? std::sqrt(sd / static_cast<double>(s.n - 1) / static_cast<double>(s.n)) : 0.0;
    return s;
}

CheckMode check_mode(Component c) {
    switch (c) {
        case Component::X: return CheckMode::x_only;
        case Component::Y: return CheckMode::y;
        case Component::Z: return CheckMode::z;
    }
    return CheckMode::x_only;
}

std::pair<const char*, const char*> constant_names(Component c) {
    switch (c) {
        case Component::X: return {"xi", "Xi"};
        case Component::Y: return {"lambda", "Lambda"};
        case Component::Z: return {"varsigma", "Sigma"};
    }
    return {"", ""};
}

VariancePair variance_constants(Component c, double t, const BoundConstants& bc) {
    switch (c) {
        case Component::X: return x_constants(t, bc);
        case Component::Y: return y_constants(t, bc);
        case Component::Z: return z_constants(t, bc);
    }
    return {};
}

json envelope_point_json(const EnvelopePoint& p) {
    return {{"x", p.x},       {"kde", p.kde},     {"stderr", p.stderr_},
            {"lower", p.lower}, {"upper", p.upper}, {"margin", finite_or_null(p.margin)}};
}

class Pipeline {
public:
    Pipeline(const RunConfig& config, const RunOptions& options)
        : cfg_(config), opt_(options), w_(config.region.halfwidth) {
        threads_ = opt_.threads == 0 ? default_thread_count() : opt_.threads;
        cs_ = std::make_shared<const CoefficientSet>(CoefficientSet::parse(cfg_.coefficients));
        config_json_ = cfg_.to_json();
        config_hash_ = cfg_.hash();
    }

    RunOutcome run(Stage stage) {
        started_ = utc_now();
        fs::create_directories(opt_.out_dir);
        write_text("resolved_config.json", canonical_dump(config_json_) + "\n");
        RunOutcome out = run_stages(stage);
        out.artifacts = artifacts_;
        write_metadata(stage, out);
        return out;
    }

private:
    RunOutcome run_stages(Stage stage) {
        RunOutcome out;
        if (!provisional_checks()) return assumption_failure("provisional");
        solve();
        if (!final_checks()) return assumption_failure("final");
        if (stage == Stage::check) {
            out.summary = assumptions_text_;
            out.message = "assumptions passed";
            return out;
        }
        lower_bounds();
        write_solution();
        if (stage == Stage::solve) {
            out.message = "solution written";
            out.summary = summary_line("solve");
            return out;
        }
        simulate();
        if (stage == Stage::simulate) {
            out.message = "paths simulated";
            out.summary = summary_line("simulate");
            return out;
        }
        bounds();
        if (stage == Stage::bounds) {
            out.message = "bound constants written";
            out.summary = summary_line("bounds");
            return out;
        }
        return verify();
    }

    std::string summary_line(const std::string& what) const {
        std::string s = what + ": " + std::to_string(artifacts_.size()) + " artifacts in " + opt_.out_dir + "\n";
        return s;
    }

    RunOutcome assumption_failure(const std::string& which) {
        RunOutcome out;
        out.exit_code = kExitAssumptionFailed;
        std::string list;
        for (const std::string& b : blocking_) list += (list.empty() ? "" : ", ") + b;
        out.message = which + " assumption check failed: " + list;
        out.summary = assumptions_text_;
        return out;
    }

    void write_text(const std::string& name, std::string_view content) {
        write_text_file((fs::path(opt_.out_dir) / name).string(), content);
        if (std::find(artifacts_.begin(), artifacts_.end(), name) == artifacts_.end()) artifacts_.push_back(name);
    }

    void write_json(const std::string& name, const json& j) { write_text(name, j.dump(2) + "\n"); }

    void write_metadata(Stage stage, const RunOutcome& out) {
        json meta = {{"command", opt_.command.empty() ? std::string(to_string(stage)) : opt_.command},
                     {"stage", std::string(to_string(stage))},
                     {"started", started_},
                     {"finished", utc_now()},
                     {"threads", threads_},
                     {"version", kVersion},
                     {"config_hash", config_hash_},
                     {"pde_cache", cache_status_},
                     {"exit_code", out.exit_code}};
        write_json("metadata.json", meta);
    }

    bool exempt(Component c, const std::string& id) const {
        if (c == Component::Y && cfg_.mode(c) == EnvelopeMode::empirical && id == "A5") return true;
        if (c == Component::Z && cfg_.mode(c) == EnvelopeMode::empirical && id == "A8") return true;
        return false;
    }

    bool active(Component c) const { return c == Component::X || cfg_.mode(c) != EnvelopeMode::skip; }

    bool run_checks(double u_bound, double M1, const std::string& stage, const json& rule) {
        Region r;
        r.t_lo = 0.0;
        r.t_hi = cfg_.T;
        r.x_lo = -w_;
        r.x_hi = w_;
        r.u_bound = u_bound;
        r.p_bound = M1;
        r.nt = cfg_.region.nt;
        r.nx = cfg_.region.nx;
        r.nu = cfg_.region.nu;
        r.np = cfg_.region.np;
        const CheckResult a1 = check_A1(*cs_, r);
        const double mu = a1.has("mu") ? a1.value("mu") : 1.0;
        r.p_bound = M1 * (std::isfinite(mu) ? std::max(1.0, std::abs(mu)) : 1.0);
        CheckOptions co;
        co.beta = cfg_.region.beta;

        reports_.clear();
        blocking_.clear();
        json reports = json::object();
        json exempted = json::array();
        for (Component c : kComponents) {
            if (!active(c)) continue;
            AssumptionReport rep = check_all(*cs_, r, check_mode(c), co);
            for (const std::string& id : rep.failed_ids()) {
                const std::string tag = std::string(to_string(c)) + ":" + id;
                if (exempt(c, id)) exempted.push_back(tag);
                else blocking_.push_back(tag);
            }
            reports[std::string(to_string(c))] = to_json(rep);
            reports_.emplace(c, std::move(rep));
        }
        json j = {{"stage", stage},
                  {"config_hash", config_hash_},
                  {"region_rule", rule},
                  {"reports", reports},
                  {"blocking", blocking_},
                  {"exempt", exempted},
                  {"passed", blocking_.empty()}};
        assumptions_text_ = j.dump(2) + "\n";
        write_text("assumptions.json", assumptions_text_);
        return blocking_.empty();
    }

    bool provisional_checks() {
        double h_sup = 0.0;
        double hx_sup = 0.0;
        for (double x : linspace(-w_, w_, 401)) {
            h_sup = std::max(h_sup, std::abs(cs_->h(x)));
            hx_sup = std::max(hx_sup, std::abs(cs_->h_prime(x)));
        }
        M_ = cfg_.region.M.value_or(h_sup);
        M1_ = cfg_.region.M1.value_or(hx_sup);
        const json rule = {{"M", M_},
                           {"M_source", cfg_.region.M ? "override" : "sup |h| on the window"},
                           {"M1", M1_},
                           {"M1_source", cfg_.region.M1 ? "override" : "sup |h'| on the window"},
                           {"p_bound", "M1 * max(1, sup sigma)"}};
        return run_checks(M_, M1_, "provisional", rule);
    }

    void solve() {
        const Grid grid = cfg_.make_grid();
        const json key_json = {{"coefficients", config_json_.at("coefficients")},
                               {"grid", config_json_.at("grid")},
                               {"T", cfg_.T}};
        const std::string key = sha256_hex(canonical_dump(key_json) + "|" + kPdeCacheTag);
        std::optional<SolutionCache> cache;
        if (opt_.use_cache) {
            cache.emplace(opt_.cache_dir.empty() ? SolutionCache::default_dir(opt_.out_dir) : opt_.cache_dir);
        }
        if (cache) {
            if (auto hit = cache->load(key, grid)) {
                sol_ = std::make_shared<const PdeSolution>(derivative_fields(std::move(*hit)));
                cache_status_ = "hit";
                return;
            }
        }
        PdeSolution sol = solve_quasilinear(*cs_, grid);
        if (cache) {
            cache->store(key, sol);
            cache_status_ = "miss";
        } else {
            cache_status_ = "disabled";
        }
        sol_ = std::make_shared<const PdeSolution>(std::move(sol));
    }

    bool final_checks() {
        sups_ = window_sups(*sol_, -w_, w_);
        M_ = cfg_.region.M.value_or(std::max(M_, sups_.u));
        M1_ = cfg_.region.M1.value_or(std::max(M1_, sups_.ux));
        const json rule = {{"M", M_},
                           {"M_source", cfg_.region.M ? "override" : "max(provisional, sup |u| on the window)"},
                           {"M1", M1_},
                           {"M1_source", cfg_.region.M1 ? "override" : "max(provisional, sup |u_x| on the window)"},
                           {"p_bound", "M1 * max(1, sup sigma)"}};
        return run_checks(M_, M1_, "final", rule);
    }

    void lower_bounds() {
        for (Component c : {Component::Y, Component::Z}) {
            if (!active(c)) continue;
            auto& slot = c == Component::Y ? lb_y_ : lb_z_;
            auto& note = c == Component::Y ? lb_note_y_ : lb_note_z_;
            try {
                slot = std::make_shared<const LowerBoundCurves>(
                    lower_bound_curves(*sol_, *cs_, reports_.at(c), -w_, w_));
            } catch (const RefusedError& e) {
                note = e.what();
            }
        }
    }

    static json curves_json(const std::shared_ptr<const LowerBoundCurves>& lb, const std::string& note) {
        if (!lb) return {{"refused", note}};
        return {{"sign", std::string(to_string(lb->sign))},
                {"G", lb->G},
                {"C", lb->C},
                {"m_degenerate", lb->m_degenerate},
                {"has_rho", lb->has_rho},
                {"G2", lb->G2},
                {"C2", lb->C2},
                {"rho_degenerate", lb->rho_degenerate},
                {"diagnostics", lb->diagnostics}};
    }

    void write_solution() {
        const Grid& g = sol_->grid();
        const int level_stride = std::max(1, g.K / 100);
        const int node_stride = std::max(1, g.J / 200);
        write_text("solution.csv", sol_->to_csv(level_stride, node_stride));

        const auto& iters = sol_->newton_iterations();
        int it_max = 0;
        long long it_total = 0;
        for (int n : iters) {
            it_max = std::max(it_max, n);
            it_total += n;
        }
        json constants = {{"grid",
                           {{"x_lo", g.x_lo}, {"x_hi", g.x_hi}, {"J", g.J}, {"K", g.K}, {"T", g.T},
                            {"omega", g.omega}, {"level_stride", level_stride}, {"node_stride", node_stride}}},
                          {"window", {-w_, w_}},
                          {"M", M_},
                          {"M1", M1_},
                          {"window_sup_u", sups_.u},
                          {"window_sup_ux", sups_.ux},
                          {"domain_sup_u", sol_->M()},
                          {"newton", {{"max", it_max}, {"total", it_total}}},
                          {"lower_bounds", json::object()}};
        if (active(Component::Y)) constants["lower_bounds"]["Y"] = curves_json(lb_y_, lb_note_y_);
        if (active(Component::Z)) constants["lower_bounds"]["Z"] = curves_json(lb_z_, lb_note_z_);
        write_json("solution_constants.json", constants);

        if (lb_y_ || lb_z_) {
            LowerBoundCurves merged = lb_y_ ? *lb_y_ : *lb_z_;
            if (lb_z_ && lb_z_->has_rho) {
                merged.has_rho = true;
                merged.rho_emp = lb_z_->rho_emp;
                merged.rho_th = lb_z_->rho_th;
            }
            write_text("lower_bounds.csv", merged.to_csv());
        }
    }

    void simulate() {
        DrivingOptions dopt;
        dopt.window_lo = -w_;
        dopt.window_hi = w_;
        dc_.emplace(DrivingCoefficients::coupled(cs_, sol_, dopt));

        SimulationOptions so;
        so.n_paths = cfg_.mc.paths;
        so.n_steps = cfg_.mc.steps;
        so.seed = cfg_.mc.seed;
        so.threads = threads_;
        so.observation_times = cfg_.mc.times;
        so.pairs = cfg_.mc.pairs;
        so.malliavin = false;
        paths_.emplace(simulate_paths(*dc_, cfg_.x0, so));
        write_text("paths_summary.csv", paths_->summary_csv());
        write_text("terminal_samples.csv", paths_->terminal_csv());

        if (cfg_.mc.malliavin_paths > 0) {
            so.n_paths = cfg_.mc.malliavin_paths;
            so.malliavin = true;
            mpaths_.emplace(simulate_paths(*dc_, cfg_.x0, so));
            write_text("malliavin_summary.csv", malliavin_summary(*mpaths_));
        }
    }

    static std::string malliavin_summary(const PathSet& ps) {
        CsvWriter csv({"r", "t", "component", "representation", "n", "mean", "min", "max"});
        for (std::size_t p = 0; p < ps.pairs.size(); ++p) {
            for (Component c : kComponents) {
                for (Representation rep : {Representation::first_variation, Representation::psi_exponential}) {
                    const auto vals = ps.malliavin(c, rep, p);
                    double sum = 0.0;
                    double lo = INFINITY;
                    double hi = -INFINITY;
                    long long n = 0;
                    for (std::size_t i = 0; i < ps.n_paths; ++i) {
                        if (ps.exited[i]) continue;
                        sum += vals[i];
                        lo = std::min(lo, vals[i]);
                        hi = std::max(hi, vals[i]);
                        ++n;
                    }
                    csv.cell(ps.pairs[p].r).cell(ps.pairs[p].t).cell(to_string(c)).cell(to_string(rep)).cell(n);
                    if (n > 0) csv.cell(sum / static_cast<double>(n)).cell(lo).cell(hi);
                    else csv.cell(std::string_view("")).cell(std::string_view("")).cell(std::string_view(""));
                    csv.end_row();
                }
            }
        }
        return csv.str();
    }

    void bounds() {
        const AssumptionReport& rx = reports_.at(Component::X);
        bc_.nu = rx.nu;
        bc_.mu = rx.mu;
        bc_.M = M_;
        bc_.M1 = sups_.ux;
        bc_.M_psi = dc_->M_psi();
        bc_.gamma = sample_gamma(*dc_, -w_, w_);
        if (lb_y_ && active(Component::Y)) {
            const bool th = cfg_.mode(Component::Y) == EnvelopeMode::theoretical;
            bc_.m = [lb = lb_y_, th](double t) { return lb->m(t, th); };
        }
        if (lb_z_ && lb_z_->has_rho && active(Component::Z)) {
            const bool th = cfg_.mode(Component::Z) == EnvelopeMode::theoretical;
            bc_.rho = [lb = lb_z_, th](double t) { return lb->rho(t, th); };
        }

        CsvWriter csv({"component", "t", "lower_name", "lower", "upper_name", "upper", "status"});
        for (Component c : kComponents) {
            const auto [lo_name, hi_name] = constant_names(c);
            for (double t : cfg_.bound_times) {
                csv.cell(to_string(c)).cell(t).cell(std::string_view(lo_name));
                std::string status = "ok";
                std::optional<VariancePair> vp;
                if (!active(c)) {
                    status = "skipped";
                } else {
                    try {
                        vp = variance_constants(c, t, bc_);
                    } catch (const RefusedError&) {
                        status = "refused";
                    }
                }
                if (vp) csv.cell(vp->lower);
                else csv.cell(std::string_view(""));
                csv.cell(std::string_view(hi_name));
                if (vp) csv.cell(vp->upper);
                else csv.cell(std::string_view(""));
                csv.cell(status);
                csv.end_row();
            }
        }
        write_text("bounds.csv", csv.str());
        write_json("bound_constants.json", constants_json(bc_));
    }

    json constants_json(const BoundConstants& bc) const {
        const auto source = [&](Component c, bool present) -> json {
            if (!present) return nullptr;
            return std::string(to_string(cfg_.mode(c)));
        };
        return {{"nu", finite_or_null(bc.nu)},
                {"mu", finite_or_null(bc.mu)},
                {"M", finite_or_null(bc.M)},
                {"M1", finite_or_null(bc.M1)},
                {"M_psi", finite_or_null(bc.M_psi)},
                {"gamma", finite_or_null(bc.gamma)},
                {"sigma_min", finite_or_null(dc_->sigma_min())},
                {"m_source", source(Component::Y, static_cast<bool>(bc.m))},
                {"rho_source", source(Component::Z, static_cast<bool>(bc.rho))}};
    }

    RunOutcome verify() {
        const VerifyConfig& vc = cfg_.verify;
        BoundConstants used = bc_;
        if (vc.corruption == Corruption::zero_M_psi) used.M_psi = 0.0;

        DensityOptions dopt;
        dopt.rule = vc.bandwidth;
        dopt.bandwidth = vc.bandwidth_value;
        dopt.grid_points = vc.grid_points;
        dopt.bootstrap = vc.bootstrap;
        dopt.seed = vc.bootstrap_seed;
        dopt.threads = threads_;

        std::optional<GaussianOracle> oracle;
        if (GaussianOracle::solvable(*cs_)) oracle.emplace(*cs_, cfg_.x0, cfg_.T);

        std::vector<std::string> failures;
        json components = json::object();
        std::array<bool, 3> nondegenerate{false, false, false};
        for (Component c : kComponents) {
            json times = json::array();
            for (std::size_t i = 0; i < paths_->times.size(); ++i) {
                const double t = paths_->times[i];
                json entry = {{"t", t}};
                if (!active(c)) {
                    entry["status"] = "skipped";
                    times.push_back(entry);
                    continue;
                }
                const std::vector<double> v = paths_->kept(c, i);
                const SampleStats st = sample_stats(v);
                entry["n"] = st.n;
                entry["exited"] = paths_->exited_count();
                entry["mean"] = st.mean;
                entry["variance"] = st.variance;
                entry["absdev"] = st.absdev;
                entry["absdev_stderr"] = st.absdev_stderr;
                if (oracle) entry["oracle"] = oracle_json(*oracle, c, t, st);
                if (!(st.variance >= kDegenerateVariance)) {
                    entry["status"] = "degenerate";
                    times.push_back(entry);
                    continue;
                }
                nondegenerate[static_cast<std::size_t>(c)] = true;
                VariancePair vp;
                try {
                    vp = variance_constants(c, t, used);
                } catch (const RefusedError& e) {
                    entry["status"] = "refused";
                    entry["reason"] = e.what();
                    times.push_back(entry);
                    continue;
                }
                EnvelopeParams ep{st.mean, st.absdev, vp.lower, vp.upper};
                if (vc.corruption == Corruption::halve_L) {
                    ep.L *= 0.5;
                    ep.l = std::min(ep.l, ep.L);
                }
                if (!(ep.l > 0.0)) {
                    entry["status"] = "refused";
                    entry["reason"] = "lower variance constant is zero";
                    times.push_back(entry);
                    continue;
                }
                entry["l"] = ep.l;
                entry["L"] = ep.L;
                const double sd = std::sqrt(st.variance);
                const DensityEstimate de =
                    estimate_density(v, st.mean - vc.window_sd * sd, st.mean + vc.window_sd * sd, dopt);
                const EnvelopeVerdict ev = check_envelope(de, ep, vc.z, vc.allowance, st.absdev_stderr);
                const std::vector<TailProbe> tails =
                    check_tails(v, st.mean, ep.L, vc.tail_probes, vc.tail_confidence);

                const std::string tag = std::string(to_string(c)) + "_t" + time_tag(t);
                write_text("overlay_" + tag + ".svg",
                           overlay_svg(ev, std::string(to_string(c)) + " at t = " + time_tag(t)));
                write_text("overlay_" + tag + ".csv", overlay_csv(ev));

                json violations = json::array();
                for (const EnvelopePoint& p : ev.points) {
                    if (!p.pass) violations.push_back(envelope_point_json(p));
                }
                entry["envelope"] = {{"pass", ev.pass},
                                     {"bandwidth", de.bandwidth},
                                     {"bias_budget", ev.bias_budget},
                                     {"window", {de.x.front(), de.x.back()}},
                                     {"window_measure", ev.window_measure},
                                     {"violation_measure", ev.violation_measure},
                                     {"violations", violations}};
                if (!ev.pass) failures.push_back("envelope " + tag);
                json tj = json::array();
                for (const TailProbe& p : tails) {
                    tj.push_back({{"x", p.x},
                                  {"side", std::string(to_string(p.side))},
                                  {"count", p.count},
                                  {"n", p.n},
                                  {"empirical", p.empirical},
                                  {"ci_lower", p.ci_lower},
                                  {"ci_upper", p.ci_upper},
                                  {"bound", p.bound},
                                  {"outcome", std::string(to_string(p.outcome))}});
                    if (p.outcome == TailOutcome::fail) {
                        failures.push_back("tail " + tag + " " + std::string(to_string(p.side)) + " x=" +
                                           format_double(p.x));
                    }
                }
                entry["tails"] = tj;
                entry["status"] = ev.pass ? "pass" : "fail";
                times.push_back(entry);
            }
            components[std::string(to_string(c))] = {{"mode", std::string(to_string(cfg_.mode(c)))},
                                                     {"times", times}};
        }

        json malliavin = json::array();
        json discrepancy = nullptr;
        if (mpaths_) {
            for (Component c : kComponents) {
                json item = {{"component", std::string(to_string(c))}};
                int sign = 1;
                std::string skip;
                if (!active(c)) skip = "component skipped";
                else if (c != Component::X && !nondegenerate[static_cast<std::size_t>(c)]) skip = "degenerate";
                else if (c == Component::Y) {
                    if (!lb_y_ || lb_y_->sign == SignMode::none) skip = "no sign mode for u_x";
                    else sign = lb_y_->sign == SignMode::decreasing ? -1 : 1;
                }
                if (!skip.empty()) {
                    item["status"] = "skipped";
                    item["reason"] = skip;
                    malliavin.push_back(item);
                    continue;
                }
                const MalliavinBoundResult r =
                    check_malliavin_bounds(*mpaths_, used, c, sign, vc.representation, vc.malliavin_threshold);
                item["status"] = r.pass ? "pass" : "fail";
                item["representation"] = std::string(to_string(r.representation));
                item["samples"] = r.samples;
                item["inside"] = r.inside;
                item["fraction"] = r.fraction;
                item["threshold"] = r.threshold;
                item["worst_excess"] = finite_or_null(r.worst_excess);
                item["sign"] = sign;
                if (!r.pass) failures.push_back("malliavin " + std::string(to_string(c)));
                malliavin.push_back(item);
            }
            discrepancy = discrepancy_json(*mpaths_);
        }

        const std::string assumptions_hash = sha256_hex(assumptions_text_);
        json report = {{"header",
                        {{"config_hash", config_hash_},
                         {"assumptions_hash", assumptions_hash},
                         {"seed", cfg_.mc.seed},
                         {"paths", cfg_.mc.paths},
                         {"steps", cfg_.mc.steps},
                         {"z", vc.z},
                         {"allowance", vc.allowance},
                         {"tail_confidence", vc.tail_confidence},
                         {"corruption", std::string(to_string(vc.corruption))},
                         {"budget",
                          "a grid point passes when lower - z*stderr - bias <= kde <= upper + z*stderr + bias, "
                          "with absdev widened by z times its standard error; a component passes when failing "
                          "cells cover at most the allowance of the window"}}},
                       {"constants", constants_json(used)},
                       {"components", components},
                       {"malliavin", malliavin},
                       {"discrepancy", discrepancy},
                       {"failures", failures},
                       {"passed", failures.empty()}};
        write_json("report.json", report);

        RunOutcome out;
        out.exit_code = failures.empty() ? kExitPass : kExitCheckFailed;
        out.message = failures.empty() ? "all checks passed" : std::to_string(failures.size()) + " checks failed";
        out.summary = "verify: " + std::string(failures.empty() ? "pass" : "fail") + "\n";
        for (const std::string& f : failures) out.summary += "  fail: " + f + "\n";
        return out;
    }

    json oracle_json(const GaussianOracle& oracle, Component c, double t, const SampleStats& st) const {
        const GaussianLaw law = oracle.law(c, t);
        return {{"mean", law.mean},
                {"variance", law.variance},
                {"mean_error", st.mean - law.mean},
                {"variance_error", st.variance - law.variance}};
    }

    static json discrepancy_json(const PathSet& ps) {
        json pairs = json::array();
        bool nonzero = false;
        for (std::size_t p = 0; p < ps.pairs.size(); ++p) {
            if (ps.pairs[p].r > ps.pairs[p].t) continue;
            const auto fv = ps.malliavin(Component::X, Representation::first_variation, p);
            const auto pe = ps.malliavin(Component::X, Representation::psi_exponential, p);
            double sum_fv = 0.0, sum_pe = 0.0, sum_abs = 0.0, max_abs = 0.0;
            long long n = 0;
            for (std::size_t i = 0; i < ps.n_paths; ++i) {
                if (ps.exited[i]) continue;
                sum_fv += fv[i];
                sum_pe += pe[i];
                sum_abs += std::abs(fv[i] - pe[i]);
                max_abs = std::max(max_abs, std::abs(fv[i] - pe[i]));
                ++n;
            }
            if (n == 0) continue;
            const double dn = static_cast<double>(n);
            nonzero = nonzero || max_abs > 0.0;
            pairs.push_back({{"r", ps.pairs[p].r},
                             {"t", ps.pairs[p].t},
                             {"n", n},
                             {"mean_first_variation", sum_fv / dn},
                             {"mean_psi_exponential", sum_pe / dn},
                             {"mean_abs_difference", sum_abs / dn},
                             {"max_abs_difference", max_abs}});
        }
        return {{"component", "X"}, {"pairs", pairs}, {"nonzero", nonzero}};
    }

    const RunConfig& cfg_;
    RunOptions opt_;
    double w_;
    unsigned threads_ = 1;
    std::shared_ptr<const CoefficientSet> cs_;
    json config_json_;
    std::string config_hash_;
    std::string started_;
    std::string cache_status_ = "not-used";
    std::vector<std::string> artifacts_;

    std::map<Component, AssumptionReport> reports_;
    std::vector<std::string> blocking_;
    std::string assumptions_text_;
    double M_ = 0.0;
    double M1_ = 0.0;

    std::shared_ptr<const PdeSolution> sol_;
    WindowSups sups_;
    std::shared_ptr<const LowerBoundCurves> lb_y_, lb_z_;
    std::string lb_note_y_, lb_note_z_;

    std::optional<DrivingCoefficients> dc_;
    std::optional<PathSet> paths_, mpaths_;
    BoundConstants bc_;
};

}  // namespace

std::string_view to_string(Stage s) noexcept {
    switch (s) {
        case Stage::check: return "check";
        case Stage::solve: return "solve";
        case Stage::simulate: return "simulate";
        case Stage::bounds: return "bounds";
        case Stage::verify: return "verify";
    }
    return "check";
}

Stage stage_from_string(std::string_view s) {
    for (Stage st : {Stage::check, Stage::solve, Stage::simulate, Stage::bounds, Stage::verify}) {
        if (to_string(st) == s) return st;
    }
    throw ArgumentError("unknown stage '" + std::string(s) + "'");
}

RunOutcome run_stage(Stage stage, const RunConfig& config, const RunOptions& options) {
    Pipeline p(config, options);
    return p.run(stage);
}

}  // namespace fbsde
