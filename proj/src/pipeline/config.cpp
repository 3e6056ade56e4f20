// SPDX-License-Identifier: Apache-2.0
#include "pipeline/config.hpp"

#include "assumptions/region.hpp"
#include "common/digest.hpp"
#include "common/error.hpp"
#include "common/format.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace fbsde {
namespace {

using nlohmann::json;

std::string escape_pointer(const std::string& key) {
    std::string out;
    for (char c : key) {
        if (c == '~') out += "~0";
        else if (c == '/') out += "~1";
        else out += c;
    }
    return out;
}

class Field {
public:
    Field(YAML::Node node, std::string pointer) : node_(std::move(node)), pointer_(std::move(pointer)) {}

    bool present() const { return node_.IsDefined() && !node_.IsNull(); }
    const std::string& pointer() const { return pointer_; }

    [[noreturn]] void fail(const std::string& message) const { throw ConfigError(pointer_, message); }

    /// Child of a mapping; rejects keys outside `allowed`.
    Field map(std::initializer_list<const char*> allowed) const {
        if (present() && !node_.IsMap()) fail("expected a mapping");
        if (present()) {
            const std::set<std::string> keys(allowed.begin(), allowed.end());
            for (const auto& kv : node_) {
                const std::string key = kv.first.as<std::string>();
                if (!keys.count(key)) throw ConfigError(pointer_ + "/" + escape_pointer(key), "unknown key");
            }
        }
        return *this;
    }

    Field operator[](const char* key) const {
        if (!present()) return Field(YAML::Node(YAML::NodeType::Undefined), pointer_ + "/" + key);
        const YAML::Node& n = node_;
        return Field(n[key], pointer_ + "/" + escape_pointer(key));
    }

    std::string scalar() const {
        if (!node_.IsScalar()) fail("expected a scalar");
        return node_.Scalar();
    }

    double number(double fallback) const {
        if (!present()) return fallback;
        const std::string s = scalar();
        double v = 0.0;
        const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
        if (res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(v)) {
            fail("expected a finite number, got '" + s + "'");
        }
        return v;
    }

    std::optional<double> optional_number() const {
        if (!present()) return std::nullopt;
        return number(0.0);
    }

    long long integer(long long fallback) const {
        if (!present()) return fallback;
        const std::string s = scalar();
        long long v = 0;
        const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
        if (res.ec != std::errc() || res.ptr != s.data() + s.size()) fail("expected an integer, got '" + s + "'");
        return v;
    }

    std::string text(const std::string& fallback) const { return present() ? scalar() : fallback; }

    std::vector<double> numbers(std::vector<double> fallback) const {
        if (!present()) return fallback;
        if (!node_.IsSequence()) fail("expected a list of numbers");
        std::vector<double> out;
        for (std::size_t i = 0; i < node_.size(); ++i) {
            out.push_back(Field(node_[i], pointer_ + "/" + std::to_string(i)).number(0.0));
        }
        return out;
    }

    std::vector<std::pair<double, double>> pairs() const {
        std::vector<std::pair<double, double>> out;
        if (!present()) return out;
        if (!node_.IsSequence()) fail("expected a list of [r, t] pairs");
        for (std::size_t i = 0; i < node_.size(); ++i) {
            const Field item(node_[i], pointer_ + "/" + std::to_string(i));
            const auto v = item.numbers({});
            if (v.size() != 2) item.fail("expected [r, t]");
            out.emplace_back(v[0], v[1]);
        }
        return out;
    }

private:
    YAML::Node node_;
    std::string pointer_;
};

void require(bool ok, const Field& f, const std::string& message) {
    if (!ok) f.fail(message);
}

EnvelopeMode envelope_mode(const Field& f) {
    const std::string s = f.text("theoretical");
    if (s == "theoretical") return EnvelopeMode::theoretical;
    if (s == "empirical") return EnvelopeMode::empirical;
    if (s == "skip") return EnvelopeMode::skip;
    f.fail("expected theoretical, empirical or skip");
}

bool on_lattice(double t, double T, int steps) {
    const double pos = t / (T / steps);
    return std::abs(pos - std::round(pos)) <= 1e-9 * std::max(1.0, pos);
}

void check_times(const std::vector<double>& times, const std::string& pointer, double T, int steps, bool allow_zero) {
    for (std::size_t i = 0; i < times.size(); ++i) {
        const double t = times[i];
        const std::string at = pointer + "/" + std::to_string(i);
        if (!(allow_zero ? t >= 0.0 : t > 0.0) || t > T) {
            throw ConfigError(at, "time " + format_double(t) + " outside " + (allow_zero ? "[0, T]" : "(0, T]"));
        }
        if (!on_lattice(t, T, steps)) {
            throw ConfigError(at, "time " + format_double(t) + " is not a multiple of T / mc.steps");
        }
    }
}

// Twice the window, or |x0| + 8 sup sigma sqrt(T) + sup |f| T.
double auto_halfwidth(const CoefficientSet& cs, const RunConfig& c) {
    const double w = c.region.halfwidth;
    double h_max = 0.0;
    double hx_max = 0.0;
    for (double x : linspace(-w, w, 201)) {
        h_max = std::max(h_max, std::abs(cs.h(x)));
        hx_max = std::max(hx_max, std::abs(cs.h_prime(x)));
    }
    double s_max = 0.0;
    for (double t : {0.0, 0.5 * c.T, c.T}) {
        for (double x : linspace(-w, w, 21)) {
            for (double u : {-h_max, 0.0, h_max}) {
                const double s = std::abs(cs.sigma(Point{t, x, u, 0.0}));
                if (std::isfinite(s)) s_max = std::max(s_max, s);
            }
        }
    }
    const double p_max = s_max * hx_max;
    double f_max = 0.0;
    for (double t : {0.0, 0.5 * c.T, c.T}) {
        for (double x : linspace(-w, w, 21)) {
            for (double u : {-h_max, 0.0, h_max}) {
                for (double p : {-p_max, 0.0, p_max}) {
                    const double f = std::abs(cs.f(Point{t, x, u, p}));
                    if (std::isfinite(f)) f_max = std::max(f_max, f);
                }
            }
        }
    }
    return std::max(2.0 * w, std::abs(c.x0) + 8.0 * s_max * std::sqrt(c.T) + f_max * c.T);
}

json number_or_null(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

std::string_view to_string(EnvelopeMode m) noexcept {
    switch (m) {
        case EnvelopeMode::theoretical: return "theoretical";
        case EnvelopeMode::empirical: return "empirical";
        case EnvelopeMode::skip: return "skip";
    }
    return "theoretical";
}

std::string_view to_string(Corruption c) noexcept {
    switch (c) {
        case Corruption::none: return "none";
        case Corruption::halve_L: return "halve_L";
        case Corruption::zero_M_psi: return "zero_M_psi";
    }
    return "none";
}

Grid RunConfig::make_grid() const {
    Grid g;
    const double hw = grid.halfwidth.value_or(2.0 * region.halfwidth);
    g.x_lo = -hw;
    g.x_hi = hw;
    g.J = grid.J;
    g.K = grid.K;
    g.T = T;
    g.left = g.right = grid.boundary;
    g.omega = grid.omega;
    return g;
}

json RunConfig::to_json() const {
    json j;
    j["coefficients"] = {{"f", coefficients.f}, {"sigma", coefficients.sigma}, {"g", coefficients.g},
                         {"h", coefficients.h}};
    j["x0"] = x0;
    j["T"] = T;
    j["grid"] = {{"J", grid.J},
                 {"K", grid.K},
                 {"halfwidth", number_or_null(grid.halfwidth)},
                 {"boundary", fbsde::to_string(grid.boundary)},
                 {"omega", grid.omega}};
    j["region"] = {{"halfwidth", region.halfwidth}, {"M", number_or_null(region.M)},
                   {"M1", number_or_null(region.M1)}, {"nt", region.nt},
                   {"nx", region.nx}, {"nu", region.nu},
                   {"np", region.np}, {"beta", region.beta}};
    json pairs = json::array();
    for (const auto& [r, t] : mc.pairs) pairs.push_back({r, t});
    j["mc"] = {{"paths", mc.paths}, {"steps", mc.steps}, {"seed", mc.seed}, {"malliavin_paths", mc.malliavin_paths},
               {"times", mc.times}, {"pairs", pairs}};
    j["envelope"] = {{"X", std::string(fbsde::to_string(envelope[0]))},
                     {"Y", std::string(fbsde::to_string(envelope[1]))},
                     {"Z", std::string(fbsde::to_string(envelope[2]))}};
    j["verify"] = {{"bandwidth", std::string(fbsde::to_string(verify.bandwidth))},
                   {"bandwidth_value", verify.bandwidth_value},
                   {"grid_points", verify.grid_points},
                   {"bootstrap", verify.bootstrap},
                   {"bootstrap_seed", verify.bootstrap_seed},
                   {"z", verify.z},
                   {"allowance", verify.allowance},
                   {"window_sd", verify.window_sd},
                   {"tail_probes", verify.tail_probes},
                   {"tail_confidence", verify.tail_confidence},
                   {"malliavin_threshold", verify.malliavin_threshold},
                   {"representation", std::string(fbsde::to_string(verify.representation))},
                   {"corruption", std::string(fbsde::to_string(verify.corruption))}};
    j["bounds"] = {{"times", bound_times}};
    return j;
}

std::string canonical_dump(const json& j) { return j.dump(); }

std::string RunConfig::hash() const { return sha256_hex(canonical_dump(to_json())); }

RunConfig parse_config(const std::string& text) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::Exception& e) {
        throw ConfigError("", std::string("YAML syntax: ") + e.what());
    }
    const Field top = Field(root, "").map({"coefficients", "x0", "T", "grid", "region", "mc", "envelope", "verify",
                                           "bounds", "out"});
    if (!top.present()) throw ConfigError("", "empty config");
    RunConfig c;

    c.out_dir = top["out"].text("out");
    require(!c.out_dir.empty(), top["out"], "must not be empty");

    const Field co = top["coefficients"].map({"f", "sigma", "g", "h"});
    if (!co.present()) co.fail("missing coefficients");
    c.coefficients.f = co["f"].text("0");
    c.coefficients.sigma = co["sigma"].text("1");
    c.coefficients.g = co["g"].text("0");
    c.coefficients.h = co["h"].text("x");
    std::optional<CoefficientSet> cs;
    for (const char* name : {"f", "sigma", "g", "h"}) {
        CoefficientSource probe;
        const std::string field = std::string(name);
        const std::string v = field == "f" ? c.coefficients.f : field == "sigma" ? c.coefficients.sigma
                                                               : field == "g"     ? c.coefficients.g
                                                                                  : c.coefficients.h;
        (field == "f" ? probe.f : field == "sigma" ? probe.sigma : field == "g" ? probe.g : probe.h) = v;
        try {
            (void)CoefficientSet::parse(probe);
        } catch (const Error& e) {
            co[name].fail(e.what());
        }
    }
    cs = CoefficientSet::parse(c.coefficients);

    c.T = top["T"].number(1.0);
    require(c.T > 0.0, top["T"], "T must be positive");

    const Field rg = top["region"].map({"halfwidth", "M", "M1", "nt", "nx", "nu", "np", "beta"});
    c.region.halfwidth = rg["halfwidth"].number(4.0);
    require(c.region.halfwidth > 0.0, rg["halfwidth"], "must be positive");
    c.region.M = rg["M"].optional_number();
    require(!c.region.M || *c.region.M > 0.0, rg["M"], "must be positive");
    c.region.M1 = rg["M1"].optional_number();
    require(!c.region.M1 || *c.region.M1 > 0.0, rg["M1"], "must be positive");
    c.region.nt = static_cast<int>(rg["nt"].integer(5));
    c.region.nx = static_cast<int>(rg["nx"].integer(21));
    c.region.nu = static_cast<int>(rg["nu"].integer(9));
    c.region.np = static_cast<int>(rg["np"].integer(9));
    for (const char* k : {"nt", "nx", "nu", "np"}) {
        require(rg[k].integer(5) >= 3 && rg[k].integer(5) <= 10001, rg[k], "sample count must be in [3, 10001]");
    }
    c.region.beta = rg["beta"].number(0.5);
    require(c.region.beta > 0.0 && c.region.beta < 1.0, rg["beta"], "beta must lie in (0, 1)");

    c.x0 = top["x0"].number(0.0);
    require(std::abs(c.x0) < c.region.halfwidth, top["x0"], "x0 must lie inside the measurement window");

    const Field gr = top["grid"].map({"J", "K", "halfwidth", "boundary", "omega"});
    c.grid.J = static_cast<int>(gr["J"].integer(400));
    require(c.grid.J >= 16 && c.grid.J <= 100000, gr["J"], "J must be in [16, 100000]");
    c.grid.K = static_cast<int>(gr["K"].integer(400));
    require(c.grid.K >= 1 && c.grid.K <= 100000, gr["K"], "K must be in [1, 100000]");
    if (gr["halfwidth"].present() && gr["halfwidth"].scalar() != "auto") {
        c.grid.halfwidth = gr["halfwidth"].number(0.0);
        require(*c.grid.halfwidth > c.region.halfwidth, gr["halfwidth"],
                "grid halfwidth must exceed the measurement window");
    } else {
        c.grid.halfwidth = auto_halfwidth(*cs, c);
    }
    try {
        c.grid.boundary = boundary_from_string(gr["boundary"].text("extrapolate"));
    } catch (const Error&) {
        gr["boundary"].fail("expected dirichlet or extrapolate");
    }
    c.grid.omega = gr["omega"].number(0.5);
    require(c.grid.omega >= 0.5 && c.grid.omega <= 1.0, gr["omega"], "omega must lie in [0.5, 1]");

    const Field mc = top["mc"].map({"paths", "steps", "seed", "malliavin_paths", "times", "pairs"});
    const long long paths = mc["paths"].integer(10000);
    require(paths >= 1 && paths <= 100000000, mc["paths"], "paths must be in [1, 1e8]");
    c.mc.paths = static_cast<std::size_t>(paths);
    c.mc.steps = static_cast<int>(mc["steps"].integer(200));
    require(c.mc.steps >= 1 && c.mc.steps <= 1000000, mc["steps"], "steps must be in [1, 1e6]");
    const long long seed = mc["seed"].integer(1);
    require(seed >= 0, mc["seed"], "seed must be non-negative");
    c.mc.seed = static_cast<std::uint64_t>(seed);
    const long long mp = mc["malliavin_paths"].integer(static_cast<long long>(std::min<std::size_t>(10000, c.mc.paths)));
    require(mp >= 0 && static_cast<std::size_t>(mp) <= c.mc.paths, mc["malliavin_paths"],
            "malliavin_paths must be in [0, paths]");
    c.mc.malliavin_paths = static_cast<std::size_t>(mp);
    c.mc.times = mc["times"].numbers({0.25 * c.T, 0.5 * c.T, 0.75 * c.T, c.T});
    require(!c.mc.times.empty(), mc["times"], "need at least one observation time");
    check_times(c.mc.times, mc["times"].pointer(), c.T, c.mc.steps, false);
    c.mc.pairs = mc["pairs"].pairs();
    if (c.mc.pairs.empty()) c.mc.pairs = default_malliavin_pairs(c.T);
    for (std::size_t i = 0; i < c.mc.pairs.size(); ++i) {
        check_times({c.mc.pairs[i].first, c.mc.pairs[i].second}, mc["pairs"].pointer() + "/" + std::to_string(i), c.T,
                    c.mc.steps, true);
    }

    const Field env = top["envelope"].map({"X", "Y", "Z"});
    c.envelope = {envelope_mode(env["X"]), envelope_mode(env["Y"]), envelope_mode(env["Z"])};

    const Field v = top["verify"].map({"bandwidth", "bandwidth_value", "grid_points", "bootstrap", "bootstrap_seed",
                                       "z", "allowance", "window_sd", "tail_probes", "tail_confidence",
                                       "malliavin_threshold", "representation", "corruption"});
    try {
        c.verify.bandwidth = bandwidth_rule_from_string(v["bandwidth"].text("silverman"));
    } catch (const Error&) {
        v["bandwidth"].fail("expected silverman or fixed");
    }
    c.verify.bandwidth_value = v["bandwidth_value"].number(0.0);
    require(c.verify.bandwidth == BandwidthRule::silverman || c.verify.bandwidth_value > 0.0, v["bandwidth_value"],
            "the fixed rule needs a positive bandwidth_value");
    c.verify.grid_points = static_cast<int>(v["grid_points"].integer(201));
    require(c.verify.grid_points >= 3 && c.verify.grid_points <= 100001, v["grid_points"], "must be in [3, 100001]");
    c.verify.bootstrap = static_cast<int>(v["bootstrap"].integer(200));
    require(c.verify.bootstrap >= 2 && c.verify.bootstrap <= 100000, v["bootstrap"], "must be in [2, 100000]");
    const long long bseed = v["bootstrap_seed"].integer(20240601);
    require(bseed >= 0, v["bootstrap_seed"], "must be non-negative");
    c.verify.bootstrap_seed = static_cast<std::uint64_t>(bseed);
    c.verify.z = v["z"].number(3.0);
    require(c.verify.z >= 0.0, v["z"], "must be non-negative");
    c.verify.allowance = v["allowance"].number(0.01);
    require(c.verify.allowance >= 0.0 && c.verify.allowance < 1.0, v["allowance"], "must be in [0, 1)");
    c.verify.window_sd = v["window_sd"].number(4.0);
    require(c.verify.window_sd > 0.0, v["window_sd"], "must be positive");
    c.verify.tail_probes = v["tail_probes"].numbers({0.5, 1.0, 2.0});
    for (std::size_t i = 0; i < c.verify.tail_probes.size(); ++i) {
        if (!(c.verify.tail_probes[i] > 0.0)) {
            throw ConfigError(v["tail_probes"].pointer() + "/" + std::to_string(i), "tail probes must be positive");
        }
    }
    c.verify.tail_confidence = v["tail_confidence"].number(0.99);
    require(c.verify.tail_confidence > 0.5 && c.verify.tail_confidence < 1.0, v["tail_confidence"],
            "must be in (0.5, 1)");
    c.verify.malliavin_threshold = v["malliavin_threshold"].number(0.999);
    require(c.verify.malliavin_threshold > 0.0 && c.verify.malliavin_threshold <= 1.0, v["malliavin_threshold"],
            "must be in (0, 1]");
    const std::string rep = v["representation"].text("first-variation");
    if (rep == "first-variation") c.verify.representation = Representation::first_variation;
    else if (rep == "psi-exponential") c.verify.representation = Representation::psi_exponential;
    else v["representation"].fail("expected first-variation or psi-exponential");
    const std::string cor = v["corruption"].text("none");
    if (cor == "none") c.verify.corruption = Corruption::none;
    else if (cor == "halve_L") c.verify.corruption = Corruption::halve_L;
    else if (cor == "zero_M_psi") c.verify.corruption = Corruption::zero_M_psi;
    else v["corruption"].fail("expected none, halve_L or zero_M_psi");

    const Field b = top["bounds"].map({"times"});
    c.bound_times = b["times"].numbers(c.mc.times);
    for (std::size_t i = 0; i < c.bound_times.size(); ++i) {
        if (!(c.bound_times[i] > 0.0) || c.bound_times[i] > c.T) {
            throw ConfigError(b["times"].pointer() + "/" + std::to_string(i), "time outside (0, T]");
        }
    }
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("", "cannot read config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

}  // namespace fbsde
