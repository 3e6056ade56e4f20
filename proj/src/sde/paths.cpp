// SPDX-License-Identifier: Apache-2.0
#include "sde/paths.hpp"

#include "common/error.hpp"
#include "common/format.hpp"
#include "common/parallel.hpp"
#include "common/philox.hpp"
#include "common/summation.hpp"

#include <algorithm>
#include <cmath>

namespace fbsde {
namespace {

int snap(double time, double dt, int n_steps) {
    const int k = static_cast<int>(std::lround(time / dt));
    if (k < 0 || k > n_steps || std::abs(k * dt - time) > 1e-9 * std::max(1.0, std::abs(time))) {
        throw ArgumentError("time " + format_double(time) + " is not on the step lattice (dt = " + format_double(dt) +
                            ")");
    }
    return k;
}

double increment(const CounterRng& rng, std::uint64_t path, int step, double sqrt_dt) {
    return sqrt_dt * rng.normal_pair(path, static_cast<std::uint64_t>(step) / 2)[static_cast<std::size_t>(step % 2)];
}

double z_factor(const DrivingValues& v) { return v.ux * v.sigma_x + v.uxx * v.sigma; }

double quantile(std::vector<double>& v, double q) {
    if (v.empty()) return 0.0;
    const std::size_t i = static_cast<std::size_t>(std::floor(q * static_cast<double>(v.size() - 1)));
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(i), v.end());
    return v[i];
}

}  // namespace

std::string_view to_string(Representation r) noexcept {
    return r == Representation::psi_exponential ? "psi-exponential" : "first-variation";
}

std::string_view to_string(Component c) noexcept {
    switch (c) {
        case Component::X: return "X";
        case Component::Y: return "Y";
        case Component::Z: return "Z";
    }
    return "X";
}

std::vector<std::pair<double, double>> default_malliavin_pairs(double T) {
    std::vector<std::pair<double, double>> out;
    for (double r : {0.0, 0.25 * T, 0.5 * T}) {
        for (double t : {0.5 * T, 0.75 * T, T}) {
            if (r <= t) out.emplace_back(r, t);
        }
    }
    return out;
}

std::span<const double> PathSet::values(Component c, std::size_t obs) const {
    const std::vector<double>& v = c == Component::X ? X : c == Component::Y ? Y : Z;
    return std::span<const double>(v).subspan(obs * n_paths, n_paths);
}

std::span<const double> PathSet::malliavin(Component c, Representation rep, std::size_t pair) const {
    const auto r = static_cast<std::size_t>(rep);
    const std::vector<double>& v = c == Component::X ? DX[r] : c == Component::Y ? DY[r] : DZ[r];
    return std::span<const double>(v).subspan(pair * n_paths, n_paths);
}

std::span<const double> PathSet::tolerance(Component c, std::size_t pair) const {
    const std::vector<double>& v = c == Component::X ? tolX : c == Component::Y ? tolY : tolZ;
    return std::span<const double>(v).subspan(pair * n_paths, n_paths);
}

std::size_t PathSet::observation_index(double t) const {
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (std::abs(times[i] - t) <= 1e-9 * std::max(1.0, T)) return i;
    }
    throw ArgumentError("time " + format_double(t) + " is not an observation time");
}

std::vector<double> PathSet::kept(Component c, std::size_t obs) const {
    const auto v = values(c, obs);
    std::vector<double> out;
    out.reserve(n_paths);
    for (std::size_t i = 0; i < n_paths; ++i) {
        if (!exited[i]) out.push_back(v[i]);
    }
    return out;
}

std::size_t PathSet::exited_count() const noexcept {
    return static_cast<std::size_t>(std::count(exited.begin(), exited.end(), 1));
}

std::string PathSet::summary_csv() const {
    CsvWriter csv({"t", "component", "n", "exited", "mean", "std", "absdev", "q05", "q25", "q50", "q75", "q95"});
    const std::size_t out = exited_count();
    for (std::size_t obs = 0; obs < times.size(); ++obs) {
        for (Component c : {Component::X, Component::Y, Component::Z}) {
            if (c != Component::X && !has_yz) continue;
            std::vector<double> v = kept(c, obs);
            const double mean = mean_of(v);
            std::vector<double> dev(v.size());
            std::vector<double> sq(v.size());
            for (std::size_t i = 0; i < v.size(); ++i) {
                dev[i] = std::abs(v[i] - mean);
                sq[i] = (v[i] - mean) * (v[i] - mean);
            }
            const double var = v.size() > 1 ? pairwise_sum(sq) / static_cast<double>(v.size() - 1) : 0.0;
            csv.cell(times[obs]).cell(to_string(c)).cell(static_cast<long long>(v.size()));
            csv.cell(static_cast<long long>(out)).cell(mean).cell(std::sqrt(var)).cell(mean_of(dev));
            for (double q : {0.05, 0.25, 0.5, 0.75, 0.95}) csv.cell(quantile(v, q));
            csv.end_row();
        }
    }
    return csv.str();
}

std::string PathSet::terminal_csv() const {
    CsvWriter csv({"path", "exited", "X", "Y", "Z"});
    const std::size_t last = times.size() - 1;
    const auto x = values(Component::X, last);
    const auto y = values(Component::Y, last);
    const auto z = values(Component::Z, last);
    for (std::size_t i = 0; i < n_paths; ++i) {
        csv.cell(static_cast<long long>(i)).cell(static_cast<long long>(exited[i]));
        csv.cell(x[i]).cell(y[i]).cell(z[i]);
        csv.end_row();
    }
    return csv.str();
}

Path simulate_path(const DrivingCoefficients& dc, double x0, int n_steps, std::uint64_t seed, std::uint64_t path_id) {
    if (n_steps < 1) throw ArgumentError("n_steps must be positive");
    const CounterRng rng(seed);
    Path p;
    p.dt = dc.T() / n_steps;
    const double sqrt_dt = std::sqrt(p.dt);
    p.t.resize(static_cast<std::size_t>(n_steps) + 1);
    p.x.resize(p.t.size());
    p.dB.resize(static_cast<std::size_t>(n_steps));
    p.x[0] = x0;
    for (int k = 0; k < n_steps; ++k) {
        p.t[k] = k * p.dt;
        const DrivingValues v = dc.evaluate(p.t[k], p.x[k], DrivingDetail::drift_diffusion);
        p.dB[k] = increment(rng, path_id, k, sqrt_dt);
        p.x[k + 1] = p.x[k] + v.f * p.dt + v.sigma * p.dB[k];
        if (!std::isfinite(p.x[k + 1])) {
            throw NumericalError("non-finite state on path " + std::to_string(path_id) + " at step " +
                                 std::to_string(k + 1));
        }
    }
    p.t[n_steps] = dc.T();
    return p;
}

double malliavin_X(const Path& path, const DrivingCoefficients& dc, double r, double t, Representation rep) {
    const int n = static_cast<int>(path.dB.size());
    const int kr = snap(r, path.dt, n);
    const int kt = snap(t, path.dt, n);
    if (kr > kt) return 0.0;
    if (rep == Representation::first_variation) {
        double exponent = 0.0;
        for (int k = kr; k < kt; ++k) {
            const DrivingValues v = dc.evaluate(path.t[k], path.x[k], DrivingDetail::first_order);
            exponent += (v.f_x - 0.5 * v.sigma_x * v.sigma_x) * path.dt + v.sigma_x * path.dB[k];
        }
        return dc.evaluate(path.t[kr], path.x[kr], DrivingDetail::drift_diffusion).sigma * std::exp(exponent);
    }
    double integral = 0.0;
    double previous = DrivingCoefficients::psi(dc.evaluate(path.t[kr], path.x[kr]));
    for (int k = kr + 1; k <= kt; ++k) {
        const double current = DrivingCoefficients::psi(dc.evaluate(path.t[k], path.x[k]));
        integral += 0.5 * (previous + current) * path.dt;
        previous = current;
    }
    return dc.evaluate(path.t[kt], path.x[kt], DrivingDetail::drift_diffusion).sigma * std::exp(integral);
}

MalliavinYZ malliavin_YZ(const Path& path, const DrivingCoefficients& dc, double r, double t, Representation rep) {
    const double d = malliavin_X(path, dc, r, t, rep);
    const int kt = snap(t, path.dt, static_cast<int>(path.dB.size()));
    const DrivingValues v = dc.evaluate(path.t[kt], path.x[kt], DrivingDetail::first_order);
    return {v.ux * d, z_factor(v) * d};
}

PathSet simulate_paths(const DrivingCoefficients& dc, double x0, const SimulationOptions& opt) {
    if (opt.n_steps < 1 || opt.n_paths < 1) throw ArgumentError("need at least one path and one step");
    PathSet ps;
    ps.n_paths = opt.n_paths;
    ps.n_steps = opt.n_steps;
    ps.T = dc.T();
    ps.seed = opt.seed;
    ps.has_yz = dc.is_coupled();
    const double dt = ps.dt();
    const int K = opt.n_steps;

    ps.times = opt.observation_times;
    if (ps.times.empty()) ps.times = {0.25 * ps.T, 0.5 * ps.T, 0.75 * ps.T, ps.T};
    for (double t : ps.times) ps.steps.push_back(snap(t, dt, K));
    for (std::size_t i = 0; i < ps.times.size(); ++i) ps.times[i] = ps.steps[i] == K ? ps.T : ps.steps[i] * dt;

    if (opt.malliavin) {
        const auto raw = opt.pairs.empty() ? default_malliavin_pairs(ps.T) : opt.pairs;
        for (const auto& [r, t] : raw) {
            MalliavinPair mp{r, t, snap(r, dt, K), snap(t, dt, K)};
            ps.pairs.push_back(mp);
        }
    }
    const std::size_t n = ps.n_paths;
    const std::size_t n_obs = ps.times.size();
    const std::size_t n_pairs = ps.pairs.size();
    ps.X.assign(n_obs * n, 0.0);
    ps.Y.assign(n_obs * n, 0.0);
    ps.Z.assign(n_obs * n, 0.0);
    ps.exited.assign(n, 0);
    for (int rep = 0; rep < 2; ++rep) {
        ps.DX[rep].assign(n_pairs * n, 0.0);
        ps.DY[rep].assign(n_pairs * n, 0.0);
        ps.DZ[rep].assign(n_pairs * n, 0.0);
    }
    ps.tolX.assign(n_pairs * n, 0.0);
    ps.tolY.assign(n_pairs * n, 0.0);
    ps.tolZ.assign(n_pairs * n, 0.0);

    // The 2 dt companion path exists when every pair lies on the coarse lattice.
    bool coarse = opt.malliavin && K % 2 == 0;
    for (const auto& mp : ps.pairs) coarse = coarse && mp.step_r % 2 == 0 && mp.step_t % 2 == 0;

    const DrivingDetail detail = opt.malliavin ? DrivingDetail::full : DrivingDetail::drift_diffusion;
    const CounterRng rng(opt.seed);
    const double sqrt_dt = std::sqrt(dt);
    const double lo = dc.domain_lo();
    const double hi = dc.domain_hi();

    parallel_for(n, opt.threads, [&](std::size_t begin, std::size_t end) {
        const std::size_t levels = static_cast<std::size_t>(K) + 1;
        std::vector<DrivingValues> fine(opt.malliavin ? levels : 0);
        std::vector<DrivingValues> crs(coarse ? levels : 0);
        std::vector<double> I(opt.malliavin ? levels : 0), J(I.size()), Ic(coarse ? levels : 0);
        for (std::size_t path = begin; path < end; ++path) {
            double x = x0;
            double xc = x0;
            bool out = false;
            double dB_prev = 0.0;
            std::size_t next_obs = 0;
            for (int k = 0; k <= K; ++k) {
                const double t = k == K ? ps.T : k * dt;
                const DrivingValues v = dc.evaluate(t, x, detail);
                while (next_obs < n_obs && ps.steps[next_obs] == k) {
                    ps.X[next_obs * n + path] = x;
                    ps.Y[next_obs * n + path] = v.u;
                    ps.Z[next_obs * n + path] = v.ux * v.sigma;
                    ++next_obs;
                }
                if (opt.malliavin) {
                    fine[k] = v;
                    J[k] = k == 0 ? 0.0
                                  : J[k - 1] + 0.5 * (DrivingCoefficients::psi(fine[k - 1]) +
                                                      DrivingCoefficients::psi(v)) * dt;
                    if (k == 0) I[0] = 0.0;
                }
                if (k == K) break;

                const double dB = increment(rng, path, k, sqrt_dt);
                if (opt.malliavin) {
                    I[k + 1] = I[k] + (v.f_x - 0.5 * v.sigma_x * v.sigma_x) * dt + v.sigma_x * dB;
                }
                if (coarse) {
                    if (k % 2 == 0) {
                        crs[k] = dc.evaluate(t, xc, DrivingDetail::first_order);
                        if (k == 0) Ic[0] = 0.0;
                        dB_prev = dB;
                    } else {
                        const DrivingValues& vc = crs[k - 1];
                        const double dBc = dB_prev + dB;
                        Ic[k + 1] = Ic[k - 1] + (vc.f_x - 0.5 * vc.sigma_x * vc.sigma_x) * 2.0 * dt + vc.sigma_x * dBc;
                        xc += vc.f * 2.0 * dt + vc.sigma * dBc;
                        if (k + 1 == K) crs[K] = dc.evaluate(ps.T, xc, DrivingDetail::first_order);
                    }
                }
                x = x + v.f * dt + v.sigma * dB;
                if (!std::isfinite(x)) {
                    throw NumericalError("non-finite state on path " + std::to_string(path) + " at step " +
                                         std::to_string(k + 1));
                }
                out = out || x < lo || x > hi;
            }
            ps.exited[path] = out ? 1 : 0;

            for (std::size_t q = 0; q < n_pairs; ++q) {
                const MalliavinPair& mp = ps.pairs[q];
                const std::size_t slot = q * n + path;
                if (mp.step_r > mp.step_t) continue;
                const DrivingValues& at_t = fine[mp.step_t];
                const double fv = fine[mp.step_r].sigma * std::exp(I[mp.step_t] - I[mp.step_r]);
                const double pd = at_t.sigma * std::exp(J[mp.step_t] - J[mp.step_r]);
                ps.DX[0][slot] = fv;
                ps.DY[0][slot] = at_t.ux * fv;
                ps.DZ[0][slot] = z_factor(at_t) * fv;
                ps.DX[1][slot] = pd;
                ps.DY[1][slot] = at_t.ux * pd;
                ps.DZ[1][slot] = z_factor(at_t) * pd;
                if (coarse) {
                    const DrivingValues& ct = crs[mp.step_t];
                    const double fc = crs[mp.step_r].sigma * std::exp(Ic[mp.step_t] - Ic[mp.step_r]);
                    ps.tolX[slot] = 3.0 * std::abs(fv - fc);
                    ps.tolY[slot] = 3.0 * std::abs(at_t.ux * fv - ct.ux * fc);
                    ps.tolZ[slot] = 3.0 * std::abs(z_factor(at_t) * fv - z_factor(ct) * fc);
                }
            }
        }
    });
    return ps;
}

}  // namespace fbsde
