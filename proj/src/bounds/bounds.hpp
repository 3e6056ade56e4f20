// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "sde/driving.hpp"

#include <functional>
#include <string>
#include <vector>

namespace fbsde {

/// Constants entering the envelope variances.
struct BoundConstants {
    double nu = 1.0;     ///< nu(M)
    double mu = 1.0;     ///< mu(M)
    double M = 0.0;      ///< sup |u|
    double M1 = 0.0;     ///< sup |u_x|
    double M_psi = 0.0;  ///< sup |psi|
    double gamma = 0.0;  ///< sup of u_x sigma_x + u_x^2 sigma_u + u_xx sigma
    std::function<double(double)> m;    ///< lower bound for |u_x| at time t
    std::function<double(double)> rho;  ///< lower bound for u_xx at time t
};

/// gamma sampled at every solver level over the trusted nodes of [x_lo, x_hi].
double sample_gamma(const DrivingCoefficients& dc, double x_lo, double x_hi);

struct VariancePair {
    double lower = 0.0;
    double upper = 0.0;
};

/// xi(t) = t nu^2 e^{-2 M_psi t}, Xi(t) = t mu^2 e^{2 M_psi t}.
VariancePair x_constants(double t, const BoundConstants& bc);
/// lambda(t) = t (m(t) nu e^{-M_psi t})^2, Lambda(t) = t (M1 mu e^{M_psi t})^2.
VariancePair y_constants(double t, const BoundConstants& bc);
/// varsigma(t) = t nu^4 rho(t)^2 e^{-2 M_psi t}, Sigma(t) = t mu^2 gamma^2 e^{2 M_psi t}.
VariancePair z_constants(double t, const BoundConstants& bc);

struct EnvelopeParams {
    double mean = 0.0;
    double absdev = 0.0;  ///< E|F - E F|
    double l = 1.0;
    double L = 1.0;

    void validate() const;
};

struct DensityEnvelope {
    double lower = 0.0;
    double upper = 0.0;
};

/// absdev / (2L) exp(-(x - mean)^2 / (2l)) <= p(x) <= absdev / (2l) exp(-(x - mean)^2 / (2L)).
DensityEnvelope envelope_density(double x, const EnvelopeParams& ep);

enum class TailSide { upper, lower };
std::string_view to_string(TailSide s) noexcept;

/// Upper side bounds P(F >= x) by exp(-(x - mean)^2 / 2L); lower side bounds
/// P(F <= -x) by exp(-(x + mean)^2 / 2L). Requires x > 0.
double tail_bound(double x, double mean, double L, TailSide side);

/// CSV with columns x, lower, upper on `xs`.
std::string envelope_csv(const std::vector<double>& xs, const EnvelopeParams& ep);

}  // namespace fbsde
