#pragma once

#include <cmath>
#include <span>

#include "esbgk/grid.hpp"
#include "esbgk/math3.hpp"
#include "esbgk/norms.hpp"

namespace esbgk {

/// Macroscopic fields of one spatial slice:
///   rho   = int f dv
///   U     = (1/rho) int f v dv
///   Theta = (1/rho) int f (v-U)x(v-U) dv   (symmetric by construction)
///   T     = tr(Theta)/3
struct MacroFields {
    double rho = 0.0;
    Vec3 U{0.0, 0.0, 0.0};
    double T = 0.0;
    Mat3Sym Theta;
};

inline MacroFields compute_moments(const VelocityGrid& g, std::span<const double> slice) {
    MacroFields m;
    const int nn = g.n();
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    for (int i = 0; i < nn; ++i) {
        const double wf = g.w[i] * slice[i];
        s0 += wf;
        s1 += wf * g.v1[i];
        s2 += wf * g.v2[i];
        s3 += wf * g.v3[i];
    }
    if (!(s0 > 0.0))
        throw degenerate_data_error("slice has nonpositive mass; moments undefined");
    m.rho = s0;
    m.U = {s1 / s0, s2 / s0, s3 / s0};
    double t11 = 0, t12 = 0, t13 = 0, t22 = 0, t23 = 0, t33 = 0;
    for (int i = 0; i < nn; ++i) {
        const double wf = g.w[i] * slice[i];
        const double c1 = g.v1[i] - m.U[0];
        const double c2 = g.v2[i] - m.U[1];
        const double c3 = g.v3[i] - m.U[2];
        t11 += wf * c1 * c1;
        t12 += wf * c1 * c2;
        t13 += wf * c1 * c3;
        t22 += wf * c2 * c2;
        t23 += wf * c2 * c3;
        t33 += wf * c3 * c3;
    }
    m.Theta = Mat3Sym{t11 / s0, t12 / s0, t13 / s0, t22 / s0, t23 / s0, t33 / s0};
    m.T = m.Theta.trace() / 3.0;
    return m;
}

/// Relaxation-target covariance (1-nu) T I + nu Theta with its spectral data.
/// tr(tensor) = 3T for every nu.
struct TemperatureTensor {
    Mat3Sym tensor;
    Vec3 lambda{0, 0, 0}; // ascending
    Mat3Sym inv;
    double det = 0.0;
};

inline constexpr double kTensorFloorScale = 1e-10;

inline TemperatureTensor temperature_tensor(const MacroFields& m, double nu) {
    if (!(nu >= -0.5 && nu < 1.0))
        throw config_error("nu must lie in [-1/2, 1)");
    TemperatureTensor t;
    t.tensor = Mat3Sym::identity((1.0 - nu) * m.T).plus(m.Theta.scaled(nu));
    t.lambda = eigenvalues_sym3(t.tensor);
    const double floor = kTensorFloorScale * std::max(m.T, 1.0);
    if (!(t.lambda[0] >= floor))
        throw tensor_degeneracy_error("temperature tensor lost positive definiteness",
                                      t.lambda[0], floor);
    t.det = t.tensor.det();
    t.inv = inverse(t.tensor);
    return t;
}

} // namespace esbgk
