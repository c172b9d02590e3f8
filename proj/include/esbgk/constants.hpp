#pragma once

#include <cmath>
#include <span>

#include "esbgk/grid.hpp"
#include "esbgk/math3.hpp"
#include "esbgk/norms.hpp"

namespace esbgk {

/// Scalar functionals of the boundary data that the solution-space bounds
/// are phrased in. All carry the soft low-speed cutoff exp(-1/|v1|).
///
/// a_l1     : cutoff mass of the prescribed inflow data (both halves)
/// a_l2     : half the cutoff mass of the two wall Maxwellians
/// gamma_l1 : product of the cutoff fluxes of the two inflow data halves
/// gamma_l2 : same product for the wall Maxwellians
/// a_half_k : inf over directions of the cutoff directional energy deficit,
///            tr(A) - lambda_max(A) with A the cutoff second-moment matrix
/// c_lr1    : energy norm of data times energy norm of walls
/// c_lr2    : flux norm of data plus energy norm of walls
struct BoundaryConstants {
    double a_l1 = 0, a_l2 = 0;
    double gamma_l1 = 0, gamma_l2 = 0;
    double a_half_1 = 0, a_half_2 = 0;
    double c_lr1 = 0, c_lr2 = 0;

    double flux_left = 0, flux_right = 0; // |v1|-flux of f_L, f_R on their halves
    double data_flux_norm = 0;            // flux_left + flux_right
    double data_energy_norm = 0;          // int f_LR (1+|v|^2)
    double wall_flux_norm = 0;            // both walls, |v1| weight (2 after normalization)
    double wall_energy_norm = 0;          // both walls, 1+|v|^2 weight
    double c_lm2 = 0;                     // data_energy_norm + wall_energy_norm
};

namespace detail {

inline double soft_cutoff(double v1) { return std::exp(-1.0 / std::abs(v1)); }

// Cutoff second-moment matrix int exp(-1/|v1|) s(v) v x v dv of a merged slice.
inline Mat3Sym cutoff_second_moment(const VelocityGrid& g, std::span<const double> a,
                                    std::span<const double> b) {
    Mat3Sym m;
    for (int i = 0, nn = g.n(); i < nn; ++i) {
        const double c = g.w[i] * (a[i] + b[i]) * soft_cutoff(g.v1[i]);
        m.a11 += c * g.v1[i] * g.v1[i];
        m.a12 += c * g.v1[i] * g.v2[i];
        m.a13 += c * g.v1[i] * g.v3[i];
        m.a22 += c * g.v2[i] * g.v2[i];
        m.a23 += c * g.v2[i] * g.v3[i];
        m.a33 += c * g.v3[i] * g.v3[i];
    }
    return m;
}

inline double directional_deficit(const Mat3Sym& m) {
    return m.trace() - eigenvalues_sym3(m)[2];
}

} // namespace detail

/// f_left lives on v1>0, f_right on v1<0; wall0/wall1 are the flux-normalized
/// wall Maxwellians on their incoming halves.
inline BoundaryConstants boundary_constants(const VelocityGrid& g, std::span<const double> f_left,
                                            std::span<const double> f_right,
                                            std::span<const double> wall0,
                                            std::span<const double> wall1) {
    BoundaryConstants c;
    auto cutoff = [&](int i) { return detail::soft_cutoff(g.v1[i]); };
    auto cutflux = [&](int i) { return detail::soft_cutoff(g.v1[i]) * std::abs(g.v1[i]); };
    auto energy = [&](int i) { return 1.0 + g.speed2[i]; };
    auto flux = [&](int i) { return std::abs(g.v1[i]); };

    c.a_l1 = half_space_moment(g, f_left, Half::Positive, cutoff) +
             half_space_moment(g, f_right, Half::Negative, cutoff);
    c.a_l2 = 0.5 * (half_space_moment(g, wall0, Half::Positive, cutoff) +
                    half_space_moment(g, wall1, Half::Negative, cutoff));
    c.gamma_l1 = half_space_moment(g, f_left, Half::Positive, cutflux) *
                 half_space_moment(g, f_right, Half::Negative, cutflux);
    c.gamma_l2 = half_space_moment(g, wall0, Half::Positive, cutflux) *
                 half_space_moment(g, wall1, Half::Negative, cutflux);

    c.a_half_1 = detail::directional_deficit(detail::cutoff_second_moment(g, f_left, f_right));
    c.a_half_2 = detail::directional_deficit(detail::cutoff_second_moment(g, wall0, wall1));

    c.flux_left = half_space_moment(g, f_left, Half::Positive, flux);
    c.flux_right = half_space_moment(g, f_right, Half::Negative, flux);
    c.data_flux_norm = c.flux_left + c.flux_right;
    c.data_energy_norm = half_space_moment(g, f_left, Half::Positive, energy) +
                         half_space_moment(g, f_right, Half::Negative, energy);
    c.wall_flux_norm = half_space_moment(g, wall0, Half::Positive, flux) +
                       half_space_moment(g, wall1, Half::Negative, flux);
    c.wall_energy_norm = half_space_moment(g, wall0, Half::Positive, energy) +
                         half_space_moment(g, wall1, Half::Negative, energy);

    c.c_lr1 = c.data_energy_norm * c.wall_energy_norm;
    c.c_lr2 = c.data_flux_norm + c.wall_energy_norm;
    c.c_lm2 = c.data_energy_norm + c.wall_energy_norm;
    return c;
}

} // namespace esbgk
