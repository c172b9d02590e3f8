#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "esbgk/constants.hpp"
#include "esbgk/field.hpp"
#include "esbgk/grid.hpp"
#include "esbgk/norms.hpp"

namespace esbgk {

enum class Regime { Inflow, Diffusive };

/// Wall Maxwellian shape exp(-|v|^2 / (2 Tw)) restricted to the incoming half
/// of its wall (v1>0 at x=0, v1<0 at x=1), zero elsewhere, scaled so the grid
/// |v1|-flux over that half equals 1.
inline std::vector<double> wall_maxwellian(const VelocityGrid& g, double tw, int side) {
    if (!(tw > 0.0)) throw config_error("wall temperature must be positive");
    if (side != 0 && side != 1) throw config_error("wall side must be 0 or 1");
    std::vector<double> s(g.n(), 0.0);
    const Half h = side == 0 ? Half::Positive : Half::Negative;
    for (int i = 0, nn = g.n(); i < nn; ++i) {
        const bool pos = g.v1[i] > 0.0;
        if ((h == Half::Positive) != pos) continue;
        s[i] = std::exp(-g.speed2[i] / (2.0 * tw));
    }
    const double flux = half_space_moment(g, s, h, [&](int i) { return std::abs(g.v1[i]); });
    if (!(flux > 0.0)) throw degenerate_data_error("wall Maxwellian has zero grid flux");
    for (double& v : s) v /= flux;
    return s;
}

/// Boundary condition of a run: mixing weights, wall temperatures, prescribed
/// inflow data (f_left on v1>0, f_right on v1<0) and the wall Maxwellians.
struct BoundarySpec {
    Regime regime = Regime::Inflow;
    double delta1 = 1.0, delta2 = 0.0, delta3 = 0.0;
    double tw0 = 1.0, tw1 = 1.0;
    std::vector<double> f_left, f_right;
    std::vector<double> wall0, wall1;
};

/// Validates the weights and data and fills in the wall Maxwellians.
/// Inflow regime requires zero transverse momentum in the data; prescribing a
/// v2/v3 drift there is a configuration error, not a solver failure.
inline BoundarySpec make_boundary_spec(const VelocityGrid& g, Regime regime, double d1, double d2,
                                       double d3, double tw0, double tw1,
                                       std::vector<double> f_left, std::vector<double> f_right) {
    if (!(d1 >= 0.0 && d2 >= 0.0 && d3 >= 0.0))
        throw config_error("boundary weights must be nonnegative");
    if (std::abs(d1 + d2 + d3 - 1.0) > 1e-12)
        throw config_error("boundary weights must sum to 1");
    if (static_cast<int>(f_left.size()) != g.n() || static_cast<int>(f_right.size()) != g.n())
        throw config_error("boundary data size does not match the velocity grid");
    for (int i = 0, nn = g.n(); i < nn; ++i) {
        if (f_left[i] < 0.0 || f_right[i] < 0.0)
            throw degenerate_data_error("boundary data must be nonnegative");
        if (g.v1[i] > 0.0 ? f_right[i] != 0.0 : f_left[i] != 0.0)
            throw config_error("boundary data supported on the wrong v1 half-space");
    }
    if (d1 > 0.0) {
        const double mass = half_space_moment(g, f_left, Half::Positive, [](int) { return 1.0; }) +
                            half_space_moment(g, f_right, Half::Negative, [](int) { return 1.0; });
        if (!(mass > 0.0)) throw degenerate_data_error("prescribed inflow data has zero mass");
        if (regime == Regime::Inflow) {
            const double scale = half_space_moment(g, f_left, Half::Positive,
                                                   [&](int i) { return 1.0 + g.speed2[i]; }) +
                                 half_space_moment(g, f_right, Half::Negative,
                                                   [&](int i) { return 1.0 + g.speed2[i]; });
            for (int axis = 1; axis <= 2; ++axis) {
                auto mom = [&](std::span<const double> s, Half h) {
                    return half_space_moment(
                        g, s, h, [&](int i) { return axis == 1 ? g.v2[i] : g.v3[i]; });
                };
                const double m = std::abs(mom(f_left, Half::Positive)) +
                                 std::abs(mom(f_right, Half::Negative));
                if (m > 1e-8 * scale)
                    throw config_error(
                        "inflow data carries transverse momentum; not admissible in this regime");
            }
        }
    }
    BoundarySpec b;
    b.regime = regime;
    b.delta1 = d1;
    b.delta2 = d2;
    b.delta3 = d3;
    b.tw0 = tw0;
    b.tw1 = tw1;
    b.f_left = std::move(f_left);
    b.f_right = std::move(f_right);
    b.wall0 = wall_maxwellian(g, tw0, 0);
    b.wall1 = wall_maxwellian(g, tw1, 1);
    return b;
}

/// Incoming boundary values for the next sweep: at0 on v1>0, at1 on v1<0.
struct IncomingTraces {
    std::vector<double> at0, at1;
};

/// Mix of prescribed data, wall re-emission scaled by the current outgoing
/// flux, and specular reflection of the current outgoing trace.
inline IncomingTraces apply_boundary_inflow(const VelocityGrid& g, const DistributionField& f,
                                            const BoundarySpec& b) {
    const auto r0 = f.row(0);
    const auto r1 = f.row(f.nx - 1);
    const double out0 =
        half_space_moment(g, r0, Half::Negative, [&](int i) { return std::abs(g.v1[i]); });
    const double out1 =
        half_space_moment(g, r1, Half::Positive, [&](int i) { return std::abs(g.v1[i]); });
    IncomingTraces t;
    t.at0.assign(g.n(), 0.0);
    t.at1.assign(g.n(), 0.0);
    for (int i = 0, nn = g.n(); i < nn; ++i) {
        if (g.v1[i] > 0.0)
            t.at0[i] = b.delta1 * b.f_left[i] + b.delta2 * out0 * b.wall0[i] +
                       b.delta3 * r0[g.reflect[i]];
        else
            t.at1[i] = b.delta1 * b.f_right[i] + b.delta2 * out1 * b.wall1[i] +
                       b.delta3 * r1[g.reflect[i]];
    }
    return t;
}

/// Wall re-emission weights of the flux-controlled update and the traces they
/// produce. q_pos/q_neg are the slab integrals of the relaxation defect
/// (gaussian minus iterate) over each v1 half-space, trapezoid in x.
struct DiffusiveUpdate {
    IncomingTraces traces;
    double s_left = 0.0, s_right = 0.0;
    double q_pos = 0.0, q_neg = 0.0;
    bool s_below_third = false;
};

inline DiffusiveUpdate apply_boundary_diffusive(const VelocityGrid& g, const SpatialGrid& sg,
                                                const DistributionField& f,
                                                const DistributionField& gauss,
                                                const BoundarySpec& b, double tau) {
    DiffusiveUpdate u;
    const int nx = f.nx;
    double qp = 0.0, qn = 0.0;
    for (int k = 0; k < nx; ++k) {
        const auto fr = f.row(k);
        const auto gr = gauss.row(k);
        double sp = 0.0, sn = 0.0;
        for (int i = 0, nn = g.n(); i < nn; ++i) {
            const double d = g.w[i] * (gr[i] - fr[i]);
            if (g.v1[i] > 0.0)
                sp += d;
            else
                sn += d;
        }
        const double tw = (k == 0 || k == nx - 1) ? 0.5 : 1.0;
        qp += tw * sp * sg.dx();
        qn += tw * sn * sg.dx();
    }
    u.q_pos = qp;
    u.q_neg = qn;

    const double fl = half_space_moment(g, b.f_left, Half::Positive,
                                        [&](int i) { return std::abs(g.v1[i]); });
    const double fr = half_space_moment(g, b.f_right, Half::Negative,
                                        [&](int i) { return std::abs(g.v1[i]); });
    const double den = 2.0 - b.delta1;
    u.s_left = ((1.0 - b.delta1) + b.delta1 * fr - qp / tau) / den;
    u.s_right = ((1.0 - b.delta1) + b.delta1 * fl - qn / tau) / den;
    if (!(u.s_left > 0.0) || !(u.s_right > 0.0))
        throw hypothesis_violation_error("wall re-emission weight went nonpositive: S_L=" +
                                         std::to_string(u.s_left) +
                                         " S_R=" + std::to_string(u.s_right));
    u.s_below_third = u.s_left < 1.0 / 3.0 || u.s_right < 1.0 / 3.0;

    const auto r0 = f.row(0);
    const auto r1 = f.row(nx - 1);
    u.traces.at0.assign(g.n(), 0.0);
    u.traces.at1.assign(g.n(), 0.0);
    for (int i = 0, nn = g.n(); i < nn; ++i) {
        if (g.v1[i] > 0.0)
            u.traces.at0[i] = b.delta1 * b.f_left[i] + b.delta2 * u.s_left * b.wall0[i] +
                              b.delta3 * r0[g.reflect[i]];
        else
            u.traces.at1[i] = b.delta1 * b.f_right[i] + b.delta2 * u.s_right * b.wall1[i] +
                              b.delta3 * r1[g.reflect[i]];
    }
    return u;
}

/// Wall fluxes of a field, all taken with the |v1| weight.
struct FluxLedger {
    double influx0 = 0, outflux0 = 0;
    double influx1 = 0, outflux1 = 0;
    double outflux_sum() const { return outflux0 + outflux1; }
};

inline FluxLedger flux_ledger(const VelocityGrid& g, const DistributionField& f) {
    auto absv1 = [&](int i) { return std::abs(g.v1[i]); };
    FluxLedger l;
    l.influx0 = half_space_moment(g, f.row(0), Half::Positive, absv1);
    l.outflux0 = half_space_moment(g, f.row(0), Half::Negative, absv1);
    l.influx1 = half_space_moment(g, f.row(f.nx - 1), Half::Negative, absv1);
    l.outflux1 = half_space_moment(g, f.row(f.nx - 1), Half::Positive, absv1);
    return l;
}

} // namespace esbgk
