#pragma once

#include <cmath>
#include <vector>

#include "esbgk/boundary.hpp"
#include "esbgk/field.hpp"
#include "esbgk/gaussian.hpp"
#include "esbgk/grid.hpp"
#include "esbgk/moments.hpp"

namespace esbgk {

namespace detail {

/// One-cell update weights for the exponential characteristic step of size a = dx/(tau |v1|):
///   f_arrive = E f_depart + w_dep G_depart + w_arr G_arrive
/// with the source integrated exactly against its linear interpolant.
/// w_dep + w_arr = 1 - E, both nonnegative, so a constant source is preserved exactly.
struct StepWeights {
    double carry = 0.0; // E = exp(-a)
    double dep = 0.0;   // weight of the source at the departure node
    double arr = 0.0;   // weight at the arrival node
};

inline StepWeights step_weights(double a) {
    StepWeights s;
    s.carry = std::exp(-a);
    if (a < 1e-4) {
        // Series of (1-(1+a)e^-a)/a and (a-1+e^-a)/a; truncation below 1e-20.
        s.dep = a * (0.5 + a * (-1.0 / 3.0 + a * (0.125 - a / 30.0)));
        s.arr = a * (0.5 + a * (-1.0 / 6.0 + a * (1.0 / 24.0 - a / 120.0)));
    } else {
        const double one_m_e = -std::expm1(-a);
        s.dep = (one_m_e - a * s.carry) / a;
        s.arr = one_m_e - s.dep;
    }
    return s;
}

} // namespace detail

/// Marches the transport equation along characteristics: v1>0 from x=0 upward,
/// v1<0 from x=1 downward, with the relaxation source taken from `gauss` and
/// relaxation time tau. The recurrence telescopes to the integral form of the
/// equation with the source replaced by its piecewise-linear interpolant, so
/// a single step over many cells and one shot over the slab agree to roundoff.
/// Incoming rows reproduce the given traces exactly; outgoing rows are filled
/// by the march. Nonnegative traces and source yield a nonnegative field.
inline DistributionField sweep(const VelocityGrid& g, const SpatialGrid& sg,
                               const IncomingTraces& tr, const DistributionField& gauss,
                               double tau) {
    if (!(tau > 0.0)) throw config_error("relaxation scale tau must be positive");
    DistributionField f = make_field(sg, g);
    const int nx = f.nx;
    const int nn = g.n();
    const double dx = sg.dx();
    for (int i = 0; i < nn; ++i) {
        const double s = tau * std::abs(g.v1[i]);
        const auto sw = detail::step_weights(dx / s);
        if (g.v1[i] > 0.0) {
            f.row(0)[i] = tr.at0[i];
            for (int k = 0; k + 1 < nx; ++k)
                f.row(k + 1)[i] =
                    sw.carry * f.row(k)[i] + sw.dep * gauss.row(k)[i] + sw.arr * gauss.row(k + 1)[i];
        } else {
            f.row(nx - 1)[i] = tr.at1[i];
            for (int k = nx - 1; k > 0; --k)
                f.row(k - 1)[i] =
                    sw.carry * f.row(k)[i] + sw.dep * gauss.row(k)[i] + sw.arr * gauss.row(k - 1)[i];
        }
    }
    return f;
}

/// Per-slice macroscopic state of a field.
struct SliceState {
    std::vector<MacroFields> moments;
    std::vector<TemperatureTensor> tensors;
};

inline SliceState slice_state(const VelocityGrid& g, const DistributionField& f, double nu) {
    SliceState s;
    s.moments.reserve(f.nx);
    s.tensors.reserve(f.nx);
    for (int k = 0; k < f.nx; ++k) {
        s.moments.push_back(compute_moments(g, f.row(k)));
        s.tensors.push_back(temperature_tensor(s.moments.back(), nu));
    }
    return s;
}

inline DistributionField gaussian_field(const VelocityGrid& g, const SpatialGrid& sg,
                                        const SliceState& s) {
    DistributionField out = make_field(sg, g);
    for (int k = 0; k < out.nx; ++k)
        evaluate_gaussian(g, s.moments[k], s.tensors[k], out.row(k));
    return out;
}

/// Defect of the field against the integral form built from its own traces and
/// its own relaxation target: sup over x of the weighted L^1 slice norm of the
/// difference. Zero (to roundoff) exactly at a fixed point of the iteration.
inline double residual_sup_l12(const VelocityGrid& g, const SpatialGrid& sg,
                               const DistributionField& f, double nu, double tau) {
    const SliceState st = slice_state(g, f, nu);
    const DistributionField gauss = gaussian_field(g, sg, st);
    IncomingTraces tr;
    tr.at0.assign(g.n(), 0.0);
    tr.at1.assign(g.n(), 0.0);
    for (int i = 0, nn = g.n(); i < nn; ++i) {
        if (g.v1[i] > 0.0)
            tr.at0[i] = f.row(0)[i];
        else
            tr.at1[i] = f.row(f.nx - 1)[i];
    }
    const DistributionField back = sweep(g, sg, tr, gauss, tau);
    double worst = 0.0;
    for (int k = 0; k < f.nx; ++k) {
        double acc = 0.0;
        const auto a = f.row(k);
        const auto b = back.row(k);
        for (int i = 0, nn = g.n(); i < nn; ++i)
            acc += g.w[i] * std::abs(a[i] - b[i]) * (1.0 + g.speed2[i]);
        worst = std::max(worst, acc);
    }
    return worst;
}

/// Slab-kernel functional: int_0^x int_{v>0} (tau v)^{-1} e^{-(x-y)/(tau v)} e^{-c v^2} dv dy,
/// reduced in y to int_0^inf (1 - e^{-x/(tau v)}) e^{-c v^2} dv and integrated on
/// geometric panels that resolve the transition layer at v ~ x/tau.
/// Decays like (log tau + 1)/tau for large tau.
inline double kernel_estimate_probe(double tau, double decay_c, double x) {
    if (!(tau > 0.0) || !(decay_c > 0.0) || x < 0.0)
        throw config_error("kernel probe needs tau > 0, decay > 0, x >= 0");
    if (x == 0.0) return 0.0;
    static thread_local std::vector<double> nodes, weights;
    if (nodes.empty()) gauss_legendre(24, nodes, weights);

    const double vmax = std::sqrt(50.0 / decay_c);
    const double layer = std::min(x / tau, vmax) / 8.0;
    std::vector<double> cuts{0.0};
    if (layer > 0.0 && layer < vmax) {
        for (double c = layer; c < vmax; c *= 2.0) cuts.push_back(c);
    }
    cuts.push_back(vmax);

    double acc = 0.0;
    for (size_t p = 0; p + 1 < cuts.size(); ++p) {
        const double a = cuts[p], b = cuts[p + 1];
        const double mid = 0.5 * (a + b), rad = 0.5 * (b - a);
        double panel = 0.0;
        for (size_t q = 0; q < nodes.size(); ++q) {
            const double v = mid + rad * nodes[q];
            panel += weights[q] * (-std::expm1(-x / (tau * v))) * std::exp(-decay_c * v * v);
        }
        acc += rad * panel;
    }
    return acc;
}

} // namespace esbgk
