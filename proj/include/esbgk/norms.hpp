#pragma once

#include <cmath>
#include <span>

#include "esbgk/field.hpp"
#include "esbgk/grid.hpp"

namespace esbgk {

enum class Half { Negative, Positive };

/// Quadrature of slice(v) * weight(v) over one v1 half-space.
/// Accumulation runs in node-index order; results are bit-reproducible.
template <class W>
double half_space_moment(const VelocityGrid& g, std::span<const double> slice, Half h, W&& weight) {
    double acc = 0.0;
    const int nn = g.n();
    for (int i = 0; i < nn; ++i) {
        const bool pos = g.v1[i] > 0.0;
        if ((h == Half::Positive) != pos) continue;
        acc += g.w[i] * slice[i] * weight(i);
    }
    return acc;
}

template <class W>
double full_moment(const VelocityGrid& g, std::span<const double> slice, W&& weight) {
    double acc = 0.0;
    const int nn = g.n();
    for (int i = 0; i < nn; ++i) acc += g.w[i] * slice[i] * weight(i);
    return acc;
}

inline double slice_mass(const VelocityGrid& g, std::span<const double> s) {
    return full_moment(g, s, [](int) { return 1.0; });
}

/// L^1 norm with weight 1+|v|^2 of one spatial slice.
inline double l12_slice_norm(const VelocityGrid& g, std::span<const double> s) {
    double acc = 0.0;
    for (int i = 0, nn = g.n(); i < nn; ++i) acc += g.w[i] * std::abs(s[i]) * (1.0 + g.speed2[i]);
    return acc;
}

inline double sup_l1_2_norm(const VelocityGrid& g, const DistributionField& f) {
    double m = 0.0;
    for (int k = 0; k < f.nx; ++k) m = std::max(m, l12_slice_norm(g, f.row(k)));
    return m;
}

enum class TraceWeight { Flux, Energy }; // |v1| vs 1+|v|^2

struct TraceNorms {
    double outward = 0.0; // v1<0 at x=0 plus v1>0 at x=1
    double inward = 0.0;  // v1>0 at x=0 plus v1<0 at x=1
};

inline TraceNorms trace_norms(const VelocityGrid& g, const DistributionField& f, TraceWeight tw) {
    auto wfn = [&](int i) {
        return tw == TraceWeight::Flux ? std::abs(g.v1[i]) : 1.0 + g.speed2[i];
    };
    auto part = [&](std::span<const double> s, Half h) {
        double acc = 0.0;
        for (int i = 0, nn = g.n(); i < nn; ++i) {
            const bool pos = g.v1[i] > 0.0;
            if ((h == Half::Positive) != pos) continue;
            acc += g.w[i] * std::abs(s[i]) * wfn(i);
        }
        return acc;
    };
    TraceNorms t;
    t.outward = part(f.row(0), Half::Negative) + part(f.row(f.nx - 1), Half::Positive);
    t.inward = part(f.row(0), Half::Positive) + part(f.row(f.nx - 1), Half::Negative);
    return t;
}

/// Norm pieces of f-g used by the convergence monitor.
struct DifferenceNorms {
    double sup_l12 = 0.0;
    double trace_flux_out = 0.0, trace_flux_in = 0.0;
    double trace_energy_out = 0.0, trace_energy_in = 0.0;
    double composite() const {
        return sup_l12 + trace_flux_out + trace_flux_in + trace_energy_out + trace_energy_in;
    }
};

inline DifferenceNorms difference_norms(const VelocityGrid& g, const DistributionField& a,
                                        const DistributionField& b) {
    DistributionField d = a;
    for (size_t i = 0; i < d.data.size(); ++i) d.data[i] -= b.data[i];
    DifferenceNorms r;
    r.sup_l12 = sup_l1_2_norm(g, d);
    const TraceNorms tf = trace_norms(g, d, TraceWeight::Flux);
    const TraceNorms te = trace_norms(g, d, TraceWeight::Energy);
    r.trace_flux_out = tf.outward;
    r.trace_flux_in = tf.inward;
    r.trace_energy_out = te.outward;
    r.trace_energy_in = te.inward;
    return r;
}

inline double composite_field_norm(const VelocityGrid& g, const DistributionField& f) {
    const TraceNorms tf = trace_norms(g, f, TraceWeight::Flux);
    const TraceNorms te = trace_norms(g, f, TraceWeight::Energy);
    return sup_l1_2_norm(g, f) + tf.outward + tf.inward + te.outward + te.inward;
}

} // namespace esbgk
