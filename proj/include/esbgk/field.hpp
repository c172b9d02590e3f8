#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "esbgk/grid.hpp"

namespace esbgk {

/// Distribution values on the (spatial node) x (velocity node) lattice.
/// Row k holds the slice at x_k. The incoming half of row 0 (v1>0) and of the
/// last row (v1<0) are the boundary traces of the iterate that produced the field.
struct DistributionField {
    int nx = 0; // spatial nodes
    int nv = 0; // velocity nodes
    std::vector<double> data;

    std::span<double> row(int k) { return {data.data() + static_cast<size_t>(k) * nv, static_cast<size_t>(nv)}; }
    std::span<const double> row(int k) const {
        return {data.data() + static_cast<size_t>(k) * nv, static_cast<size_t>(nv)};
    }
};

inline DistributionField make_field(const SpatialGrid& sg, const VelocityGrid& vg) {
    DistributionField f;
    f.nx = sg.nodes();
    f.nv = vg.n();
    f.data.assign(static_cast<size_t>(f.nx) * f.nv, 0.0);
    return f;
}

inline bool field_is_finite(const DistributionField& f) {
    for (double v : f.data)
        if (!std::isfinite(v)) return false;
    return true;
}

inline double field_min(const DistributionField& f) {
    double m = std::numeric_limits<double>::infinity();
    for (double v : f.data) m = std::min(m, v);
    return m;
}

} // namespace esbgk
