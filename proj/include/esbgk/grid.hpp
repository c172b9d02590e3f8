#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "esbgk/errors.hpp"

namespace esbgk {

/// Gauss-Legendre rule on [-1,1]. Nodes ascending, exactly antisymmetric
/// (x[n-1-k] = -x[k], equal weights) so velocity reflection is closed on the grid.
inline void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
    x.assign(n, 0.0);
    w.assign(n, 0.0);
    const int half = (n + 1) / 2;
    for (int k = 0; k < half; ++k) {
        double t = std::cos(M_PI * (k + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = t;
            for (int j = 2; j <= n; ++j) {
                const double p2 = ((2.0 * j - 1.0) * t * p1 - (j - 1.0) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (t * p1 - p0) / (t * t - 1.0);
            const double step = p1 / dp;
            t -= step;
            if (std::abs(step) < 1e-15) break;
        }
        // k counts from the upper end of [-1,1].
        x[n - 1 - k] = t;
        x[k] = -t;
        const double wk = 2.0 / ((1.0 - t * t) * dp * dp);
        w[k] = wk;
        w[n - 1 - k] = wk;
    }
    if (n % 2 == 1) x[n / 2] = 0.0;
}

/// Tensor-product velocity grid on [-V,V]^3.
/// counts[0] must be even (no node on v1=0) and >= 4.
/// Flattened index i = (i1*counts[1] + i2)*counts[2] + i3.
struct VelocityGrid {
    double cutoff = 0.0;
    std::array<int, 3> counts{};
    std::array<std::vector<double>, 3> axis_nodes;
    std::array<std::vector<double>, 3> axis_weights;

    std::vector<double> v1, v2, v3; // node coordinates
    std::vector<double> w;          // tensor-product weights, all positive
    std::vector<double> speed2;     // |v|^2
    std::vector<int> reflect;       // index of (-v1, v2, v3)

    int n() const { return static_cast<int>(w.size()); }
    int index(int i1, int i2, int i3) const {
        return (i1 * counts[1] + i2) * counts[2] + i3;
    }
};

inline VelocityGrid build_velocity_grid(double cutoff, std::array<int, 3> counts) {
    if (!(cutoff > 0.0) || !std::isfinite(cutoff))
        throw config_error("velocity grid cutoff must be positive and finite");
    if (counts[0] % 2 != 0)
        throw config_error("velocity grid counts[0] must be even so no node sits on v1=0");
    if (counts[0] < 4)
        throw config_error("velocity grid counts[0] must be at least 4");
    for (int a = 1; a < 3; ++a)
        if (counts[a] < 2) throw config_error("velocity grid counts must be at least 2");

    VelocityGrid g;
    g.cutoff = cutoff;
    g.counts = counts;
    for (int a = 0; a < 3; ++a) {
        gauss_legendre(counts[a], g.axis_nodes[a], g.axis_weights[a]);
        for (double& t : g.axis_nodes[a]) t *= cutoff;
        for (double& t : g.axis_weights[a]) t *= cutoff;
    }
    const int nn = counts[0] * counts[1] * counts[2];
    g.v1.resize(nn);
    g.v2.resize(nn);
    g.v3.resize(nn);
    g.w.resize(nn);
    g.speed2.resize(nn);
    g.reflect.resize(nn);
    for (int i1 = 0; i1 < counts[0]; ++i1)
        for (int i2 = 0; i2 < counts[1]; ++i2)
            for (int i3 = 0; i3 < counts[2]; ++i3) {
                const int i = g.index(i1, i2, i3);
                g.v1[i] = g.axis_nodes[0][i1];
                g.v2[i] = g.axis_nodes[1][i2];
                g.v3[i] = g.axis_nodes[2][i3];
                g.w[i] = g.axis_weights[0][i1] * g.axis_weights[1][i2] * g.axis_weights[2][i3];
                g.speed2[i] = g.v1[i] * g.v1[i] + g.v2[i] * g.v2[i] + g.v3[i] * g.v3[i];
                g.reflect[i] = g.index(counts[0] - 1 - i1, i2, i3);
            }
    return g;
}

/// Uniform grid on [0,1] with m intervals, nodes x_k = k/m.
struct SpatialGrid {
    int m = 0;
    int nodes() const { return m + 1; }
    double dx() const { return 1.0 / m; }
    double x(int k) const { return static_cast<double>(k) / m; }
};

inline SpatialGrid build_spatial_grid(int intervals) {
    if (intervals < 2) throw config_error("spatial grid needs at least 2 intervals");
    return SpatialGrid{intervals};
}

} // namespace esbgk
