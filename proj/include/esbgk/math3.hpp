#pragma once

#include <array>
#include <cmath>
#include <limits>

#include "esbgk/errors.hpp"

namespace esbgk {

using Vec3 = std::array<double, 3>;

inline double dot(const Vec3& a, const Vec3& b) {
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

inline double norm2(const Vec3& a) { return dot(a, a); }

/// Symmetric 3x3 matrix stored as the upper triangle.
struct Mat3Sym {
    double a11 = 0, a12 = 0, a13 = 0, a22 = 0, a23 = 0, a33 = 0;

    double operator()(int i, int j) const {
        if (i > j) std::swap(i, j);
        if (i == 0) return j == 0 ? a11 : (j == 1 ? a12 : a13);
        if (i == 1) return j == 1 ? a22 : a23;
        return a33;
    }

    double trace() const { return a11 + a22 + a33; }

    double det() const {
        return a11 * (a22 * a33 - a23 * a23) - a12 * (a12 * a33 - a23 * a13) +
               a13 * (a12 * a23 - a22 * a13);
    }

    double quad_form(const Vec3& k) const {
        return a11 * k[0] * k[0] + a22 * k[1] * k[1] + a33 * k[2] * k[2] +
               2.0 * (a12 * k[0] * k[1] + a13 * k[0] * k[2] + a23 * k[1] * k[2]);
    }

    Vec3 mul(const Vec3& x) const {
        return {a11 * x[0] + a12 * x[1] + a13 * x[2],
                a12 * x[0] + a22 * x[1] + a23 * x[2],
                a13 * x[0] + a23 * x[1] + a33 * x[2]};
    }

    static Mat3Sym identity(double s = 1.0) { return {s, 0, 0, s, 0, s}; }

    Mat3Sym scaled(double s) const { return {s * a11, s * a12, s * a13, s * a22, s * a23, s * a33}; }

    Mat3Sym plus(const Mat3Sym& o) const {
        return {a11 + o.a11, a12 + o.a12, a13 + o.a13, a22 + o.a22, a23 + o.a23, a33 + o.a33};
    }
};

/// Adjugate-based inverse. Caller guarantees |det| is well away from zero.
inline Mat3Sym inverse(const Mat3Sym& m) {
    const double d = m.det();
    if (d == 0.0) throw numerical_error("singular symmetric 3x3 matrix");
    const double id = 1.0 / d;
    Mat3Sym r;
    r.a11 = (m.a22 * m.a33 - m.a23 * m.a23) * id;
    r.a12 = (m.a13 * m.a23 - m.a12 * m.a33) * id;
    r.a13 = (m.a12 * m.a23 - m.a13 * m.a22) * id;
    r.a22 = (m.a11 * m.a33 - m.a13 * m.a13) * id;
    r.a23 = (m.a12 * m.a13 - m.a11 * m.a23) * id;
    r.a33 = (m.a11 * m.a22 - m.a12 * m.a12) * id;
    return r;
}

namespace detail {

// Characteristic polynomial p(x) = x^3 - c2 x^2 + c1 x - c0 and one Newton step.
// The step is taken only when |p(x)| clears the monomial-evaluation noise
// floor; otherwise the residual is indistinguishable from rounding and the
// quotient p/p' would inject noise amplified by clustered roots. This keeps
// the polish active exactly where it helps: wide-magnitude spectra whose
// small roots the trigonometric formula resolves only to eps * scale.
inline double polish_root(double x, double c2, double c1, double c0, double scale) {
    const double p = ((x - c2) * x + c1) * x - c0;
    const double ax = std::abs(x);
    const double noise = std::numeric_limits<double>::epsilon() *
                         (ax * ax * ax + std::abs(c2) * ax * ax + std::abs(c1) * ax + std::abs(c0));
    if (std::abs(p) <= 4.0 * noise) return x;
    const double dp = (3.0 * x - 2.0 * c2) * x + c1;
    const double step = p / dp;
    if (!std::isfinite(step) || std::abs(step) > 1e-6 * scale) return x;
    return x - step;
}

} // namespace detail

/// Eigenvalues of a symmetric 3x3 matrix, ascending.
/// Closed form (trigonometric solution of the shifted characteristic cubic)
/// followed by one Newton polish per root.
inline Vec3 eigenvalues_sym3(const Mat3Sym& m) {
    const double q = m.trace() / 3.0;
    const double p1 = m.a12 * m.a12 + m.a13 * m.a13 + m.a23 * m.a23;
    const double scale =
        std::max({std::abs(m.a11), std::abs(m.a22), std::abs(m.a33), std::abs(m.a12),
                  std::abs(m.a13), std::abs(m.a23)});
    if (scale == 0.0) return {0.0, 0.0, 0.0};

    Vec3 eig;
    double p = 0.0;
    if (p1 <= (1e-30 * scale) * scale) {
        eig = {m.a11, m.a22, m.a33};
    } else {
        const double d11 = m.a11 - q, d22 = m.a22 - q, d33 = m.a33 - q;
        const double p2 = d11 * d11 + d22 * d22 + d33 * d33 + 2.0 * p1;
        p = std::sqrt(p2 / 6.0);
        const Mat3Sym b{d11 / p, m.a12 / p, m.a13 / p, d22 / p, m.a23 / p, d33 / p};
        double r = b.det() / 2.0;
        r = std::clamp(r, -1.0, 1.0);
        const double phi = std::acos(r) / 3.0;
        const double e3 = q + 2.0 * p * std::cos(phi);
        const double e1 = q + 2.0 * p * std::cos(phi + 2.0 * M_PI / 3.0);
        eig = {e1, 3.0 * q - e1 - e3, e3};
    }

    const double c2 = m.trace();
    const double c1 = m.a11 * m.a22 + m.a11 * m.a33 + m.a22 * m.a33 - p1;
    const double c0 = m.det();
    for (double& x : eig) x = detail::polish_root(x, c2, c1, c0, scale);

    if (eig[0] > eig[1]) std::swap(eig[0], eig[1]);
    if (eig[1] > eig[2]) std::swap(eig[1], eig[2]);
    if (eig[0] > eig[1]) std::swap(eig[0], eig[1]);

    // acos() returns the angle with only half precision when two roots of the
    // shifted matrix nearly coincide, smearing such a pair by ~sqrt(eps) * p.
    // When the deflated quadratic's discriminant is indistinguishable from
    // zero at working precision, the pair is a double root: its value is the
    // trace minus the isolated root, which stays sharp.
    if (p > 0.0) {
        const int lo = (eig[1] - eig[0] <= eig[2] - eig[1]) ? 0 : 1;
        const double iso = (lo == 0) ? eig[2] : eig[0];
        const double mid = 0.5 * (c2 - iso);
        const double prod = c1 - iso * (c2 - iso);
        const double disc = mid * mid - prod;
        const double noise = 32.0 * std::numeric_limits<double>::epsilon() *
                             (mid * mid + std::abs(prod));
        if (eig[lo + 1] - eig[lo] < 0.05 * p && disc <= noise) {
            eig[lo] = mid;
            eig[lo + 1] = mid;
        }
    }
    return eig;
}

} // namespace esbgk
