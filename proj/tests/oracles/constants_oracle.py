#!/usr/bin/env python3
"""Frozen-value oracle for the boundary-data constants.

Mirrors the documented definitions with plain numpy reductions and eigvalsh
(no shared code with the C++ closed-form eigensolver).

Data set: left Maxwellian rho=1, T=1 on v1>0; right Maxwellian rho=0.8, T=1.2
on v1<0; walls at T=1.0 / 1.2 normalized to unit incoming |v1|-flux.
Grid: cutoff 6, counts (16, 12, 12).
"""
import numpy as np


def grid(cutoff, counts):
    axes = []
    for n in counts:
        x, w = np.polynomial.legendre.leggauss(n)
        axes.append((x * cutoff, w * cutoff))
    V1, V2, V3 = np.meshgrid(axes[0][0], axes[1][0], axes[2][0], indexing="ij")
    W = (
        axes[0][1][:, None, None]
        * axes[1][1][None, :, None]
        * axes[2][1][None, None, :]
    )
    return V1.ravel(), V2.ravel(), V3.ravel(), W.ravel()


def fmt(x):
    return f"{x:.17g}"


def main():
    v1, v2, v3, w = grid(6.0, (16, 12, 12))
    s2 = v1**2 + v2**2 + v3**2
    pos, neg = v1 > 0, v1 < 0

    f_left = np.where(pos, 1.0 * (2 * np.pi * 1.0) ** -1.5 * np.exp(-s2 / 2.0), 0.0)
    f_right = np.where(neg, 0.8 * (2 * np.pi * 1.2) ** -1.5 * np.exp(-s2 / 2.4), 0.0)

    w0 = np.where(pos, np.exp(-s2 / 2.0), 0.0)
    w0 /= np.sum(w * w0 * np.abs(v1))
    w1 = np.where(neg, np.exp(-s2 / 2.4), 0.0)
    w1 /= np.sum(w * w1 * np.abs(v1))

    cut = np.exp(-1.0 / np.abs(np.where(v1 == 0, 1.0, v1)))

    def mom(f, weight):
        return np.sum(w * f * weight)

    a_l1 = mom(f_left, cut) + mom(f_right, cut)
    a_l2 = 0.5 * (mom(w0, cut) + mom(w1, cut))
    gamma_l1 = mom(f_left, cut * np.abs(v1)) * mom(f_right, cut * np.abs(v1))
    gamma_l2 = mom(w0, cut * np.abs(v1)) * mom(w1, cut * np.abs(v1))

    def deficit(a, b):
        V = np.stack([v1, v2, v3])
        A = np.einsum("v,iv,jv->ij", w * (a + b) * cut, V, V)
        lam = np.linalg.eigvalsh(A)
        return np.trace(A) - lam[-1]

    a_half_1 = deficit(f_left, f_right)
    a_half_2 = deficit(w0, w1)

    flux_left = mom(f_left, np.abs(v1))
    flux_right = mom(f_right, np.abs(v1))
    data_energy = mom(f_left, 1 + s2) + mom(f_right, 1 + s2)
    wall_flux = mom(w0, np.abs(v1)) + mom(w1, np.abs(v1))
    wall_energy = mom(w0, 1 + s2) + mom(w1, 1 + s2)

    print("a_l1             =", fmt(a_l1))
    print("a_l2             =", fmt(a_l2))
    print("gamma_l1         =", fmt(gamma_l1))
    print("gamma_l2         =", fmt(gamma_l2))
    print("a_half_1         =", fmt(a_half_1))
    print("a_half_2         =", fmt(a_half_2))
    print("flux_left        =", fmt(flux_left))
    print("flux_right       =", fmt(flux_right))
    print("data_energy_norm =", fmt(data_energy))
    print("wall_flux_norm   =", fmt(wall_flux))
    print("wall_energy_norm =", fmt(wall_energy))
    print("c_lr1            =", fmt(data_energy * wall_energy))
    print("c_lr2            =", fmt(flux_left + flux_right + wall_energy))
    print("c_lm2            =", fmt(data_energy + wall_energy))


if __name__ == "__main__":
    main()
