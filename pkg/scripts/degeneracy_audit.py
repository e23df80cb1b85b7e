"""Full versus symmetric non-degeneracy of the single-ring closed forms.

For each Karcher-Scherk and Fischer-Koch ring the script reports the rank of
the full 2n x 2n force Jacobian (double precision SVD), the determinant of the
reduced dihedral Jacobian, and, where the full rank drops below 2n - 1, the
smallest singular values recomputed in 50-digit arithmetic from central
differences as an independent check.

    python3 scripts/degeneracy_audit.py --k-max 16
"""
from __future__ import annotations

import argparse

import mpmath as mp
import numpy as np

from parking_garage import nondegeneracy
from parking_garage.dihedral import Family, FamilySpec, closed_form, lift, reduced_jacobian


def mp_forces(pts, eps):
    out = []
    for j, pj in enumerate(pts):
        out.append(mp.conj(pj) + sum(ek / (pj - pk) for k, (pk, ek) in enumerate(zip(pts, eps)) if k != j))
    return out


def exact_ring(k, radius2, eps0):
    """Ring points at 50 digits: radius^2 = radius2 (a rational), origin appended if eps0."""
    mp.mp.dps = 50
    r = mp.sqrt(mp.mpf(radius2))
    pts = [r * mp.expjpi(mp.mpf(2 * m) / k) for m in range(k)]
    eps = [-1] * k
    if eps0:
        pts.append(mp.mpf(0))
        eps.append(eps0)
    return pts, eps


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--k-max", type=int, default=16)
    args = ap.parse_args()
    print(" family          k  eps0  rank/(2n-1)  reduced det  50-digit smallest singular values")
    for family, eps0, k0 in [(Family.KARCHER_SCHERK, 0, 2), (Family.FISCHER_KOCH, -1, 2), (Family.FISCHER_KOCH, 1, 4)]:
        for k in range(k0, args.k_max + 1):
            d = closed_form(FamilySpec(family, k, origin_charge=eps0))
            cfg = lift(d)
            nd = nondegeneracy(cfg)
            det = float(np.linalg.det(reduced_jacobian(d)))
            line = f" {family.value:14s} {k:2d}  {eps0:4d}  {nd.rank:4d}/{2 * cfg.n - 1:<6d}  {det:11.4g}"
            if nd.rank != 2 * cfg.n - 1:
                pts, eps = exact_ring(k, mp.mpf(k - 1 - 2 * eps0) / 2, eps0)
                mp.mp.dps = 50
                s = mp_smallest_singular_values(pts, eps)
                line += "  " + ", ".join(f"{v:.1e}" for v in s)
            print(line)


def mp_smallest_singular_values(pts, eps, count=4):
    h = mp.mpf(10) ** -20
    cols = []
    for l in range(len(pts)):
        for d in (1, 1j):
            plus = list(pts)
            minus = list(pts)
            plus[l] += h * d
            minus[l] -= h * d
            col = []
            for a, b in zip(mp_forces(plus, eps), mp_forces(minus, eps)):
                g = (a - b) / (2 * h)
                col += [mp.re(g), mp.im(g)]
            cols.append(col)
    s = mp.svd_r(mp.matrix(cols).T, compute_uv=False)
    return sorted(float(v) for v in s)[:count]


if __name__ == "__main__":
    main()
