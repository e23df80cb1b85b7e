"""Which Hermite polynomial do the k = 2 all-negative ring radii solve?

For k = 2 the reduced system of n1 rings (charges -1) with origin charge
eps0 is compared against the positive roots of the physicists' H_m and the
probabilists' He_m for a range of degrees m; the best match is reported.

    python3 scripts/hermite_calibration.py --max-n1 6
"""
from __future__ import annotations

import argparse

import numpy as np
from numpy.polynomial import hermite, hermite_e

from parking_garage.dihedral import Family, FamilySpec, solve_family


def positive_roots(roots_fn, degree: int) -> np.ndarray:
    r = np.real(roots_fn([0] * degree + [1]))
    return np.sort(r[r > 1e-12])


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--max-n1", type=int, default=6)
    args = ap.parse_args()
    families = {"H (physicists')": hermite.hermroots, "He (probabilists')": hermite_e.hermeroots}
    print(" eps0  n1  best match          degree  max |radius - root|")
    for eps0 in (0, -1):
        for n1 in range(1, args.max_n1 + 1):
            radii = solve_family(FamilySpec(Family.HERMITE_RING, 2, n1=n1, origin_charge=eps0)).radii
            best = (np.inf, "", 0)
            for name, mod in families.items():
                for m in range(1, 2 * n1 + 3):
                    roots = positive_roots(mod, m)
                    if roots.size != radii.size:
                        continue
                    err = float(np.max(np.abs(roots - radii)))
                    best = min(best, (err, name, m))
            err, name, m = best
            print(f"{eps0:5d}  {n1:2d}  {name:18s}  {m:6d}  {err:.2e}")


if __name__ == "__main__":
    main()
