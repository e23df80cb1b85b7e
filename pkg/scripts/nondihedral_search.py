"""Random search for balanced all-negative configurations and their symmetry groups.

For every distinct solution found the script reports the order of its
rotational symmetry about the origin, the number of reflection axes and the
Jacobian rank, and flags solutions with no symmetry at all.

    python3 scripts/nondihedral_search.py --n 8 --trials 3000 --out nondihedral.json
"""
from __future__ import annotations

import argparse
import json
import time

import numpy as np

from parking_garage import Configuration, SolveOptions, nondegeneracy, random_search
from parking_garage.dihedral import Family, FamilySpec, closed_form, lift
from parking_garage.solver import configuration_distance


def rotation_order(points: np.ndarray, tol: float = 1e-7) -> int:
    """Largest k with the point set invariant under rotation by 2 pi / k about 0."""
    from scipy.optimize import linear_sum_assignment

    for k in range(points.size, 1, -1):
        rot = points * np.exp(2j * np.pi / k)
        cost = np.abs(points[:, None] - rot[None, :])
        r, c = linear_sum_assignment(cost)
        if cost[r, c].max() <= tol:
            return k
    return 1


def reflection_axes(points: np.ndarray, tol: float = 1e-7) -> int:
    """Number of lines through 0 that map the point set to itself."""
    from scipy.optimize import linear_sum_assignment

    candidates = set()
    for p in points:
        if abs(p) > tol:
            candidates.add(round(float(np.angle(p)) % np.pi, 9))
    for i, p in enumerate(points):
        for q in points[i + 1:]:
            m = p + q
            if abs(m) > tol:
                candidates.add(round(float(np.angle(m)) % np.pi, 9))
            d = p - q
            candidates.add(round(float(np.angle(d) + np.pi / 2) % np.pi, 9))
    axes = []
    for a in sorted(candidates):
        u = np.exp(2j * a)
        refl = u * np.conj(points)
        cost = np.abs(points[:, None] - refl[None, :])
        r, c = linear_sum_assignment(cost)
        if cost[r, c].max() <= tol and all(
            min(abs(a - b), np.pi - abs(a - b)) > 1e-6 for b in axes
        ):
            axes.append(a)
    return len(axes)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=8)
    ap.add_argument("--trials", type=int, default=3000)
    ap.add_argument("--seed", type=int, default=2024)
    ap.add_argument("--out", default=None)
    args = ap.parse_args()

    t0 = time.perf_counter()
    sols = random_search(args.n, (-1,) * args.n, args.trials, SolveOptions(seed=args.seed))
    known = {
        f"karcher_scherk k={args.n}": lift(closed_form(FamilySpec(Family.KARCHER_SCHERK, args.n))),
        f"fischer_koch k={args.n - 1}": lift(closed_form(FamilySpec(Family.FISCHER_KOCH, args.n - 1, origin_charge=-1))),
    }
    rows = []
    for s in sols:
        p = s.config.points
        nd = nondegeneracy(s.config)
        row = {
            "residual": s.residual_norm,
            "centroid": abs(p.mean()),
            "rotation_order": rotation_order(p),
            "reflection_axes": reflection_axes(p),
            "rank": nd.rank,
            "nondegenerate": nd.nondegenerate,
            "smallest_singular_values": [float(v) for v in nd.singular_values[-3:]],
            "points": [[float(z.real), float(z.imag)] for z in p],
        }
        # degenerate solutions converge only linearly and stop O(sqrt(tol)) away along the kernel
        row["closed_form_match"] = next(
            (name for name, cfg in known.items() if configuration_distance(s.config, cfg) <= 1e-4), None
        )
        row["asymmetric"] = (
            row["rotation_order"] == 1 and row["reflection_axes"] == 0 and row["closed_form_match"] is None
        )
        rows.append(row)
    # pair chiral partners: solutions that are mirror images of each other
    for i, s_i in enumerate(sols):
        mirror = Configuration(np.conj(s_i.config.points), s_i.config.charges)
        rows[i]["mirror_of"] = next(
            (j for j, s_j in enumerate(sols) if j != i and configuration_distance(mirror, s_j.config) <= 1e-6),
            None,
        )
        rows[i]["index"] = i
    rows.sort(key=lambda r: (r["rotation_order"], r["reflection_axes"]))
    print(f"n={args.n}: {len(rows)} distinct balanced configurations from {args.trials} trials "
          f"in {time.perf_counter() - t0:.1f}s")
    print("  id  rot  refl  rank  nondeg  asym   mirror  residual  closed form")
    for r in rows:
        mirror = "-" if r["mirror_of"] is None else str(r["mirror_of"])
        print(f"{r['index']:4d}  {r['rotation_order']:3d}  {r['reflection_axes']:4d}  {r['rank']:4d}  "
              f"{str(r['nondegenerate']):6s}  {str(r['asymmetric']):5s}  {mirror:>6s}  {r['residual']:.1e}  "
              f"{r['closed_form_match'] or ''}")
    asym = [r for r in rows if r["asymmetric"]]
    print(f"asymmetric solutions: {len(asym)} "
          f"({sum(r['mirror_of'] is not None for r in asym) // 2} mirror pair(s)), "
          f"all nondegenerate: {all(r['nondegenerate'] for r in asym)}")
    if args.out:
        with open(args.out, "w") as fh:
            json.dump({"n": args.n, "trials": args.trials, "seed": args.seed, "solutions": rows}, fh, indent=2)
            fh.write("\n")


if __name__ == "__main__":
    main()
