"""Simply dihedral configurations: reduced balance system, closed forms, solvers, lift.

Points sit on the two families of symmetry rays of the dihedral group of order
``k``: ray 1 carries ``p_1j * phi**m`` and ray 2 carries
``p_2j * exp(i pi / k) * phi**m`` with ``phi = exp(2 pi i / k)``; an optional
charge sits at the origin.  Balance reduces to one real equation per radius.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from os import PathLike
from typing import Any, Sequence

import numpy as np
from numpy.typing import NDArray
from scipy.optimize import brentq

from .config import Configuration
from .solver import SolveOptions

FloatArray = NDArray[np.float64]


class ParameterError(ValueError):
    """Family parameters outside the admissible range."""


class FamilyConvergenceError(RuntimeError):
    def __init__(self, message: str, best_residual: float):
        super().__init__(f"{message} (best residual {best_residual:.3e})")
        self.best_residual = best_residual


class Family(str, Enum):
    KARCHER_SCHERK = "karcher_scherk"
    FISCHER_KOCH = "fischer_koch"
    HERMITE_RING = "hermite_ring"
    EXOTIC_CHM = "exotic_chm"

    @classmethod
    def parse(cls, name: str) -> Family:
        try:
            return cls(name.replace("-", "_").lower())
        except ValueError:
            raise ParameterError(
                f"unknown family {name!r}; choose from {[f.value for f in cls]}"
            ) from None


@dataclass(frozen=True)
class DihedralConfiguration:
    k: int
    radii_ray1: tuple[float, ...]
    radii_ray2: tuple[float, ...] = ()
    charges_ray1: tuple[int, ...] = ()
    charges_ray2: tuple[int, ...] = ()
    origin_charge: int = 0

    def __post_init__(self) -> None:
        for name in ("radii_ray1", "radii_ray2"):
            object.__setattr__(self, name, tuple(float(r) for r in getattr(self, name)))
        for name in ("charges_ray1", "charges_ray2"):
            object.__setattr__(self, name, tuple(int(c) for c in getattr(self, name)))
        if self.k < 2:
            raise ParameterError(f"dihedral order k must be >= 2, got {self.k}")
        if self.origin_charge not in (-1, 0, 1):
            raise ParameterError("origin_charge must be -1, 0 or +1")
        for radii, charges, ray in (
            (self.radii_ray1, self.charges_ray1, 1),
            (self.radii_ray2, self.charges_ray2, 2),
        ):
            if len(radii) != len(charges):
                raise ParameterError(f"ray {ray}: {len(radii)} radii but {len(charges)} charges")
            if any(c not in (-1, 1) for c in charges):
                raise ParameterError(f"ray {ray}: charges must be +1 or -1")
            r = np.asarray(radii)
            if np.any(r <= 0):
                raise ParameterError(f"ray {ray}: radii must be positive")
            if np.any(np.diff(r) <= 0):
                raise ParameterError(f"ray {ray}: radii must be strictly increasing")
        if not self.radii_ray1 and not self.radii_ray2:
            raise ParameterError("at least one ray must carry points")

    @property
    def n1(self) -> int:
        return len(self.radii_ray1)

    @property
    def n2(self) -> int:
        return len(self.radii_ray2)

    @property
    def n_points(self) -> int:
        return self.k * (self.n1 + self.n2) + (self.origin_charge != 0)

    @property
    def radii(self) -> FloatArray:
        return np.array(self.radii_ray1 + self.radii_ray2)

    def with_radii(self, radii: Sequence[float]) -> DihedralConfiguration:
        radii = [float(r) for r in radii]
        return DihedralConfiguration(
            self.k,
            tuple(radii[: self.n1]),
            tuple(radii[self.n1 :]),
            self.charges_ray1,
            self.charges_ray2,
            self.origin_charge,
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "k": self.k,
            "radii_ray1": list(self.radii_ray1),
            "radii_ray2": list(self.radii_ray2),
            "charges_ray1": list(self.charges_ray1),
            "charges_ray2": list(self.charges_ray2),
            "origin_charge": self.origin_charge,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> DihedralConfiguration:
        try:
            return cls(
                int(data["k"]),
                tuple(data["radii_ray1"]),
                tuple(data.get("radii_ray2", ())),
                tuple(data["charges_ray1"]),
                tuple(data.get("charges_ray2", ())),
                int(data.get("origin_charge", 0)),
            )
        except KeyError as exc:
            raise ParameterError(f"dihedral JSON missing field {exc}") from None


@dataclass(frozen=True)
class FamilySpec:
    family: Family
    k: int
    n1: int = 1
    n2: int = 0
    origin_charge: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "family", Family.parse(self.family) if isinstance(self.family, str) else self.family)

    def to_dict(self) -> dict[str, Any]:
        return {
            "family": self.family.value,
            "k": self.k,
            "n1": self.n1,
            "n2": self.n2,
            "origin_charge": self.origin_charge,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> FamilySpec:
        unknown = set(data) - {"family", "k", "n1", "n2", "origin_charge"}
        if unknown:
            raise ParameterError(f"unknown FamilySpec field(s): {sorted(unknown)}")
        try:
            return cls(
                Family.parse(data["family"]),
                int(data["k"]),
                int(data.get("n1", 1)),
                int(data.get("n2", 0)),
                int(data.get("origin_charge", 0)),
            )
        except KeyError as exc:
            raise ParameterError(f"family JSON missing field {exc}") from None


def save_json(obj: Any, path: str | PathLike) -> None:
    with open(path, "w") as fh:
        json.dump(obj.to_dict() if hasattr(obj, "to_dict") else obj, fh, indent=2)
        fh.write("\n")


# ---------------------------------------------------------------------------
# reduced system


def _layout(d: DihedralConfiguration):
    r = d.radii
    eps = np.array(d.charges_ray1 + d.charges_ray2, dtype=float)
    ray = np.array([1] * d.n1 + [2] * d.n2)
    return r, eps, ray


def reduced_forces(d: DihedralConfiguration) -> FloatArray:
    """Real reduced forces (F_11..F_1n1, F_21..F_2n2).

    F_2j is the ray-2 force rotated by exp(i pi / k) so that it is real.
    """
    r, eps, ray = _layout(d)
    k = d.k
    rk = r**k
    same = ray[:, None] == ray[None, :]
    denom = np.where(same, rk[:, None] - rk[None, :], rk[:, None] + rk[None, :])
    np.fill_diagonal(denom, 1.0)
    if np.any(np.abs(denom) == 0):
        raise ParameterError("equal radii within a ray")
    inter = eps[None, :] * k * r[:, None] ** (k - 1) / denom
    np.fill_diagonal(inter, 0.0)
    return r + ((k - 1) * eps + 2 * d.origin_charge) / (2 * r) + inter.sum(axis=1)


def reduced_jacobian(d: DihedralConfiguration) -> FloatArray:
    """Scaled Jacobian with entries ``p_b * d(p_a F_a)/d p_b``.

    Same-ray pairs interact through ``p_a^k - p_b^k`` and cross-ray pairs
    through ``p_a^k + p_b^k``; with ``A = k^2 p_a^k p_b^k`` the off-diagonal
    entry is ``+eps_b A / (p_a^k - p_b^k)^2`` on the same ray and
    ``-eps_b A / (p_a^k + p_b^k)^2`` across rays, and the diagonal is
    ``2 p_a^2`` minus the sum of the off-diagonal entries of its row.
    """
    r, eps, ray = _layout(d)
    k = d.k
    rk = r**k
    same = ray[:, None] == ray[None, :]
    denom = np.where(same, rk[:, None] - rk[None, :], rk[:, None] + rk[None, :])
    np.fill_diagonal(denom, 1.0)
    if np.any(np.abs(denom) == 0):
        raise ParameterError("equal radii within a ray")
    sign = np.where(same, 1.0, -1.0)
    off = sign * eps[None, :] * k**2 * rk[:, None] * rk[None, :] / denom**2
    np.fill_diagonal(off, 0.0)
    return off + np.diag(2 * r**2 - off.sum(axis=1))


def reduced_residual(d: DihedralConfiguration) -> float:
    return float(np.linalg.norm(reduced_forces(d)))


def diagonal_dominance_margin(d: DihedralConfiguration) -> float:
    """min_a (|M_aa| - sum_{b != a} |M_ab|) for the scaled Jacobian M."""
    m = reduced_jacobian(d)
    diag = np.abs(np.diag(m))
    return float(np.min(diag - (np.abs(m).sum(axis=1) - diag)))


def lift(d: DihedralConfiguration) -> Configuration:
    """Full configuration: ray-1 orbits, then ray-2 orbits, then the origin."""
    k = d.k
    phi = np.exp(2j * np.pi * np.arange(k) / k)
    half = np.exp(1j * np.pi / k)
    pts: list[complex] = []
    chg: list[int] = []
    for r, c in zip(d.radii_ray1, d.charges_ray1):
        pts.extend(r * phi)
        chg.extend([c] * k)
    for r, c in zip(d.radii_ray2, d.charges_ray2):
        pts.extend(r * half * phi)
        chg.extend([c] * k)
    if d.origin_charge:
        pts.append(0.0)
        chg.append(d.origin_charge)
    return Configuration(np.array(pts), np.array(chg))


def cyclotomic_identities_check(k: int, x: float, y: float) -> tuple[float, float]:
    """Deviations of the two roots-of-unity sums from their closed forms.

    sum_{m=1}^{k-1} 1/(1 - phi^m) = (k-1)/2 and
    sum_{m=1}^{k} 1/(x - phi^m y) = k x^(k-1) / (x^k - y^k).
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if np.isclose(x**k, y**k, rtol=1e-14, atol=0.0):
        raise ZeroDivisionError(f"pole: x^k == y^k for k={k}, x={x}, y={y}")
    phi = np.exp(2j * np.pi * np.arange(1, k + 1) / k)
    first = np.sum(1.0 / (1.0 - phi[:-1]))
    second = np.sum(1.0 / (x - phi * y))
    dev1 = abs(first - (k - 1) / 2)
    dev2 = abs(second - k * x ** (k - 1) / (x**k - y**k))
    return float(dev1), float(dev2)


# ---------------------------------------------------------------------------
# families


def _check_origin_bound(k: int, eps0: int, what: str) -> None:
    if eps0 not in (-1, 0, 1):
        raise ParameterError("origin_charge must be -1, 0 or +1")
    if k < 2:
        raise ParameterError(f"{what}: need k >= 2, got k={k}")
    if eps0 == 1 and k < 4:
        raise ParameterError(f"{what}: origin charge +1 requires k >= 4, got k={k}")


def check_admissible(spec: FamilySpec) -> None:
    fam, k, eps0 = spec.family, spec.k, spec.origin_charge
    if fam is Family.KARCHER_SCHERK:
        if k < 2:
            raise ParameterError(f"karcher_scherk: need k >= 2, got k={k}")
        if eps0 != 0 or spec.n1 != 1 or spec.n2 != 0:
            raise ParameterError("karcher_scherk: a single ring (n1=1, n2=0) without origin point")
    elif fam is Family.FISCHER_KOCH:
        if eps0 == 0:
            raise ParameterError("fischer_koch: origin charge must be -1 or +1")
        if spec.n1 != 1 or spec.n2 != 0:
            raise ParameterError("fischer_koch: a single ring (n1=1, n2=0) plus the origin")
        _check_origin_bound(k, eps0, "fischer_koch")
    elif fam is Family.HERMITE_RING:
        if spec.n1 < 1 or spec.n2 != 0:
            raise ParameterError("hermite_ring: need n1 >= 1 and n2 = 0")
        _check_origin_bound(k, eps0, "hermite_ring")
    elif fam is Family.EXOTIC_CHM:
        if spec.n1 < 1 or spec.n1 % 2 == 0:
            raise ParameterError(f"exotic_chm: n1 must be odd, got n1={spec.n1}")
        if spec.n2 < 1:
            raise ParameterError(f"exotic_chm: need n2 >= 1, got n2={spec.n2}")
        _check_origin_bound(k, eps0, "exotic_chm")
        if spec.n1 >= 3:
            required = 4 if eps0 == 1 else 2
            if k != required:
                raise ParameterError(
                    f"exotic_chm: n1 >= 3 requires k = {required} for origin charge {eps0}, got k={k}"
                )


def family_charges(spec: FamilySpec) -> tuple[tuple[int, ...], tuple[int, ...]]:
    if spec.family is Family.EXOTIC_CHM:
        ray1 = tuple(1 if j % 2 == 0 else -1 for j in range(spec.n1))
        return ray1, (-1,) * spec.n2
    return (-1,) * spec.n1, (-1,) * spec.n2


def closed_form(spec: FamilySpec) -> DihedralConfiguration:
    """Exact single-ring solutions: p_11 = sqrt((k - 1 - 2 eps_0) / 2)."""
    check_admissible(spec)
    if spec.family not in (Family.KARCHER_SCHERK, Family.FISCHER_KOCH):
        raise ParameterError(f"{spec.family.value} has no closed form; use solve_family")
    eps0 = spec.origin_charge
    radius = np.sqrt((spec.k - 1 - 2 * eps0) / 2)
    return DihedralConfiguration(spec.k, (radius,), (), (-1,), (), eps0)


def _initial_radii(spec: FamilySpec, scale: float, rng: np.random.Generator | None) -> FloatArray:
    # sqrt-spaced rings with the outermost at the single-ring radius times a growth factor
    k, eps0 = spec.k, spec.origin_charge
    m = spec.n1 + spec.n2
    outer = np.sqrt(max(k - 1 - 2 * eps0, 1) / 2 + (m - 1) * (k + 1) / 2) * scale
    base = np.sqrt(np.arange(1, m + 1) / m) * outer
    if rng is not None:
        base = np.sort(base * np.exp(rng.normal(0.0, 0.25, size=m)))
    if spec.family is Family.EXOTIC_CHM:
        # interleave: even slots to ray 1, odd slots to ray 2 as far as counts allow
        order = np.argsort(np.r_[np.arange(spec.n1) * 2.0, np.arange(spec.n2) * 2.0 + 1.0], kind="stable")
        ranks = np.empty(m, dtype=int)
        ranks[order] = np.arange(m)
        base = base[ranks]
        r1 = np.sort(base[: spec.n1])
        r2 = np.sort(base[spec.n1 :])
        return np.r_[r1, r2]
    return base


def _ordered_gaps(radii: FloatArray, n1: int) -> FloatArray:
    """Gaps whose positivity encodes 0 < r_1 < ... on each ray."""
    out = []
    for seg in (radii[:n1], radii[n1:]):
        if seg.size:
            out.append(np.diff(np.r_[0.0, seg]))
    return np.concatenate(out)


def _max_step(radii: FloatArray, step: FloatArray, n1: int, fraction: float = 0.5) -> float:
    g = _ordered_gaps(radii, n1)
    dg = _ordered_gaps(radii + step, n1) - g
    shrink = dg < 0
    if not np.any(shrink):
        return 1.0
    return float(min(1.0, fraction * np.min(g[shrink] / -dg[shrink])))


def _newton(template: DihedralConfiguration, radii: FloatArray, options: SolveOptions):
    n1 = template.n1
    d = template.with_radii(radii)
    f = reduced_forces(d)
    for it in range(options.max_iterations):
        if np.linalg.norm(f) <= options.tolerance:
            return radii, float(np.linalg.norm(f)), it
        # d F_a / d p_b = (M_ab / p_b - delta_ab F_a) / p_a
        m = reduced_jacobian(d)
        jac = (m / radii[None, :] - np.diag(f)) / radii[:, None]
        try:
            step = np.linalg.solve(jac, -f)
        except np.linalg.LinAlgError:
            break
        lam = min(options.damping, _max_step(radii, step, n1))
        norm0 = np.linalg.norm(f)
        while lam > 1e-10:
            trial = radii + lam * step
            f_t = reduced_forces(template.with_radii(trial))
            if np.linalg.norm(f_t) < (1 - 1e-4 * lam) * norm0:
                break
            lam *= 0.5
        else:
            break
        radii, f = trial, f_t
        d = template.with_radii(radii)
    return radii, float(np.linalg.norm(f)), options.max_iterations


def _bisection_sweeps(template: DihedralConfiguration, radii: FloatArray, sweeps: int = 200) -> FloatArray:
    """Gauss-Seidel sweeps solving each F_a = 0 in its own radius between its ray neighbours."""
    radii = radii.copy()
    n1 = template.n1
    for _ in range(sweeps):
        for a in range(radii.size):
            lo_idx = a - 1 if (a < n1 and a > 0) or (a > n1) else None
            hi_idx = a + 1 if (a < n1 - 1) or (n1 <= a < radii.size - 1) else None
            lo = radii[lo_idx] if lo_idx is not None else 0.0
            hi = radii[hi_idx] if hi_idx is not None else 4 * radii[a] + 10.0

            def fa(x: float) -> float:
                trial = radii.copy()
                trial[a] = x
                return float(reduced_forces(template.with_radii(trial))[a])

            width = hi - lo
            a_, b_ = lo + 1e-12 * width + 1e-300, hi - 1e-12 * width
            fa_lo, fa_hi = fa(a_), fa(b_)
            if np.sign(fa_lo) != np.sign(fa_hi):
                radii[a] = brentq(fa, a_, b_, xtol=1e-15, rtol=4e-16)
    return radii


def solve_family(spec: FamilySpec, options: SolveOptions = SolveOptions()) -> DihedralConfiguration:
    """Solve the reduced system for a family with ordered radii on each ray.

    Newton steps are clipped so radii stay positive and ordered; restarts use
    rescaled and seeded random initial rings, and a bisection sweep mirroring
    the nested intermediate-value argument is the fallback when Newton stalls.
    """
    check_admissible(spec)
    if spec.family in (Family.KARCHER_SCHERK, Family.FISCHER_KOCH):
        return closed_form(spec)
    c1, c2 = family_charges(spec)
    m = spec.n1 + spec.n2
    seed_radii = _initial_radii(spec, 1.0, None)
    template = DihedralConfiguration(
        spec.k, tuple(seed_radii[: spec.n1]), tuple(seed_radii[spec.n1 :]), c1, c2, spec.origin_charge
    )
    rng = np.random.default_rng(options.seed)
    best_res = np.inf
    starts = [_initial_radii(spec, s, None) for s in (1.0, 0.7, 1.4, 0.5, 2.0)]
    starts += [_initial_radii(spec, 1.0, rng) for _ in range(40)]
    for i, start in enumerate(starts):
        radii, res, _ = _newton(template, start, options)
        if res > options.tolerance and i == 0 and spec.family is Family.HERMITE_RING:
            radii = _bisection_sweeps(template, radii)
            radii, res, _ = _newton(template, radii, options)
        best_res = min(best_res, res)
        if res <= options.tolerance:
            return template.with_radii(radii)
    raise FamilyConvergenceError(f"{spec.family.value} k={spec.k} n1={spec.n1} n2={spec.n2} did not converge", best_res)
