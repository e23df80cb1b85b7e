"""Gauge-fixed damped Newton iteration and multi-start search for balanced configurations."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from os import PathLike
from typing import Any, Literal, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .config import (
    CoincidentPointsError,
    Configuration,
    forces,
    forces_raw,
    jacobian_raw,
    min_pairwise_distance,
    normalize_rotation,
)

COLLISION_DISTANCE = 1e-9
MIN_DAMPING = 2.0**-40
MIN_LINE_SEARCH_STEP = 2.0**-20
DIVERGENCE_FACTOR = 10.0
STAGNATION_WINDOW = 30
DEDUP_DISTANCE = 1e-6


class CollisionError(RuntimeError):
    """Newton steps keep colliding points even after maximal damping."""


@dataclass(frozen=True)
class SolveOptions:
    max_iterations: int = 200
    tolerance: float = 1e-12
    damping: float = 1.0
    gauge: Literal["fix_im_p1_zero", "none"] = "fix_im_p1_zero"
    seed: int = 0

    def __post_init__(self) -> None:
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if not 0 < self.damping <= 1:
            raise ValueError("damping must lie in (0, 1]")
        if self.gauge not in ("fix_im_p1_zero", "none"):
            raise ValueError(f"unknown gauge {self.gauge!r}")

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> SolveOptions:
        known = {"max_iterations", "tolerance", "damping", "gauge", "seed"}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown SolveOptions field(s): {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def load(cls, path: str | PathLike) -> SolveOptions:
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class SolveOutcome:
    config: Configuration
    residual_norm: float
    iterations: int
    converged: bool
    message: str = ""

    def to_dict(self) -> dict[str, Any]:
        out = self.config.to_dict()
        out["residual"] = self.residual_norm
        out["iterations"] = self.iterations
        return out


def _gauge_index(points: np.ndarray) -> int:
    # the gauge row needs a point away from the origin
    mod = np.abs(points)
    if mod[0] > 1e-3 * mod.max():
        return 0
    return int(np.argmax(mod))


def _system(z: np.ndarray, charges: np.ndarray, gauge: int | None):
    """Residual vector and Jacobian of the (possibly gauged) real system."""
    pts = z[0::2] + 1j * z[1::2]
    f = forces_raw(pts, charges)
    res = np.column_stack([f.real, f.imag]).reshape(-1)
    jac = jacobian_raw(pts, charges)
    if gauge is not None:
        row = 2 * gauge + 1
        res[row] = z[row]
        jac[row] = 0.0
        jac[row, row] = 1.0
    return res, jac


def solve(initial: Configuration, options: SolveOptions = SolveOptions()) -> SolveOutcome:
    """Damped Newton iteration on the 2n real balance equations.

    With gauge ``fix_im_p1_zero`` the Im F_1 equation is replaced by
    ``Im p_1 = 0``, which removes the rotational null direction; the output is
    rotated so that ``p_1`` is real and positive.  Steps are backtracked
    (factor 1/2, Armijo condition on the residual norm) and rejected whenever
    two points come closer than ``COLLISION_DISTANCE``.  Runs whose iterates
    leave a disk ``DIVERGENCE_FACTOR`` times the starting scale, or whose
    residual fails to halve within ``STAGNATION_WINDOW`` steps, are stopped.
    """
    charges = initial.charges
    start = initial
    gauge: int | None = None
    if options.gauge == "fix_im_p1_zero" and initial.n > 1:
        gauge = _gauge_index(initial.points)
        if abs(initial.points[gauge]) > 0:
            start = normalize_rotation(initial, gauge)
    z = start.to_real()
    # iterates escaping far beyond the start (typically a dipole running away) are abandoned
    escape = DIVERGENCE_FACTOR * (float(np.max(np.abs(initial.points))) + np.sqrt(initial.n))

    def finish(z: np.ndarray, it: int, msg: str = "") -> SolveOutcome:
        cfg = Configuration(z[0::2] + 1j * z[1::2], charges)
        if gauge is not None and abs(cfg.points[gauge]) > 0:
            cfg = normalize_rotation(cfg, gauge)
        r = float(np.linalg.norm(forces(cfg)))
        return SolveOutcome(cfg, r, it, r <= options.tolerance, msg)

    res, jac = _system(z, charges, gauge)
    mark_norm, mark_it = np.linalg.norm(res), 0
    for it in range(options.max_iterations + 1):
        if np.linalg.norm(forces_raw(z[0::2] + 1j * z[1::2], charges)) <= options.tolerance and (
            gauge is None or abs(z[2 * gauge + 1]) <= options.tolerance
        ):
            return finish(z, it)
        if it == options.max_iterations:
            break
        try:
            step = np.linalg.solve(jac, -res)
        except np.linalg.LinAlgError:
            return finish(z, it, "singular Newton system")
        if not np.all(np.isfinite(step)):
            return finish(z, it, "singular Newton system")
        norm0 = np.linalg.norm(res)
        lam = options.damping
        while True:
            trial = z + lam * step
            pts = trial[0::2] + 1j * trial[1::2]
            if min_pairwise_distance(pts) < COLLISION_DISTANCE:
                lam *= 0.5
                if lam < MIN_DAMPING:
                    raise CollisionError(
                        f"damping underflow at iteration {it}: every step collides points"
                    )
                continue
            res_t, jac_t = _system(trial, charges, gauge)
            norm_t = np.linalg.norm(res_t)
            if norm_t <= (1.0 - 1e-4 * lam) * norm0 or norm_t <= 0.1 * options.tolerance:
                break
            lam *= 0.5
            if lam < MIN_LINE_SEARCH_STEP:
                return finish(z, it, "line search failed")
        z, res, jac = trial, res_t, jac_t
        if np.max(np.abs(z)) > escape:
            return finish(z, it + 1, "iterates diverged")
        norm = np.linalg.norm(res)
        if norm <= 0.5 * mark_norm:
            mark_norm, mark_it = norm, it + 1
        elif it + 1 - mark_it >= STAGNATION_WINDOW:
            return finish(z, it + 1, "stagnated: residual not halved in the last iterations")
    return finish(z, options.max_iterations, "maximum iterations reached")


# ---------------------------------------------------------------------------
# multi-start search


def configuration_distance(a: Configuration, b: Configuration) -> float:
    """Distance between two configurations modulo rotation and charge-preserving relabelling.

    Every point of ``b`` with the anchor's charge and modulus is tried as the
    image of ``a``'s outermost point; the remaining points are matched by an
    optimal assignment within each charge class.
    """
    if a.n != b.n or sorted(a.charges.tolist()) != sorted(b.charges.tolist()):
        return float("inf")
    ia = int(np.argmax(np.abs(a.points)))
    anchor = a.points[ia]
    if abs(anchor) == 0.0:
        return float(np.max(np.abs(a.points - b.points)))
    best = float("inf")
    for ib in np.flatnonzero(b.charges == a.charges[ia]):
        cand = b.points[ib]
        if abs(abs(cand) - abs(anchor)) > 10 * DEDUP_DISTANCE or cand == 0:
            continue
        rot = b.points * (anchor / cand) * (abs(cand) / abs(anchor))
        worst = 0.0
        for q in (-1, 1):
            sa = a.points[a.charges == q]
            sb = rot[b.charges == q]
            if sa.size == 0:
                continue
            cost = np.abs(sa[:, None] - sb[None, :])
            r, c = linear_sum_assignment(cost)
            worst = max(worst, float(cost[r, c].max()))
        best = min(best, worst)
    return best


def deduplicate(outcomes: Sequence[SolveOutcome], distance: float = DEDUP_DISTANCE) -> list[SolveOutcome]:
    kept: list[SolveOutcome] = []
    for oc in sorted(outcomes, key=lambda o: o.residual_norm):
        if all(configuration_distance(oc.config, k.config) > distance for k in kept):
            kept.append(oc)
    return kept


def trial_initials(n: int, charges: Sequence[int], trials: int, seed: int) -> list[Configuration]:
    """Uniform samples in the disk of radius sqrt(n), one seed substream per trial."""
    streams = np.random.SeedSequence(seed).spawn(trials)
    out = []
    for ss in streams:
        rng = np.random.default_rng(ss)
        r = np.sqrt(n) * np.sqrt(rng.uniform(size=n))
        th = rng.uniform(0.0, 2 * np.pi, size=n)
        out.append(Configuration(r * np.exp(1j * th), np.asarray(charges)))
    return out


def random_search(
    n: int,
    charges: Sequence[int],
    trials: int,
    options: SolveOptions = SolveOptions(),
) -> list[SolveOutcome]:
    """Solve from ``trials`` random starts and return the distinct converged solutions."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if len(charges) != n:
        raise ValueError(f"expected {n} charges, got {len(charges)}")
    converged = []
    for init in trial_initials(n, charges, trials, options.seed):
        try:
            oc = solve(init, options)
        except (CollisionError, CoincidentPointsError):
            continue
        if oc.converged:
            converged.append(oc)
    return deduplicate(converged)
