"""Charged planar configurations, their balance forces and non-degeneracy.

A configuration is a list of distinct points ``p_j`` in the complex plane with
charges ``eps_j = +1/-1``.  The force on point ``j`` is

    F_j = conj(p_j) + sum_{k != j} eps_k / (p_j - p_k)

and the configuration is balanced when every ``F_j`` vanishes.
"""
from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from enum import Enum
from os import PathLike
from typing import Any, Sequence

import numpy as np
from numpy.typing import NDArray

ComplexArray = NDArray[np.complex128]
FloatArray = NDArray[np.float64]

DUPLICATE_DISTANCE = 1e-12
DEFAULT_RANK_TOL = 1e-8


class ConfigurationError(ValueError):
    """Invalid configuration data (length mismatch, bad charge, coincident points)."""


class CoincidentPointsError(ConfigurationError):
    pass


class SurfaceClass(str, Enum):
    HELICOID_TYPE = "helicoid_type"
    SCHERK_TYPE = "scherk_type"
    PLANAR = "planar"


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


def min_pairwise_distance(points: ComplexArray) -> float:
    points = np.asarray(points, dtype=complex)
    if points.size < 2:
        return float("inf")
    d = np.abs(points[:, None] - points[None, :])
    np.fill_diagonal(d, np.inf)
    return float(d.min())


@dataclass(frozen=True)
class Configuration:
    """Immutable charged configuration.

    ``points`` is a complex array, ``charges`` an int array of +1/-1.
    """

    points: ComplexArray
    charges: NDArray[np.int64]

    def __post_init__(self) -> None:
        pts = np.asarray(self.points, dtype=complex).reshape(-1)
        chg = np.asarray(self.charges).reshape(-1)
        if pts.size == 0:
            raise ConfigurationError("configuration needs at least one point")
        if pts.size != chg.size:
            raise ConfigurationError(
                f"points/charges length mismatch: {pts.size} != {chg.size}"
            )
        if not np.all(np.isfinite(pts)):
            raise ConfigurationError("points contain non-finite values")
        if not np.all(np.isin(chg, (-1, 1))):
            raise ConfigurationError(f"charges must be +1 or -1, got {chg.tolist()}")
        if min_pairwise_distance(pts) < DUPLICATE_DISTANCE:
            raise CoincidentPointsError("configuration has coincident points")
        object.__setattr__(self, "points", _frozen(pts))
        object.__setattr__(self, "charges", _frozen(chg.astype(np.int64)))

    @classmethod
    def from_xy(cls, xy: Sequence[Sequence[float]], charges: Sequence[int]) -> Configuration:
        xy = np.asarray(xy, dtype=float).reshape(-1, 2)
        return cls(xy[:, 0] + 1j * xy[:, 1], np.asarray(charges))

    @property
    def n(self) -> int:
        return int(self.points.size)

    @property
    def total_charge(self) -> int:
        return int(self.charges.sum())

    def rotated(self, theta: float) -> Configuration:
        return Configuration(self.points * np.exp(1j * theta), self.charges)

    def to_real(self) -> FloatArray:
        """Interleaved real coordinates (x1, y1, ..., xn, yn)."""
        return np.column_stack([self.points.real, self.points.imag]).reshape(-1)

    def to_dict(self) -> dict[str, Any]:
        return {
            "points": [[float(p.real), float(p.imag)] for p in self.points],
            "charges": [int(c) for c in self.charges],
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> Configuration:
        try:
            pts = data["points"]
            chg = data["charges"]
        except (KeyError, TypeError) as exc:
            raise ConfigurationError(f"configuration JSON missing field {exc}") from None
        if not isinstance(pts, list) or not all(
            isinstance(p, (list, tuple)) and len(p) == 2 for p in pts
        ):
            raise ConfigurationError("field 'points' must be a list of [x, y] pairs")
        if not isinstance(chg, list):
            raise ConfigurationError("field 'charges' must be a list")
        if len(pts) != len(chg):
            raise ConfigurationError(
                f"field 'charges' has length {len(chg)}, 'points' has {len(pts)}"
            )
        return cls.from_xy(pts, chg)


def load_configuration(path: str | PathLike) -> Configuration:
    with open(path) as fh:
        return Configuration.from_dict(json.load(fh))


def save_configuration(config: Configuration, path: str | PathLike, **extra: Any) -> None:
    data = config.to_dict()
    data.update(extra)
    with open(path, "w") as fh:
        json.dump(data, fh, indent=2)
        fh.write("\n")


# ---------------------------------------------------------------------------
# forces and derivatives


def _differences(points: ComplexArray) -> ComplexArray:
    """Matrix p_j - p_l with ones on the diagonal (callers mask it)."""
    diff = points[:, None] - points[None, :]
    np.fill_diagonal(diff, 1.0)
    if points.size > 1 and np.min(np.abs(diff)) < DUPLICATE_DISTANCE:
        raise CoincidentPointsError("forces undefined at coincident points")
    return diff


def forces_raw(points: ComplexArray, charges: np.ndarray) -> ComplexArray:
    inv = charges[None, :] / _differences(points)
    np.fill_diagonal(inv, 0.0)
    return np.conj(points) + inv.sum(axis=1)


def jacobian_raw(points: ComplexArray, charges: np.ndarray) -> FloatArray:
    n = points.size
    c = charges[None, :] / _differences(points) ** 2  # d/dp_l of eps_l / (p_j - p_l)
    np.fill_diagonal(c, 0.0)
    np.fill_diagonal(c, -c.sum(axis=1))
    jac = np.empty((2 * n, 2 * n))
    jac[0::2, 0::2] = c.real
    jac[0::2, 1::2] = -c.imag
    jac[1::2, 0::2] = c.imag
    jac[1::2, 1::2] = c.real
    idx = np.arange(n)
    jac[2 * idx, 2 * idx] += 1.0
    jac[2 * idx + 1, 2 * idx + 1] -= 1.0
    return jac


def forces(config: Configuration) -> ComplexArray:
    """Balance forces ``F_j`` in input order."""
    return forces_raw(config.points, config.charges)


def residual_norm(config: Configuration) -> float:
    return float(np.linalg.norm(forces(config)))


def jacobian(config: Configuration) -> FloatArray:
    """Real 2n x 2n Jacobian of (Re F_j, Im F_j) with respect to (x_l, y_l).

    Rows and columns are interleaved: row ``2j`` is Re F_j, row ``2j+1`` is
    Im F_j; column ``2l`` is x_l, column ``2l+1`` is y_l.

    The holomorphic part of F_j has complex derivative ``c`` in p_l, which
    contributes the block [[Re c, -Im c], [Im c, Re c]]; conj(p_j) adds
    diag(1, -1) on the diagonal block.
    """
    return jacobian_raw(config.points, config.charges)


def rotation_vector(config: Configuration) -> FloatArray:
    """Infinitesimal rotation (-y1, x1, ..., -yn, xn)."""
    p = config.points
    return np.column_stack([-p.imag, p.real]).reshape(-1)


@dataclass(frozen=True)
class Nondegeneracy:
    rank: int
    kernel_basis: FloatArray  # shape (dim_kernel, 2n)
    nondegenerate: bool
    singular_values: FloatArray
    special_case: str | None = None


def nondegeneracy(
    config: Configuration,
    tol: float = DEFAULT_RANK_TOL,
    balance_tol: float | None = 1e-8,
) -> Nondegeneracy:
    """Numerical rank of the force Jacobian and the verdict rank == 2n - 1.

    The rank counts singular values above ``tol`` times the largest one.  A
    warning is issued when the configuration is not balanced to
    ``balance_tol``, since the verdict is only meaningful at a balanced point.
    One-point configurations are flagged instead of judged.
    """
    if balance_tol is not None:
        r = residual_norm(config)
        if r > balance_tol:
            warnings.warn(
                f"non-degeneracy evaluated at an unbalanced configuration (residual {r:.3e})",
                stacklevel=2,
            )
    jac = jacobian(config)
    _, s, vt = np.linalg.svd(jac)
    rank = int(np.sum(s > tol * s[0]))
    kernel = _frozen(vt[rank:])
    n = config.n
    if n == 1:
        return Nondegeneracy(rank, kernel, False, _frozen(s), "one_point")
    return Nondegeneracy(rank, kernel, rank == 2 * n - 1, _frozen(s))


def total_charge_and_class(config: Configuration) -> tuple[int, SurfaceClass]:
    n_charge = config.total_charge
    if n_charge > 0:
        return n_charge, SurfaceClass.HELICOID_TYPE
    if n_charge < 0:
        return n_charge, SurfaceClass.SCHERK_TYPE
    return n_charge, SurfaceClass.PLANAR


def normalize_rotation(config: Configuration, index: int = 0) -> Configuration:
    """Rotate so that ``points[index]`` is real and positive."""
    anchor = config.points[index]
    if abs(anchor) == 0.0:
        raise ConfigurationError(f"cannot normalize rotation: point {index} is at the origin")
    out = config.points * (abs(anchor) / anchor)
    out[index] = abs(anchor)
    return Configuration(out, config.charges)


# ---------------------------------------------------------------------------
# genus bookkeeping


@dataclass(frozen=True)
class GenusTable:
    quotient_genus_sigma: int
    cover_genus: int
    natural_quotient_genus: int | None
    ends_natural_quotient: int


def genus_table(n: int, k: int, total_charge: int) -> GenusTable:
    """Genera of M_t/S_t, of its |N|-fold cover and of the natural quotient.

    The natural-quotient genus ``|N|(n-k-1)/k + 1`` is ``None`` when it is
    not a nonnegative integer.
    """
    if n < 1 or k < 1:
        raise ValueError(f"need n >= 1 and k >= 1, got n={n}, k={k}")
    a = abs(total_charge)
    num = a * (n - k - 1)
    g_nat: int | None = None
    if num % k == 0 and num // k + 1 >= 0:
        g_nat = num // k + 1
    return GenusTable(
        quotient_genus_sigma=n - 1,
        cover_genus=a * (n - 2) + 1,
        natural_quotient_genus=g_nat,
        ends_natural_quotient=2 * a,
    )


@dataclass(frozen=True)
class BalanceReport:
    forces: ComplexArray
    residual_norm: float
    total_charge: int
    surface_class: SurfaceClass
    jacobian_rank: int
    kernel_basis: FloatArray
    nondegenerate: bool
    special_case: str | None = None
    genus: GenusTable | None = field(default=None)

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "forces": [[float(f.real), float(f.imag)] for f in self.forces],
            "residual": self.residual_norm,
            "total_charge": self.total_charge,
            "surface_class": self.surface_class.value,
            "jacobian_rank": self.jacobian_rank,
            "kernel_basis": [[float(v) for v in row] for row in self.kernel_basis],
            "nondegenerate": self.nondegenerate,
        }
        if self.special_case is not None:
            out["special_case"] = self.special_case
        if self.genus is not None:
            out["genus"] = {
                "quotient_genus_sigma": self.genus.quotient_genus_sigma,
                "cover_genus": self.genus.cover_genus,
                "natural_quotient_genus": self.genus.natural_quotient_genus,
                "ends_natural_quotient": self.genus.ends_natural_quotient,
            }
        return out


def balance_report(
    config: Configuration, tol: float = DEFAULT_RANK_TOL, k: int | None = None
) -> BalanceReport:
    f = forces(config)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        nd = nondegeneracy(config, tol, balance_tol=None)
    n_charge, cls = total_charge_and_class(config)
    return BalanceReport(
        forces=_frozen(f),
        residual_norm=float(np.linalg.norm(f)),
        total_charge=n_charge,
        surface_class=cls,
        jacobian_rank=nd.rank,
        kernel_basis=nd.kernel_basis,
        nondegenerate=nd.nondegenerate,
        special_case=nd.special_case,
        genus=None if k is None else genus_table(config.n, k, n_charge),
    )
