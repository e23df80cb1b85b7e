"""Limit Weierstrass data of the noded surface: dh0, omega0, |G0|, neck scales."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from numpy.typing import NDArray

from .config import Configuration, forces, min_pairwise_distance

ComplexArray = NDArray[np.complex128]

ROOT_RTOL = 1e-10


class PoleError(ValueError):
    """Evaluation requested at a pole of a limit form."""


class DegenerateBasepointError(ValueError):
    pass


def dh0_numerator(config: Configuration) -> np.ndarray:
    """Coefficients (highest degree first) of sum_j eps_j prod_{k != j} (z - p_k).

    Its leading coefficient is the total charge N; when N = 0 the leading
    zeros are stripped so the degree drops.
    """
    p = config.points
    eps = config.charges
    coeffs = np.zeros(config.n, dtype=complex)
    for j in range(config.n):
        others = np.delete(p, j)
        coeffs += eps[j] * np.poly(others) if others.size else eps[j] * np.array([1.0])
    scale = max(np.max(np.abs(coeffs)), 1.0)
    first = 0
    while first < coeffs.size and abs(coeffs[first]) <= ROOT_RTOL * scale:
        first += 1
    return coeffs[first:]


def dh0_zeros(config: Configuration) -> ComplexArray:
    """Zeros of sum_j eps_j / (z - p_j), with multiplicity.

    Companion-matrix eigenvalues followed by one Newton polish step on the
    numerator polynomial.
    """
    if config.n < 2:
        raise ValueError("dh0_zeros needs n >= 2")
    coeffs = dh0_numerator(config)
    if coeffs.size <= 1:
        return np.zeros(0, dtype=complex)
    roots = np.roots(coeffs)
    val = np.polyval(coeffs, roots)
    der = np.polyval(np.polyder(coeffs), roots)
    with np.errstate(divide="ignore", invalid="ignore"):
        polished = roots - val / der
    better = np.isfinite(polished) & (np.abs(np.polyval(coeffs, polished)) < np.abs(val))
    roots = np.where(better, polished, roots)
    return np.sort_complex(roots)


def dh0_order_at_infinity(config: Configuration) -> int:
    """Order of dh0 at infinity on the first sheet: -1 (simple pole) when N != 0.

    When N = 0 the numerator degree d is at most n - 2 and dh0 vanishes to
    order n - d - 2 there; balanced configurations with N = 0 satisfy
    sum_j eps_j p_j = 0, so d <= n - 3 and one zero always sits at infinity.
    """
    if config.total_charge != 0:
        return -1
    d = dh0_numerator(config).size - 1 if config.n > 1 else 0
    return config.n - d - 2


def dh0_zero_count(config: Configuration) -> int:
    """Number of zeros of dh0 on the first Riemann sphere, with multiplicity: n - 1 or n - 2."""
    finite = dh0_numerator(config).size - 1 if config.n > 1 else 0
    return finite + max(dh0_order_at_infinity(config), 0)


@dataclass(frozen=True)
class LimitForms:
    config: Configuration
    t: float = 0.0
    dh0_zeros: ComplexArray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        if not 0.0 <= self.t < 1.0:
            raise ValueError(f"twist parameter t must lie in [0, 1), got {self.t}")
        if self.dh0_zeros is None:
            zeros = dh0_zeros(self.config) if self.config.n > 1 else np.zeros(0, dtype=complex)
            object.__setattr__(self, "dh0_zeros", zeros)

    @property
    def pole_points(self) -> ComplexArray:
        return np.r_[self.config.points, self.dh0_zeros]

    @property
    def omega0_residues(self) -> np.ndarray:
        """Residues of omega0 at config.points followed by dh0_zeros."""
        eps = self.config.charges
        return np.r_[1.0 + self.t * eps, -np.ones(self.dh0_zeros.size)]

    @property
    def zeros_at_infinity(self) -> int:
        return max(dh0_order_at_infinity(self.config), 0)

    def residue_sum_away_from_end(self) -> float:
        """Residues of omega0 summed over every pole except the end itself.

        Zeros of dh0 that sit at infinity count as poles of residue -1, as in
        the divisor count on the sphere; minus this sum is the residue at the end.
        """
        return float(np.sum(self.omega0_residues)) - self.zeros_at_infinity


def _check_pole(forms: LimitForms, z: complex, tol: float = 1e-14) -> None:
    for w in forms.config.points:
        if abs(z - w) <= tol:
            raise PoleError(f"z={z} is a configuration point (pole of dh0 and omega0)")
    for q in forms.dh0_zeros:
        if abs(z - q) <= tol:
            raise PoleError(f"z={z} is a zero of dh0 (pole of omega0)")


def eval_dh0(config: Configuration, z: complex) -> complex:
    return complex(np.sum(-1j * config.charges / (z - config.points)))


def eval_limit_forms(forms: LimitForms, z: complex) -> tuple[complex, complex]:
    """Coefficients of dz in dh0 and omega0 at ``z``."""
    _check_pole(forms, z)
    p = forms.config.points
    eps = forms.config.charges
    dh0 = np.sum(-1j * eps / (z - p))
    omega0 = np.sum((1.0 + forms.t * eps) / (z - p)) - np.sum(1.0 / (z - forms.dh0_zeros))
    return complex(dh0), complex(omega0)


def contour_integral(f, center: complex, radius: float, nodes: int = 256) -> complex:
    """Trapezoid rule for the integral of f(z) dz over a circle (spectrally accurate)."""
    th = 2 * np.pi * np.arange(nodes) / nodes
    z = center + radius * np.exp(1j * th)
    dz = 1j * radius * np.exp(1j * th)
    vals = np.array([f(w) for w in z])
    return complex(np.sum(vals * dz) * (2 * np.pi / nodes))


def integrate_omega0(forms: LimitForms, path: Sequence[complex]) -> complex:
    """Integral of omega0 along a polyline, continued through each segment.

    Each log term is integrated exactly segment by segment; the caller's path
    chooses the branch of the multivalued primitive.
    """
    path = np.asarray(path, dtype=complex)
    poles = forms.pole_points
    res = forms.omega0_residues
    total = 0.0 + 0.0j
    for a, b in zip(path[:-1], path[1:]):
        for w, c in zip(poles, res):
            _segment_guard(a, b, w)
            total += c * np.log((b - w) / (a - w))
    return complex(total)


def _segment_guard(a: complex, b: complex, w: complex) -> None:
    d = b - a
    if d == 0:
        return
    s = np.clip(((w - a) * np.conj(d)).real / abs(d) ** 2, 0.0, 1.0)
    if abs(a + s * d - w) < 1e-12:
        raise PoleError(f"path segment {a}->{b} passes through the pole {w}")


def gauss_map_modulus(forms: LimitForms, z: complex) -> float:
    """|G0(z)| = prod |z - p_j|^(1 + t eps_j) / prod |z - q_k|."""
    _check_pole(forms, z)
    p = forms.config.points
    eps = forms.config.charges
    log_mod = np.sum((1 + forms.t * eps) * np.log(np.abs(z - p))) - np.sum(
        np.log(np.abs(z - forms.dh0_zeros))
    )
    return float(np.exp(log_mod))


def residues_at_infinity(config: Configuration, t: float = 0.0) -> tuple[complex, float]:
    """Residues of dh and omega at the first end: (N i, -1 - N t) or (0, -2) when N = 0."""
    n_charge = config.total_charge
    if n_charge != 0:
        return 1j * n_charge, -1.0 - n_charge * t
    return 0j, -2.0


# ---------------------------------------------------------------------------
# neck scales and the vertical/horizontal period limits


@dataclass(frozen=True)
class NeckScales:
    s: np.ndarray
    lambda_sq_t_target: float
    c0: complex
    basepoint: complex


def default_epsilon_disk(config: Configuration) -> float:
    d = min_pairwise_distance(config.points)
    return 0.45 * d if np.isfinite(d) else 0.45


def vertical_period_limits(s: Sequence[float], charges: Sequence[int], t: float) -> np.ndarray:
    """Renormalized omega B-periods at tau = 0: 2(1 + t eps_1) - 2 s_j (1 + t eps_j), j >= 2."""
    s = np.asarray(s, dtype=float)
    eps = np.asarray(charges, dtype=float)
    return 2 * (1 + t * eps[0]) - 2 * s[1:] * (1 + t * eps[1:])


def neck_scales(config: Configuration, t: float, epsilon_disk: float | None = None) -> NeckScales:
    """Neck scales s_j solving the vertical period limits, and the Lambda^2 t normalization."""
    if not 0.0 <= t < 1.0:
        raise ValueError(f"t must lie in [0, 1), got {t}")
    eps = config.charges.astype(float)
    weight = 1.0 + t * eps
    if np.any(weight <= 0):
        raise ValueError(f"t={t} too large: 1 + t*eps_j must be positive")
    s = weight[0] / weight
    s[0] = 1.0
    if epsilon_disk is None:
        epsilon_disk = default_epsilon_disk(config)
    if config.n > 1 and not epsilon_disk < 0.5 * min_pairwise_distance(config.points):
        raise ValueError("epsilon_disk must be below half the minimum pairwise distance")
    z0 = complex(config.points[0] + epsilon_disk)
    c0 = complex(np.sum(config.charges / (z0 - config.points)))
    if abs(c0) < 1e-14:
        raise DegenerateBasepointError(f"c0 vanishes at basepoint z0={z0}")
    return NeckScales(s=s, lambda_sq_t_target=4.0 / abs(c0) ** 2, c0=c0, basepoint=z0)


def horizontal_period_limits(config: Configuration) -> np.ndarray:
    """Renormalized horizontal periods at tau = 0: F_1 - F_j for j >= 2."""
    f = forces(config)
    return f[0] - f[1:]
