"""Point-vortex dynamics and rigid-rotation detection.

Vortices with circulations Gamma_l move by

    conj(dp_j/dt) = 1/(2 pi i) * sum_{l != j} Gamma_l / (p_j - p_l).

A configuration rotating rigidly at angular velocity 1/(2 pi) solves the
balance equations with charges -Gamma (or, rotating at -1/(2 pi), with
charges Gamma), so balanced configurations are relative equilibria.
"""
from __future__ import annotations

from dataclasses import dataclass
from os import PathLike
from typing import Sequence

import numpy as np
from numpy.typing import NDArray

from .config import CoincidentPointsError, Configuration

ComplexArray = NDArray[np.complex128]
COLLISION_DISTANCE = 1e-6


class VortexCollisionError(RuntimeError):
    def __init__(self, time: float, distance: float):
        super().__init__(f"vortices within {distance:.3e} of each other at t={time:.6g}")
        self.time = time
        self.distance = distance


@dataclass(frozen=True)
class VortexTrajectory:
    times: NDArray[np.float64]
    states: ComplexArray  # shape (len(times), n)
    circulations: NDArray[np.float64]

    def to_csv(self, destination: str | PathLike) -> None:
        n = self.circulations.size
        header = "t," + ",".join(f"x{j},y{j}" for j in range(1, n + 1))
        data = np.empty((self.times.size, 2 * n + 1))
        data[:, 0] = self.times
        data[:, 1::2] = self.states.real
        data[:, 2::2] = self.states.imag
        np.savetxt(destination, data, delimiter=",", header=header, comments="", fmt="%.17g")


@dataclass(frozen=True)
class RotationDiagnostics:
    omega_estimate: float
    shape_deviation: float
    rigid: bool
    tolerance: float

    def to_dict(self) -> dict:
        return {
            "omega_estimate": self.omega_estimate,
            "shape_deviation": self.shape_deviation,
            "rigid": self.rigid,
            "tolerance": self.tolerance,
        }


def _velocity(points: ComplexArray, gamma: np.ndarray) -> ComplexArray:
    diff = points[:, None] - points[None, :]
    np.fill_diagonal(diff, 1.0)
    inv = gamma[None, :] / diff
    np.fill_diagonal(inv, 0.0)
    return np.conj(inv.sum(axis=1) / (2j * np.pi))


def vortex_velocity(points: Sequence[complex], circulations: Sequence[float]) -> ComplexArray:
    """Velocities dp_j/dt."""
    p = np.asarray(points, dtype=complex)
    g = np.asarray(circulations, dtype=float)
    if p.size > 1:
        d = np.abs(p[:, None] - p[None, :])
        np.fill_diagonal(d, np.inf)
        if d.min() == 0:
            raise CoincidentPointsError("vortex velocity undefined at coincident vortices")
    return _velocity(p, g)


def hamiltonian(points: ComplexArray, circulations: np.ndarray) -> float:
    """sum_{j<l} Gamma_j Gamma_l log|p_j - p_l| (conserved)."""
    iu = np.triu_indices(points.size, 1)
    d = np.abs(points[:, None] - points[None, :])[iu]
    gg = np.outer(circulations, circulations)[iu]
    return float(np.sum(gg * np.log(d)))


def angular_impulse(points: ComplexArray, circulations: np.ndarray) -> float:
    """sum_j Gamma_j |p_j|^2 (conserved)."""
    return float(np.sum(circulations * np.abs(points) ** 2))


def integrate(
    initial: Configuration | Sequence[complex],
    dt: float,
    steps: int,
    circulations: Sequence[float] | None = None,
) -> VortexTrajectory:
    """Classical fixed-step RK4; circulations default to the configuration's charges."""
    if isinstance(initial, Configuration):
        p = initial.points.astype(complex)
        g = initial.charges.astype(float) if circulations is None else np.asarray(circulations, float)
    else:
        p = np.asarray(initial, dtype=complex)
        if circulations is None:
            raise ValueError("circulations required for raw point lists")
        g = np.asarray(circulations, dtype=float)
    if not np.isfinite(dt) or steps < 0:
        raise ValueError("need finite dt and steps >= 0")
    n = p.size
    states = np.empty((steps + 1, n), dtype=complex)
    states[0] = p
    off = ~np.eye(n, dtype=bool)

    def min_dist(z: ComplexArray) -> float:
        return float(np.abs(z[:, None] - z[None, :])[off].min()) if n > 1 else np.inf

    d0 = min_dist(p)
    if d0 < COLLISION_DISTANCE:
        raise VortexCollisionError(0.0, d0)
    for s in range(steps):
        k1 = _velocity(p, g)
        k2 = _velocity(p + 0.5 * dt * k1, g)
        k3 = _velocity(p + 0.5 * dt * k2, g)
        k4 = _velocity(p + dt * k3, g)
        p = p + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        states[s + 1] = p
        dmin = min_dist(p)
        if dmin < COLLISION_DISTANCE:
            raise VortexCollisionError((s + 1) * dt, dmin)
    return VortexTrajectory(dt * np.arange(steps + 1), states, g)


def detect_rigid_rotation(traj: VortexTrajectory, tol: float = 1e-5) -> RotationDiagnostics:
    """Fit a constant angular velocity and measure the co-rotated shape drift.

    The angle of the first vortex is unwrapped between consecutive samples and
    fitted by least squares; when that vortex sits at the origin the principal
    axis of sum p_j^2 is tracked instead, and if that moment vanishes too (as
    for k-fold symmetric rings with k >= 3) the outermost vortex is used.
    """
    if traj.times.size < 3:
        raise ValueError("need at least 3 states")
    s = traj.states
    scale = np.max(np.abs(s[0]))
    if scale == 0:
        raise ValueError("all vortices at the origin: rotation undefined")
    if abs(s[0, 0]) > 1e-9 * scale:
        angle = np.unwrap(np.angle(s[:, 0]))
    else:
        moment = np.sum(s**2, axis=1)
        if np.min(np.abs(moment)) > 1e-8 * scale**2:
            angle = 0.5 * np.unwrap(np.angle(moment))
        else:
            angle = np.unwrap(np.angle(s[:, int(np.argmax(np.abs(s[0])))]))
    t = traj.times
    omega, _ = np.polyfit(t, angle, 1)
    corotated = s * np.exp(-1j * omega * t)[:, None]
    dev = float(np.max(np.abs(corotated - s[0][None, :])))
    return RotationDiagnostics(float(omega), dev, dev <= tol, tol)
