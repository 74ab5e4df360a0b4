"""Temporal and spatial meshes."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "MAX_STEP_RATIO",
    "SpatialMesh",
    "TemporalMesh",
    "check_m1",
    "check_m2",
    "graded_mesh",
    "mesh_from_points",
    "mesh_from_steps",
]

MAX_STEP_RATIO = 7.0 / 4.0


@dataclass(frozen=True)
class TemporalMesh:
    """Nonuniform grid ``0 = t_0 < ... < t_N = T`` for a fractional order ``alpha``.

    ``tau[k-1]`` is the step ``t_k - t_{k-1}``; ``rho[k-1] = tau_k / tau_{k+1}``
    for ``k = 1..N-1``; ``t_offset[n-1] = theta t_{n-1} + (1-theta) t_n`` with
    the off-set ``theta = alpha / 2``.  Use :meth:`tau_k` and friends for
    1-based access that mirrors the usual index notation.
    """

    t: np.ndarray
    alpha: float
    tau: np.ndarray = field(init=False)
    rho: np.ndarray = field(init=False)
    t_offset: np.ndarray = field(init=False)

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        if t.ndim != 1 or len(t) < 2:
            raise ValueError("a temporal mesh needs at least two points")
        if t[0] != 0.0:
            raise ValueError("temporal mesh must start at t_0 = 0")
        tau = np.diff(t)
        if np.any(tau <= 0.0):
            raise ValueError("temporal mesh points must be strictly increasing")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        theta = 0.5 * self.alpha
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "tau", tau)
        object.__setattr__(self, "rho", tau[:-1] / tau[1:])
        object.__setattr__(self, "t_offset", theta * t[:-1] + (1.0 - theta) * t[1:])
        for arr in (self.t, self.tau, self.rho, self.t_offset):
            arr.setflags(write=False)

    @property
    def theta(self) -> float:
        return 0.5 * self.alpha

    @property
    def N(self) -> int:
        return len(self.t) - 1

    @property
    def T(self) -> float:
        return float(self.t[-1])

    @property
    def tau_max(self) -> float:
        return float(np.max(self.tau))

    def tau_k(self, k: int) -> float:
        return float(self.tau[k - 1])

    def rho_k(self, k: int) -> float:
        return float(self.rho[k - 1])

    def t_off(self, n: int) -> float:
        return float(self.t_offset[n - 1])

    def min_history_gap(self) -> float:
        """Smallest kernel argument the SOE history ever sees: ``(1-theta) min tau``."""
        return (1.0 - self.theta) * float(np.min(self.tau))


def graded_mesh(T: float, N: int, gamma: float, alpha: float) -> TemporalMesh:
    """Graded mesh ``t_k = T (k/N)**gamma``."""
    if N < 1:
        raise ValueError("N must be at least 1")
    if gamma < 1.0:
        raise ValueError(f"grading parameter gamma must be >= 1, got {gamma}")
    if T <= 0.0:
        raise ValueError("T must be positive")
    k = np.arange(N + 1)
    t = T * (k / N) ** gamma
    t[-1] = T
    return TemporalMesh(t, alpha)


def mesh_from_points(t, alpha: float) -> TemporalMesh:
    """User-supplied mesh.  Only monotonicity is enforced; see :func:`check_m1`."""
    return TemporalMesh(np.asarray(t, dtype=float), alpha)


def mesh_from_steps(tau, alpha: float) -> TemporalMesh:
    tau = np.asarray(tau, dtype=float)
    return TemporalMesh(np.concatenate([[0.0], np.cumsum(tau)]), alpha)


def check_m1(mesh: TemporalMesh, bound: float = MAX_STEP_RATIO) -> tuple[float, bool]:
    """Maximum step ratio and whether it stays within ``bound`` (7/4)."""
    if mesh.N < 2:
        return 0.0, True
    rho_max = float(np.max(mesh.rho))
    # ratios are computed from differences of rounded points
    return rho_max, rho_max <= bound * (1.0 + 1e-12)


def check_m2(mesh: TemporalMesh, gamma: float, C_gamma: float) -> bool:
    """Check the graded-mesh regularity conditions with constant ``C_gamma``.

    ``tau_k <= C tau min(1, t_k^(1-1/gamma))`` for all k, and for ``k >= 2``
    ``t_k <= C t_{k-1}`` and ``tau_k/t_k <= C tau_{k-1}/t_{k-1}``.  Here
    ``tau`` is the largest step over ``k = 1..N-1`` (the largest overall
    when ``N = 1``).
    """
    if C_gamma <= 0.0:
        raise ValueError("C_gamma must be positive")
    t, tau = mesh.t, mesh.tau
    tau_ref = float(np.max(tau[:-1])) if mesh.N > 1 else float(tau[0])
    slack = 1.0 + 1e-12
    bound = C_gamma * tau_ref * np.minimum(1.0, t[1:] ** (1.0 - 1.0 / gamma))
    if np.any(tau > bound * slack):
        return False
    if mesh.N >= 2:
        if np.any(t[2:] > C_gamma * t[1:-1] * slack):
            return False
        if np.any(tau[1:] / t[2:] > C_gamma * tau[:-1] / t[1:-1] * slack):
            return False
    return True


@dataclass(frozen=True)
class SpatialMesh:
    x_l: float
    x_r: float
    M: int

    def __post_init__(self):
        if self.M < 4:
            raise ValueError(f"need M >= 4 spatial intervals, got {self.M}")
        if not self.x_r > self.x_l:
            raise ValueError("need x_l < x_r")

    @property
    def h(self) -> float:
        return (self.x_r - self.x_l) / self.M

    @property
    def x(self) -> np.ndarray:
        return self.x_l + self.h * np.arange(self.M + 1)

    @property
    def interior(self) -> np.ndarray:
        return self.x[1:-1]
