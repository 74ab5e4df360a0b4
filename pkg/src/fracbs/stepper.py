"""Fully discrete time stepping: one tridiagonal solve per time level.

At level ``n`` the scheme reads, with ``L = c H - K`` and
``K = (a/h^2 + b^2/(12a)) A + (b/(2h)) S``::

    [A_0 H + (1-theta) L] u^n = A_0 H u^{n-1} - H hist - theta L u^{n-1} + H f + fhat

where ``A_0`` is the diagonal kernel, ``hist`` the known part of the discrete
Caputo derivative and ``fhat`` the boundary part of ``H f``.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .caputo import DirectHistory, FastHistory, check_epsilon, local_coeff_a0
from .mesh import SpatialMesh, TemporalMesh, check_m1
from .problem import HomogenizedSpec
from .soe import build_soe
from .spatial import CompactOperator, TriDiag, build_operator

__all__ = [
    "MeshRatioError",
    "NonFiniteSolutionError",
    "SolutionGrid",
    "assemble_system",
    "rhs",
    "solve",
    "thomas_solve",
]


class MeshRatioError(ValueError):
    """Temporal mesh exceeds the maximum step ratio 7/4."""


class NonFiniteSolutionError(FloatingPointError):
    pass


@dataclass
class SolutionGrid:
    """Interior values ``u[n, i-1] = u_i^n`` for ``n = 0..N`` and ``i = 1..M-1``."""

    u: np.ndarray
    tmesh: TemporalMesh
    smesh: SpatialMesh
    mode: str
    problem: Optional[HomogenizedSpec] = None
    meta: dict = field(default_factory=dict)

    @property
    def h(self) -> float:
        return self.smesh.h

    def full(self) -> np.ndarray:
        """Solution including the zero boundary columns."""
        out = np.zeros((self.u.shape[0], self.smesh.M + 1))
        out[:, 1:-1] = self.u
        return out

    def original(self) -> np.ndarray:
        """Solution of the non-homogenised problem, ``u + z``, on the full grid."""
        if self.problem is None or self.problem.lift is None:
            return self.full()
        X, Tt = np.meshgrid(self.smesh.x, self.tmesh.t)
        return self.full() + self.problem.lift(X, Tt)


def thomas_solve(m: TriDiag, rhs) -> np.ndarray:
    """Solve ``m x = rhs`` by forward elimination and back substitution, no pivoting."""
    rhs = np.asarray(rhs, dtype=float)
    n = m.size
    if rhs.shape[0] != n:
        raise ValueError(f"dimension mismatch: {rhs.shape[0]} != {n}")
    a, b, c, d = m.sub.tolist(), m.diag.tolist(), m.sup.tolist(), rhs.tolist()
    cp = [0.0] * n
    dp = [0.0] * n
    if b[0] == 0.0:
        raise ZeroDivisionError("zero pivot in Thomas elimination")
    cp[0] = c[0] / b[0] if n > 1 else 0.0
    dp[0] = d[0] / b[0]
    for i in range(1, n):
        piv = b[i] - a[i - 1] * cp[i - 1]
        if piv == 0.0:
            raise ZeroDivisionError("zero pivot in Thomas elimination")
        if i < n - 1:
            cp[i] = c[i] / piv
        dp[i] = (d[i] - a[i - 1] * dp[i - 1]) / piv
    x = [0.0] * n
    x[-1] = dp[-1]
    for i in range(n - 2, -1, -1):
        x[i] = dp[i] - cp[i] * x[i + 1]
    return np.array(x)


def _reaction(op: CompactOperator, c: float) -> TriDiag:
    return op.H * c - op.spatial_matrix()


def assemble_system(kernel_diag: float, op: CompactOperator, c: float, theta: float) -> TriDiag:
    """``A_0 H + (1-theta) (c H - K)``; the level enters only through ``kernel_diag``."""
    return op.H * kernel_diag + _reaction(op, c) * (1.0 - theta)


def rhs(
    kernel_diag: float,
    history,
    u_prev,
    f_vec,
    f_bound: tuple[float, float],
    op: CompactOperator,
    c: float,
    theta: float,
) -> np.ndarray:
    """Right-hand side for level ``n``.

    ``history`` is the known part of the discrete derivative (all terms not
    multiplying ``u^n - u^{n-1}``); ``f_vec`` the source at ``t_{n-theta}`` on
    interior nodes and ``f_bound`` its boundary values.
    """
    u_prev = np.asarray(u_prev, dtype=float)
    history = np.asarray(history, dtype=float)
    f_vec = np.asarray(f_vec, dtype=float)
    if not (len(u_prev) == len(history) == len(f_vec) == op.M - 1):
        raise ValueError("dimension mismatch in right-hand side assembly")
    H = op.H
    return (
        H @ (kernel_diag * u_prev - history + f_vec)
        - theta * (_reaction(op, c) @ u_prev)
        + op.boundary_vector(*f_bound)
    )


def solve(
    problem: HomogenizedSpec,
    tmesh: TemporalMesh,
    smesh: SpatialMesh,
    mode: str = "fast",
    epsilon: float = 1e-12,
    *,
    allow_large_ratio: bool = False,
) -> SolutionGrid:
    """March the compact scheme from ``u^0 = phi`` to ``t_N``.

    ``mode="fast"`` uses the SOE history recursion (O(N_q) work per node and
    level); ``mode="direct"`` stores every increment and uses exact-kernel rows.
    """
    if mode not in ("fast", "direct"):
        raise ValueError(f"unknown mode {mode!r}")
    if abs(tmesh.alpha - problem.alpha) > 0.0:
        raise ValueError("mesh and problem use different fractional orders")
    if (smesh.x_l, smesh.x_r) != (problem.x_l, problem.x_r):
        raise ValueError("spatial mesh does not cover the problem domain")
    if abs(tmesh.T - problem.T) > 1e-12 * problem.T:
        raise ValueError("temporal mesh does not end at the problem horizon")
    rho_max, ok = check_m1(tmesh)
    if not ok and not allow_large_ratio:
        raise MeshRatioError(f"max step ratio {rho_max:.4g} exceeds 7/4")

    started = time.perf_counter()
    op = build_operator(problem.a, problem.b, smesh.h, smesh.M)
    theta, c = tmesh.theta, problem.c
    x_all = smesh.x
    x_in = x_all[1:-1]
    m = smesh.M - 1

    meta = {"epsilon": epsilon, "n_q": 0, "rho_max": rho_max}
    if mode == "fast":
        check_epsilon(tmesh.alpha, tmesh.T, epsilon)
        if tmesh.N > 1:
            soe = build_soe(tmesh.alpha, epsilon, tmesh.min_history_gap(), tmesh.T)
            meta["n_q"] = soe.n_q
            history = FastHistory(tmesh, soe, m)
        else:
            history = None
    else:
        history = DirectHistory(tmesh, m)

    u = np.empty((tmesh.N + 1, m))
    u[0] = problem.phi(x_in)
    grad_prev = np.zeros(m)
    for n in range(1, tmesh.N + 1):
        if history is None:
            known, extra = np.zeros(m), 0.0
        else:
            known, extra = history.step(n, grad_prev)
        A0 = local_coeff_a0(tmesh, n) + extra
        f_all = np.broadcast_to(problem.source(x_all, tmesh.t_off(n)), x_all.shape)
        f_vec, f_bound = f_all[1:-1], (float(f_all[0]), float(f_all[-1]))
        system = assemble_system(A0, op, c, theta)
        b_vec = rhs(A0, known, u[n - 1], f_vec, f_bound, op, c, theta)
        u[n] = thomas_solve(system, b_vec)
        if not np.all(np.isfinite(u[n])):
            raise NonFiniteSolutionError(f"non-finite values at level {n}")
        grad_prev = u[n] - u[n - 1]
        if history is not None:
            history.commit(grad_prev)

    meta["elapsed"] = time.perf_counter() - started
    return SolutionGrid(u, tmesh, smesh, mode, problem, meta)
