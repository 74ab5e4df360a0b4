"""Error norms, observed convergence orders and kernel property sweeps."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import special

from .caputo import (
    assemble_direct_kernel_row,
    assemble_fast_kernel_row,
    check_epsilon,
    complementary_kernels,
)
from .mesh import MAX_STEP_RATIO, SpatialMesh, TemporalMesh, check_m1, graded_mesh, mesh_from_steps
from .problem import HomogenizedSpec
from .soe import build_soe
from .stepper import SolutionGrid, solve

__all__ = [
    "ConvergenceRow",
    "IncompatibleGridError",
    "KernelReport",
    "MeshKernelResult",
    "convergence_study",
    "discrete_l2",
    "error_history",
    "l2_error_final",
    "l2_error_max",
    "observed_rates",
    "random_m1_mesh",
    "self_reference_error",
    "verify_kernel_properties",
]

PI_A = 11.0 / 4.0


class IncompatibleGridError(ValueError):
    """Two solutions cannot be compared on shared points."""


def discrete_l2(v, h: float) -> float:
    """``sqrt(h * sum v_i^2)`` over the interior nodes."""
    v = np.asarray(v, dtype=float)
    return float(math.sqrt(h * np.sum(v * v)))


def error_history(grid: SolutionGrid, exact: Callable) -> np.ndarray:
    """Discrete L2 error at every level ``n = 0..N``."""
    x = grid.smesh.interior
    t = grid.tmesh.t
    ref = exact(x[None, :], t[:, None])
    diff = np.asarray(ref, dtype=float) - grid.u
    return np.sqrt(grid.h * np.sum(diff * diff, axis=1))


def l2_error_max(grid: SolutionGrid, exact: Optional[Callable] = None) -> float:
    """``max_{1<=n<=N} ||u(., t_n) - u^n||`` in the discrete L2 norm.

    ``exact`` defaults to the exact solution attached to the grid's problem.
    """
    if exact is None:
        if grid.problem is None or grid.problem.exact is None:
            raise ValueError("no exact solution supplied")
        exact = grid.problem.exact
    return float(np.max(error_history(grid, exact)[1:]))


def l2_error_final(grid: SolutionGrid, exact: Optional[Callable] = None) -> float:
    """Discrete L2 error at ``t_N`` only."""
    if exact is None:
        if grid.problem is None or grid.problem.exact is None:
            raise ValueError("no exact solution supplied")
        exact = grid.problem.exact
    return float(error_history(grid, exact)[-1])


def self_reference_error(coarse: SolutionGrid, fine: SolutionGrid, axis: str) -> float:
    """L2 distance at the final level between a solution and a refined reference.

    ``axis="time"``: same spatial grid, finer temporal grid ending at the same
    ``T``.  ``axis="space"``: same temporal grid, the fine spatial grid must
    contain every coarse node; the fine solution is restricted to them.
    """
    if axis not in ("time", "space"):
        raise ValueError(f"axis must be 'time' or 'space', got {axis!r}")
    cs, fs = coarse.smesh, fine.smesh
    if (cs.x_l, cs.x_r) != (fs.x_l, fs.x_r):
        raise IncompatibleGridError("spatial domains differ")
    if abs(coarse.tmesh.T - fine.tmesh.T) > 1e-12 * max(1.0, abs(coarse.tmesh.T)):
        raise IncompatibleGridError("final times differ")
    if axis == "time":
        if cs.M != fs.M:
            raise IncompatibleGridError(f"spatial grids differ: M={cs.M} vs {fs.M}")
        ref = fine.u[-1]
    else:
        if coarse.tmesh.N != fine.tmesh.N or not np.allclose(coarse.tmesh.t, fine.tmesh.t):
            raise IncompatibleGridError("temporal grids differ")
        if fs.M % cs.M:
            raise IncompatibleGridError(f"M={fs.M} is not a multiple of M={cs.M}")
        stride = fs.M // cs.M
        ref = fine.full()[-1, ::stride][1:-1]
    return discrete_l2(coarse.u[-1] - ref, cs.h)


@dataclass(frozen=True)
class ConvergenceRow:
    """One row of a convergence study; ``size`` is N for time studies and M for space studies."""

    size: int
    error: float
    rate: Optional[float] = None


def observed_rates(sizes: Sequence[int], errors: Sequence[float]) -> list[ConvergenceRow]:
    """Rates from consecutive rows, ``log2(e_prev / e_curr) / log2(size_curr / size_prev)``."""
    if len(sizes) != len(errors):
        raise ValueError("sizes and errors differ in length")
    rows = []
    for i, (s, e) in enumerate(zip(sizes, errors)):
        if i == 0:
            rows.append(ConvergenceRow(int(s), float(e)))
            continue
        ratio = math.log2(s / sizes[i - 1])
        if errors[i - 1] > 0.0 and e > 0.0:
            rate = math.log2(errors[i - 1] / e) / ratio
        else:
            rate = math.nan
        rows.append(ConvergenceRow(int(s), float(e), rate))
    return rows


def convergence_study(
    problem: HomogenizedSpec,
    base_N: int,
    base_M: int,
    doublings: int,
    axis: str,
    gamma: Optional[float] = None,
    *,
    mode: str = "fast",
    epsilon: float = 1e-12,
    reference: Optional[int] = None,
    norm: str = "max",
) -> list[ConvergenceRow]:
    """Refine ``N`` (``axis="time"``) or ``M`` (``axis="space"``) ``doublings`` times.

    With an exact solution the error is the max-over-levels L2 error
    (``norm="final"`` uses the last level instead).  Without one, pass
    ``reference`` (the fine ``N`` or ``M``) to use :func:`self_reference_error`.
    ``gamma`` defaults to ``2 / alpha``.
    """
    if axis not in ("time", "space"):
        raise ValueError(f"axis must be 'time' or 'space', got {axis!r}")
    if doublings < 0:
        raise ValueError("doublings must be nonnegative")
    if norm not in ("max", "final"):
        raise ValueError(f"norm must be 'max' or 'final', got {norm!r}")
    alpha = problem.alpha
    gamma = 2.0 / alpha if gamma is None else gamma

    def run(N, M):
        return solve(
            problem,
            graded_mesh(problem.T, N, gamma, alpha),
            SpatialMesh(problem.x_l, problem.x_r, M),
            mode,
            epsilon,
        )

    if problem.exact is None and reference is None:
        raise ValueError("problem has no exact solution; pass a reference resolution")
    fine = None
    if reference is not None:
        fine = run(reference, base_M) if axis == "time" else run(base_N, reference)

    sizes, errors = [], []
    for i in range(doublings + 1):
        N = base_N * 2**i if axis == "time" else base_N
        M = base_M * 2**i if axis == "space" else base_M
        grid = run(N, M)
        if fine is not None:
            err = self_reference_error(grid, fine, axis)
        elif norm == "max":
            err = l2_error_max(grid)
        else:
            err = l2_error_final(grid)
        sizes.append(N if axis == "time" else M)
        errors.append(err)
    return observed_rates(sizes, errors)


def random_m1_mesh(
    N: int, alpha: float, rng: np.random.Generator, T: float = 1.0, bound: float = MAX_STEP_RATIO
) -> TemporalMesh:
    """Random mesh whose step ratios ``tau_k / tau_{k+1}`` never exceed ``bound``.

    Consecutive steps change by a log-uniform factor in ``[1/bound, bound]``,
    so the steps follow a random walk in log scale; the result is scaled to
    end at T.
    """
    if N < 1:
        raise ValueError("N must be at least 1")
    growth = np.exp(rng.uniform(math.log(1.0 / bound), math.log(bound), size=N - 1))
    # keep a tiny margin so rounding in the rescaling cannot push a ratio past the bound
    growth = np.maximum(growth, (1.0 + 1e-9) / bound)
    tau = np.concatenate([[1.0], np.cumprod(growth)])
    return mesh_from_steps(tau * (T / tau.sum()), alpha)


@dataclass
class MeshKernelResult:
    N: int
    rho_max: float
    a1: bool
    a2: bool
    agreement: bool
    identity: bool
    psub: bool
    worst_a1: float
    max_kernel_gap: float
    identity_residual: float
    failures: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.a1 and self.a2 and self.agreement and self.identity and self.psub


@dataclass
class KernelReport:
    alpha: float
    epsilon: float
    n_q: int
    meshes: list

    @property
    def passed(self) -> bool:
        return all(m.passed for m in self.meshes)

    @property
    def n_failed(self) -> int:
        return sum(not m.passed for m in self.meshes)


def _omega(beta: float, t):
    return np.asarray(t, dtype=float) ** (beta - 1.0) / special.gamma(beta)


def _check_rows(mesh: TemporalMesh, rows, failures, label) -> tuple[bool, bool, float]:
    """A2 monotonicity/positivity and A1 lower bound over all rows."""
    alpha, t, tau = mesh.alpha, mesh.t, mesh.tau
    g2 = special.gamma(2.0 - alpha)
    a1_ok = a2_ok = True
    worst = math.inf
    for row in rows:
        n = row.n
        lagged = row.by_lag
        if np.any(lagged <= 0.0) or np.any(np.diff(lagged) > 0.0):
            a2_ok = False
            failures.append(f"{label}: A2 fails at n={n}")
        k = np.arange(1, n + 1)
        integral = ((t[n] - t[k - 1]) ** (1.0 - alpha) - (t[n] - t[k]) ** (1.0 - alpha)) / g2
        lower = integral / (PI_A * tau[k - 1])
        ratio = float(np.min(row.A / lower))
        worst = min(worst, ratio)
        if ratio < 1.0:
            a1_ok = False
            failures.append(f"{label}: A1 fails at n={n} (ratio {ratio:.6f})")
    return a1_ok, a2_ok, worst


def verify_kernel_properties(
    alpha: float,
    meshes: Sequence[TemporalMesh],
    epsilon: float = 1e-12,
    *,
    identity_tol: float = 1e-12,
    agreement_factor: float = 10.0,
) -> KernelReport:
    """Check A1 (constant 11/4), A2, fast/direct agreement, the complementary
    kernel identity and its subordination bounds for ``m = 0, 1`` on each mesh.

    Failures are recorded in the report, never raised.  One SOE is built for
    the smallest history gap over all meshes.
    """
    check_epsilon(alpha, max(m.T for m in meshes), epsilon)
    multi = [m for m in meshes if m.N > 1]
    soe = None
    if multi:
        gap = min(m.min_history_gap() for m in multi)
        soe = build_soe(alpha, epsilon, gap, max(m.T for m in multi))
    results = []
    for mesh in meshes:
        if mesh.alpha != alpha:
            raise ValueError("mesh built for a different alpha")
        failures: list[str] = []
        direct = [assemble_direct_kernel_row(mesh, n) for n in range(1, mesh.N + 1)]
        if soe is not None and mesh.N > 1:
            fast = [assemble_fast_kernel_row(mesh, n, soe) for n in range(1, mesh.N + 1)]
        else:
            fast = direct
        a1_f, a2_f, w_f = _check_rows(mesh, fast, failures, "fast")
        a1_d, a2_d, w_d = _check_rows(mesh, direct, failures, "direct")

        gap = max(float(np.max(np.abs(f.A - d.A))) for f, d in zip(fast, direct))
        n_q = soe.n_q if soe is not None else 0
        agree = gap <= agreement_factor * epsilon * max(n_q, 1)
        if not agree:
            failures.append(f"fast/direct kernel gap {gap:.3e}")

        P = complementary_kernels(fast)
        L = np.zeros((mesh.N, mesh.N))
        for j, row in enumerate(fast, start=1):
            L[j - 1, :j] = row.A
        resid = float(np.max(np.abs(P @ L - np.tril(np.ones((mesh.N, mesh.N))))))
        identity = resid <= identity_tol * max(1.0, float(np.max(np.abs(P @ L))))
        if not identity:
            failures.append(f"complementary identity residual {resid:.3e}")

        psub = True
        if np.any(P < -identity_tol * np.max(P)):
            psub = False
            failures.append("negative complementary kernel")
        t = mesh.t[1:]
        for m in (0, 1):
            lhs = P @ _omega(1.0 + (m - 1) * alpha, t)
            rhs = PI_A * _omega(1.0 + m * alpha, t)
            if np.any(lhs > rhs * (1.0 + 1e-12)):
                psub = False
                failures.append(f"subordination bound fails for m={m}")

        results.append(
            MeshKernelResult(
                N=mesh.N, rho_max=check_m1(mesh)[0],
                a1=a1_f and a1_d, a2=a2_f and a2_d, agreement=agree,
                identity=identity, psub=psub, worst_a1=min(w_f, w_d),
                max_kernel_gap=gap, identity_residual=resid, failures=failures,
            )
        )
    return KernelReport(alpha, epsilon, soe.n_q if soe is not None else 0, results)
