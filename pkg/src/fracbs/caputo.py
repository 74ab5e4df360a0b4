"""Discrete Caputo derivative on nonuniform meshes (fast Alikhanov formula).

At level ``n`` the derivative is approximated at ``t_{n-theta}`` as
``sum_k A_{n-k}^{(n)} (u^k - u^{k-1})``.  The local interval uses the exact
kernel with linear interpolation; each history interval ``[t_{k-1}, t_k]``
uses quadratic interpolation through ``t_{k-1}, t_k, t_{k+1}`` against the
kernel, which is either its SOE approximation (fast) or the exact power law
integrated by Gauss-Legendre quadrature (direct).

Coefficients are per history interval ``k = 1..n-1``::

    c_k = 1/tau_k int K(t_{n-theta} - s) ds
    d_k = int K(t_{n-theta} - s) 2 (s - t_{k-1/2}) / (tau_k (tau_k + tau_{k+1})) ds

and the kernel row is built from ``a_0``, ``c`` and ``d``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import special

from .mesh import TemporalMesh
from .soe import SOEApproximation, kernel

__all__ = [
    "DirectHistory",
    "EpsilonAdmissibilityError",
    "FastHistory",
    "KernelRow",
    "assemble_direct_kernel_row",
    "assemble_fast_kernel_row",
    "complementary_kernels",
    "direct_history_coeffs",
    "epsilon_bound",
    "history_coeffs",
    "history_step",
    "local_coeff_a0",
]

GAUSS_POINTS = 64
_GL_X, _GL_W = np.polynomial.legendre.leggauss(GAUSS_POINTS)


class EpsilonAdmissibilityError(ValueError):
    """SOE tolerance too coarse for the kernel positivity/monotonicity guarantees."""


@dataclass(frozen=True)
class KernelRow:
    """Kernel row at level ``n``; ``A[k-1]`` multiplies the increment ``u^k - u^{k-1}``."""

    n: int
    A: np.ndarray
    mode: str

    def lag(self, j: int) -> float:
        """``A_j^{(n)}``, the coefficient ``j`` steps back from the diagonal."""
        return float(self.A[self.n - 1 - j])

    @property
    def by_lag(self) -> np.ndarray:
        """``[A_0^{(n)}, A_1^{(n)}, ..., A_{n-1}^{(n)}]``."""
        return self.A[::-1]


def epsilon_bound(alpha: float, T: float) -> float:
    """Largest SOE tolerance for which the kernel properties are guaranteed."""
    theta = 0.5 * alpha
    w_T = float(kernel(alpha, T))
    return min(7.0 / 11.0 * w_T, theta / (1.0 - alpha) * w_T)


def check_epsilon(alpha: float, T: float, epsilon: float) -> None:
    bound = epsilon_bound(alpha, T)
    if epsilon > bound:
        raise EpsilonAdmissibilityError(
            f"SOE tolerance {epsilon:.3e} exceeds admissible bound {bound:.3e} "
            f"for alpha={alpha}, T={T}"
        )


def local_coeff_a0(mesh: TemporalMesh, n: int) -> float:
    """``a_0^{(n)} = ((1-theta) tau_n)^{1-alpha} / (tau_n Gamma(2-alpha))``."""
    alpha = mesh.alpha
    tau_n = mesh.tau_k(n)
    return ((1.0 - mesh.theta) * tau_n) ** (1.0 - alpha) / (tau_n * special.gamma(2.0 - alpha))


def _exp_mean(x):
    """``(1 - exp(-x)) / x``, stable near zero."""
    x = np.asarray(x, dtype=float)
    small = x < 1e-8
    xs = np.where(small, 1.0, x)
    return np.where(small, 1.0 - 0.5 * x, -np.expm1(-xs) / xs)


_G_TERMS = 26
_G_COEF = np.array(
    [(-1.0) ** (m + 1) * m / (2.0 * (m + 1) * (m + 2) * special.factorial(m))
     for m in range(1, _G_TERMS + 1)]
)


def _tilt_moment(x):
    """``int_0^1 exp(-x v) (1/2 - v) dv``; power series below 1 avoids cancellation."""
    x = np.asarray(x, dtype=float)
    small = x < 1.0
    xs = np.where(small, x, 0.0)
    series = np.polynomial.polynomial.polyval(xs, np.concatenate([[0.0], _G_COEF]))
    xl = np.where(small, 1.0, x)
    em = -np.expm1(-xl)
    direct = em / (2.0 * xl) - (em - xl * np.exp(-xl)) / xl**2
    return np.where(small, series, direct)


def _history_coeffs_all(mesh: TemporalMesh, n: int, nodes: np.ndarray):
    """c and d for all history intervals ``k = 1..n-1`` (rows) and nodes (columns)."""
    k = np.arange(1, n)
    tau = mesh.tau[k - 1]
    tau_next = mesh.tau[k]
    gap = mesh.t_off(n) - mesh.t[k]  # t_{n-theta} - t_k >= 0
    x = np.multiply.outer(tau, nodes)
    decay = np.exp(-np.multiply.outer(gap, nodes))
    c = decay * _exp_mean(x)
    d = (2.0 * tau / (tau + tau_next))[:, None] * decay * _tilt_moment(x)
    return c, d


def history_coeffs(mesh: TemporalMesh, n: int, k: int, soe: SOEApproximation):
    """Per-node coefficients ``(c^{(k,l)}, d^{(k,l)})`` for interval ``k`` at level ``n``."""
    if not 1 <= k <= n - 1:
        raise ValueError(f"history interval k={k} outside 1..{n - 1}")
    c, d = _history_coeffs_all(mesh, n, soe.nodes)
    return c[k - 1], d[k - 1]


def direct_history_coeffs(mesh: TemporalMesh, n: int):
    """Exact-kernel analogues of ``c_k``, ``d_k`` by 64-point Gauss-Legendre per interval."""
    k = np.arange(1, n)
    lo, tau = mesh.t[k - 1], mesh.tau[k - 1]
    tau_next = mesh.tau[k]
    s = lo[:, None] + 0.5 * tau[:, None] * (1.0 + _GL_X)
    w = 0.5 * tau[:, None] * _GL_W
    ker = kernel(mesh.alpha, mesh.t_off(n) - s)
    c = np.sum(w * ker, axis=1) / tau
    mid = lo + 0.5 * tau
    tilt = 2.0 * (s - mid[:, None]) / (tau * (tau + tau_next))[:, None]
    d = np.sum(w * ker * tilt, axis=1)
    return c, d


def _assemble(mesh, n, a0, c_sum, d_sum, mode):
    if n == 1:
        return KernelRow(1, np.array([a0]), mode)
    rho = mesh.rho[: n - 1]
    A = np.empty(n)
    A[0] = c_sum[0] - d_sum[0]
    A[1 : n - 1] = rho[: n - 2] * d_sum[: n - 2] + c_sum[1:] - d_sum[1:]
    A[n - 1] = a0 + rho[n - 2] * d_sum[n - 2]
    return KernelRow(n, A, mode)


def assemble_fast_kernel_row(
    mesh: TemporalMesh, n: int, soe: SOEApproximation, *, check_eps: bool = True
) -> KernelRow:
    """Kernel row with the history kernel replaced by its SOE approximation."""
    if not 1 <= n <= mesh.N:
        raise ValueError(f"level n={n} outside 1..{mesh.N}")
    if check_eps:
        check_epsilon(mesh.alpha, mesh.T, soe.epsilon)
    a0 = local_coeff_a0(mesh, n)
    if n == 1:
        return _assemble(mesh, 1, a0, None, None, "fast")
    c, d = _history_coeffs_all(mesh, n, soe.nodes)
    return _assemble(mesh, n, a0, c @ soe.weights, d @ soe.weights, "fast")


def assemble_direct_kernel_row(mesh: TemporalMesh, n: int) -> KernelRow:
    """Classical nonuniform Alikhanov row with the exact kernel (quadrature oracle)."""
    if not 1 <= n <= mesh.N:
        raise ValueError(f"level n={n} outside 1..{mesh.N}")
    a0 = local_coeff_a0(mesh, n)
    if n == 1:
        return _assemble(mesh, 1, a0, None, None, "direct")
    c, d = direct_history_coeffs(mesh, n)
    return _assemble(mesh, n, a0, c, d, "direct")


class FastHistory:
    """SOE history accumulators, one row of ``N_q`` values per spatial node.

    Usage per level ``n``: :meth:`step` with the previous increment returns the
    known history and the coefficient of the unknown increment; once the
    level is solved, :meth:`commit` folds the new increment in.
    """

    def __init__(self, mesh: TemporalMesh, soe: SOEApproximation, size: int):
        self.mesh = mesh
        self.soe = soe
        self.Q = np.zeros((soe.n_q, size))
        self._n = 1  # next level expected by step()
        self._pending = None

    def step(self, n: int, grad_prev=None):
        if n != self._n or self._pending is not None:
            raise RuntimeError(f"history step for level {n} out of sequence (expected {self._n})")
        mesh, s, w = self.mesh, self.soe.nodes, self.soe.weights
        if n == 1:
            self._pending = (None, 0.0)
            return np.zeros(self.Q.shape[1]), 0.0
        grad_prev = np.asarray(grad_prev, dtype=float)
        tau, tau_next = mesh.tau_k(n - 1), mesh.tau_k(n)
        gap = mesh.t_off(n) - mesh.t[n - 1]
        decay = np.exp(-s * (mesh.t_off(n) - mesh.t_off(n - 1)))
        x = s * tau
        e = np.exp(-s * gap)
        c = e * _exp_mean(x)
        d = 2.0 * tau / (tau + tau_next) * e * _tilt_moment(x)
        Q_hat = decay[:, None] * self.Q + np.multiply.outer(c - d, grad_prev)
        rho_d = mesh.rho_k(n - 1) * d
        self._pending = (Q_hat, rho_d)
        return w @ Q_hat, float(w @ rho_d)

    def commit(self, grad_n) -> None:
        if self._pending is None:
            raise RuntimeError("commit() without a preceding step()")
        Q_hat, rho_d = self._pending
        if Q_hat is not None:
            self.Q = Q_hat + np.multiply.outer(rho_d, np.asarray(grad_n, dtype=float))
        self._pending = None
        self._n += 1


def history_step(state: FastHistory, n: int, grad_prev):
    """Functional alias for :meth:`FastHistory.step`."""
    return state.step(n, grad_prev)


class DirectHistory:
    """Stores every increment and sums against exact-kernel rows (O(n) per level)."""

    def __init__(self, mesh: TemporalMesh, size: int):
        self.mesh = mesh
        self.grads = np.zeros((mesh.N, size))
        self._n = 1
        self.row = None

    def step(self, n: int, grad_prev=None):
        if n != self._n:
            raise RuntimeError(f"history step for level {n} out of sequence (expected {self._n})")
        self.row = assemble_direct_kernel_row(self.mesh, n)
        known = self.row.A[: n - 1] @ self.grads[: n - 1]
        return known, float(self.row.A[n - 1] - local_coeff_a0(self.mesh, n))

    def commit(self, grad_n) -> None:
        self.grads[self._n - 1] = grad_n
        self._n += 1


def complementary_kernels(rows: list[KernelRow]) -> np.ndarray:
    """Complementary kernels ``P[n-1, j-1] = P_{n-j}^{(n)}`` (lower triangular).

    Defined by ``sum_{j=k}^n P_{n-j}^{(n)} A_{j-k}^{(j)} = 1`` and computed by
    ``P_{n-k}^{(n)} = sum_{j=k+1}^n (A_{j-k-1}^{(j)} - A_{j-k}^{(j)}) P_{n-j}^{(n)} / A_0^{(k)}``.
    """
    N = len(rows)
    for i, row in enumerate(rows, start=1):
        if row.n != i:
            raise ValueError("rows must be ordered by level starting at n = 1")
        if row.lag(0) <= 0.0:
            raise ZeroDivisionError(f"non-positive diagonal kernel A_0^({i})")
    # L[j-1, k-1] = A_{j-k}^{(j)}
    L = np.zeros((N, N))
    for j, row in enumerate(rows, start=1):
        L[j - 1, :j] = row.A
    diag = np.diag(L).copy()
    P = np.zeros((N, N))
    for n in range(1, N + 1):
        P[n - 1, n - 1] = 1.0 / diag[n - 1]
        for k in range(n - 1, 0, -1):
            j = np.arange(k + 1, n + 1)
            diff = L[j - 1, k] - L[j - 1, k - 1]  # A_{j-k-1}^{(j)} - A_{j-k}^{(j)}
            P[n - 1, k - 1] = diff @ P[n - 1, j - 1] / diag[k - 1]
    return P
