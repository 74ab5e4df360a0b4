"""Compact fourth-order spatial operators on a uniform grid.

For ``-a u_xx - b u_x`` with Dirichlet data the compact scheme applies the
averaging operator ``H = h^2/12 (delta_x^2 + (b/a) delta_xhat) + 1`` to the
non-spatial terms and the modified diffusion ``(a + h^2 b^2 / (12 a))`` to the
second difference.  On the ``M - 1`` interior unknowns the matrices are::

    A = tridiag(1, -2, 1)      S = tridiag(-1, 0, 1)
    H = A / 12 + (h b / (24 a)) S + I
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

__all__ = [
    "AdmissibilityError",
    "CompactOperator",
    "MatrixReport",
    "TriDiag",
    "apply_H",
    "build_operator",
    "matrix_property_checks",
]


class AdmissibilityError(ValueError):
    """Grid too coarse for the averaging operator to stay diagonally dominant."""


@dataclass(frozen=True)
class TriDiag:
    sub: np.ndarray
    diag: np.ndarray
    sup: np.ndarray

    def __post_init__(self):
        m = len(self.diag)
        if len(self.sub) != m - 1 or len(self.sup) != m - 1:
            raise ValueError("sub/sup diagonals must have length len(diag) - 1")

    @classmethod
    def constant(cls, m: int, lo: float, mid: float, hi: float) -> TriDiag:
        return cls(np.full(m - 1, lo), np.full(m, mid), np.full(m - 1, hi))

    @property
    def size(self) -> int:
        return len(self.diag)

    def __matmul__(self, v):
        v = np.asarray(v, dtype=float)
        if v.shape[0] != self.size:
            raise ValueError(f"dimension mismatch: {v.shape[0]} != {self.size}")
        if v.ndim == 1:
            out = self.diag * v
            out[1:] += self.sub * v[:-1]
            out[:-1] += self.sup * v[1:]
            return out
        out = self.diag[:, None] * v
        out[1:] += self.sub[:, None] * v[:-1]
        out[:-1] += self.sup[:, None] * v[1:]
        return out

    def __add__(self, other: TriDiag) -> TriDiag:
        return TriDiag(self.sub + other.sub, self.diag + other.diag, self.sup + other.sup)

    def __sub__(self, other: TriDiag) -> TriDiag:
        return TriDiag(self.sub - other.sub, self.diag - other.diag, self.sup - other.sup)

    def __mul__(self, scalar: float) -> TriDiag:
        return TriDiag(self.sub * scalar, self.diag * scalar, self.sup * scalar)

    __rmul__ = __mul__

    def to_dense(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.sub, -1) + np.diag(self.sup, 1)

    def is_diagonally_dominant(self, strict: bool = True) -> bool:
        off = np.zeros(self.size)
        off[1:] += np.abs(self.sub)
        off[:-1] += np.abs(self.sup)
        d = np.abs(self.diag)
        return bool(np.all(d > off) if strict else np.all(d >= off))


@dataclass(frozen=True)
class CompactOperator:
    a: float
    b: float
    h: float
    M: int
    H: TriDiag = field(init=False, repr=False)
    A: TriDiag = field(init=False, repr=False)
    S: TriDiag = field(init=False, repr=False)

    def __post_init__(self):
        m = self.M - 1
        A = TriDiag.constant(m, 1.0, -2.0, 1.0)
        S = TriDiag.constant(m, -1.0, 0.0, 1.0)
        eye = TriDiag.constant(m, 0.0, 1.0, 0.0)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "S", S)
        object.__setattr__(self, "H", A * (1.0 / 12.0) + S * self.skew + eye)

    @property
    def skew(self) -> float:
        return self.h * self.b / (24.0 * self.a)

    @property
    def w_left(self) -> float:
        """Weight of the left boundary value in the first row of H."""
        return 1.0 / 12.0 - self.skew

    @property
    def w_right(self) -> float:
        return 1.0 / 12.0 + self.skew

    @property
    def diffusion(self) -> float:
        """Coefficient of ``A`` in the discrete spatial operator, ``a/h^2 + b^2/(12a)``."""
        return self.a / self.h**2 + self.b**2 / (12.0 * self.a)

    @property
    def advection(self) -> float:
        """Coefficient of ``S``, ``b/(2h)``."""
        return self.b / (2.0 * self.h)

    @cached_property
    def _spatial(self) -> TriDiag:
        return self.A * self.diffusion + self.S * self.advection

    def spatial_matrix(self) -> TriDiag:
        """``K = (a/h^2 + b^2/(12a)) A + (b/(2h)) S``."""
        return self._spatial

    def boundary_vector(self, left: float, right: float) -> np.ndarray:
        """Boundary contribution of H: ``[w_left * left, 0, ..., 0, w_right * right]``."""
        out = np.zeros(self.M - 1)
        out[0] += self.w_left * left
        out[-1] += self.w_right * right
        return out


def build_operator(a: float, b: float, h: float, M: int) -> CompactOperator:
    """Assemble ``H``, ``A`` and ``S`` for coefficients ``a > 0``, ``b`` and step ``h``.

    Raises :class:`AdmissibilityError` unless ``h < 2a/|b|``, which keeps the
    off-diagonals of H nonnegative and H strictly diagonally dominant.
    """
    if a <= 0.0:
        raise ValueError(f"diffusion coefficient a must be positive, got {a}")
    if h <= 0.0:
        raise ValueError("h must be positive")
    if M < 4:
        raise ValueError(f"need M >= 4, got {M}")
    if b != 0.0 and h >= 2.0 * a / abs(b):
        raise AdmissibilityError(
            f"h={h:.4g} violates h < 2a/|b| = {2.0 * a / abs(b):.4g}"
        )
    return CompactOperator(a, b, h, M)


def apply_H(op: CompactOperator, v, v_left: float = 0.0, v_right: float = 0.0) -> np.ndarray:
    """Apply the averaging operator to interior values ``v`` with the given boundary values."""
    v = np.asarray(v, dtype=float)
    if v.shape[0] != op.M - 1:
        raise ValueError(f"expected {op.M - 1} interior values, got {v.shape[0]}")
    return op.H @ v + op.boundary_vector(v_left, v_right)


@dataclass
class MatrixReport:
    a: float
    b: float
    M: int
    hth_min: float
    hth_max: float
    ha_max: float
    combo_max: float
    hth_eig: tuple[float, float]
    ha_eig_max: float
    combo_eig_max: float
    tol: float = 1e-10

    @property
    def hth_ok(self) -> bool:
        return self.hth_min >= 5.0 / 12.0 - self.tol and self.hth_max <= 1.0 + self.tol

    @property
    def ha_ok(self) -> bool:
        return self.ha_max <= self.tol

    @property
    def combo_ok(self) -> bool:
        return self.combo_max <= self.tol

    @property
    def eig_ok(self) -> bool:
        lo, hi = self.hth_eig
        return (
            lo >= 5.0 / 12.0 - self.tol
            and hi <= 1.0 + self.tol
            and self.ha_eig_max <= self.tol
            and self.combo_eig_max <= self.tol
        )

    @property
    def passed(self) -> bool:
        return self.hth_ok and self.ha_ok and self.combo_ok and self.eig_ok


def matrix_property_checks(
    op: CompactOperator, n_vectors: int = 1000, seed: int = 0, tol: float = 1e-10
) -> MatrixReport:
    """Rayleigh-quotient sweep of the H^T H bounds and the two negative semi-definite forms.

    Random unit vectors give the sampled ranges; the exact extreme eigenvalues
    are computed as well and ``passed`` requires both to respect the bounds.
    """
    H = op.H.to_dense()
    A = op.A.to_dense()
    S = op.S.to_dense()
    hth = H.T @ H
    ha = H.T @ A + A @ H
    combo = op.a / op.h**2 * ha + op.b / (2.0 * op.h) * (H.T @ S + S.T @ H)

    rng = np.random.default_rng(seed)
    W = rng.standard_normal((op.M - 1, n_vectors))
    W /= np.linalg.norm(W, axis=0)

    def quotients(mat):
        return np.einsum("ij,ij->j", W, mat @ W)

    q_hth = quotients(hth)
    eig_hth = np.linalg.eigvalsh(hth)
    return MatrixReport(
        a=op.a, b=op.b, M=op.M,
        hth_min=float(q_hth.min()), hth_max=float(q_hth.max()),
        ha_max=float(quotients(ha).max()), combo_max=float(quotients(combo).max()),
        hth_eig=(float(eig_hth[0]), float(eig_hth[-1])),
        ha_eig_max=float(np.linalg.eigvalsh(ha)[-1]),
        combo_eig_max=float(np.linalg.eigvalsh(combo)[-1]),
        tol=tol,
    )
