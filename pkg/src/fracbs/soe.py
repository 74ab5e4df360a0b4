"""Sum-of-exponentials compression of the power kernel t^{-alpha}/Gamma(1-alpha).

The kernel has the Laplace representation

    t^{-a} / Gamma(1-a) = sin(pi a)/pi * int_0^inf exp(-s t) s^{a-1} ds,

which is discretised with a Gauss-Jacobi rule on [0, L0] (absorbing the
s^{a-1} singularity) followed by Gauss-Legendre panels on the dyadic
intervals [2^j L0, 2^{j+1} L0].  Each panel gets the smallest order that
matches a much higher-order rule on the same panel over [delta_t, T],
and the finished approximation is certified on a dense geometric sweep.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import special

__all__ = [
    "SOEApproximation",
    "SOECertificationError",
    "build_soe",
    "eval_soe",
    "kernel",
    "soe_max_error",
]

N_CERT_SAMPLES = 10_000
# rounding allowance, in units of the kernel value, when epsilon sits below
# what double precision can resolve (tiny delta_t makes the kernel huge)
ROUNDING_SLACK = 64.0 * np.finfo(float).eps
_MAX_PANEL_ORDER = 96
_PANEL_SAMPLES = 400
_REFERENCE_ORDER = 160
_JACOBI_SPLIT = 4


class SOECertificationError(RuntimeError):
    """Raised when a constructed SOE fails its dense-sample error check."""


def kernel(alpha: float, t):
    """Exact power kernel ``t**(-alpha) / Gamma(1 - alpha)``."""
    t = np.asarray(t, dtype=float)
    return t ** (-alpha) / special.gamma(1.0 - alpha)


@dataclass(frozen=True)
class SOEApproximation:
    alpha: float
    epsilon: float
    delta_t: float
    horizon: float
    nodes: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        self.nodes.setflags(write=False)
        self.weights.setflags(write=False)

    @property
    def n_q(self) -> int:
        return len(self.nodes)

    def __call__(self, t):
        return eval_soe(self, t)

    def truncated(self, count: int) -> SOEApproximation:
        """Keep only the first ``count`` nodes (diagnostics only)."""
        return SOEApproximation(
            self.alpha, self.epsilon, self.delta_t, self.horizon,
            self.nodes[:count].copy(), self.weights[:count].copy(),
        )


def _sum_exp(nodes, weights, t):
    t = np.asarray(t, dtype=float)
    return np.exp(-np.multiply.outer(t, nodes)) @ weights


def eval_soe(soe: SOEApproximation, t, *, check_domain: bool = True):
    """Evaluate ``sum_l w_l exp(-s_l t)``.

    Raises ``ValueError`` for ``t < soe.delta_t`` unless ``check_domain`` is
    off; the approximation carries no guarantee there.
    """
    t_arr = np.asarray(t, dtype=float)
    # small relative slack: callers pass delta_t recomputed from mesh arithmetic
    if check_domain and np.any(t_arr < soe.delta_t * (1.0 - 1e-12)):
        raise ValueError(
            f"t={np.min(t_arr):.3e} below the certified cut-off delta_t={soe.delta_t:.3e}"
        )
    return _sum_exp(soe.nodes, soe.weights, t_arr)


def soe_max_error(soe: SOEApproximation, n_samples: int = N_CERT_SAMPLES) -> float:
    """Max of |kernel - SOE| over geometrically spaced points of [delta_t, T]."""
    if n_samples < 2:
        raise ValueError("n_samples must be at least 2")
    t = np.geomspace(soe.delta_t, soe.horizon, n_samples)
    err = np.abs(kernel(soe.alpha, t) - _sum_exp(soe.nodes, soe.weights, t))
    return float(np.max(err))


def _certify(soe):
    t = np.geomspace(soe.delta_t, soe.horizon, N_CERT_SAMPLES)
    exact = kernel(soe.alpha, t)
    err = np.abs(exact - _sum_exp(soe.nodes, soe.weights, t))
    return bool(np.all(err <= soe.epsilon + ROUNDING_SLACK * exact))


def _jacobi_panel(alpha, length, order):
    # weight (1+x)^{alpha-1} on [-1, 1], mapped to s^{alpha-1} on [0, length]
    x, w = special.roots_jacobi(order, 0.0, alpha - 1.0)
    s = 0.5 * length * (1.0 + x)
    w = w * (0.5 * length) ** alpha
    return s, w


@lru_cache(maxsize=None)
def _gauss_legendre(order):
    x, w = np.polynomial.legendre.leggauss(order)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def _legendre_panel(alpha, a, b, order):
    x, w = _gauss_legendre(order)
    s = 0.5 * (b - a) * x + 0.5 * (b + a)
    w = 0.5 * (b - a) * w * s ** (alpha - 1.0)
    return s, w


def _fit_panel(alpha, rule, t, tol, exact=None):
    """Lowest-order rule within ``tol`` of a reference on the sample times ``t``.

    The default reference is the same panel rule at order ``_REFERENCE_ORDER``;
    closed-form incomplete-gamma differences are not accurate enough for
    absolute tolerances near 1e-13 on the outer panels.
    """
    scale = math.sin(math.pi * alpha) / math.pi
    if exact is None:
        s, w = rule(_REFERENCE_ORDER)
        exact = _sum_exp(s, w * scale, t)
    floor = 4.0 * np.finfo(float).eps * np.max(np.abs(exact))
    for order in range(1, _MAX_PANEL_ORDER + 1):
        s, w = rule(order)
        w = w * scale
        err = np.max(np.abs(_sum_exp(s, w, t) - exact))
        if err <= max(tol, floor):
            return s, w
    raise SOECertificationError("panel quadrature did not converge")


def _singular_panel_exact(alpha, length, t):
    """``sin(pi a)/pi * int_0^length exp(-s t) s^(a-1) ds`` via the lower incomplete gamma."""
    return (
        math.sin(math.pi * alpha) / math.pi
        * special.gamma(alpha) * special.gammainc(alpha, length * t) * t ** (-alpha)
    )


def _tail_cutoff(alpha, epsilon, delta_t, start):
    """Smallest dyadic multiple of ``start`` whose neglected tail is below epsilon."""
    cut = start
    while True:
        tail = delta_t ** (-alpha) / special.gamma(1.0 - alpha) * special.gammaincc(
            alpha, cut * delta_t
        )
        if tail <= epsilon:
            return cut
        cut *= 2.0


def _construct(alpha, epsilon, delta_t, horizon, panel_tol):
    t = np.geomspace(delta_t, horizon, _PANEL_SAMPLES)
    first = 2.0 ** math.floor(math.log2(1.0 / horizon))
    cut = _tail_cutoff(alpha, 0.25 * epsilon, delta_t, 2.0 * first)

    # high-order Gauss-Jacobi rules lose digits for strongly singular weights,
    # so the singular panel is kept short enough for a low order to suffice
    a0 = a = first / 2.0**_JACOBI_SPLIT
    rules = [lambda p: _jacobi_panel(alpha, a0, p)]
    while a < cut:
        rules.append(lambda p, a=a: _legendre_panel(alpha, a, 2.0 * a, p))
        a *= 2.0

    nodes, weights = [], []
    for i, rule in enumerate(rules):
        # the short singular panel has an accurate incomplete-gamma reference
        exact = _singular_panel_exact(alpha, a0, t) if i == 0 else None
        s, w = _fit_panel(alpha, rule, t, panel_tol, exact)
        nodes.append(s)
        weights.append(w)
    nodes = np.concatenate(nodes)
    weights = np.concatenate(weights)
    order = np.argsort(nodes)
    return nodes[order], weights[order]


def build_soe(alpha: float, epsilon: float, delta_t: float, horizon: float) -> SOEApproximation:
    """Build an SOE approximation of the kernel certified to ``epsilon`` on [delta_t, horizon].

    Parameters
    ----------
    alpha : float
        Fractional order in (0, 1).
    epsilon : float
        Target absolute uniform error, in (0, 1).
    delta_t : float
        Cut-off time; the approximation is only valid for ``t >= delta_t``.
    horizon : float
        Final time ``T > delta_t``.

    Raises
    ------
    ValueError
        Parameters out of range.
    SOECertificationError
        The dense sweep still exceeds ``epsilon`` after refinement.

    Notes
    -----
    Certification accepts ``|error(t)| <= epsilon + ROUNDING_SLACK * kernel(t)``.
    For the usual cut-offs the second term is far below ``epsilon``; it only
    matters when ``delta_t`` is so small that ``epsilon`` is beyond double
    precision relative to ``kernel(delta_t)``.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    if not 0.0 < delta_t < horizon:
        raise ValueError(f"need 0 < delta_t < horizon, got {delta_t}, {horizon}")

    panel_tol = epsilon / 8.0
    for _ in range(6):
        nodes, weights = _construct(alpha, epsilon, delta_t, horizon, panel_tol)
        soe = SOEApproximation(alpha, epsilon, delta_t, horizon, nodes, weights)
        if _certify(soe):
            return soe
        panel_tol /= 4.0
    raise SOECertificationError(
        f"SOE error {soe_max_error(soe):.3e} exceeds epsilon={epsilon:.1e} "
        f"(alpha={alpha}, delta_t={delta_t:.3e})"
    )
