"""Problem formulations: barrier option, constant-coefficient PDE, homogenised PDE.

``BlackScholesSpec`` is the option problem in price ``S`` and current time
``zeta``.  With ``x = ln S`` and ``t = T - zeta`` it becomes a constant
coefficient Caputo problem (``ConstantCoeffSpec``) with Dirichlet data
``p(t), q(t)``; subtracting the linear lift

    z(x, t) = (q(t) - p(t)) (x - x_l) / (x_r - x_l) + p(t)

gives the zero-boundary problem (``HomogenizedSpec``) the solver works on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np
from scipy import special

__all__ = [
    "BlackScholesSpec",
    "ConstantCoeffSpec",
    "HomogenizedSpec",
    "PowerSeries",
    "caputo_of_power",
    "example1",
    "example2",
    "example2_black_scholes",
    "homogenize",
    "to_constant_coeff",
    "zero_problem",
]

Fn1 = Callable[[np.ndarray], np.ndarray]
Fn2 = Callable[[np.ndarray, np.ndarray], np.ndarray]


def caputo_of_power(mu: float, alpha: float) -> Fn1:
    """Caputo derivative of ``t**mu``: ``Gamma(mu+1)/Gamma(mu+1-alpha) t**(mu-alpha)``."""
    if mu < 0:
        raise ValueError(f"power must be nonnegative, got {mu}")
    if mu == 0:
        return lambda t: np.zeros_like(np.asarray(t, dtype=float))
    coef = special.gamma(mu + 1.0) / special.gamma(mu + 1.0 - alpha)
    return lambda t: coef * np.asarray(t, dtype=float) ** (mu - alpha)


@dataclass(frozen=True)
class PowerSeries:
    """``sum_j coef_j * t**power_j`` with an analytic Caputo derivative."""

    terms: tuple[tuple[float, float], ...]

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        for coef, power in self.terms:
            out = out + coef * (t**power if power else 1.0)
        return out

    def caputo(self, alpha: float) -> Fn1:
        parts = [(coef, caputo_of_power(power, alpha)) for coef, power in self.terms]
        return lambda t: sum(coef * g(t) for coef, g in parts) + 0.0 * np.asarray(t, dtype=float)

    def is_constant(self) -> bool:
        return all(power == 0 for _, power in self.terms)


@dataclass(frozen=True)
class BlackScholesSpec:
    alpha: float
    S_l: float
    S_r: float
    T: float
    r: float
    D: float
    varrho: float
    payoff: Fn1
    rebate_left: Fn1
    rebate_right: Fn1

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie in (0, 1)")
        if not 0.0 < self.S_l < self.S_r:
            raise ValueError("need 0 < S_l < S_r")
        if self.varrho <= 0.0:
            raise ValueError("volatility must be positive")


@dataclass(frozen=True)
class ConstantCoeffSpec:
    """``D_t^alpha w = a w_xx + b w_x - c w`` on ``(x_l, x_r)``, ``w = p, q`` at the ends."""

    alpha: float
    a: float
    b: float
    c: float
    x_l: float
    x_r: float
    T: float
    initial: Fn1
    p: Fn1
    q: Fn1

    def __post_init__(self):
        if self.a <= 0.0:
            raise ValueError("a must be positive")


@dataclass(frozen=True)
class HomogenizedSpec:
    """``D_t^alpha u = a u_xx + b u_x - c u + f`` with ``u = 0`` on the boundary."""

    alpha: float
    a: float
    b: float
    c: float
    x_l: float
    x_r: float
    T: float
    phi: Fn1
    source: Fn2
    exact: Optional[Fn2] = None
    lift: Optional[Fn2] = None
    name: str = "custom"

    def __post_init__(self):
        if self.a <= 0.0:
            raise ValueError("a must be positive")
        ends = np.abs(np.asarray(self.phi(np.array([self.x_l, self.x_r])), dtype=float))
        if np.any(ends > 1e-12):
            raise ValueError(f"initial data must vanish at both ends, got {ends}")

    def reconstruct(self, x, t, u):
        """Undo the lift: ``w = u + z``."""
        if self.lift is None:
            return u
        return u + self.lift(x, t)


def to_constant_coeff(spec: BlackScholesSpec) -> ConstantCoeffSpec:
    a = 0.5 * spec.varrho**2
    T = spec.T
    return ConstantCoeffSpec(
        alpha=spec.alpha,
        a=a,
        b=spec.r - a - spec.D,
        c=spec.r,
        x_l=math.log(spec.S_l),
        x_r=math.log(spec.S_r),
        T=T,
        initial=lambda x: spec.payoff(np.exp(x)),
        p=lambda t: spec.rebate_left(T - np.asarray(t, dtype=float)),
        q=lambda t: spec.rebate_right(T - np.asarray(t, dtype=float)),
    )


def homogenize(
    spec: ConstantCoeffSpec,
    caputo_p: Optional[Fn1] = None,
    caputo_q: Optional[Fn1] = None,
    *,
    constant_boundaries: bool = False,
    name: str = "custom",
) -> HomogenizedSpec:
    """Subtract the linear lift and build the source ``f`` and initial data ``phi``.

    Caputo derivatives of the boundary data must be supplied analytically
    unless ``constant_boundaries`` is set (their derivative is then zero).
    """
    if caputo_p is None or caputo_q is None:
        if not constant_boundaries:
            raise ValueError(
                "boundary data need analytic Caputo derivatives "
                "(pass caputo_p/caputo_q or constant_boundaries=True)"
            )
        caputo_p = caputo_p or (lambda t: 0.0 * np.asarray(t, dtype=float))
        caputo_q = caputo_q or (lambda t: 0.0 * np.asarray(t, dtype=float))

    a, b, c = spec.a, spec.b, spec.c
    x_l, width = spec.x_l, spec.x_r - spec.x_l
    p, q, r0 = spec.p, spec.q, spec.initial

    def lift(x, t):
        return (q(t) - p(t)) * (x - x_l) / width + p(t)

    def source(x, t):
        dz = (caputo_q(t) - caputo_p(t)) * (x - x_l) / width + caputo_p(t)
        return b * (q(t) - p(t)) / width - c * lift(x, t) - dz

    def phi(x):
        x = np.asarray(x, dtype=float)
        return r0(x) - lift(x, 0.0)

    return HomogenizedSpec(
        alpha=spec.alpha, a=a, b=b, c=c, x_l=spec.x_l, x_r=spec.x_r, T=spec.T,
        phi=phi, source=source, lift=lift, name=name,
    )


def example1(alpha: float, a: float = 0.5, b: float = -0.45, c: float = 0.05) -> HomogenizedSpec:
    """Manufactured problem with exact solution ``x^3 (1-x)^3 (t^alpha + t + 1)`` on (0, 1)."""

    def shape(x):
        return x**3 * (1.0 - x) ** 3

    def shape_xx(x):
        return 6.0 * x * (1.0 - x) ** 3 - 18.0 * x**2 * (1.0 - x) ** 2 + 6.0 * x**3 * (1.0 - x)

    def shape_x(x):
        return 3.0 * x**2 * (1.0 - x) ** 3 - 3.0 * x**3 * (1.0 - x) ** 2

    g1 = special.gamma(2.0 - alpha)
    ga = special.gamma(alpha + 1.0)

    def exact(x, t):
        return shape(x) * (t**alpha + t + 1.0)

    def source(x, t):
        temporal = t ** (1.0 - alpha) / g1 + ga
        spatial = a * shape_xx(x) + b * shape_x(x) - c * shape(x)
        return shape(x) * temporal - spatial * (t**alpha + t + 1.0)

    return HomogenizedSpec(
        alpha=alpha, a=a, b=b, c=c, x_l=0.0, x_r=1.0, T=1.0,
        phi=shape, source=source, exact=exact, name="example1",
    )


def example2_black_scholes(alpha: float) -> BlackScholesSpec:
    """Double-barrier problem with cubic payoff and quadratic rebates, S in (1, e)."""
    T = 1.0

    def payoff(S):
        x = np.log(S)
        return x**3 + x**2 + 1.0

    return BlackScholesSpec(
        alpha=alpha, S_l=1.0, S_r=math.e, T=T, r=1.0, D=0.0, varrho=1.0,
        payoff=payoff,
        rebate_left=lambda z: (T - np.asarray(z, dtype=float) + 1.0) ** 2,
        rebate_right=lambda z: 3.0 * (T - np.asarray(z, dtype=float) + 1.0) ** 2,
    )


def example2(alpha: float, c: float = 0.05, *, closed_form: bool = True) -> HomogenizedSpec:
    """Homogenised barrier-option problem with ``a = b = 0.5``.

    The reaction coefficient defaults to ``c = 0.05`` (pass ``c=1.0`` for the
    value implied by ``r = 1``).  With ``closed_form`` the source is

        f = (2b - c - 2cx)(t+1)^2 - (4x+2)(t^{1-a}/G(2-a) + t^{2-a}/G(3-a)),

    otherwise it is assembled by :func:`homogenize`; the two agree.
    """
    cc = replace(to_constant_coeff(example2_black_scholes(alpha)), c=c)
    p_series = PowerSeries(((1.0, 2), (2.0, 1), (1.0, 0)))
    spec = homogenize(
        cc, p_series.caputo(alpha), (lambda t: 3.0 * p_series.caputo(alpha)(t)), name="example2"
    )
    if not closed_form:
        return spec
    a, b = cc.a, cc.b
    g2, g3 = special.gamma(2.0 - alpha), special.gamma(3.0 - alpha)

    def source(x, t):
        return (2 * b - c - 2 * c * x) * (t + 1.0) ** 2 - (4.0 * x + 2.0) * (
            t ** (1.0 - alpha) / g2 + t ** (2.0 - alpha) / g3
        )

    return replace(spec, source=source, phi=lambda x: x**3 + x**2 - 2.0 * x)


def zero_problem(alpha: float, a: float = 0.5, b: float = 0.5, c: float = 0.05,
                 phi: Optional[Fn1] = None) -> HomogenizedSpec:
    """Source-free problem; ``phi`` defaults to zero."""
    return HomogenizedSpec(
        alpha=alpha, a=a, b=b, c=c, x_l=0.0, x_r=1.0, T=1.0,
        phi=phi if phi is not None else (lambda x: 0.0 * np.asarray(x, dtype=float)),
        source=lambda x, t: 0.0 * np.asarray(x, dtype=float) * np.asarray(t, dtype=float),
        exact=None, name="zero",
    )
