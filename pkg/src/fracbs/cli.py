"""Command-line front end.

Commands::

    fracbs solve            --problem example1 --alpha 0.5 --N 64 --M 128
    fracbs convergence      --problem example1 --alpha 0.9 --axis time --M 1000 --N 8 --doublings 4
    fracbs verify-kernels   --alpha 0.5 --meshes 100
    fracbs verify-soe       --alpha 0.5 --epsilon 1e-9
    fracbs verify-matrices  --a 0.5 --b 0.5 --M 64

Studies and solves write CSV (10 significant digits) to ``--output`` or
stdout; verify commands print a summary and exit nonzero on failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from . import analysis, problem as problems
from .mesh import SpatialMesh, graded_mesh
from .soe import SOECertificationError, build_soe, soe_max_error
from .spatial import build_operator, matrix_property_checks
from .stepper import solve

__all__ = ["RunConfig", "load_custom_problem", "main", "parse_config", "run"]

COMMANDS = ("solve", "convergence", "verify-kernels", "verify-soe", "verify-matrices")


@dataclass
class RunConfig:
    command: str
    problem: str = "example1"
    alpha: float = 0.5
    gamma: Optional[float] = None
    N: int = 64
    M: int = 128
    epsilon: float = 1e-12
    mode: str = "fast"
    doublings: int = 4
    axis: str = "time"
    reference: Optional[int] = None
    norm: str = "max"
    output: Optional[str] = None
    # verification parameters
    meshes: int = 100
    max_N: int = 64
    seed: int = 0
    delta_t: float = 1e-4
    T: float = 1.0
    a: float = 0.5
    b: float = 0.5
    M_list: list = field(default_factory=lambda: [8, 64, 256])
    vectors: int = 1000

    @property
    def grading(self) -> float:
        return 2.0 / self.alpha if self.gamma is None else self.gamma


def _fmt(v) -> str:
    return "" if v is None else f"{v:.9e}"


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fracbs",
        description="Fast compact scheme for the time-fractional Black-Scholes equation.",
    )
    sub = parser.add_subparsers(dest="command", metavar="{" + ",".join(COMMANDS) + "}")
    sub.required = True

    def common(p):
        p.add_argument("--problem", default="example1",
                       help="example1, example2 or a JSON file describing a custom problem")
        p.add_argument("--alpha", type=float, default=0.5)
        p.add_argument("--gamma", type=float, default=None, help="grading exponent (default 2/alpha)")
        p.add_argument("--N", type=int, default=64, help="time steps (base value for studies)")
        p.add_argument("--M", type=int, default=128, help="space intervals (base value for studies)")
        p.add_argument("--epsilon", type=float, default=1e-12, help="SOE tolerance")
        p.add_argument("--mode", choices=("fast", "direct"), default="fast")
        p.add_argument("--output", "-o", default=None, help="CSV path (default stdout)")

    common(sub.add_parser("solve", help="solve once and dump t,x,u"))
    p = sub.add_parser("convergence", help="temporal or spatial convergence study")
    common(p)
    p.add_argument("--axis", choices=("time", "space"), default="time")
    p.add_argument("--doublings", type=int, default=4)
    p.add_argument("--reference", type=int, default=None,
                   help="fine N (time) or M (space) for self-reference errors")
    p.add_argument("--norm", choices=("max", "final"), default="max",
                   help="max over levels or final level, when an exact solution exists")

    p = sub.add_parser("verify-kernels", help="A1/A2 and complementary kernel sweep")
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--epsilon", type=float, default=1e-12)
    p.add_argument("--meshes", type=int, default=100)
    p.add_argument("--max-N", dest="max_N", type=int, default=64)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("verify-soe", help="certify an SOE approximation")
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--epsilon", type=float, default=1e-12)
    p.add_argument("--delta-t", dest="delta_t", type=float, default=1e-4)
    p.add_argument("--T", type=float, default=1.0)

    p = sub.add_parser("verify-matrices", help="Rayleigh-quotient sweep of the compact operators")
    p.add_argument("--a", type=float, default=0.5)
    p.add_argument("--b", type=float, default=0.5)
    p.add_argument("--M", dest="M_list", type=int, nargs="+", default=[8, 64, 256])
    p.add_argument("--vectors", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    return parser


def parse_config(argv: Optional[Sequence[str]] = None) -> RunConfig:
    """Parse and validate arguments; invalid values exit with a usage error."""
    parser = _build_parser()
    ns = parser.parse_args(argv)
    cfg = RunConfig(**vars(ns))

    def bad(name, msg):
        parser.error(f"{name}: {msg}")

    if not 0.0 < cfg.alpha < 1.0:
        bad("--alpha", f"must lie in (0, 1), got {cfg.alpha}")
    if cfg.gamma is not None and cfg.gamma < 1.0:
        bad("--gamma", f"must be >= 1, got {cfg.gamma}")
    if cfg.N < 1:
        bad("--N", f"must be positive, got {cfg.N}")
    if cfg.command in ("solve", "convergence") and cfg.M < 4:
        bad("--M", f"must be at least 4, got {cfg.M}")
    if not 0.0 < cfg.epsilon < 1.0:
        bad("--epsilon", f"must lie in (0, 1), got {cfg.epsilon}")
    if cfg.doublings < 0:
        bad("--doublings", "must be nonnegative")
    if cfg.command == "verify-kernels" and (cfg.meshes < 1 or cfg.max_N < 1):
        bad("--meshes/--max-N", "must be positive")
    if cfg.command == "verify-soe" and not 0.0 < cfg.delta_t < cfg.T:
        bad("--delta-t", f"need 0 < delta_t < T, got {cfg.delta_t}")
    if cfg.command == "verify-matrices":
        if cfg.a <= 0.0:
            bad("--a", "must be positive")
        if any(m < 4 for m in cfg.M_list):
            bad("--M", "every value must be at least 4")
    return cfg


def load_custom_problem(path: str, alpha: float) -> problems.HomogenizedSpec:
    """Custom constant-coefficient problem from JSON.

    Keys: ``a``, ``b``, ``c``, ``x_l``, ``x_r``, ``T``; ``initial`` as a list of
    ``[coef, power]`` terms in ``x``; ``left`` and ``right`` boundary data as
    ``[coef, power]`` terms in ``t``; optional ``source`` as
    ``[coef, x_power, t_power]`` terms added to the equation.  ``alpha`` in the
    file overrides the command-line value.
    """
    with open(path) as fh:
        data = json.load(fh)
    alpha = float(data.get("alpha", alpha))
    try:
        initial = problems.PowerSeries(tuple(tuple(map(float, t)) for t in data["initial"]))
        left = problems.PowerSeries(tuple(tuple(map(float, t)) for t in data.get("left", [])))
        right = problems.PowerSeries(tuple(tuple(map(float, t)) for t in data.get("right", [])))
        spec = problems.ConstantCoeffSpec(
            alpha=alpha, a=float(data["a"]), b=float(data["b"]), c=float(data["c"]),
            x_l=float(data.get("x_l", 0.0)), x_r=float(data.get("x_r", 1.0)),
            T=float(data.get("T", 1.0)), initial=initial, p=left, q=right,
        )
    except KeyError as err:
        raise ValueError(f"custom problem is missing key {err}") from None
    hom = problems.homogenize(spec, left.caputo(alpha), right.caputo(alpha), name=path)
    extra = [tuple(map(float, t)) for t in data.get("source", [])]
    if not extra:
        return hom

    def source(x, t, base=hom.source):
        x = np.asarray(x, dtype=float)
        t = np.asarray(t, dtype=float)
        return base(x, t) + sum(c * x**px * t**pt for c, px, pt in extra)

    return replace(hom, source=source)


def _problem(cfg: RunConfig) -> problems.HomogenizedSpec:
    if cfg.problem == "example1":
        return problems.example1(cfg.alpha)
    if cfg.problem == "example2":
        return problems.example2(cfg.alpha)
    return load_custom_problem(cfg.problem, cfg.alpha)


def _write_csv(cfg: RunConfig, header, rows) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    if cfg.output:
        with open(cfg.output, "w") as fh:
            fh.write(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())


def _run_solve(cfg: RunConfig) -> int:
    prob = _problem(cfg)
    grid = solve(
        prob, graded_mesh(prob.T, cfg.N, cfg.grading, prob.alpha),
        SpatialMesh(prob.x_l, prob.x_r, cfg.M), cfg.mode, cfg.epsilon,
    )
    u = grid.original()
    x = grid.smesh.x
    rows = [
        (_fmt(t), _fmt(xi), _fmt(ui))
        for t, line in zip(grid.tmesh.t, u)
        for xi, ui in zip(x, line)
    ]
    _write_csv(cfg, ("t", "x", "u"), rows)
    return 0


def _run_convergence(cfg: RunConfig) -> int:
    prob = _problem(cfg)
    reference = cfg.reference
    if prob.exact is None and reference is None:
        reference = 1024
    study = analysis.convergence_study(
        prob, cfg.N, cfg.M, cfg.doublings, cfg.axis, cfg.grading,
        mode=cfg.mode, epsilon=cfg.epsilon, reference=reference, norm=cfg.norm,
    )
    head = "N" if cfg.axis == "time" else "M"
    _write_csv(cfg, (head, "error", "rate"), [(r.size, _fmt(r.error), _fmt(r.rate)) for r in study])
    return 0


def _run_verify_kernels(cfg: RunConfig) -> int:
    rng = np.random.default_rng(cfg.seed)
    meshes = [
        analysis.random_m1_mesh(int(rng.integers(1, cfg.max_N + 1)), cfg.alpha, rng)
        for _ in range(cfg.meshes)
    ]
    report = analysis.verify_kernel_properties(cfg.alpha, meshes, cfg.epsilon)
    worst = min(m.worst_a1 for m in report.meshes)
    print(f"alpha={cfg.alpha} epsilon={cfg.epsilon:.1e} meshes={len(meshes)} N_q={report.n_q}")
    print(f"smallest A1 ratio {worst:.4f} (needs >= 1)")
    for i, m in enumerate(report.meshes):
        for msg in m.failures:
            print(f"mesh {i} (N={m.N}): {msg}")
    print("PASS" if report.passed else f"FAIL ({report.n_failed} meshes)")
    return 0 if report.passed else 1


def _run_verify_soe(cfg: RunConfig) -> int:
    try:
        soe = build_soe(cfg.alpha, cfg.epsilon, cfg.delta_t, cfg.T)
    except SOECertificationError as err:
        print(f"FAIL: {err}")
        return 1
    err = soe_max_error(soe)
    ok = err <= cfg.epsilon
    print(f"alpha={cfg.alpha} epsilon={cfg.epsilon:.1e} delta_t={cfg.delta_t:.1e} T={cfg.T}")
    print(f"N_q={soe.n_q} max sampled error={err:.3e}")
    print("PASS" if ok else "FAIL")
    return 0 if ok else 1


def _run_verify_matrices(cfg: RunConfig) -> int:
    ok = True
    for M in cfg.M_list:
        op = build_operator(cfg.a, cfg.b, 1.0 / M, M)
        rep = matrix_property_checks(op, cfg.vectors, cfg.seed)
        lo, hi = rep.hth_eig
        print(
            f"a={cfg.a} b={cfg.b} M={M}: H^T H in [{lo:.6f}, {hi:.6f}], "
            f"max HA form {rep.ha_max:.3e}, max combined form {rep.combo_max:.3e} "
            f"-> {'pass' if rep.passed else 'FAIL'}"
        )
        ok &= rep.passed
    print("PASS" if ok else "FAIL")
    return 0 if ok else 1


_RUNNERS = {
    "solve": _run_solve,
    "convergence": _run_convergence,
    "verify-kernels": _run_verify_kernels,
    "verify-soe": _run_verify_soe,
    "verify-matrices": _run_verify_matrices,
}


def run(cfg: RunConfig) -> int:
    """Execute a parsed configuration and return the exit status."""
    try:
        return _RUNNERS[cfg.command](cfg)
    except (ValueError, ArithmeticError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


def main(argv: Optional[Sequence[str]] = None) -> int:
    return run(parse_config(argv))


if __name__ == "__main__":
    sys.exit(main())
