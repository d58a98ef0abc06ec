"""Command-line front end.  Every command writes CSV with ``# key=value`` headers."""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path
from typing import Optional, TextIO

import numpy as np

from . import harness, models, spectral
from .errors import DomainError, NumericalError, SubstepError
from .linear import LinearModel
from .tableau import GAMMA2_RULES, build_tableau

EXIT_OK, EXIT_DOMAIN, EXIT_NUMERICAL, EXIT_VERIFY = 0, 1, 2, 3


def fmt(x) -> str:
    return format(float(x), ".17g")


class _UsageError(DomainError):
    pass


class _Parser(argparse.ArgumentParser):
    def __init__(self, *args, **kwargs):
        kwargs.setdefault("allow_abbrev", False)
        super().__init__(*args, **kwargs)

    def error(self, message):
        raise _UsageError(message)


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _header(out: TextIO, **items):
    for key, value in items.items():
        if isinstance(value, float):
            value = fmt(value)
        elif isinstance(value, (list, tuple)):
            value = ",".join(fmt(v) if isinstance(v, float) else str(v) for v in value)
        out.write(f"# {key}={value}\n")


def _tableau(args):
    return build_tableau(args.scheme, args.rho_inf, gamma2_rule=getattr(args, "gamma2_rule", "sqrt3"))


# ---------------------------------------------------------------- commands

def cmd_tableau(args, out):
    t = _tableau(args)
    _header(out, command="tableau", scheme=t.s, name=t.name, rho_inf=t.rho_inf,
            gamma2_rule=args.gamma2_rule, gamma1=t.gamma1)
    out.write("i,gamma," + ",".join(f"alpha_{j}" for j in range(t.s + 1)) + "\n")
    for i in range(t.s + 1):
        out.write(",".join([str(i), fmt(t.gamma[i])] + [fmt(a) for a in t.alpha[i]]) + "\n")
    return EXIT_OK


def cmd_spectral(args, out):
    if not (0 < args.omega_min <= args.omega_max):
        raise DomainError("need 0 < omega-min <= omega-max")
    if args.points < 1:
        raise DomainError("points must be >= 1")
    t = _tableau(args)
    if args.log:
        grid = np.logspace(math.log10(args.omega_min), math.log10(args.omega_max), args.points)
    else:
        grid = np.linspace(args.omega_min, args.omega_max, args.points)
    _header(out, command="spectral", scheme=t.s, rho_inf=t.rho_inf, gamma1=t.gamma1, xi=args.xi,
            omega_min=args.omega_min, omega_max=args.omega_max, points=args.points, log=args.log)
    out.write("Omega,A1,A2,rho,amplitude_decay_pct,period_error\n")
    for smp in spectral.sweep(t, grid, args.xi):
        out.write(",".join(fmt(v) for v in (smp.Omega, smp.A1, smp.A2, smp.rho,
                                            smp.amplitude_decay, smp.period_error)) + "\n")
    return EXIT_OK


def cmd_stability(args, out):
    t = _tableau(args)
    grid = spectral.default_omega_grid(args.points)
    scan = spectral.stability_scan(t, args.xi, grid, args.tol)
    _header(out, command="stability", scheme=t.s, rho_inf=t.rho_inf, gamma1=t.gamma1,
            xi=[float(x) for x in args.xi], points=args.points, tol=args.tol)
    out.write("stable,max_rho,worst_Omega,worst_xi,violations\n")
    out.write(f"{str(scan.stable).lower()},{fmt(scan.max_rho)},{fmt(scan.worst_Omega)},"
              f"{fmt(scan.worst_xi)},{len(scan.violations)}\n")
    return EXIT_OK


def cmd_converge(args, out):
    builtin = models.get_builtin(args.model)
    horizon = args.horizon
    if horizon is None:
        horizon = models.SDOF_HORIZON if args.model == "sdof48" else 5.0
    reference = None
    if builtin.exact is None:
        finest = min(args.dts)
        reference = harness.reference_trajectory(builtin, args.dt_ref, horizon, finest)
    study = harness.convergence_study(builtin, args.scheme, args.rho_inf, args.dts, horizon, reference)
    _header(out, command="converge", model=builtin.name, scheme=args.scheme, rho_inf=args.rho_inf,
            horizon=horizon, dts=[float(d) for d in study.dts],
            reference="exact" if reference is None else f"trapezoidal dt={fmt(args.dt_ref)}")
    out.write("dt,error_U,error_V,error_A\n")
    for r in study.reports:
        out.write(",".join(fmt(v) for v in (r.dt, r.errors["U"], r.errors["V"], r.errors["A"])) + "\n")
    for q in harness.QUANTITIES:
        out.write(f"# order_{q}={fmt(study.orders[q])}\n")
    for dt, q in study.excluded:
        out.write(f"# excluded={fmt(dt)}:{q}\n")
    return EXIT_OK


_LOAD_KINDS = ("zero", "sin", "exp")
_FILE_KEYS = {"M", "C", "K", "load", "U0", "V0", "t0"}


def load_model_file(path: str) -> models.BuiltinModel:
    """Read a linear model from JSON; see the README for the format."""
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise DomainError(f"cannot read model file {path!r}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise DomainError(f"model file {path!r} is not valid JSON: {exc.msg} at line {exc.lineno}") from None
    if not isinstance(data, dict):
        raise DomainError("model file must hold a JSON object")
    unknown = set(data) - _FILE_KEYS
    if unknown:
        raise DomainError(f"unknown keys in model file: {', '.join(sorted(unknown))}")
    for key in ("M", "K"):
        if key not in data:
            raise DomainError(f"model file is missing {key!r}")
    M = np.array(data["M"], dtype=float)
    d = M.shape[0] if M.ndim == 2 else 0
    C = np.array(data.get("C", np.zeros((d, d))), dtype=float)
    K = np.array(data["K"], dtype=float)
    load_spec = data.get("load", {"kind": "zero"})
    if not isinstance(load_spec, dict):
        raise DomainError("load must be a JSON object with a 'kind' field")
    kind = load_spec.get("kind")
    if kind not in _LOAD_KINDS:
        raise DomainError(f"load kind must be one of {', '.join(_LOAD_KINDS)}, got {kind!r}")
    amp = np.array(load_spec.get("amplitude", np.zeros(d)), dtype=float).reshape(-1)
    if kind != "zero" and amp.shape != (d,):
        raise DomainError(f"load amplitude must have {d} entries")
    if kind == "zero":
        load = lambda t: np.zeros(d)  # noqa: E731
    elif kind == "sin":
        a = float(load_spec.get("frequency", 1.0))
        load = lambda t: amp * math.sin(a * t)  # noqa: E731
    else:
        load = lambda t: amp * math.exp(t)  # noqa: E731
    model = LinearModel(M=M, C=C, K=K, load=load)
    U0 = np.array(data.get("U0", np.zeros(d)), dtype=float)
    V0 = np.array(data.get("V0", np.zeros(d)), dtype=float)
    return models.BuiltinModel(name=Path(path).name, kind="linear", model=model,
                               U0=U0, V0=V0, t0=float(data.get("t0", 0.0)))


def _resolve_model(name: str) -> models.BuiltinModel:
    if name in ("sdof48", "modal2", "pendulum") or name.startswith("chain:"):
        return models.get_builtin(name)
    if Path(name).exists():
        return load_model_file(name)
    return models.get_builtin(name)  # raises with the list of builtins


def _write_trajectory(out, traj):
    d = traj.U.shape[1]
    cols = ["t"] + [f"{q}_{i}" for q in "UVA" for i in range(d)]
    out.write(",".join(cols) + "\n")
    for k in range(len(traj)):
        row = [traj.t[k], *traj.U[k], *traj.V[k], *traj.A[k]]
        out.write(",".join(fmt(v) for v in row) + "\n")


def cmd_simulate(args, out):
    builtin = _resolve_model(args.model)
    t = _tableau(args)
    t_end = args.t_end
    traj = harness.run(builtin, t, t_end, args.dt, stride=args.stride)
    target = open(args.out, "w", newline="") if args.out else out
    try:
        _header(target, command="simulate", model=builtin.name, kind=builtin.kind, scheme=t.s,
                rho_inf=t.rho_inf, gamma1=t.gamma1, dt=args.dt, t0=builtin.t0, t_end=t_end,
                stride=args.stride)
        _write_trajectory(target, traj)
    finally:
        if args.out:
            target.close()
    return EXIT_OK


def cmd_verify(args, out):
    from . import verification

    numbers = args.criteria or None
    failed = 0
    _header(out, command="verify", criteria=numbers or "all")
    for n in numbers or [n for n, _, _ in verification.CRITERIA]:
        try:
            res = verification.run_criterion(n)
        except KeyError:
            raise DomainError(f"unknown criterion {n}; valid numbers are 1-10") from None
        out.write(res.line() + "\n")
        out.flush()
        failed += not res.passed
    out.write(f"# failed={failed}\n")
    return EXIT_VERIFY if failed else EXIT_OK


# ---------------------------------------------------------------- parser

def _add_scheme(p):
    p.add_argument("--scheme", type=int, required=True, help="number of sub-steps s (1-6)")
    p.add_argument("--rho-inf", type=float, default=None,
                   help="high-frequency spectral radius; required for s >= 2")
    p.add_argument("--gamma2-rule", choices=GAMMA2_RULES, default="sqrt3",
                   help="second splitting ratio of the three-sub-step scheme")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="substep", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("tableau", help="print splitting ratios and coefficients")
    _add_scheme(p)
    p.set_defaults(func=cmd_tableau)

    p = sub.add_parser("spectral", help="spectral measures over a frequency grid")
    _add_scheme(p)
    p.add_argument("--xi", type=float, default=0.0, help="physical damping ratio")
    p.add_argument("--omega-min", type=float, default=1e-2, help="smallest Omega = omega*dt")
    p.add_argument("--omega-max", type=float, default=1e2, help="largest Omega")
    p.add_argument("--points", type=int, default=200, help="number of grid points")
    p.add_argument("--log", action="store_true", help="log-spaced grid")
    p.set_defaults(func=cmd_spectral)

    p = sub.add_parser("stability", help="scan the spectral radius for unconditional stability")
    _add_scheme(p)
    p.add_argument("--xi", type=_float_list, default=[0.0, 0.1, 0.5, 1.0],
                   help="comma-separated damping ratios")
    p.add_argument("--points", type=int, default=400, help="log-spaced Omega in [1e-3, 1e8]")
    p.add_argument("--tol", type=float, default=spectral.STABILITY_TOL, help="slack above 1")
    p.set_defaults(func=cmd_stability)

    p = sub.add_parser("converge", help="global errors and fitted orders on a builtin model")
    p.add_argument("--model", default="sdof48", help="builtin model name")
    _add_scheme(p)
    p.add_argument("--dts", type=_float_list, default=[0.1, 0.05, 0.025, 0.0125],
                   help="comma-separated step sizes")
    p.add_argument("--horizon", type=float, default=None, help="simulated time span")
    p.add_argument("--dt-ref", type=float, default=1e-5,
                   help="trapezoidal reference step for models without an exact solution")
    p.set_defaults(func=cmd_converge)

    p = sub.add_parser("simulate", help="integrate a builtin or file model and write its trajectory")
    p.add_argument("--model", required=True,
                   help="sdof48, modal2, pendulum, chain:N, or a JSON linear-model file")
    _add_scheme(p)
    p.add_argument("--dt", type=float, required=True, help="step size")
    p.add_argument("--t-end", type=float, required=True, help="final time")
    p.add_argument("--stride", type=int, default=1, help="keep every n-th step")
    p.add_argument("--out", default=None, help="CSV path (default: standard output)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("verify", help="run the acceptance checks")
    p.add_argument("--criteria", type=_int_list, default=None,
                   help="comma-separated criterion numbers (default: all)")
    p.set_defaults(func=cmd_verify)
    return parser


def run(argv: Optional[list[str]] = None, out: Optional[TextIO] = None, err: Optional[TextIO] = None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        return args.func(args, out)
    except SubstepError as exc:
        code = EXIT_NUMERICAL if isinstance(exc, NumericalError) else EXIT_DOMAIN
        kind = "usage" if isinstance(exc, _UsageError) else type(exc).__name__
        err.write(f"error: {kind}: {' '.join(str(exc).split())}\n")
        return code


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
