"""Global error, convergence-order fits and fine-step reference runs."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np

from . import linear, nonlinear
from .errors import DomainError, NumericalError
from .linear import Trajectory
from .models import BuiltinModel
from .spectral import fit_slope
from .tableau import build_tableau

QUANTITIES = ("U", "V", "A")
ERROR_FLOOR = 1e-13
REFERENCE_RATIO = 100
_TIME_RTOL = 1e-9

Reference = Union[Trajectory, Callable[[np.ndarray], tuple]]


class DegenerateReferenceError(NumericalError):
    """The reference is identically zero, so the relative error is undefined."""


def _reference_values(reference: Reference, times: np.ndarray, quantity: str) -> np.ndarray:
    if isinstance(reference, Trajectory):
        idx = match_times(reference.t, times)
        return reference.quantity(quantity)[idx]
    values = dict(zip(QUANTITIES, reference(times)))
    return np.asarray(values[quantity], dtype=float).reshape(len(times), -1)


def match_times(grid: np.ndarray, times: np.ndarray) -> np.ndarray:
    """Indices of ``times`` within ``grid``; every time must be present."""
    idx = np.clip(np.searchsorted(grid, times), 0, len(grid) - 1)
    left = np.clip(idx - 1, 0, len(grid) - 1)
    pick = np.where(np.abs(grid[left] - times) < np.abs(grid[idx] - times), left, idx)
    scale = max(1.0, float(np.abs(grid).max(initial=0.0)))
    if np.any(np.abs(grid[pick] - times) > _TIME_RTOL * scale):
        raise DomainError("reference does not contain every time of the numerical grid")
    return pick


def global_error(
    numerical: Trajectory,
    reference: Reference,
    quantity: str = "U",
    component: Optional[int] = None,
) -> float:
    """Relative l2 error over steps ``j = 1..N``; the initial state is skipped.

    ``component=None`` pools every degree of freedom.
    """
    if quantity not in QUANTITIES:
        raise DomainError(f"unknown quantity {quantity!r}; use U, V or A")
    times = numerical.t[1:]
    x = numerical.quantity(quantity)[1:]
    ref = _reference_values(reference, times, quantity)
    if component is not None:
        x, ref = x[:, component], ref[:, component]
    den = float(np.sum(ref**2))
    if not den > 0:
        raise DegenerateReferenceError("reference is identically zero on the test grid")
    return math.sqrt(float(np.sum((ref - x) ** 2)) / den)


@dataclass
class ErrorReport:
    model: str
    scheme: int
    rho_inf: Optional[float]
    dt: float
    errors: dict  # quantity -> global error

    def __post_init__(self):
        for q, e in self.errors.items():
            if not (math.isfinite(e) and e >= 0):
                raise NumericalError(f"error for {q} is {e!r}")


@dataclass
class ConvergenceStudy:
    reports: list
    orders: dict  # quantity -> fitted slope (nan if too few points)
    excluded: list = field(default_factory=list)  # (dt, quantity) at the floor

    @property
    def dts(self) -> np.ndarray:
        return np.array([r.dt for r in self.reports])

    def errors(self, quantity: str) -> np.ndarray:
        return np.array([r.errors[quantity] for r in self.reports])


def run(builtin: BuiltinModel, tab, t_end: float, dt: float, settings=None, stride: int = 1) -> Trajectory:
    """Simulate a builtin with its own initial data."""
    if builtin.kind == "linear":
        return linear.simulate(builtin.model, tab, builtin.U0, builtin.V0, builtin.t0, t_end, dt, stride=stride)
    settings = settings or nonlinear.NewtonSettings()
    return nonlinear.simulate(
        builtin.model, tab, builtin.U0, builtin.V0, builtin.t0, t_end, dt, settings, stride=stride
    )


def reference_trajectory(
    builtin: BuiltinModel,
    dt_ref: float,
    horizon: float,
    sample_dt: float,
    settings=None,
) -> Trajectory:
    """Trapezoidal-rule run at ``dt_ref`` kept every ``sample_dt``."""
    if not (dt_ref > 0 and sample_dt > 0):
        raise DomainError("step sizes must be > 0")
    if dt_ref * REFERENCE_RATIO > sample_dt * (1 + _TIME_RTOL):
        raise DomainError(
            f"reference step {dt_ref:g} must be at least {REFERENCE_RATIO}x smaller than {sample_dt:g}"
        )
    ratio = sample_dt / dt_ref
    stride = round(ratio)
    if abs(ratio - stride) > _TIME_RTOL * ratio:
        raise DomainError(f"sample step {sample_dt:g} is not a multiple of the reference step {dt_ref:g}")
    return run(builtin, build_tableau(1), builtin.t0 + horizon, dt_ref, settings, stride=stride)


def fit_orders(dts, errors_by_quantity: dict, floor: float = ERROR_FLOOR):
    """Slope per quantity, skipping errors at or below ``floor``."""
    dts = np.asarray(dts, dtype=float)
    orders, excluded = {}, []
    for q, errs in errors_by_quantity.items():
        errs = np.asarray(errs, dtype=float)
        keep = errs > floor
        excluded.extend((float(d), q) for d in dts[~keep])
        orders[q] = fit_slope(dts[keep], errs[keep]) if keep.sum() >= 2 else float("nan")
    return orders, excluded


def convergence_study(
    builtin: BuiltinModel,
    scheme: int,
    rho_inf: Optional[float],
    dt_list: Sequence[float],
    horizon: float,
    reference: Optional[Reference] = None,
    settings=None,
) -> ConvergenceStudy:
    """Global errors over ``dt_list`` and log-log slopes for U, V and A.

    Uses ``reference`` if given, else the model's exact solution.
    """
    dt_list = sorted(float(d) for d in dt_list)[::-1]
    if len(dt_list) < 3:
        raise DomainError("a convergence study needs at least 3 step sizes")
    if reference is None:
        reference = builtin.exact
    if reference is None:
        raise DomainError(f"model {builtin.name} has no exact solution; pass a reference")
    tab = build_tableau(scheme, rho_inf)
    reports = []
    for dt in dt_list:
        traj = run(builtin, tab, builtin.t0 + horizon, dt, settings)
        errs = {q: global_error(traj, reference, q) for q in QUANTITIES}
        reports.append(ErrorReport(builtin.name, scheme, rho_inf, dt, errs))
    orders, excluded = fit_orders(
        dt_list, {q: [r.errors[q] for r in reports] for q in QUANTITIES}
    )
    return ConvergenceStudy(reports=reports, orders=orders, excluded=excluded)
