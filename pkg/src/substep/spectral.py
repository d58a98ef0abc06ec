"""Amplification matrices, load operators and spectral measures.

Everything here concerns the single-degree-of-freedom test equation::

    u'' + 2 xi omega u' + omega**2 u = f(t)

over one step ``dt``.  ``(u, u')`` at ``t_n + dt`` is ``D @ (u_n, u'_n) + L``
where ``L`` is the contribution of the load ``f(t) = exp(t - t_n)``.
Sweeps over the dimensionless frequency ``Omega = omega * dt`` fix ``dt = 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import DomainError, NumericalError, ProbeDegenerateError, UnsupportedRegimeError
from .tableau import Tableau

STABILITY_TOL = 1e-10
HIGH_FREQUENCY_OMEGA = 1e8
PROBE_FLOOR = 1e-14
# omega*h for the coarsest probe step; larger values leave the load error
# pre-asymptotic for the five-sub-step scheme.
PROBE_OMEGA_H = 0.3


@dataclass(frozen=True)
class TestPoint:
    """Frequency ``omega``, damping ratio ``xi`` and step ``dt``."""

    __test__ = False  # not a pytest class

    omega: float
    xi: float = 0.0
    dt: float = 1.0

    def __post_init__(self):
        if not (self.omega >= 0 and math.isfinite(self.omega)):
            raise DomainError(f"omega must be finite and >= 0, got {self.omega!r}")
        if not self.xi >= 0:
            raise DomainError(f"xi must be >= 0, got {self.xi!r}")
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise DomainError(f"dt must be finite and > 0, got {self.dt!r}")

    @property
    def Omega(self) -> float:
        return self.omega * self.dt


@dataclass(frozen=True)
class AmpPair:
    """Amplification matrix ``D`` (2x2) and load operator ``L`` (2,)."""

    D: np.ndarray
    L: np.ndarray


@dataclass(frozen=True)
class SpectralSample:
    Omega: float
    xi: float
    A1: float
    A2: float
    rho: float
    amplitude_decay: float  # percent per cycle, nan for real eigenvalues
    period_error: float  # relative, nan for real eigenvalues


# --------------------------------------------------------------------------
# exact and numerical pairs
# --------------------------------------------------------------------------

def exact_pair(p: TestPoint) -> AmpPair:
    """Exact propagator of the underdamped test equation over one step."""
    w, xi, dt = p.omega, p.xi, p.dt
    if xi >= 1:
        raise UnsupportedRegimeError(
            f"exact operator only available for underdamped systems (xi < 1), got xi={xi}"
        )
    if w == 0.0:
        e = math.exp(dt)
        return AmpPair(
            D=np.array([[1.0, dt], [0.0, 1.0]]),
            L=np.array([e - 1.0 - dt, e - 1.0]),
        )
    wd = math.sqrt(1.0 - xi * xi) * w
    decay = math.exp(-xi * w * dt)
    c, s = math.cos(wd * dt), math.sin(wd * dt)
    D = decay * np.array(
        [
            [c + xi * w / wd * s, s / wd],
            [-(w * w) / wd * s, -xi * w / wd * s + c],
        ]
    )
    den = w * w + 2 * xi * w + 1.0
    e = math.exp(dt)
    L = np.array(
        [
            e / den - decay * (wd * c + (1 + xi * w) * s) / (wd * den),
            e / den + decay * ((w * w + xi * w) * s - wd * c) / (wd * den),
        ]
    )
    return AmpPair(D=D, L=L)


def _solve(B, rhs, p: TestPoint):
    # Row equilibration keeps the LU well scaled at very large Omega.
    scale = np.abs(B).max(axis=1)
    try:
        return np.linalg.solve(B / scale[:, None], rhs / scale[:, None])
    except np.linalg.LinAlgError as exc:
        raise NumericalError(
            f"singular block system at Omega={p.Omega!r}, xi={p.xi!r}"
        ) from exc


def _unscaled_pair(t: Tableau, p: TestPoint) -> AmpPair:
    n = t.s + 1
    eye, ones, zeros = np.eye(n), np.ones(n), np.zeros(n)
    B = np.block([[2 * p.xi * p.omega * eye, eye], [eye, -p.dt * t.alpha]])
    rhs = np.column_stack(
        [
            np.concatenate([zeros, zeros]),
            np.concatenate([zeros, ones]),
            np.concatenate([np.exp(t.gamma * p.dt), zeros]),
        ]
    )
    Y = _solve(B, rhs, p)
    wb = p.dt * t.b
    contracted = np.vstack([wb @ Y[:n], wb @ Y[n:]])
    return AmpPair(D=np.eye(2) + contracted[:, :2], L=contracted[:, 2])


def scaled_pair(t: Tableau, p: TestPoint) -> AmpPair:
    """``D`` in the coordinates ``(u, u'/omega)`` and the load operator ``L``.

    Unknowns are the sub-step velocities over ``omega`` and accelerations
    over ``omega**2``, which keeps the block system O(1) even for
    ``Omega`` around 1e8.  ``L`` is returned in physical coordinates.
    """
    w = p.omega
    if w == 0.0:
        raise DomainError("scaled pair needs omega > 0")
    n = t.s + 1
    W = p.Omega
    eye, ones, zeros = np.eye(n), np.ones(n), np.zeros(n)
    B = np.block(
        [
            [2 * p.xi * eye + W * t.alpha, eye],
            [eye, -W * t.alpha],
        ]
    )
    rhs = np.column_stack(
        [
            np.concatenate([-ones, zeros]),
            np.concatenate([zeros, ones]),
            np.concatenate([np.exp(t.gamma * p.dt) / (w * w), zeros]),
        ]
    )
    Y = _solve(B, rhs, p)
    wb = W * t.b
    contracted = np.vstack([wb @ Y[:n], wb @ Y[n:]])
    D_hat = np.eye(2) + contracted[:, :2]
    L = contracted[:, 2] * np.array([1.0, w])
    return AmpPair(D=D_hat, L=L)


def numerical_pair(t: Tableau, p: TestPoint) -> AmpPair:
    """Amplification matrix and load operator of the scheme ``t``.

    Solves the ``2(s+1)`` block system for the sub-step velocities and
    accelerations and contracts with the output weights ``b``.
    """
    if p.omega == 0.0:
        return _unscaled_pair(t, p)
    pair = scaled_pair(t, p)
    D = pair.D * np.array([[1.0, 1.0 / p.omega], [p.omega, 1.0]])
    return AmpPair(D=D, L=pair.L)


# --------------------------------------------------------------------------
# measures
# --------------------------------------------------------------------------

def eigenvalues(D: np.ndarray) -> np.ndarray:
    A1 = 0.5 * (D[0, 0] + D[1, 1])
    A2 = D[0, 0] * D[1, 1] - D[0, 1] * D[1, 0]
    disc = A1 * A1 - A2
    if disc < 0:
        r = math.sqrt(-disc)
        return np.array([complex(A1, r), complex(A1, -r)])
    r = math.sqrt(disc)
    return np.array([A1 + r, A1 - r], dtype=complex)


def measures(D: np.ndarray, Omega: float, xi: float = 0.0) -> SpectralSample:
    """Invariants, spectral radius, amplitude decay and period error of ``D``."""
    D = np.asarray(D, dtype=float)
    A1 = 0.5 * float(D[0, 0] + D[1, 1])
    A2 = float(D[0, 0] * D[1, 1] - D[0, 1] * D[1, 0])
    disc = A1 * A1 - A2
    if disc <= 0:
        # complex (or double) pair: |zeta|^2 = A2
        rho = math.sqrt(max(A2, 0.0))
    else:
        r = math.sqrt(disc)
        rho = max(abs(A1 + r), abs(A1 - r))
    ad = pe = float("nan")
    if disc < 0 and Omega > 0:
        b = math.sqrt(-disc)
        omega_bar = math.atan2(b, A1)
        mag = math.hypot(A1, b)
        if mag > 0:
            xi_bar = -math.log(mag) / omega_bar
            ad = 100.0 * (1.0 - math.exp(-2.0 * math.pi * xi_bar))
            pe = Omega / omega_bar - 1.0
    return SpectralSample(
        Omega=float(Omega), xi=float(xi), A1=A1, A2=A2, rho=rho,
        amplitude_decay=ad, period_error=pe,
    )


def sample(t: Tableau, Omega: float, xi: float = 0.0) -> SpectralSample:
    """Measures of ``t`` at dimensionless frequency ``Omega`` (``dt = 1``)."""
    p = TestPoint(omega=Omega, xi=xi, dt=1.0)
    # D and its scaled form are similar, so the invariants agree.
    D = scaled_pair(t, p).D if Omega > 0 else numerical_pair(t, p).D
    return measures(D, Omega, xi)


def sweep(t: Tableau, Omegas: Iterable[float], xi: float = 0.0) -> list[SpectralSample]:
    return [sample(t, float(W), xi) for W in Omegas]


def spectral_radius(t: Tableau, Omega: float, xi: float = 0.0) -> float:
    return sample(t, Omega, xi).rho


# --------------------------------------------------------------------------
# stability and dissipation
# --------------------------------------------------------------------------

@dataclass
class StabilityScan:
    max_rho: float
    worst_Omega: float
    worst_xi: float
    violations: list = field(default_factory=list)  # (Omega, xi, A1, A2, rho)
    tol: float = STABILITY_TOL

    @property
    def stable(self) -> bool:
        return not self.violations and self.max_rho <= 1.0 + self.tol


def _invariants_ok(A1, A2, tol):
    if abs(A2 - 1.0) <= tol:
        return abs(A1) < 1.0 + tol
    return -1.0 - tol <= A2 < 1.0 and abs(2 * A1) <= A2 + 1.0 + tol


def stability_scan(
    t: Tableau,
    xi_list: Sequence[float] = (0.0,),
    Omega_grid: Optional[Sequence[float]] = None,
    tol: float = STABILITY_TOL,
) -> StabilityScan:
    """Largest spectral radius over a grid, plus invariant-condition violations."""
    if Omega_grid is None:
        Omega_grid = default_omega_grid()
    Omega_grid = np.asarray(Omega_grid, dtype=float)
    if Omega_grid.size == 0 or np.any(~np.isfinite(Omega_grid)) or np.any(Omega_grid <= 0):
        raise DomainError("Omega grid must be non-empty, finite and positive")
    result = StabilityScan(max_rho=-1.0, worst_Omega=float("nan"), worst_xi=float("nan"), tol=tol)
    for xi in xi_list:
        for W in Omega_grid:
            smp = sample(t, float(W), float(xi))
            if smp.rho > result.max_rho:
                result.max_rho = smp.rho
                result.worst_Omega, result.worst_xi = float(W), float(xi)
            if smp.rho > 1.0 + tol or not _invariants_ok(smp.A1, smp.A2, tol):
                result.violations.append((float(W), float(xi), smp.A1, smp.A2, smp.rho))
    return result


def default_omega_grid(points: int = 400) -> np.ndarray:
    return np.logspace(-3, 8, points)


def high_frequency_limit(t: Tableau, Omega: float = HIGH_FREQUENCY_OMEGA) -> float:
    """Spectral radius at a very large ``Omega`` with no physical damping."""
    return spectral_radius(t, Omega, 0.0)


# --------------------------------------------------------------------------
# order of accuracy
# --------------------------------------------------------------------------

@dataclass
class OrderProbe:
    order: float
    dts: np.ndarray
    errors: np.ndarray


def local_error(t: Tableau, p: TestPoint) -> float:
    num, ex = numerical_pair(t, p), exact_pair(p)
    return max(np.abs(num.D - ex.D).max(), np.abs(num.L - ex.L).max())


def fit_slope(x, y) -> float:
    """Least-squares slope of ``log(y)`` against ``log(x)``."""
    lx, ly = np.log(np.asarray(x, float)), np.log(np.asarray(y, float))
    return float(np.polyfit(lx, ly, 1)[0])


def order_probe(
    t: Tableau, xi: float, omega: float, h: Optional[float] = None, levels: int = 4
) -> OrderProbe:
    """Estimate the order ``p`` from one-step errors ``O(dt**(p+1))``."""
    if not omega > 0:
        raise DomainError("order probe needs omega > 0")
    if not 0 <= xi < 1:
        raise DomainError("order probe needs 0 <= xi < 1")
    if h is None:
        h = PROBE_OMEGA_H / omega
    dts = h / 2.0 ** np.arange(levels)
    errs = np.array([local_error(t, TestPoint(omega=omega, xi=xi, dt=float(dt))) for dt in dts])
    if errs[0] < PROBE_FLOOR:
        raise ProbeDegenerateError(
            f"one-step error {errs[0]:.2e} at dt={h:g} is at round-off; use a larger h"
        )
    keep = errs > PROBE_FLOOR
    if keep.sum() < 2:
        raise ProbeDegenerateError("fewer than two step sizes above round-off; use a larger h")
    order = fit_slope(dts[keep], errs[keep]) - 1.0
    return OrderProbe(order=order, dts=dts, errors=errs)
