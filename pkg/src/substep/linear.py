"""Sub-step integration of linear systems ``M A + C V + K U = F(t)``.

Every sub-step solves against the same effective matrix
``S = M + eta dt C + (eta dt)**2 K`` (``eta = gamma_1 / 2``), so one LU
factorization serves a whole run at fixed ``dt``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Iterator, Optional

import numpy as np
import scipy.linalg

from .errors import DivergenceError, DomainError, NumericalError
from .tableau import Tableau

LoadFunction = Callable[[float], np.ndarray]

# Relative slack when deciding whether dt divides the horizon exactly.
_GRID_RTOL = 1e-9


def _as_matrix(a, name):
    arr = np.atleast_2d(np.asarray(a, dtype=float))
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise DomainError(f"{name} must be a square matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} has non-finite entries")
    return arr


def zero_load(dim: int) -> LoadFunction:
    zeros = np.zeros(dim)
    return lambda t: zeros


@dataclass(frozen=True)
class LinearModel:
    """Mass, damping and stiffness matrices plus a load ``t -> F(t)``."""

    M: np.ndarray
    C: np.ndarray
    K: np.ndarray
    load: LoadFunction

    def __post_init__(self):
        M = _as_matrix(self.M, "M")
        C = _as_matrix(self.C, "C")
        K = _as_matrix(self.K, "K")
        if not (M.shape == C.shape == K.shape):
            raise DomainError(
                f"M, C, K must share one shape, got {M.shape}, {C.shape}, {K.shape}"
            )
        for name, arr in (("M", M), ("C", C), ("K", K)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def dim(self) -> int:
        return self.M.shape[0]

    def force(self, t: float) -> np.ndarray:
        F = np.asarray(self.load(t), dtype=float).reshape(-1)
        if F.shape != (self.dim,):
            raise DomainError(f"load returned shape {F.shape}, expected ({self.dim},)")
        return F

    def residual(self, t, U, V, A) -> np.ndarray:
        return self.M @ A + self.C @ V + self.K @ U - self.force(t)


@dataclass(frozen=True)
class StateVector:
    t: float
    U: np.ndarray
    V: np.ndarray
    A: np.ndarray

    def __post_init__(self):
        if not (len(self.U) == len(self.V) == len(self.A)):
            raise DomainError("U, V, A must have equal lengths")


@dataclass
class Trajectory:
    """Dense record of a run: ``t`` is ``(n,)``, ``U``, ``V``, ``A`` are ``(n, d)``."""

    t: np.ndarray
    U: np.ndarray
    V: np.ndarray
    A: np.ndarray
    n_factorizations: int = 0
    newton_iterations: Optional[np.ndarray] = None

    def __len__(self):
        return len(self.t)

    def __getitem__(self, i) -> StateVector:
        return StateVector(float(self.t[i]), self.U[i], self.V[i], self.A[i])

    def __iter__(self) -> Iterator[StateVector]:
        return (self[i] for i in range(len(self)))

    def quantity(self, name: str) -> np.ndarray:
        try:
            return {"U": self.U, "V": self.V, "A": self.A}[name]
        except KeyError:
            raise DomainError(f"unknown quantity {name!r}; use U, V or A") from None

    @classmethod
    def from_states(cls, states, **extra) -> "Trajectory":
        return cls(
            t=np.array([s.t for s in states], dtype=float),
            U=np.array([s.U for s in states], dtype=float),
            V=np.array([s.V for s in states], dtype=float),
            A=np.array([s.A for s in states], dtype=float),
            **extra,
        )


def initial_state(m: LinearModel, U0, V0, t0: float = 0.0) -> StateVector:
    """State at ``t0`` with the acceleration taken from equilibrium."""
    U0 = np.array(U0, dtype=float).reshape(-1)
    V0 = np.array(V0, dtype=float).reshape(-1)
    if U0.shape != (m.dim,) or V0.shape != (m.dim,):
        raise DomainError(f"initial data must have length {m.dim}")
    rhs = m.force(t0) - m.K @ U0 - m.C @ V0
    lu = lu_factorize(m.M, "mass matrix")
    A0 = scipy.linalg.lu_solve(lu, rhs)
    return StateVector(float(t0), U0, V0, A0)


@dataclass(frozen=True)
class Factorization:
    """LU factors of the effective matrix for one ``(model, tableau, dt)``."""

    lu: np.ndarray
    piv: np.ndarray
    dt: float
    eta: float

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        return scipy.linalg.lu_solve((self.lu, self.piv), rhs, check_finite=False)


def lu_factorize(S: np.ndarray, what: str) -> tuple[np.ndarray, np.ndarray]:
    if not np.all(np.isfinite(S)):
        raise NumericalError(f"{what} has non-finite entries")
    with warnings.catch_warnings():
        # singularity is judged below against a relative pivot threshold
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(S, check_finite=False)
    diag = np.abs(np.diag(lu))
    if diag.min() <= np.finfo(float).eps * max(diag.max(), 1.0) * S.shape[0]:
        raise NumericalError(f"{what} is singular")
    return lu, piv


def effective_matrix(m: LinearModel, t: Tableau, dt: float) -> Factorization:
    if not (dt > 0 and math.isfinite(dt)):
        raise DomainError(f"dt must be finite and > 0, got {dt!r}")
    h = t.eta * dt
    S = m.M + h * m.C + h * h * m.K
    lu, piv = lu_factorize(S, f"effective matrix at dt={dt!r}")
    return Factorization(lu=lu, piv=piv, dt=float(dt), eta=t.eta)


def predictors(t: Tableau, i: int, dt: float, U_n, V_n, Vs, As):
    """Explicit parts of sub-step ``i`` (terms with ``j < i``)."""
    row = t.alpha[i, :i]
    U_pred = U_n + dt * (row @ np.asarray(Vs[:i]))
    V_pred = V_n + dt * (row @ np.asarray(As[:i]))
    return U_pred, V_pred


def step(m: LinearModel, t: Tableau, state: StateVector, dt: float, fac: Factorization) -> StateVector:
    """Advance ``state`` by one step of size ``dt`` through ``s`` sub-steps."""
    if fac.dt != dt or fac.eta != t.eta:
        raise DomainError("factorization was built for a different dt or tableau")
    h = fac.eta * dt
    Us, Vs, As = [state.U], [state.V], [state.A]
    for i in range(1, t.s + 1):
        U_pred, V_pred = predictors(t, i, dt, state.U, state.V, Vs, As)
        ti = state.t + t.gamma[i] * dt
        rhs = m.force(ti) - m.C @ V_pred - m.K @ (U_pred + h * V_pred)
        A_i = fac.solve(rhs)
        V_i = V_pred + h * A_i
        U_i = U_pred + h * V_i
        Us.append(U_i)
        Vs.append(V_i)
        As.append(A_i)
    out = StateVector(state.t + dt, Us[-1], Vs[-1], As[-1])
    if not (np.all(np.isfinite(out.U)) and np.all(np.isfinite(out.V)) and np.all(np.isfinite(out.A))):
        raise DivergenceError(f"non-finite state after step ending at t={out.t!r}")
    return out


def step_grid(t0: float, t_end: float, dt: float) -> np.ndarray:
    """Step end times from ``t0``; the last one is ``t_end`` exactly."""
    if not (dt > 0 and math.isfinite(dt)):
        raise DomainError(f"dt must be finite and > 0, got {dt!r}")
    if not t_end >= t0:
        raise DomainError(f"t_end must be >= t0, got t0={t0!r}, t_end={t_end!r}")
    span = t_end - t0
    q = span / dt
    n = round(q)
    if n == 0 or abs(q - n) > _GRID_RTOL * max(q, 1.0):
        n = math.floor(q)
        times = t0 + dt * np.arange(1, n + 1)
        if span - n * dt > 0:
            times = np.append(times, t_end)
    else:
        times = t0 + dt * np.arange(1, n + 1)
        times[-1] = t_end
    return times


def _record(states, stride, times_len):
    keep = list(range(0, times_len + 1, stride))
    if keep[-1] != times_len:
        keep.append(times_len)
    return [states[k] for k in keep]


def simulate(
    m: LinearModel,
    t: Tableau,
    U0,
    V0,
    t0: float,
    t_end: float,
    dt: float,
    stride: int = 1,
) -> Trajectory:
    """Integrate from ``t0`` to ``t_end``; the final step may be shortened."""
    if stride < 1:
        raise DomainError("stride must be >= 1")
    state = initial_state(m, U0, V0, t0)
    times = step_grid(t0, t_end, dt)
    fac = effective_matrix(m, t, dt)
    n_fac = 1
    states = [state]
    prev = t0
    for k, tk in enumerate(times):
        h = tk - prev
        if k == len(times) - 1 and not math.isclose(h, dt, rel_tol=_GRID_RTOL):
            fac = effective_matrix(m, t, h)
            n_fac += 1
        else:
            h = fac.dt
        state = step(m, t, state, h, fac)
        state = StateVector(float(tk), state.U, state.V, state.A)
        states.append(state)
        prev = tk
    return Trajectory.from_states(_record(states, stride, len(times)), n_factorizations=n_fac)
