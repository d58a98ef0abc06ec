"""Newton-iterated sub-steps for ``M A + f_int(U, V) = F(t)``."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.linalg

from .errors import DivergenceError, DomainError, NonConvergenceError
from .linear import (
    _GRID_RTOL,
    LinearModel,
    StateVector,
    Trajectory,
    _as_matrix,
    _record,
    lu_factorize,
    predictors,
    step_grid,
)
from .tableau import Tableau

InternalForce = Callable[[np.ndarray, np.ndarray], np.ndarray]
Tangents = Callable[[np.ndarray, np.ndarray], tuple]


@dataclass(frozen=True)
class NonlinearModel:
    """Mass matrix, internal force, its Jacobians ``(K_T, C_T)`` and a load."""

    M: np.ndarray
    f_int: InternalForce
    tangents: Tangents
    load: Callable[[float], np.ndarray]

    def __post_init__(self):
        M = _as_matrix(self.M, "M")
        M.setflags(write=False)
        object.__setattr__(self, "M", M)

    @property
    def dim(self) -> int:
        return self.M.shape[0]

    def force(self, t: float) -> np.ndarray:
        F = np.asarray(self.load(t), dtype=float).reshape(-1)
        if F.shape != (self.dim,):
            raise DomainError(f"load returned shape {F.shape}, expected ({self.dim},)")
        return F

    def internal(self, U, V) -> np.ndarray:
        return np.asarray(self.f_int(U, V), dtype=float).reshape(-1)

    def jacobians(self, U, V) -> tuple[np.ndarray, np.ndarray]:
        K_T, C_T = self.tangents(U, V)
        d = self.dim
        return (
            np.asarray(K_T, dtype=float).reshape(d, d),
            np.asarray(C_T, dtype=float).reshape(d, d),
        )


def from_linear(m: LinearModel) -> NonlinearModel:
    """View a linear model through the nonlinear interface."""
    K, C = m.K, m.C
    return NonlinearModel(
        M=m.M,
        f_int=lambda U, V: K @ U + C @ V,
        tangents=lambda U, V: (K, C),
        load=m.load,
    )


@dataclass(frozen=True)
class NewtonSettings:
    rtol: float = 1e-8
    atol: float = 1e-8
    max_iter: int = 50

    def __post_init__(self):
        if not (self.rtol > 0 and self.atol > 0):
            raise DomainError("Newton tolerances must be > 0")
        if int(self.max_iter) != self.max_iter or self.max_iter < 1:
            raise DomainError("max_iter must be an integer >= 1")


def substep_solve(
    m: NonlinearModel,
    t: Tableau,
    U_pred: np.ndarray,
    V_pred: np.ndarray,
    t_target: float,
    dt: float,
    settings: NewtonSettings = NewtonSettings(),
    A_start: np.ndarray | None = None,
):
    """Solve one sub-step for its acceleration.

    Returns ``(U, V, A, iterations)`` where ``iterations`` counts linear
    solves, so a linear residual converges in one.
    """
    h = t.eta * dt
    F = m.force(t_target)
    A = np.zeros(m.dim) if A_start is None else np.array(A_start, dtype=float)

    def kinematics(A):
        V = V_pred + h * A
        return U_pred + h * V, V

    U, V = kinematics(A)
    r = m.M @ A + m.internal(U, V) - F
    rnorm = float(np.linalg.norm(r))
    for it in range(1, settings.max_iter + 1):
        if not math.isfinite(rnorm):
            raise DivergenceError(f"non-finite residual at t={t_target!r}")
        K_T, C_T = m.jacobians(U, V)
        J = m.M + h * C_T + h * h * K_T
        lu = lu_factorize(J, f"Newton matrix at t={t_target!r}")
        dA = -scipy.linalg.lu_solve(lu, r, check_finite=False)
        A = A + dA
        U, V = kinematics(A)
        r = m.M @ A + m.internal(U, V) - F
        rnorm = float(np.linalg.norm(r))
        if not math.isfinite(rnorm):
            raise DivergenceError(f"non-finite residual at t={t_target!r}")
        if rnorm <= settings.rtol or np.linalg.norm(dA) <= settings.atol:
            return U, V, A, it
    raise NonConvergenceError(
        f"Newton did not converge in {settings.max_iter} iterations at t={t_target!r} "
        f"(residual {rnorm:.3e})",
        residual_norm=rnorm,
        iterations=settings.max_iter,
    )


def initial_state(m: NonlinearModel, U0, V0, t0: float = 0.0) -> StateVector:
    U0 = np.array(U0, dtype=float).reshape(-1)
    V0 = np.array(V0, dtype=float).reshape(-1)
    if U0.shape != (m.dim,) or V0.shape != (m.dim,):
        raise DomainError(f"initial data must have length {m.dim}")
    lu = lu_factorize(m.M, "mass matrix")
    A0 = scipy.linalg.lu_solve(lu, m.force(t0) - m.internal(U0, V0))
    return StateVector(float(t0), U0, V0, A0)


def step(
    m: NonlinearModel,
    t: Tableau,
    state: StateVector,
    dt: float,
    settings: NewtonSettings = NewtonSettings(),
):
    """One step; returns the new state and the Newton iterations per sub-step."""
    Vs, As = [state.V], [state.A]
    U = state.U
    iters = []
    for i in range(1, t.s + 1):
        U_pred, V_pred = predictors(t, i, dt, state.U, state.V, Vs, As)
        U, V, A, n = substep_solve(
            m, t, U_pred, V_pred, state.t + t.gamma[i] * dt, dt, settings, A_start=As[-1]
        )
        Vs.append(V)
        As.append(A)
        iters.append(n)
    return StateVector(state.t + dt, U, Vs[-1], As[-1]), iters


def simulate(
    m: NonlinearModel,
    t: Tableau,
    U0,
    V0,
    t0: float,
    t_end: float,
    dt: float,
    settings: NewtonSettings = NewtonSettings(),
    stride: int = 1,
) -> Trajectory:
    """Integrate from ``t0`` to ``t_end``; the final step may be shortened.

    ``newton_iterations`` on the result is ``(steps, s)``.
    """
    if stride < 1:
        raise DomainError("stride must be >= 1")
    state = initial_state(m, U0, V0, t0)
    times = step_grid(t0, t_end, dt)
    states = [state]
    iterations = []
    prev = t0
    for k, tk in enumerate(times):
        h = dt
        if k == len(times) - 1 and not math.isclose(tk - prev, dt, rel_tol=_GRID_RTOL):
            h = tk - prev
        state, its = step(m, t, state, h, settings)
        state = StateVector(float(tk), state.U, state.V, state.A)
        states.append(state)
        iterations.append(its)
        prev = tk
    return Trajectory.from_states(
        _record(states, stride, len(times)),
        newton_iterations=np.array(iterations, dtype=int).reshape(len(times), t.s),
    )
