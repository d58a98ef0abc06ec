"""Benchmark systems with exact or reference solutions where available."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np

from .errors import DomainError
from .linear import LinearModel
from .nonlinear import NonlinearModel

# exact(t) -> (U, V, A), each of shape (len(t), d)
ExactSolution = Callable[[np.ndarray], tuple]


@dataclass(frozen=True)
class BuiltinModel:
    name: str
    kind: str  # "linear" or "nonlinear"
    model: Union[LinearModel, NonlinearModel]
    U0: np.ndarray
    V0: np.ndarray
    t0: float = 0.0
    exact: Optional[ExactSolution] = None

    @property
    def dim(self) -> int:
        return self.model.dim


# ---------------------------------------------------------------- damped SDOF

SDOF_M, SDOF_C, SDOF_K = 1.0, 4.0, 5.0
SDOF_U0, SDOF_V0 = 57.0 / 65.0, 2.0 / 65.0
SDOF_HORIZON = 5.62


def sdof_exact(t):
    """Displacement, velocity and acceleration of the damped forced SDOF."""
    t = np.asarray(t, dtype=float)
    e = np.exp(-2.0 * t)
    c1, s1 = np.cos(t), np.sin(t)
    c2, s2 = np.cos(2.0 * t), np.sin(2.0 * t)
    u = e * (c1 + 2.0 * s1) - (8.0 * c2 - s2) / 65.0
    v = -5.0 * e * s1 + (16.0 * s2 + 2.0 * c2) / 65.0
    a = -5.0 * e * (c1 - 2.0 * s1) + (32.0 * c2 - 4.0 * s2) / 65.0
    return u, v, a


def sdof_damped_forced() -> BuiltinModel:
    model = LinearModel(
        M=[[SDOF_M]], C=[[SDOF_C]], K=[[SDOF_K]],
        load=lambda t: np.array([math.sin(2.0 * t)]),
    )

    def exact(t):
        return tuple(q.reshape(-1, 1) for q in sdof_exact(np.atleast_1d(t)))

    return BuiltinModel(
        name="sdof48", kind="linear", model=model,
        U0=np.array([SDOF_U0]), V0=np.array([SDOF_V0]), exact=exact,
    )


# ------------------------------------------------------------ modal 2-DOF

MODAL_K1, MODAL_K2, MODAL_OMEGA_P = 1e7, 1.0, 1.2


def modal_modes(k1: float = MODAL_K1, k2: float = MODAL_K2):
    """Eigenvalues ``omega**2`` and unit mode shapes (columns) of the 2-DOF stiffness.

    Evaluated in closed form to avoid losing the soft eigenvalue to the
    stiff one.
    """
    tr, det = k1 + 2.0 * k2, k1 * k2
    big = 0.5 * (tr + math.sqrt(tr * tr - 4.0 * det))
    small = det / big
    v_small = np.array([k2, k1 + k2 - small])
    v_big = np.array([k2 - big, k2])
    modes = np.column_stack([v_small / np.linalg.norm(v_small), v_big / np.linalg.norm(v_big)])
    return np.array([small, big]), modes


def modal_two_dof(k1: float = MODAL_K1, k2: float = MODAL_K2, omega_p: float = MODAL_OMEGA_P) -> BuiltinModel:
    """Two free nodes behind a stiff spring whose far end moves as ``sin(omega_p t)``."""
    K = np.array([[k1 + k2, -k2], [-k2, k2]])
    model = LinearModel(
        M=np.eye(2), C=np.zeros((2, 2)), K=K,
        load=lambda t: np.array([k1 * math.sin(omega_p * t), 0.0]),
    )
    lam, modes = modal_modes(k1, k2)
    w = np.sqrt(lam)
    p = modes.T @ np.array([k1, 0.0])  # modal load amplitudes

    def exact(t):
        t = np.atleast_1d(np.asarray(t, dtype=float))[:, None]
        amp = p / (lam - omega_p**2)
        q = amp * (np.sin(omega_p * t) - (omega_p / w) * np.sin(w * t))
        qd = amp * omega_p * (np.cos(omega_p * t) - np.cos(w * t))
        qdd = amp * omega_p * (w * np.sin(w * t) - omega_p * np.sin(omega_p * t))
        return q @ modes.T, qd @ modes.T, qdd @ modes.T

    return BuiltinModel(
        name="modal2", kind="linear", model=model,
        U0=np.zeros(2), V0=np.zeros(2), exact=exact,
    )


# ------------------------------------------------------------ pendulum

PENDULUM_THETA_DOT0 = 1.999999238456499


def pendulum_energy(theta, theta_dot):
    return 0.5 * np.asarray(theta_dot) ** 2 - np.cos(theta)


def pendulum(theta_dot0: float = PENDULUM_THETA_DOT0) -> BuiltinModel:
    model = NonlinearModel(
        M=[[1.0]],
        f_int=lambda U, V: np.sin(U),
        tangents=lambda U, V: (np.array([[math.cos(U[0])]]), np.zeros((1, 1))),
        load=lambda t: np.zeros(1),
    )
    return BuiltinModel(
        name="pendulum", kind="nonlinear", model=model,
        U0=np.zeros(1), V0=np.array([theta_dot0]),
    )


# ------------------------------------------------------------ spring chain

CHAIN_K, CHAIN_ALPHA = 1e5, 2.0


def spring_chain(N: int, k: float = CHAIN_K, alpha: float = CHAIN_ALPHA) -> BuiltinModel:
    """``N`` unit masses in series; springs between masses harden cubically.

    The first spring (ground to mass 1) is linear.  Spring ``i`` carries
    ``k e + k alpha e**3`` for the elongation ``e = u_i - u_{i-1}``.
    """
    if int(N) != N or N < 2:
        raise DomainError(f"spring chain needs N >= 2 masses, got {N!r}")
    N = int(N)

    def spring_forces(U):
        e = np.diff(U)
        return e, k * e + k * alpha * e**3

    def f_int(U, V):
        _, phi = spring_forces(U)
        f = np.zeros(N)
        f[0] = k * U[0]
        f[1:] += phi
        f[:-1] -= phi
        return f

    def tangents(U, V):
        e, _ = spring_forces(U)
        ke = k * (1.0 + 3.0 * alpha * e**2)
        diag = np.zeros(N)
        diag[0] = k
        diag[:-1] += ke
        diag[1:] += ke
        K_T = np.diag(diag) - np.diag(ke, 1) - np.diag(ke, -1)
        return K_T, np.zeros((N, N))

    model = NonlinearModel(
        M=np.eye(N), f_int=f_int, tangents=tangents,
        load=lambda t: np.full(N, math.sin(t)),
    )
    return BuiltinModel(
        name=f"chain:{N}", kind="nonlinear", model=model,
        U0=np.zeros(N), V0=np.zeros(N),
    )


def chain_potential(U, k: float = CHAIN_K, alpha: float = CHAIN_ALPHA) -> float:
    e = np.diff(U)
    return 0.5 * k * U[0] ** 2 + float(np.sum(0.5 * k * e**2 + 0.25 * k * alpha * e**4))


# ------------------------------------------------------------ registry

BUILTIN_NAMES = ("sdof48", "modal2", "pendulum", "chain:N")


def get_builtin(name: str) -> BuiltinModel:
    if name == "sdof48":
        return sdof_damped_forced()
    if name == "modal2":
        return modal_two_dof()
    if name == "pendulum":
        return pendulum()
    if name.startswith("chain:"):
        try:
            N = int(name.split(":", 1)[1])
        except ValueError:
            raise DomainError(f"bad chain size in {name!r}; use chain:N with integer N") from None
        return spring_chain(N)
    raise DomainError(f"unknown model {name!r}; builtins are {', '.join(BUILTIN_NAMES)}")
