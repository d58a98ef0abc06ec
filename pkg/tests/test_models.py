import math

import mpmath as mp
import numpy as np
import pytest

from substep.errors import DomainError
from substep.models import (
    BUILTIN_NAMES,
    PENDULUM_THETA_DOT0,
    chain_potential,
    get_builtin,
    modal_modes,
    modal_two_dof,
    pendulum,
    pendulum_energy,
    sdof_damped_forced,
    sdof_exact,
    spring_chain,
)


def test_sdof_exact_values():
    u, v, a = sdof_exact(np.array([0.0]))
    assert u[0] == pytest.approx(57 / 65, abs=1e-15)
    assert v[0] == pytest.approx(2 / 65, abs=1e-15)
    assert a[0] == pytest.approx(-293 / 65, abs=1e-15)


def test_sdof_exact_satisfies_equation():
    t = np.linspace(0, 5.62, 100)
    u, v, a = sdof_exact(t)
    np.testing.assert_allclose(a + 4 * v + 5 * u, np.sin(2 * t), atol=1e-12)


def test_sdof_derivatives_against_mpmath():
    def u(t):
        return mp.exp(-2 * t) * (mp.cos(t) + 2 * mp.sin(t)) - (8 * mp.cos(2 * t) - mp.sin(2 * t)) / 65

    for t in (0.3, 1.7, 4.0):
        _, v, a = sdof_exact(np.array([t]))
        assert v[0] == pytest.approx(float(mp.diff(u, t)), abs=1e-13)
        assert a[0] == pytest.approx(float(mp.diff(u, t, 2)), abs=1e-12)


def test_sdof_builtin_shapes():
    b = sdof_damped_forced()
    U, V, A = b.exact(np.array([0.0, 1.0]))
    assert U.shape == (2, 1) and b.dim == 1


def test_modal_frequencies_match_eigensolver():
    lam, modes = modal_modes(100.0, 1.0)
    K = np.array([[101.0, -1.0], [-1.0, 1.0]])
    np.testing.assert_allclose(lam, np.linalg.eigvalsh(K), rtol=1e-13)
    np.testing.assert_allclose(modes.T @ modes, np.eye(2), atol=1e-14)
    np.testing.assert_allclose(K @ modes, modes * lam, atol=1e-12)


def test_modal_soft_eigenvalue_keeps_precision():
    lam, _ = modal_modes(1e7, 1.0)
    # det / trace expansion of the soft root
    assert lam[0] == pytest.approx(1e7 / (1e7 + 2) * (1 + 1 / (1e7 + 2)), rel=1e-12)


@pytest.mark.parametrize("k1", [100.0, 1e7])
def test_modal_exact_solution(k1):
    b = modal_two_dof(k1=k1)
    t = np.linspace(0.0, 10.0, 201)
    U, V, A = b.exact(t)
    np.testing.assert_allclose(U[0], 0, atol=1e-12)
    np.testing.assert_allclose(V[0], 0, atol=1e-12)
    K = b.model.K
    F = np.stack([b.model.force(x) for x in t])
    res = A + U @ K.T - F
    assert np.max(np.abs(res)) <= 1e-9 * k1
    # velocity is the derivative of displacement
    h = 1e-6
    Up, _, _ = b.exact(t + h)
    Um, _, _ = b.exact(t - h)
    np.testing.assert_allclose((Up - Um) / (2 * h), V, atol=1e-5 * math.sqrt(k1))


def test_pendulum_initial_energy():
    b = pendulum()
    E0 = pendulum_energy(0.0, PENDULUM_THETA_DOT0)
    assert E0 == pytest.approx(0.999998476913, abs=1e-12)
    assert E0 < 1.0
    assert b.V0[0] == PENDULUM_THETA_DOT0
    assert b.model.internal(np.array([math.pi / 2]), np.zeros(1))[0] == pytest.approx(1.0)


def test_chain_two_masses():
    b = spring_chain(2, k=2.0, alpha=3.0)
    U = np.array([0.5, 1.5])
    f = b.model.internal(U, np.zeros(2))
    phi = 2.0 * 1.0 + 2.0 * 3.0 * 1.0
    np.testing.assert_allclose(f, [2.0 * 0.5 - phi, phi])
    assert b.name == "chain:2"


def test_chain_force_is_potential_gradient():
    rng = np.random.default_rng(1)
    for _ in range(5):
        U = rng.normal(scale=0.1, size=6)
        f = spring_chain(6).model.internal(U, np.zeros(6))
        g = np.array([
            (chain_potential(U + h) - chain_potential(U - h)) / 2e-7
            for h in np.eye(6) * 1e-7
        ])
        np.testing.assert_allclose(f, g, rtol=1e-6, atol=1e-3)


@pytest.mark.parametrize("name", ["sdof48", "modal2", "pendulum", "chain:4"])
def test_tangents_match_finite_differences(name):
    b = get_builtin(name)
    from substep.nonlinear import from_linear

    m = b.model if b.kind == "nonlinear" else from_linear(b.model)
    rng = np.random.default_rng(7)
    d = m.dim
    for _ in range(10):
        U, V = rng.normal(scale=0.3, size=d), rng.normal(scale=0.3, size=d)
        K_T, C_T = m.jacobians(U, V)
        h = 1e-6
        K_fd = np.column_stack([(m.internal(U + e, V) - m.internal(U - e, V)) / (2 * h) for e in np.eye(d) * h])
        C_fd = np.column_stack([(m.internal(U, V + e) - m.internal(U, V - e)) / (2 * h) for e in np.eye(d) * h])
        scale = max(1.0, np.abs(K_T).max())
        np.testing.assert_allclose(K_T, K_fd, atol=1e-6 * scale)
        np.testing.assert_allclose(C_T, C_fd, atol=1e-6 * scale)
        np.testing.assert_allclose(K_T, K_T.T, atol=1e-12 * scale)


@pytest.mark.parametrize("name", ["chain:1", "chain:x", "chain:", "beam", ""])
def test_registry_errors(name):
    with pytest.raises(DomainError):
        get_builtin(name)


def test_registry_names():
    assert "pendulum" in BUILTIN_NAMES
    assert get_builtin("chain:7").dim == 7
