import math

import numpy as np
import pytest

from substep import harness, linear, nonlinear
from substep.errors import DivergenceError, DomainError, NonConvergenceError, NumericalError
from substep.linear import LinearModel, StateVector
from substep.models import pendulum, pendulum_energy, sdof_damped_forced, spring_chain
from substep.nonlinear import NewtonSettings, NonlinearModel
from substep.tableau import build_tableau


def test_linear_model_through_newton_matches_direct_solve(tableaus):
    b = sdof_damped_forced()
    nl = nonlinear.from_linear(b.model)
    for t in tableaus.values():
        a = linear.simulate(b.model, t, b.U0, b.V0, 0.0, 1.0, 0.05)
        n = nonlinear.simulate(nl, t, b.U0, b.V0, 0.0, 1.0, 0.05)
        np.testing.assert_allclose(n.U, a.U, rtol=0, atol=1e-12)
        np.testing.assert_allclose(n.A, a.A, rtol=0, atol=1e-11)
        assert n.newton_iterations.max() == 1


def test_pendulum_newton_is_cheap():
    b = pendulum()
    traj = harness.run(b, build_tableau(4, 0.5), 3.0, 0.05)
    assert traj.newton_iterations.shape == (60, 4)
    assert traj.newton_iterations.max() <= 5
    E = pendulum_energy(traj.U[:, 0], traj.V[:, 0])
    assert np.max(np.abs(E - E[0])) < 1e-5


def test_substep_residual_vanishes_at_convergence():
    b = pendulum()
    t = build_tableau(3, 0.5)
    settings = NewtonSettings(rtol=1e-13, atol=1e-300)
    state = nonlinear.initial_state(b.model, b.U0, b.V0)
    U, V, A, n = nonlinear.substep_solve(b.model, t, state.U, state.V, 0.1, 0.4, settings)
    assert abs(A[0] + math.sin(U[0])) <= 1e-13
    assert V[0] == pytest.approx(state.V[0] + t.eta * 0.4 * A[0])
    assert n >= 2


def test_non_convergence_reports_residual():
    b = pendulum()
    t = build_tableau(3, 0.5)
    settings = NewtonSettings(rtol=1e-300, atol=1e-300, max_iter=1)
    with pytest.raises(NonConvergenceError) as info:
        nonlinear.substep_solve(b.model, t, np.array([1.0]), np.array([2.0]), 0.1, 0.5, settings)
    assert info.value.iterations == 1
    assert info.value.residual_norm > 0


def test_nan_force_is_divergence():
    m = NonlinearModel(
        M=[[1.0]],
        f_int=lambda U, V: np.array([math.nan]) if abs(U[0]) > 0.5 else U,
        tangents=lambda U, V: (np.eye(1), np.zeros((1, 1))),
        load=lambda t: np.zeros(1),
    )
    with pytest.raises(DivergenceError):
        nonlinear.simulate(m, build_tableau(3, 0.5), [0.0], [10.0], 0.0, 1.0, 0.1)


@pytest.mark.parametrize("kw", [dict(rtol=0.0), dict(atol=-1.0), dict(max_iter=0), dict(max_iter=2.5)])
def test_settings_validation(kw):
    with pytest.raises(DomainError):
        NewtonSettings(**kw)


def test_singular_mass_matrix():
    m = nonlinear.from_linear(LinearModel(M=[[0.0]], C=[[0.0]], K=[[1.0]], load=lambda t: np.zeros(1)))
    with pytest.raises(NumericalError):
        nonlinear.initial_state(m, [0.0], [0.0])


def test_shortened_last_step():
    b = pendulum()
    traj = harness.run(b, build_tableau(3, 0.5), 0.25, 0.1)
    np.testing.assert_allclose(traj.t, [0, 0.1, 0.2, 0.25])


def test_undamped_member_is_more_accurate_on_pendulum():
    b = pendulum()
    ref = harness.reference_trajectory(b, 2e-5, 1.0, 0.02)
    e1 = harness.global_error(harness.run(b, build_tableau(3, 1.0), 1.0, 0.02), ref)
    e0 = harness.global_error(harness.run(b, build_tableau(3, 0.0), 1.0, 0.02), ref)
    assert e1 < e0


def test_spring_chain_higher_order_is_more_accurate():
    b = spring_chain(5)
    ref = harness.reference_trajectory(b, 1e-5, 0.5, 0.01)
    errs = {s: harness.global_error(harness.run(b, build_tableau(s, 0.0), 0.5, 0.01), ref) for s in (3, 6)}
    assert errs[6] < errs[3]


def test_step_returns_iterations_per_substep():
    b = pendulum()
    state = StateVector(0.0, np.array([0.3]), np.array([0.0]), np.array([-math.sin(0.3)]))
    out, its = nonlinear.step(b.model, build_tableau(5, 0.5), state, 0.1)
    assert len(its) == 5 and all(i >= 1 for i in its)
    assert out.t == pytest.approx(0.1)
