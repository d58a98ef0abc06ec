import itertools
import math

import numpy as np
import pytest

from substep import harness
from substep.errors import DomainError
from substep.harness import DegenerateReferenceError, ErrorReport, convergence_study, global_error
from substep.linear import Trajectory
from substep.models import modal_two_dof, pendulum, pendulum_energy, sdof_damped_forced
from substep.tableau import build_tableau
from substep.verification import PENDULUM_DT_REF, PENDULUM_HORIZON, pendulum_reference

DTS = [0.1, 0.05, 0.025, 0.0125]


def traj(U, t=None):
    U = np.asarray(U, dtype=float).reshape(len(U), -1)
    t = np.arange(len(U), dtype=float) if t is None else np.asarray(t, dtype=float)
    return Trajectory(t=t, U=U, V=U.copy(), A=U.copy())


def test_identical_trajectories_have_zero_error():
    ref = traj([1.0, 2.0, -3.0, 0.5])
    assert global_error(ref, ref) == 0.0


def test_uniform_scaling():
    ref = traj([[1.0, 2.0], [2.0, -1.0], [-3.0, 0.3], [0.5, 7.0]])
    num = Trajectory(t=ref.t, U=1.1 * ref.U, V=ref.V, A=ref.A)
    assert global_error(num, ref) == pytest.approx(0.1, abs=1e-14)
    assert global_error(num, ref, component=1) == pytest.approx(0.1, abs=1e-14)


def test_initial_state_is_excluded():
    ref = traj([1.0, 2.0, 2.0])
    num = traj([50.0, 2.0, 2.0])
    assert global_error(num, ref) == 0.0


def test_degenerate_reference():
    ref = traj([1.0, 0.0, 0.0])
    with pytest.raises(DegenerateReferenceError):
        global_error(traj([1.0, 1.0, 1.0]), ref)


def test_reference_must_cover_grid():
    ref = traj([1.0, 2.0, 3.0], t=[0.0, 1.0, 2.0])
    with pytest.raises(DomainError):
        global_error(traj([1.0, 2.0, 3.0], t=[0.0, 0.5, 1.0]), ref)


def test_unknown_quantity():
    ref = traj([1.0, 2.0])
    with pytest.raises(DomainError):
        global_error(ref, ref, "W")


def test_error_report_rejects_bad_values():
    with pytest.raises(ArithmeticError):
        ErrorReport("m", 3, 0.0, 0.1, {"U": math.nan})


def test_fourth_order_band_and_ratio():
    b = sdof_damped_forced()
    t = build_tableau(4, 0.0)
    e1 = global_error(harness.run(b, t, 5.62, 0.02), b.exact)
    e2 = global_error(harness.run(b, t, 5.62, 0.01), b.exact)
    assert 1e-10 <= e1 <= 1e-6
    assert 14 <= e1 / e2 <= 18


@pytest.mark.parametrize("s,rho,p", [(3, 0.0, 3), (5, 1.0, 5), (1, None, 2)])
def test_convergence_examples(s, rho, p):
    study = convergence_study(sdof_damped_forced(), s, rho, DTS, 5.62)
    for q in "UVA":
        assert abs(study.orders[q] - p) <= 0.25
    assert len(study.reports) == 4
    assert np.all(study.errors("U") > 0)


@pytest.mark.parametrize("s,rho", [(s, r) for s in range(2, 7) for r in (0.0, 1.0)] + [(1, None)])
def test_orders_agree_across_quantities(s, rho):
    orders = convergence_study(sdof_damped_forced(), s, rho, DTS, 5.62).orders
    assert max(orders.values()) - min(orders.values()) <= 0.3


def test_fit_is_permutation_invariant():
    b = sdof_damped_forced()
    base = convergence_study(b, 3, 0.5, DTS, 5.62).orders
    for perm in itertools.islice(itertools.permutations(DTS), 1, 24, 7):
        assert convergence_study(b, 3, 0.5, list(perm), 5.62).orders == base


def test_floor_points_are_excluded():
    orders, excluded = harness.fit_orders([0.1, 0.05, 0.025], {"U": [1e-6, 1e-9, 1e-14]})
    assert excluded == [(0.025, "U")]
    assert orders["U"] == pytest.approx(math.log2(1000))
    orders, _ = harness.fit_orders([0.1, 0.05, 0.025], {"U": [1e-6, 1e-14, 1e-15]})
    assert math.isnan(orders["U"])


def test_convergence_study_preconditions():
    with pytest.raises(DomainError):
        convergence_study(sdof_damped_forced(), 3, 0.0, [0.1, 0.05], 5.62)
    with pytest.raises(DomainError):
        convergence_study(pendulum(), 3, 0.0, DTS, 1.0)


@pytest.mark.parametrize("dt_ref,sample", [(1e-3, 0.01), (3e-5, 0.01)])
def test_reference_preconditions(dt_ref, sample):
    with pytest.raises(DomainError):
        harness.reference_trajectory(sdof_damped_forced(), dt_ref, 1.0, sample)


def test_linear_reference_matches_modal_solution():
    b = modal_two_dof(k1=100.0)
    ref = harness.reference_trajectory(b, 1e-5, 2.0, 0.01)
    assert global_error(ref, b.exact, "U") <= 1e-8
    assert np.allclose(ref.t[::50], np.arange(0, 2.01, 0.5))


@pytest.mark.slow
def test_pendulum_reference_conserves_energy():
    assert PENDULUM_DT_REF == 1e-5 and PENDULUM_HORIZON == 5.0
    ref = pendulum_reference()
    E = pendulum_energy(ref.U[:, 0], ref.V[:, 0])
    assert np.max(np.abs(E - E[0])) <= 1e-9
