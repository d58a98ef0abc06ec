"""Acceptance checks, shared by the ``verify`` command and the test suite."""

from __future__ import annotations

import functools
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import linear, models, nonlinear, spectral
from .harness import QUANTITIES, convergence_study, fit_orders, global_error, reference_trajectory, run
from .tableau import build_tableau, gamma1_for_rho_inf

RHO_GRID = tuple(round(0.1 * k, 1) for k in range(11))

# Published gamma_1 values, rows indexed by rho_inf in RHO_GRID.
PUBLISHED_GAMMA1 = {
    3: (0.8717330430, 0.8429736308, 0.8170015790, 0.7932944182, 0.7714620009, 0.7512044500,
        0.7322856202, 0.7145156239, 0.6977389062, 0.6818258455, 0.6666666666),
    4: (1.1456321252, 1.0967332903, 1.0527729141, 1.0126602385, 0.9755949496, 0.9409611552,
        0.9082615701, 0.8770723798, 0.8470075321, 0.8176837322, 0.7886751346),
    5: (0.5561076823, 0.5482826121, 0.5409197735, 0.5339560879, 0.5273404634, 0.5210308332,
        0.5149920597, 0.5091944163, 0.5036124624, 0.4982241931, 0.4930103863),
    6: (0.6682847341, 0.6557502542, 0.6440471963, 0.6330349995, 0.6226034838, 0.6126639724,
        0.6031433531, 0.5939799400, 0.5851204729, 0.5765178426, 0.5681292760),
}


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.number:2d} {self.title}: {self.detail}"


def suci3_invariants(g: float, W: float) -> tuple[float, float]:
    """Closed-form trace/2 and determinant of the three-sub-step amplification matrix.

    The leading coefficient of ``A2`` is the square of the cubic in ``A1``'s
    leading term, so that ``A2 -> A1**2`` as ``W -> inf`` (a double
    eigenvalue) and ``A1**2 - A2`` equals :func:`suci3_discriminant`.
    """
    cubic = 3 * g**3 - 18 * g**2 + 18 * g - 4
    den = (g * g * W * W + 4.0) ** 3
    A1 = (
        g**3 * cubic * W**6
        + g * (36 * g**3 + 24 * g**2 - 144 * g + 48) * W**4
        + (144 * g**2 - 96) * W**2
        + 192
    ) / (3 * den)
    A2 = (
        cubic**2 * W**6
        + 12 * (9 * g**4 + 12 * g**3 - 36 * g**2 + 24 * g - 4) * W**4
        + 432 * g**2 * W**2
        + 576
    ) / (9 * den)
    return A1, A2


def suci3_discriminant(g: float, W: float) -> float:
    """``A1**2 - A2`` of the three-sub-step scheme; never positive."""
    P = (g - 1) * g * g * (g - 1 / 3) * W**4 + (2 * g * g - 4 / 9) * W**2 + 8 / 3
    return -576.0 * P * P * W * W / (g * g * W * W + 4.0) ** 6


def check_published_gamma1() -> tuple[bool, str]:
    start = time.perf_counter()
    worst, where = 0.0, None
    for s, column in PUBLISHED_GAMMA1.items():
        for rho, g in zip(RHO_GRID, column):
            err = abs(gamma1_for_rho_inf(s, rho) - g)
            if err > worst:
                worst, where = err, (s, rho)
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-9 and elapsed < 1.0
    return ok, f"max |dgamma1| = {worst:.2e} at (s, rho_inf) = {where}, 44 entries, {elapsed:.3f} s"


def check_tableau_consistency() -> tuple[bool, str]:
    worst = 0.0
    shape_ok = True
    for s in range(1, 7):
        for rho in (0.0, 0.25, 0.5, 0.75, 1.0):
            if s == 1 and rho != 1.0:
                continue  # the trapezoidal rule has no dissipation parameter
            t = build_tableau(s, rho)
            worst = max(worst, float(t.consistency_residuals().max()))
            diag = np.diag(t.alpha)[1:]
            shape_ok &= bool(np.allclose(diag, t.gamma1 / 2, rtol=0, atol=1e-15))
            shape_ok &= bool(np.array_equal(t.b, t.alpha[-1]))
    ok = worst <= 1e-10 and shape_ok
    return ok, f"max residual = {worst:.2e}, diagonal and output-row checks {'ok' if shape_ok else 'FAILED'}"


def check_suci3_closed_form() -> tuple[bool, str]:
    worst = 0.0
    for rho in (0.0, 0.5, 1.0):
        t = build_tableau(3, rho)
        for W in (0.1, 1.0, 10.0, 100.0):
            smp = spectral.sample(t, W, 0.0)
            A1, A2 = suci3_invariants(t.gamma1, W)
            worst = max(worst, abs(smp.A1 - A1), abs(smp.A2 - A2))
    return worst <= 1e-9, f"max invariant deviation = {worst:.2e}"


def check_stability() -> tuple[bool, str]:
    worst, where = 0.0, None
    grid = spectral.default_omega_grid(400)
    for s in range(2, 7):
        for rho in (0.0, 0.5, 1.0):
            scan = spectral.stability_scan(build_tableau(s, rho), (0.0, 0.1, 0.5, 1.0), grid)
            if scan.max_rho > worst:
                worst, where = scan.max_rho, (s, rho, scan.worst_Omega, scan.worst_xi)
    return worst <= 1 + 1e-10, f"max rho = {worst:.15g} at (s, rho_inf, Omega, xi) = {where}"


def check_dissipation_control() -> tuple[bool, str]:
    worst, where = 0.0, None
    for s in PUBLISHED_GAMMA1:
        for rho in RHO_GRID:
            r = spectral.high_frequency_limit(build_tableau(s, rho))
            if abs(r - rho) >= worst:
                worst, where = abs(r - rho), (s, rho)
    dips = {}
    mid = np.linspace(2.0, 10.0, 161)
    for s in (3, 4, 5, 6):
        t = build_tableau(s, 1.0)
        dips[s] = min(spectral.spectral_radius(t, W) for W in mid)
    ok = worst <= 1e-3 and all(d < 1.0 for d in dips.values())
    dip_txt = ", ".join(f"s={s}: {d:.6f}" for s, d in dips.items())
    return ok, f"max |rho(1e8) - rho_inf| = {worst:.2e} at {where}; mid-band min rho {dip_txt}"


def check_order_probe() -> tuple[bool, str]:
    worst, where = 0.0, None
    for s in range(1, 7):
        expected = 2 if s == 1 else s
        for rho in ((1.0,) if s == 1 else (0.0, 0.5, 1.0)):
            t = build_tableau(s, rho)
            for xi in (0.0, 0.4):
                p = spectral.order_probe(t, xi, 1.0).order
                if abs(p - expected) >= worst:
                    worst, where = abs(p - expected), (s, rho, xi, round(p, 3))
    return worst <= 0.3, f"max |p - s| = {worst:.3f} at (s, rho_inf, xi, p) = {where}"


def check_sdof_convergence() -> tuple[bool, str]:
    start = time.perf_counter()
    builtin = models.sdof_damped_forced()
    worst, where = 0.0, None
    for s in (3, 4, 5, 6):
        for rho in (0.0, 1.0):
            study = convergence_study(builtin, s, rho, (0.1, 0.05, 0.025, 0.0125), models.SDOF_HORIZON)
            for q, p in study.orders.items():
                dev = abs(p - s) if np.isfinite(p) else np.inf
                if dev >= worst:
                    worst, where = dev, (s, rho, q, round(p, 3))
    elapsed = time.perf_counter() - start
    ok = worst <= 0.25 and elapsed < 10.0
    return ok, f"max |slope - s| = {worst:.3f} at (s, rho_inf, quantity, slope) = {where}, {elapsed:.2f} s"


def check_linear_nonlinear() -> tuple[bool, str]:
    builtin = models.sdof_damped_forced()
    wrapped = nonlinear.from_linear(builtin.model)
    worst, max_iter = 0.0, 0
    for s in range(1, 7):
        t = build_tableau(s, 1.0 if s == 1 else 0.5)
        a = linear.simulate(builtin.model, t, builtin.U0, builtin.V0, 0.0, models.SDOF_HORIZON, 0.02)
        b = nonlinear.simulate(wrapped, t, builtin.U0, builtin.V0, 0.0, models.SDOF_HORIZON, 0.02)
        for q in QUANTITIES:
            worst = max(worst, float(np.abs(a.quantity(q) - b.quantity(q)).max()))
        max_iter = max(max_iter, int(b.newton_iterations.max()))
    ok = worst <= 1e-12 and max_iter == 1
    return ok, f"max component difference = {worst:.2e}, max Newton iterations = {max_iter}"


PENDULUM_DTS = (0.04, 0.02, 0.01, 0.005)
PENDULUM_HORIZON = 5.0
PENDULUM_DT_REF = 1e-5


@functools.lru_cache(maxsize=1)
def pendulum_reference():
    return reference_trajectory(
        models.pendulum(), PENDULUM_DT_REF, PENDULUM_HORIZON, min(PENDULUM_DTS)
    )


def pendulum_slopes(schemes=(3, 4, 5, 6), rho_inf=1.0) -> dict:
    builtin = models.pendulum()
    ref = pendulum_reference()
    out = {}
    for s in schemes:
        t = build_tableau(s, rho_inf)
        errs = {q: [] for q in QUANTITIES}
        for dt in PENDULUM_DTS:
            traj = run(builtin, t, PENDULUM_HORIZON, dt)
            for q in QUANTITIES:
                errs[q].append(global_error(traj, ref, q))
        out[s] = fit_orders(PENDULUM_DTS, errs)[0]
    return out


def check_pendulum() -> tuple[bool, str]:
    builtin = models.pendulum()
    physics_ok, notes = True, []
    for s in (5, 6):
        traj = run(builtin, build_tableau(s, 1.0), 50.0, 0.02)
        theta = traj.U[:, 0]
        energy = models.pendulum_energy(theta, traj.V[:, 0])
        drift = float(np.abs(energy - energy[0]).max())
        peak = float(np.abs(theta).max())
        physics_ok &= peak < np.pi and drift <= 1e-5
        notes.append(f"s={s}: max|theta| = {peak:.6f}, drift = {drift:.1e}")
    slopes = pendulum_slopes()
    slope_ok = True
    for s, orders in slopes.items():
        slope_ok &= all(abs(p - s) <= 0.4 for p in orders.values())
        notes.append(f"slopes s={s}: " + "/".join(f"{orders[q]:.3f}" for q in QUANTITIES))
    return physics_ok and slope_ok, "; ".join(notes)


def check_modal_filtering() -> tuple[bool, str]:
    builtin = models.modal_two_dof()
    errs, decay_ok, notes = {}, True, []
    for s in (2, 3):
        traj = run(builtin, build_tableau(s, 0.75), 10.0, 0.2)
        errs[s] = global_error(traj, builtin.exact, "U", component=1)
        if s == 3:
            acc = np.abs(traj.A[:, 0])
            late = float(acc[traj.t >= 8.0 - 1e-9].max())
            early = float(acc[traj.t <= 2.0 + 1e-9].max())
            decay_ok = late < early
            notes.append(f"SUCI3 max|a2| [0,2] = {early:.4g}, [8,10] = {late:.4g}")
    ok = errs[3] < errs[2] and decay_ok
    return ok, f"u3 error SUCI2 = {errs[2]:.3e}, SUCI3 = {errs[3]:.3e}; " + "; ".join(notes)


CRITERIA: tuple[tuple[int, str, Callable[[], tuple]], ...] = (
    (1, "Published gamma_1 values", check_published_gamma1),
    (2, "Tableau consistency", check_tableau_consistency),
    (3, "SUCI3 closed-form invariants", check_suci3_closed_form),
    (4, "Unconditional stability", check_stability),
    (5, "Dissipation control", check_dissipation_control),
    (6, "Amplification-order probe", check_order_probe),
    (7, "SDOF convergence", check_sdof_convergence),
    (8, "Linear/nonlinear equivalence", check_linear_nonlinear),
    (9, "Pendulum physics and convergence", check_pendulum),
    (10, "Modal filtering", check_modal_filtering),
)


def run_criterion(number: int) -> CriterionResult:
    for n, title, fn in CRITERIA:
        if n == number:
            passed, detail = fn()
            return CriterionResult(n, title, bool(passed), detail)
    raise KeyError(number)


def run_all(numbers=None):
    numbers = numbers or [n for n, _, _ in CRITERIA]
    return [run_criterion(n) for n in numbers]
