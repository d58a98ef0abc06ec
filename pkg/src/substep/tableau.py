"""Coefficient tableaus of the composite s-sub-step implicit family.

A step ``[t_n, t_n + dt]`` is split at ``t_n + gamma_i * dt`` with
``gamma_0 = 0`` and ``gamma_s = 1``.  Sub-step ``i`` updates::

    U_i = U_n + dt * sum_{j<=i} alpha[i, j] * V_j
    V_i = V_n + dt * sum_{j<=i} alpha[i, j] * A_j

together with equilibrium at ``t_n + gamma_i * dt``.  Every diagonal entry
equals ``gamma_1 / 2`` so all sub-steps share one effective stiffness matrix,
and the first sub-step is always the trapezoidal rule.

Members:

=====  ==============================  ===================
s      name                            rho_inf range
=====  ==============================  ===================
1      trapezoidal rule                fixed (rho_inf = 1)
2      SUCI2, second order             [-1, 1]
3..6   SUCI3..SUCI6, order s           [0, 1]
=====  ==============================  ===================
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import DomainError, NumericalError

MIN_SUBSTEPS = 1
MAX_SUBSTEPS = 6

# Brackets isolating the unconditionally stable gamma_1 branch.
ROOT_BRACKETS = {
    3: (0.60, 0.95),
    4: (0.75, 1.20),
    5: (0.45, 0.60),
    6: (0.55, 0.70),
}

ROOT_FTOL = 1e-13
ROOT_MAXITER = 200
CONSISTENCY_TOL = 1e-10

GAMMA2_RULES = ("sqrt3", "double")


def scheme_name(s: int) -> str:
    return "trapezoidal" if s == 1 else f"SUCI{s}"


def check_scheme(s) -> int:
    """Validate a sub-step count and return it as ``int``."""
    if isinstance(s, bool) or int(s) != s:
        raise DomainError(f"scheme must be an integer number of sub-steps, got {s!r}")
    s = int(s)
    if not MIN_SUBSTEPS <= s <= MAX_SUBSTEPS:
        raise DomainError(
            f"scheme s={s} unsupported: 1 <= s <= 6 "
            "(seven or more sub-steps cannot be both high order and stable)"
        )
    return s


def rho_inf_range(s: int) -> tuple[float, float]:
    s = check_scheme(s)
    if s == 1:
        return (1.0, 1.0)
    if s == 2:
        return (-1.0, 1.0)
    return (0.0, 1.0)


def _check_rho_inf(s: int, rho_inf: float) -> float:
    rho_inf = float(rho_inf)
    lo, hi = rho_inf_range(s)
    if not (lo <= rho_inf <= hi) or math.isnan(rho_inf):
        raise DomainError(
            f"rho_inf={rho_inf!r} outside [{lo}, {hi}] for {scheme_name(s)}"
        )
    return rho_inf


# --------------------------------------------------------------------------
# high-frequency dissipation equations
# --------------------------------------------------------------------------

def _diss3(g):
    return (3 * g**3 - 18 * g**2 + 18 * g - 4) / (3 * g**3)


def _diss4(g):
    return (3 * g**4 - 24 * g**3 + 36 * g**2 - 16 * g + 2) / (3 * g**4)


def _diss5(g):
    return (15 * g**5 - 150 * g**4 + 300 * g**3 - 200 * g**2 + 50 * g - 4) / (15 * g**5)


def _diss6(g):
    return (
        45 * g**6 - 540 * g**5 + 1350 * g**4 - 1200 * g**3 + 450 * g**2 - 72 * g + 4
    ) / (45 * g**6)


_DISSIPATION: dict[int, Callable[[float], float]] = {
    3: _diss3,
    4: _diss4,
    5: _diss5,
    6: _diss6,
}


# Sign of the repeated high-frequency eigenvalue on the stable branch: the
# five- and six-sub-step members reach rho_inf through a negative double root.
_HF_SIGN = {3: 1.0, 4: 1.0, 5: -1.0, 6: -1.0}


def high_frequency_eigenvalue(s: int, gamma1: float) -> float:
    """Repeated eigenvalue of the amplification matrix as ``omega -> inf``."""
    s = check_scheme(s)
    if s not in _DISSIPATION:
        raise DomainError(f"no dissipation polynomial for s={s}; use s in 3..6")
    if not gamma1 > 0:
        raise DomainError(f"gamma1 must be positive, got {gamma1!r}")
    return float(_DISSIPATION[s](float(gamma1)))


def dissipation_value(s: int, gamma1: float) -> float:
    """High-frequency spectral radius implied by ``gamma1`` for ``s`` in 3..6."""
    return abs(high_frequency_eigenvalue(s, gamma1))


def _bisect(f, lo, hi, ftol=ROOT_FTOL, maxiter=ROOT_MAXITER):
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if flo * fhi > 0:
        raise NumericalError(f"no sign change on bracket [{lo}, {hi}]")
    for _ in range(maxiter):
        mid = 0.5 * (lo + hi)
        fmid = f(mid)
        if abs(fmid) <= ftol or mid in (lo, hi):
            return mid
        if (fmid < 0) == (flo < 0):
            lo, flo = mid, fmid
        else:
            hi = mid
    raise NumericalError(f"bisection did not converge in {maxiter} iterations")


def gamma1_for_rho_inf(s: int, rho_inf: float) -> float:
    """Splitting ratio ``gamma_1`` giving high-frequency spectral radius ``rho_inf``.

    ``s = 2`` uses the closed form; ``s = 3..6`` solve the dissipation
    equation by bisection on a fixed bracket that holds the stable root.
    """
    s = check_scheme(s)
    if s == 1:
        raise DomainError("the trapezoidal rule (s=1) has no free gamma_1")
    rho_inf = _check_rho_inf(s, rho_inf)
    if s == 2:
        # rationalized closed form; equals 1/2 at rho_inf = 1
        return 2.0 / (2.0 + math.sqrt(2.0 * (1.0 + rho_inf)))
    if s == 3 and rho_inf == 1.0:
        return 2.0 / 3.0
    f = _DISSIPATION[s]
    target = _HF_SIGN[s] * rho_inf
    lo, hi = ROOT_BRACKETS[s]
    return _bisect(lambda g: f(g) - target, lo, hi)


def default_gammas(s: int, gamma1: float, gamma2_rule: str = "sqrt3") -> np.ndarray:
    """Default splitting ratios ``(gamma_0, ..., gamma_s)``.

    ``gamma2_rule`` only matters for ``s = 3``: ``"sqrt3"`` gives
    ``(3 + sqrt(3)) * gamma1 / 3`` and ``"double"`` gives ``2 * gamma1``.
    """
    s = check_scheme(s)
    gamma1 = float(gamma1)
    if not gamma1 > 0:
        raise DomainError(f"gamma1 must be positive, got {gamma1!r}")
    if gamma2_rule not in GAMMA2_RULES:
        raise DomainError(f"gamma2_rule must be one of {GAMMA2_RULES}, got {gamma2_rule!r}")
    if s == 1:
        gam = np.array([0.0, 1.0])
    elif s == 3:
        g2 = (3.0 + math.sqrt(3.0)) * gamma1 / 3.0 if gamma2_rule == "sqrt3" else 2.0 * gamma1
        gam = np.array([0.0, gamma1, g2, 1.0])
    else:
        gam = np.array([0.0] + [i * gamma1 for i in range(1, s)] + [1.0])
    if s != 2:
        # SUCI2's coefficients only divide by gamma_1, so its rho_inf = -1
        # limit (gamma_1 = gamma_2 = 1) stays well defined.
        _check_distinct(gam)
    return gam


def _check_distinct(gam):
    for i in range(len(gam)):
        for j in range(i):
            if gam[i] == gam[j]:
                raise DomainError(
                    f"splitting ratios gamma_{j} and gamma_{i} coincide ({gam[i]!r})"
                )


# --------------------------------------------------------------------------
# coefficient formulas
# --------------------------------------------------------------------------

def _div(num, den, what):
    if den == 0.0 or not math.isfinite(den):
        raise DomainError(f"singular denominator in {what}")
    return num / den


def _fill_first_columns(a, gam, i):
    """Fill ``alpha[i, 0]`` and ``alpha[i, 1]`` from the consistency conditions."""
    g1, gi = gam[1], gam[i]
    sa = sum(a[i, j] for j in range(2, i))
    sag = sum(a[i, j] * gam[j] for j in range(2, i))
    a[i, 0] = _div(-g1**2 + (3 * gi - 2 * sa) * g1 + 2 * sag - gi**2, 2 * g1, f"alpha_{i}0")
    a[i, 1] = _div(-2 * sag - g1 * gi + gi**2, 2 * g1, f"alpha_{i}1")


def _coefficients_s3(a, gam):
    g1, g2 = gam[1], gam[2]
    a[3, 2] = _div(3 * g1**2 - 6 * g1 + 2, 6 * g2 * (g2 - g1), "alpha_32")


def _coefficients_s4(a, gam):
    g1, g2, g3 = gam[1], gam[2], gam[3]
    a43 = _div(
        6 * (1 - g2) * g1**2 + 12 * g1 * g2 - 10 * g1 - 4 * g2 + 3,
        12 * g3 * (g3 - g2) * (g3 - g1),
        "alpha_43",
    )
    a[4, 3] = a43
    a[3, 2] = _div(
        -3 * g1**3 + 9 * g1**2 - 6 * g1 + 1,
        12 * a43 * g2 * (g2 - g1),
        "alpha_32 (alpha_43 = 0?)",
    )
    a[4, 2] = _div(
        6 * a43 * g1 * g3 - 6 * a43 * g3**2 + 3 * g1**2 - 6 * g1 + 2,
        6 * g2 * (g2 - g1),
        "alpha_42",
    )


def _coefficients_s5(a, gam):
    g1, g2, g3, g4 = gam[1], gam[2], gam[3], gam[4]

    def G(x):
        return (
            30 * (1 - x) * (1 - g2) * g1**2
            + (50 * x - 45 + 10 * (5 - 6 * x) * g2) * g1
            + 5 * (4 * x - 3) * g2
            - 15 * x
            + 12
        )

    a54 = _div(G(g3), 60 * g4 * (g4 - g3) * (g4 - g2) * (g4 - g1), "alpha_54")
    a53 = _div(G(g4), 60 * g3 * (g3 - g4) * (g2 - g3) * (g1 - g3), "alpha_53")
    a43 = _div(
        g4 * (g4 - g1) * (g4 - g2) * (g4 - g3)
        * (15 * g1**3 * g2 - 15 * g1**3 - 45 * g1**2 * g2 + 35 * g1**2
           + 30 * g1 * g2 - 20 * g1 - 5 * g2 + 3),
        g3 * (g3 - g1) * (g3 - g2) * G(g3),
        "alpha_43",
    )
    a52 = _div(
        3 * g1**2 + 6 * (a53 * g3 + a54 * g4 - 1) * g1
        - 6 * a53 * g3**2 - 6 * a54 * g4**2 + 2,
        6 * g2 * (g2 - g1),
        "alpha_52",
    )
    a42 = _div(
        15 * a53 * g1**4
        + 30 * (a43 * a54 - 2 * a53) * g1**3
        + 30 * (2 * a53 - 3 * a43 * a54) * g1**2
        + 20 * (-6 * a43**2 * a54**2 * g3 + 3 * a43 * a54 - a53) * g1
        + 120 * a43**2 * a54**2 * g3**2
        - 10 * a43 * a54
        + 2 * a53,
        120 * a43 * a54**2 * g2 * (g1 - g2),
        "alpha_42",
    )
    a32 = _div(
        15 * g1**4 - 60 * g1**3 + 60 * g1**2 - 20 * g1 + 2,
        120 * a43 * a54 * g2 * (g2 - g1),
        "alpha_32",
    )
    a[5, 4], a[5, 3], a[4, 3] = a54, a53, a43
    a[5, 2], a[4, 2], a[3, 2] = a52, a42, a32


def _coefficients_s6(a, gam):
    g1, g2, g3, g4, g5 = gam[1], gam[2], gam[3], gam[4], gam[5]

    a65 = _div(
        30 * (1 - g4) * (g3 - 1) * (g2 - 1) * g1**2
        + (45 - 50 * g4 + 10 * g3 * (6 * g4 - 5)) * g1 * g2
        + 3 * g3 * (5 * g4 - 4)
        + (45 * g4 - 42 + 5 * g3 * (9 - 10 * g4)) * g1
        + (15 * g4 - 12 + 5 * g3 * (3 - 4 * g4)) * g2
        - 12 * g4
        + 10,
        60 * g5 * (g4 - g5) * (g3 - g5) * (g2 - g5) * (g1 - g5),
        "alpha_65",
    )
    a64 = _div(
        30 * (1 - g3) * (g2 - 1) * g1**2
        + (45 - 50 * g3 + 10 * g2 * (6 * g3 - 5)
           - 60 * a65 * g5 * (g3 - g5) * (g2 - g5)) * g1
        + (15 - 20 * g3 + 60 * a65 * g5**2 * (g3 - g5)) * g2
        - 60 * a65 * g5**3 * (g3 - g5)
        + 15 * g3
        - 12,
        60 * g4 * (g3 - g4) * (g2 - g4) * (g1 - g4),
        "alpha_64",
    )
    a54 = _div(
        15 * (g3 - 1) * (g2 - 1) * g1**3
        + (35 * g3 - 30 + 5 * g2 * (7 - 9 * g3)) * g1**2
        + (15 - 20 * g3 + 10 * g2 * (3 * g3 - 2)) * g1
        + (3 - 5 * g3) * g2
        + 3 * g3
        - 2,
        60 * a65 * g4 * (g3 - g4) * (g2 - g4) * (g1 - g4),
        "alpha_54",
    )
    a63 = _div(
        12 * a64 * g4 * (g2 - g4) * (g4 - g1)
        + 12 * a65 * g5 * (g2 - g5) * (g5 - g1)
        - 6 * g1 * (g1 * (g2 - 1) - 2 * g2)
        - 10 * g1
        - 4 * g2
        + 3,
        12 * g3 * (g2 - g3) * (g1 - g3),
        "alpha_63",
    )
    p = a65 * a54
    a53 = _div(
        240 * a65**2 * a54**2 * g4 * (g2 - g4) * (g4 - g1)
        + 30 * a64 * g1**4 * (g2 - 1)
        + (60 * p * (g2 - 1) + 30 * a64 * (3 - 4 * g2)) * g1**3
        + (20 * p * (7 - 9 * g2) + 15 * a64 * (8 * g2 - 5)) * g1**2
        + (40 * p * (3 * g2 - 2) + 2 * a64 * (11 - 20 * g2)) * g1
        + 4 * p * (3 - 5 * g2)
        + 2 * a64 * (2 * g2 - 1),
        240 * a65**2 * a54 * g3 * (g2 - g3) * (g1 - g3),
        "alpha_53",
    )
    a43 = _div(
        60 * a65 * a53 * g3 * (g2 - g3) * (g3 - g1)
        + 60 * a65 * a54 * g4 * (g2 - g4) * (g4 - g1)
        + 5 * g1**2 * (3 * g1 * g2 - 3 * g1 - 9 * g2 + 7)
        + 30 * g1 * g2
        - 20 * g1
        - 5 * g2
        + 3,
        60 * a64 * g3 * (g2 - g3) * (g1 - g3),
        "alpha_43",
    )
    a62 = _div(
        6 * a63 * g3 * (g1 - g3)
        + 6 * a64 * g4 * (g1 - g4)
        + 6 * a65 * g5 * (g1 - g5)
        + 3 * g1**2
        - 6 * g1
        + 2,
        6 * g2 * (g2 - g1),
        "alpha_62",
    )
    q = a65 * a54 * a43
    w = a64**2 * a43 + a65 * a64 * a53 - a65 * a63 * a54
    a52 = _div(
        45 * w * g1**5
        - 12 * q * (5 * a65 * a54 - a64)
        + 2 * a65 * (a63 * a54 - a64 * a53)
        + (90 * a65 * a64 * a54 * a43 - 225 * w) * g1**4
        + 720 * a65**3 * a54**2 * a43 * (a54 * g4**2 + a53 * g3**2)
        + (180 * q * (a65 * a54 - 2 * a64) + 300 * w) * g1**3
        - 2 * a43 * a64**2
        + (180 * q * (2 * a64 - 3 * a65 * a54) - 150 * w) * g1**2
        + (360 * a65**2 * a54**2 * a43 * (1 - 2 * a65 * (a54 * g4 + a53 * g3))
           - 30 * a64 * a43 * (4 * a65 * a54 - a64)
           + 30 * a65 * (a64 * a53 - a63 * a54)) * g1,
        720 * a65**3 * a54**2 * a43 * g2 * (g1 - g2),
        "alpha_52",
    )
    r = a64 * a43 + a65 * a53
    a42 = _div(
        -45 * r * g1**5
        + (225 * r - 90 * q) * g1**4
        + 720 * q**2 * g3**2
        + (360 * q - 300 * r) * g1**3
        + (150 * r - 360 * q) * g1**2
        + (120 * q - 30 * r - 720 * q**2 * g3) * g1
        - 12 * q
        + 2 * r,
        720 * a65**2 * a54**2 * a43 * g2 * (g1 - g2),
        "alpha_42",
    )
    a32 = _div(
        45 * g1**5 - 225 * g1**4 + 300 * g1**3 - 150 * g1**2 + 30 * g1 - 2,
        720 * q * g2 * (g1 - g2),
        "alpha_32",
    )
    a[6, 5], a[6, 4], a[5, 4], a[6, 3], a[5, 3], a[4, 3] = a65, a64, a54, a63, a53, a43
    a[6, 2], a[5, 2], a[4, 2], a[3, 2] = a62, a52, a42, a32


_INTERIOR = {
    3: _coefficients_s3,
    4: _coefficients_s4,
    5: _coefficients_s5,
    6: _coefficients_s6,
}


# --------------------------------------------------------------------------
# Tableau
# --------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Tableau:
    """Splitting ratios ``gamma`` and coefficient matrix ``alpha`` of one scheme.

    ``alpha`` is ``(s+1) x (s+1)`` lower triangular with a zero first row;
    ``b`` is its last row.  Arrays are read-only.
    """

    s: int
    rho_inf: float
    gamma: np.ndarray
    alpha: np.ndarray
    b: np.ndarray

    @property
    def gamma1(self) -> float:
        return float(self.gamma[1])

    @property
    def eta(self) -> float:
        """Shared diagonal coefficient ``gamma_1 / 2``."""
        return float(self.alpha[1, 1])

    @property
    def name(self) -> str:
        return scheme_name(self.s)

    def consistency_residuals(self) -> np.ndarray:
        """``(s, 2)`` residuals of the two per-sub-step consistency conditions."""
        a, g = self.alpha, self.gamma
        rows = []
        for i in range(1, self.s + 1):
            rows.append((a[i, : i + 1].sum() - g[i], a[i, : i + 1] @ g[: i + 1] - g[i] ** 2 / 2))
        return np.abs(np.array(rows))

    def __repr__(self):
        return f"Tableau({self.name}, rho_inf={self.rho_inf!r}, gamma={self.gamma.tolist()!r})"


def _check_gammas(s, gammas):
    gam = np.asarray(gammas, dtype=float)
    if gam.shape != (s + 1,):
        raise DomainError(f"expected {s + 1} splitting ratios for s={s}, got shape {gam.shape}")
    if not np.all(np.isfinite(gam)):
        raise DomainError("splitting ratios must be finite")
    if gam[0] != 0.0 or gam[-1] != 1.0:
        raise DomainError("splitting ratios must start at 0 and end at 1")
    if np.any(np.diff(gam) <= 0):
        raise DomainError(f"splitting ratios must be strictly increasing, got {gam.tolist()}")
    _check_distinct(gam)
    return gam


def build_tableau(
    s: int,
    rho_inf: Optional[float] = None,
    gammas: Optional[Sequence[float]] = None,
    gamma2_rule: str = "sqrt3",
) -> Tableau:
    """Build the tableau of the ``s``-sub-step scheme.

    Without ``gammas`` the defaults from :func:`default_gammas` are used with
    ``gamma_1`` from :func:`gamma1_for_rho_inf`.  When ``gammas`` is given,
    ``gammas[1]`` fixes the dissipation and ``rho_inf`` is recomputed from it
    (``rho_inf`` may then be omitted).
    """
    s = check_scheme(s)
    if s == 1:
        if rho_inf is not None and float(rho_inf) != 1.0:
            raise DomainError("the trapezoidal rule (s=1) is non-dissipative: rho_inf must be 1")
        gam = _check_gammas(1, gammas) if gammas is not None else np.array([0.0, 1.0])
        rho = 1.0
    elif gammas is not None:
        gam = _check_gammas(s, gammas)
        if s == 2:
            g1 = gam[1]
            rho = float((g1**2 - 4 * g1 + 2) / g1**2)
        else:
            rho = dissipation_value(s, gam[1])
    else:
        if rho_inf is None:
            raise DomainError("rho_inf is required when gammas are not given")
        rho = _check_rho_inf(s, rho_inf)
        gam = default_gammas(s, gamma1_for_rho_inf(s, rho), gamma2_rule)

    g1 = gam[1]
    a = np.zeros((s + 1, s + 1))
    for i in range(1, s + 1):
        a[i, i] = g1 / 2
    a[1, 0] = g1 / 2
    if s == 2:
        a[2, 0] = (-g1**2 + 3 * g1 - 1) / (2 * g1)
        a[2, 1] = (1 - g1) / (2 * g1)
    elif s >= 3:
        _INTERIOR[s](a, gam)
        for i in range(2, s + 1):
            _fill_first_columns(a, gam, i)

    if not np.all(np.isfinite(a)):
        raise DomainError(f"non-finite coefficients for {scheme_name(s)} with gamma={gam.tolist()}")
    b = a[s].copy()
    for arr in (gam, a, b):
        arr.setflags(write=False)
    tab = Tableau(s=s, rho_inf=float(rho), gamma=gam, alpha=a, b=b)
    worst = float(tab.consistency_residuals().max())
    if worst > CONSISTENCY_TOL:
        raise NumericalError(
            f"{tab.name}: consistency residual {worst:.3e} exceeds {CONSISTENCY_TOL:g}"
        )
    return tab
