"""Pair energy, partial symmetrization and the closed-form three-body potential.

Atoms A and B are in their ground state and C is excited. Sides follow
:class:`cp3.geometry.AtomTriangle`: ``a = |r_B - r_C|``, ``b = |r_C - r_A|``,
``c = |r_B - r_A|``. Every F operator acts on a kernel of a single distance;
exponentials such as ``exp(-u|a - b - c|)`` are factored into one kernel per
side (possibly growing, e.g. ``exp(+u a)/a``).

The nonresonant triple product contracts the two free dipole indices of C
(``F^c_lm F^b_ln F^a_mn``), paired with the scalar polarizabilities.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from cp3.correlations import resonant_correlation
from cp3.errors import ComputationError
from cp3.kernels import (
    CosOverR,
    SinOverR,
    dipole_contraction,
    f_apply,
    f_apply_exp_scaled,
    potential_tensor_resonant,
    triple_contraction,
)
from cp3.quadrature import DEFAULT_SPEC, integrate_semi_infinite

# beyond this exponent the integrand is below 1e-304 and the growing kernels
# would overflow
_EXP_CUTOFF = 700.0


@dataclass(frozen=True)
class EnergyBreakdown:
    resonant: float
    nonresonant: float
    error: float = 0.0

    @property
    def total(self):
        return self.resonant + self.nonresonant

    def as_dict(self):
        return {
            "resonant": self.resonant,
            "nonresonant": self.nonresonant,
            "total": self.total,
            "err_estimate": self.error,
        }


def _require_states(A, B, C):
    if getattr(C, "excited", False) is not True:
        raise ComputationError("atom C must be the excited atom")
    if getattr(A, "excited", False) or getattr(B, "excited", False):
        raise ComputationError("atoms A and B must be in their ground state")


# -- nonresonant pieces -----------------------------------------------------------


def sign_bracket_terms(a, b, c):
    """Exponential terms of the pair-energy bracket.

    Returns a list of ``(coefficient, (sa, sb, sc))`` such that the bracket
    equals ``sum coef * exp(-u (sa*a + sb*b + sc*c))``; each ``s`` is +1 or -1.
    """
    sac = np.sign(a - c)
    sbc = np.sign(b - c)
    forms = [
        (1.0, (1, 1, 1)),
        (0.25 * (2 + sac + sbc), (1, 1, -1)),
        (-0.25 * (1 - sac), (1, -1, -1)),
        (-0.25 * (1 - sbc), (1, -1, 1)),
    ]
    terms = []
    for coef, (ea, eb, ec) in forms:
        x = ea * a + eb * b + ec * c
        # exp(-u|x|): flip the signs when x < 0
        sgn = 1 if x >= 0 else -1
        terms.append((float(coef), (sgn * ea, sgn * eb, sgn * ec)))
    return terms


def _triple_kernel_trace(t, u, signs):
    """``tr(F^c F^b F^a)`` of ``exp(-u(sa a + sb b + sc c))/(abc)``, one kernel per side."""
    sa, sb, sc = signs
    rate = sa * t.a + sb * t.b + sc * t.c
    return math.exp(-u * rate) * triple_contraction(
        f_apply_exp_scaled(sc * u, t.c_vec),
        f_apply_exp_scaled(sb * u, t.b_vec),
        f_apply_exp_scaled(sa * u, t.a_vec),
    )


def _alpha3(A, B, C, u):
    return A.alpha_imag_scalar(u) * B.alpha_imag_scalar(u) * C.alpha_imag_scalar(u)


def nonresonant_closed(t, A, B, C, spec=DEFAULT_SPEC):
    """``(1/pi) int du alpha_A alpha_B alpha_C (iu) tr(F^c F^b F^a)[e^{-u(a+b+c)}/(abc)]``.

    No state requirements: the expression is symmetric in the three atoms.

    Returns
    -------
    value, error : float
    """
    p = t.perimeter

    def integrand(u):
        if u * p > _EXP_CUTOFF:
            return 0.0
        return _alpha3(A, B, C, u) * _triple_kernel_trace(t, u, (1, 1, 1))

    val, err = integrate_semi_infinite(integrand, spec, scale=p)
    return val / math.pi, err / math.pi


def pair_nonresonant(t, A, B, C, spec=DEFAULT_SPEC):
    """Nonresonant interaction of A and B correlated through C (sign-bracket form).

    Returns
    -------
    value, error : float
    """
    a, b, c = t.sides
    terms = [(coef, s) for coef, s in sign_bracket_terms(a, b, c) if coef != 0.0]
    rates = [s[0] * a + s[1] * b + s[2] * c for _, s in terms]
    slowest = min(rates)

    def integrand(u):
        total = 0.0
        for (coef, s), rate in zip(terms, rates):
            if u * rate > _EXP_CUTOFF:
                continue
            total += coef * _triple_kernel_trace(t, u, s)
        return _alpha3(A, B, C, u) * total

    val, err = integrate_semi_infinite(integrand, spec, scale=slowest)
    return val / (2 * math.pi), err / (2 * math.pi)


# -- resonant pieces ---------------------------------------------------------------


def resonant_pair(t, A, B, C):
    """Resonant part of the A-B interaction.

    Contracts the resonant correlation of the field at ``r_A`` and ``r_B``
    with the resonant coupling tensor ``-F^c[cos(k0 c)/c]``.
    """
    k0 = C.k_res
    corr = resonant_correlation(t.r_A - t.r_C, t.r_B - t.r_C, C)
    V = potential_tensor_resonant(k0, t.c_vec)
    return A.alpha_real_scalar(k0) * B.alpha_real_scalar(k0) * float(np.sum(corr * V))


def _cos_sum_terms(signs):
    """Expand ``cos(sa x + sb y + sc z)`` into products of cosines and sines.

    Returns ``(coef, (fa, fb, fc))`` with each ``f`` either "cos" or "sin".
    """
    sa, sb, sc = signs
    return [
        (1.0, ("cos", "cos", "cos")),
        (-sb * sc, ("cos", "sin", "sin")),
        (-sa * sc, ("sin", "cos", "sin")),
        (-sa * sb, ("sin", "sin", "cos")),
    ]


def resonant_closed(t, A, B, C):
    """``-mu mu alpha_A(k0) alpha_B(k0) F^c F^b F^a [cos k0(a-b+c) + cos k0(a-b-c)]/(abc)``."""
    k0 = C.k_res
    kern = {"cos": CosOverR(k0), "sin": SinOverR(k0)}
    total = 0.0
    for signs in ((1, -1, 1), (1, -1, -1)):
        for coef, (fa, fb, fc) in _cos_sum_terms(signs):
            total += coef * dipole_contraction(
                f_apply(kern[fc], t.c_vec),
                f_apply(kern[fb], t.b_vec),
                f_apply(kern[fa], t.a_vec),
                C.mu,
            )
    return -A.alpha_real_scalar(k0) * B.alpha_real_scalar(k0) * total


# -- public energies -----------------------------------------------------------------


def pair_energy(t, A, B, C, spec=DEFAULT_SPEC):
    """Interaction energy of ground-state atoms A and B in the presence of excited C."""
    _require_states(A, B, C)
    nr, err = pair_nonresonant(t, A, B, C, spec)
    return EnergyBreakdown(resonant_pair(t, A, B, C), nr, err)


def three_body_closed(t, A, B, C, spec=DEFAULT_SPEC):
    """Three-body potential from the closed form (single exponential)."""
    _require_states(A, B, C)
    nr, err = nonresonant_closed(t, A, B, C, spec)
    return EnergyBreakdown(resonant_closed(t, A, B, C), nr, err)


def three_body_symmetrized(t, A, B, C, spec=DEFAULT_SPEC):
    """Three-body potential from partially symmetrized pair energies.

    The nonresonant pair term is averaged over the three cyclic relabelings
    (weight 2/3 each); the resonant term is kept only for the pair A-B.
    """
    base = pair_energy(t, A, B, C, spec)
    t1, t2 = t.cycled(), t.cycled().cycled()
    nr1, e1 = pair_nonresonant(t1, B, C, A, spec)
    nr2, e2 = pair_nonresonant(t2, C, A, B, spec)
    nr = (2.0 / 3.0) * (base.nonresonant + nr1 + nr2)
    return EnergyBreakdown(base.resonant, nr, (2.0 / 3.0) * (base.error + e1 + e2))


# -- scans ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ScanRow:
    index: int
    params: dict
    energy: EnergyBreakdown | None = None
    error: str | None = None

    @property
    def ok(self):
        return self.error is None


METHODS = {"closed": three_body_closed, "symmetrized": three_body_symmetrized}


def _scan_one(args):
    i, params, make, models, spec, method = args
    try:
        t = make(**params)
        return ScanRow(i, params, METHODS[method](t, *models, spec))
    except ComputationError as exc:
        return ScanRow(i, params, error=f"{type(exc).__name__}: {exc}")


def energy_scan(grid, models, spec=DEFAULT_SPEC, method="closed", workers=1):
    """Evaluate the three-body potential over a family of geometries.

    Parameters
    ----------
    grid : iterable of (params, factory)
        Each entry is a parameter dict and a callable building an
        :class:`AtomTriangle` from it (``factory(**params)``).
    models : tuple
        ``(A, B, C)`` polarizability models.
    workers : int
        Worker processes; rows come back in input order either way.

    Returns
    -------
    list of ScanRow
        Failing rows carry the error message instead of an energy.
    """
    jobs = [(i, params, make, tuple(models), spec, method) for i, (params, make) in enumerate(grid)]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_scan_one, jobs))
    return [_scan_one(job) for job in jobs]
