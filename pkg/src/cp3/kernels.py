r"""Radial kernels, the transverse operator F and dipole coupling tensors.

The operator

.. math:: F_{\ell n}[g](\mathbf R) = (-\delta_{\ell n}\nabla^2 + \nabla_\ell\nabla_n)\, g(|\mathbf R|)

acting on a radial function reduces to

.. math:: F = -\delta\,(g'' + g'/R) + \hat R\hat R\,(g'' - g'/R),

so only the first two radial derivatives are needed.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from cp3.errors import AsymmetricInput, ZeroRadius

ZERO_RADIUS = 1e-12
SYMMETRY_TOL = 1e-12


class Family(enum.Enum):
    COS = "cos_over_r"
    SIN = "sin_over_r"
    EXP = "exp_over_r"
    INVERSE = "inverse_r"


@dataclass(frozen=True)
class RadialKernel:
    """Scalar function of one distance with analytic derivatives.

    ``COS``: cos(kR)/R, ``SIN``: sin(kR)/R, ``EXP``: exp(-uR)/R (``u`` may be
    negative, giving a growing exponential), ``INVERSE``: 1/R.
    """

    family: Family
    param: float = 0.0

    def value(self, R):
        return self.derivatives(R)[0]

    def derivatives(self, R):
        """Return ``(g, g', g'')`` at radius ``R``."""
        R = np.asarray(R, dtype=float)
        p = self.param
        if self.family is Family.COS:
            c, s = np.cos(p * R), np.sin(p * R)
            g = c / R
            g1 = -p * s / R - c / R**2
            g2 = -p * p * c / R + 2 * p * s / R**2 + 2 * c / R**3
        elif self.family is Family.SIN:
            c, s = np.cos(p * R), np.sin(p * R)
            g = s / R
            g1 = p * c / R - s / R**2
            g2 = -p * p * s / R - 2 * p * c / R**2 + 2 * s / R**3
        elif self.family is Family.EXP:
            e = np.exp(-p * R)
            g = e / R
            g1 = -e * (p / R + 1 / R**2)
            g2 = e * (p * p / R + 2 * p / R**2 + 2 / R**3)
        else:
            g = 1 / R
            g1 = -1 / R**2
            g2 = 2 / R**3
        return g, g1, g2


def CosOverR(k):
    return RadialKernel(Family.COS, float(k))


def SinOverR(k):
    return RadialKernel(Family.SIN, float(k))


def ExpOverR(u):
    return RadialKernel(Family.EXP, float(u))


def InverseR():
    return RadialKernel(Family.INVERSE)


def _unit(R_vec):
    R_vec = np.asarray(R_vec, dtype=float).reshape(3)
    R = float(np.linalg.norm(R_vec))
    if R < ZERO_RADIUS:
        raise ZeroRadius(f"|R| = {R} is below {ZERO_RADIUS}")
    return R, R_vec / R


def f_from_derivatives(R, R_hat, g1, g2):
    """Assemble F from the radial derivatives ``g'`` and ``g''`` at ``R``."""
    return -np.eye(3) * (g2 + g1 / R) + np.outer(R_hat, R_hat) * (g2 - g1 / R)


def f_apply(kernel, R_vec):
    """Apply F to a radial kernel at the point ``R_vec``; returns a 3x3 array."""
    R, R_hat = _unit(R_vec)
    _, g1, g2 = kernel.derivatives(R)
    return f_from_derivatives(R, R_hat, float(g1), float(g2))


def f_apply_exp_scaled(u, R_vec):
    """``exp(u R) * F[exp(-u R)/R]``: the exp kernel with its exponential removed.

    Lets callers combine the exponentials of several kernels before
    evaluating them, avoiding overflow of growing factors (``u < 0``).
    """
    R, R_hat = _unit(R_vec)
    g1 = -(u / R + 1 / R**2)
    g2 = u * u / R + 2 * u / R**2 + 2 / R**3
    return f_from_derivatives(R, R_hat, g1, g2)


def ff_apply(partials, R_vec, Rp_vec):
    r"""Apply :math:`F^R_{\ell n} F^{R'}_{mp}` to a function ``G(|R|, |R'|)``.

    Parameters
    ----------
    partials : array_like, shape (3, 3)
        ``partials[i, j]`` is :math:`\partial_R^i \partial_{R'}^j G`; only
        entries with ``i, j >= 1`` are used.
    R_vec, Rp_vec : array_like
        The two field points relative to the source.

    Returns
    -------
    ndarray, shape (3, 3, 3, 3)
        Indexed ``[l, n, m, p]``.
    """
    D = np.asarray(partials, dtype=float)
    R, u = _unit(R_vec)
    Rp, v = _unit(Rp_vec)
    # F^R G = -delta*A + RR*B, with A, B radial in R'
    A1 = D[2, 1] + D[1, 1] / R
    A2 = D[2, 2] + D[1, 2] / R
    B1 = D[2, 1] - D[1, 1] / R
    B2 = D[2, 2] - D[1, 2] / R
    aA, bA = A2 + A1 / Rp, A2 - A1 / Rp
    aB, bB = B2 + B1 / Rp, B2 - B1 / Rp
    eye = np.eye(3)
    uu = np.outer(u, u)
    vv = np.outer(v, v)
    return (
        aA * np.einsum("ln,mp->lnmp", eye, eye)
        - bA * np.einsum("ln,mp->lnmp", eye, vv)
        - aB * np.einsum("ln,mp->lnmp", uu, eye)
        + bB * np.einsum("ln,mp->lnmp", uu, vv)
    )


def potential_tensor_nonresonant(k, kp, c_vec):
    """Dipole coupling tensor for a pair of induced dipoles oscillating at k and k'.

    Equals ``-1/2 (F[cos(kc)/c] + F[cos(k'c)/c])``; reduces to the static
    coupling ``(delta - 3 c_hat c_hat)/c**3`` at ``k = k' = 0``.
    """
    return -0.5 * (f_apply(CosOverR(k), c_vec) + f_apply(CosOverR(kp), c_vec))


def potential_tensor_resonant(k0, c_vec):
    """Coupling tensor for dipoles driven at the resonance only: ``-F[cos(k0 c)/c]``."""
    return -f_apply(CosOverR(k0), c_vec)


def _check_symmetric(*tensors):
    for T in tensors:
        T = np.asarray(T, dtype=float)
        scale = max(1.0, float(np.max(np.abs(T))))
        if np.max(np.abs(T - T.T)) > SYMMETRY_TOL * scale:
            raise AsymmetricInput("tensor is not symmetric")


def triple_contraction(T_c, T_b, T_a):
    """``sum_{l,m,n} (T_c)_lm (T_b)_ln (T_a)_mn``, i.e. trace(T_c T_b T_a)."""
    _check_symmetric(T_c, T_b, T_a)
    return float(np.einsum("lm,ln,mn->", T_c, T_b, T_a))


def dipole_contraction(T_c, T_b, T_a, mu):
    """``sum_{l,m,n,p} (T_c)_lm (T_b)_ln (T_a)_mp mu_n mu_p``."""
    _check_symmetric(T_c, T_b, T_a)
    mu = np.asarray(mu, dtype=float)
    return float((T_b @ mu) @ T_c @ (T_a @ mu))
