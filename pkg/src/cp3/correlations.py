r"""Dressed-vacuum electric field correlations around the excited atom C.

Two independent evaluations of the integrated correlator are provided.

* :func:`correlation_tensor` uses the imaginary-frequency form: a Laplace
  integral of the excited-state polarizability (pole free) plus the resonant
  term ``2 mu mu F^R F^R' cos k0(R - R') / (R R')``.
* :func:`correlation_tensor_pv` uses the principal-value form with the
  residue term ``2 pi sin(k0 R) sin(k0 R')``.

The per-mode correlator and its resonant/nonresonant split are exposed for
the mode-sum oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from math import comb

import numpy as np

from cp3.errors import ComputationError, OnResonanceMode, ZeroRadius
from cp3.kernels import CosOverR, ExpOverR, SinOverR, f_apply, ff_apply, ZERO_RADIUS
from cp3.polarizability import PolarizabilityModel
from cp3.quadrature import DEFAULT_SPEC, integrate_pv, integrate_semi_infinite

ON_RESONANCE_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class Atom:
    position: np.ndarray
    model: PolarizabilityModel

    def __post_init__(self):
        object.__setattr__(self, "position", np.asarray(self.position, dtype=float).reshape(3))


# -- field modes ---------------------------------------------------------------


def polarization_basis(k_vecs):
    """Two transverse unit vectors for each wavevector.

    Parameters
    ----------
    k_vecs : array_like, shape (..., 3)

    Returns
    -------
    e1, e2 : ndarray, shape (..., 3)
        Orthonormal, both orthogonal to ``k_vecs``; ``(k_hat, e1, e2)`` is
        right handed.
    """
    k = np.asarray(k_vecs, dtype=float)
    k_hat = k / np.linalg.norm(k, axis=-1, keepdims=True)
    # helper axis least aligned with k
    idx = np.argmin(np.abs(k_hat), axis=-1)
    helper = np.zeros_like(k_hat)
    np.put_along_axis(helper, idx[..., None], 1.0, axis=-1)
    e1 = np.cross(k_hat, helper)
    e1 /= np.linalg.norm(e1, axis=-1, keepdims=True)
    e2 = np.cross(k_hat, e1)
    return e1, e2


@dataclass(frozen=True, eq=False)
class FieldMode:
    """Plane-wave mode ``(k_vec, j)`` with polarization ``j`` in {1, 2}."""

    k_vec: np.ndarray
    polarization: int

    def __post_init__(self):
        k = np.asarray(self.k_vec, dtype=float).reshape(3)
        if np.linalg.norm(k) == 0:
            raise ValueError("mode wavevector must be nonzero")
        if self.polarization not in (1, 2):
            raise ValueError("polarization index must be 1 or 2")
        object.__setattr__(self, "k_vec", k)

    @property
    def k(self):
        return float(np.linalg.norm(self.k_vec))

    @property
    def e(self):
        e1, e2 = polarization_basis(self.k_vec)
        return e1 if self.polarization == 1 else e2


def _offsets(r, rp, atom_c):
    R = np.asarray(r, dtype=float) - atom_c.position
    Rp = np.asarray(rp, dtype=float) - atom_c.position
    if min(np.linalg.norm(R), np.linalg.norm(Rp)) < ZERO_RADIUS:
        raise ZeroRadius("field point coincides with atom C")
    return R, Rp


def _mode_setup(mode1, mode2, r, rp, atom_c, volume):
    R, Rp = _offsets(r, rp, atom_c)
    k, kp = mode1.k, mode2.k
    k0 = atom_c.model.k_res
    if abs(k - k0) < ON_RESONANCE_TOL * k0 or abs(kp - k0) < ON_RESONANCE_TOL * k0:
        raise OnResonanceMode(f"mode wavenumber equals the resonance k0 = {k0}")
    e, ep = mode1.e, mode2.e
    mu = atom_c.model.mu
    amp = (2 * math.pi / volume) ** 2 * (e @ mu) * (ep @ mu) * k * kp
    same = np.exp(1j * (mode1.k_vec @ R)) * np.exp(1j * (mode2.k_vec @ Rp))
    opp = np.exp(1j * (mode1.k_vec @ R)) * np.exp(-1j * (mode2.k_vec @ Rp))
    return k, kp, k0, amp * np.outer(e, ep), same, opp


def mode_correlation(mode1, mode2, r, rp, atom_c, volume):
    """Correlation of the Fourier components ``E_l(mode1, r) E_m(mode2, r')``.

    Evaluated on the dressed excited state of atom C in a box of volume
    ``volume``. The complex conjugate is included, so the imaginary part
    vanishes identically; the array is returned complex.
    """
    k, kp, k0, pref, same, opp = _mode_setup(mode1, mode2, r, rp, atom_c, volume)
    z = (1 / (k + kp)) * (1 / (k0 - k) + 1 / (k0 - kp)) * same - opp / ((k0 - k) * (k0 - kp))
    return -pref * (z + np.conj(z))


def mode_correlation_split(mode1, mode2, r, rp, atom_c, volume):
    """Resonant and nonresonant pieces of :func:`mode_correlation`.

    Returns
    -------
    resonant, nonresonant : complex ndarray, shape (3, 3)
    """
    k, kp, k0, pref, same, opp = _mode_setup(mode1, mode2, r, rp, atom_c, volume)
    z_r = (1 / (k + kp)) * (1 / (k - k0) + 1 / (k0 + k) + 1 / (kp - k0) + 1 / (kp + k0)) * same + (
        1 / ((k - k0) * (kp - k0)) + 1 / ((k + k0) * (kp + k0))
    ) * opp
    z_nr = (1 / (k + kp)) * (1 / (k + k0) + 1 / (kp + k0)) * same + opp / ((k + k0) * (kp + k0))
    return pref * (z_r + np.conj(z_r)), -pref * (z_nr + np.conj(z_nr))


# -- integrated correlator -----------------------------------------------------


@dataclass(frozen=True, eq=False)
class CorrelationResult:
    resonant_part: np.ndarray
    nonresonant_part: np.ndarray
    error: float = 0.0
    diagnostics: dict = field(default_factory=dict)

    @property
    def tensor(self):
        return self.resonant_part + self.nonresonant_part

    def as_dict(self):
        return {
            "tensor": self.tensor.tolist(),
            "resonant": self.resonant_part.tolist(),
            "nonresonant": self.nonresonant_part.tolist(),
            "error": self.error,
        }


def resonant_correlation(R, Rp, model):
    """``2 mu_n mu_p F^R_ln F^R'_mp cos k0(R - R') / (R R')``.

    The cosine is split as ``cos cos + sin sin`` so each F acts on a kernel of
    its own distance.
    """
    k0 = model.k_res
    M = np.outer(model.mu, model.mu)
    cc = f_apply(CosOverR(k0), R) @ M @ f_apply(CosOverR(k0), Rp)
    ss = f_apply(SinOverR(k0), R) @ M @ f_apply(SinOverR(k0), Rp)
    return 2.0 * (cc + ss)


def nonresonant_correlation(R, Rp, model, spec=DEFAULT_SPEC):
    """``(1/pi) int_0^inf du F^R[e^{-uR}/R] alpha(iu) F^R'[e^{-uR'}/R']``.

    Returns
    -------
    value : ndarray, shape (3, 3)
    error : float
    """
    s = float(np.linalg.norm(R) + np.linalg.norm(Rp))

    def integrand(u):
        if u * s > 700.0:
            return np.zeros((3, 3))
        return f_apply(ExpOverR(u), R) @ model.alpha_imag(u) @ f_apply(ExpOverR(u), Rp)

    val, err = integrate_semi_infinite(integrand, spec, scale=s)
    return val / math.pi, err / math.pi


def correlation_tensor(r, rp, atom_c, spec=DEFAULT_SPEC):
    """Field correlation tensor ``<E_l(r) E_m(r')>`` on the dressed state of C.

    Imaginary-frequency evaluation. For a ground-state model the resonant
    part is absent and the polarizability changes sign.

    Returns
    -------
    CorrelationResult
    """
    R, Rp = _offsets(r, rp, atom_c)
    model = atom_c.model
    nr, err = nonresonant_correlation(R, Rp, model, spec)
    res = resonant_correlation(R, Rp, model) if model.excited else np.zeros((3, 3))
    return CorrelationResult(res, nr, err, {"path": "imaginary_frequency"})


def pv_sine_derivatives(s, k0, spec=DEFAULT_SPEC):
    """Derivatives 0..4 in ``s`` of ``P(s) = P int_0^inf sin(k s)/(k - k0) dk``.

    With ``Q(s) = P int cos(k s)/(k - k0) dk`` the Abel-regularised identities
    ``P' = k0 Q`` and ``Q' = -1/s - k0 P`` give every higher derivative from
    the two principal values.

    Returns
    -------
    derivs : ndarray, shape (5,)
    error : float
    """
    P, eP = integrate_pv(lambda k: np.sin(k * s), k0, spec, omega=s)
    Q, eQ = integrate_pv(lambda k: np.cos(k * s), k0, spec, omega=s)
    d = np.array(
        [
            P,
            k0 * Q,
            -k0 / s - k0**2 * P,
            k0 / s**2 - k0**3 * Q,
            -2 * k0 / s**3 + k0**3 / s + k0**4 * P,
        ]
    )
    return d, eP + eQ


def _inverse_derivs(x):
    return np.array([1 / x, -1 / x**2, 2 / x**3])


def pv_partials(R, Rp, k0, spec=DEFAULT_SPEC):
    """Mixed partials of ``G = (2/pi) P(R + R') / (R R')`` up to second order in each."""
    h, err = pv_sine_derivatives(R + Rp, k0, spec)
    rho, rhop = _inverse_derivs(R), _inverse_derivs(Rp)
    D = np.zeros((3, 3))
    for i in range(3):
        for j in range(3):
            D[i, j] = sum(
                comb(i, a) * comb(j, b) * h[a + b] * rho[i - a] * rhop[j - b]
                for a in range(i + 1)
                for b in range(j + 1)
            )
    return (2 / math.pi) * D, (2 / math.pi) * err


def correlation_tensor_pv(r, rp, atom_c, spec=DEFAULT_SPEC):
    """Principal-value evaluation of the correlation tensor (excited C only).

    ``resonant_part`` holds the residue term ``4 mu mu F F sin sin / (R R')``;
    ``nonresonant_part`` holds the principal-value integral. Only the sum is
    comparable with :func:`correlation_tensor`, whose split differs.
    """
    R, Rp = _offsets(r, rp, atom_c)
    model = atom_c.model
    if not model.excited:
        raise ComputationError("the principal-value form applies to an excited atom only")
    k0 = model.k_res
    mu = model.mu
    D, err = pv_partials(float(np.linalg.norm(R)), float(np.linalg.norm(Rp)), k0, spec)
    T = ff_apply(D, R, Rp)
    pv = np.einsum("lnmp,n,p->lm", T, mu, mu)
    M = np.outer(mu, mu)
    pole = 4.0 * f_apply(SinOverR(k0), R) @ M @ f_apply(SinOverR(k0), Rp)
    return CorrelationResult(pole, pv, err, {"path": "principal_value"})


# -- scalar kernels (the bracket multiplying mu mu F F) ---------------------------


def scalar_kernel_laplace(R, Rp, k0, spec=DEFAULT_SPEC):
    """``[-(2 k0/pi) int e^{-u(R+R')}/(k0^2+u^2) du + 2 cos k0(R-R')] / (R R')``."""
    s = R + Rp
    val, err = integrate_semi_infinite(lambda u: 1.0 / (k0 * k0 + u * u) * np.exp(-u * s), spec, scale=s)
    out = (-(2 * k0 / math.pi) * val + 2 * math.cos(k0 * (R - Rp))) / (R * Rp)
    return out, (2 * k0 / math.pi) * err / (R * Rp)


def scalar_kernel_pv(R, Rp, k0, spec=DEFAULT_SPEC):
    """``[(2/pi) P int sin k(R+R')/(k-k0) dk + 4 sin(k0 R) sin(k0 R')] / (R R')``."""
    s = R + Rp
    val, err = integrate_pv(lambda k: np.sin(k * s), k0, spec, omega=s)
    out = ((2 / math.pi) * val + 4 * math.sin(k0 * R) * math.sin(k0 * Rp)) / (R * Rp)
    return out, (2 / math.pi) * err / (R * Rp)
