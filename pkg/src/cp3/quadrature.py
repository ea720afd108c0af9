"""Semi-infinite and principal-value quadrature, plus the sine/cosine integrals.

Laplace-type integrals over [0, inf) are delegated to
:func:`scipy.integrate.quad_vec` after rescaling by the decay scale. Principal
values are computed by pairing the integrand symmetrically across the pole
and summing the oscillatory tail half-period by half-period with Wynn's
epsilon acceleration.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np
from scipy.integrate import IntegrationWarning, quad, quad_vec

from cp3.errors import DomainError, NoConvergence, PoleAtBoundary

EULER_GAMMA = 0.57721566490153286061


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances for every integral in the package.

    ``pv_window`` is the half-width of the excision around a principal-value
    pole; ``None`` means ``k0 / 100``.
    """

    rel_tol: float = 1e-10
    abs_tol: float = 1e-14
    max_subdivisions: int = 2000
    pv_window: float | None = None
    tail_panels: int = 64

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("tolerances must be positive")
        if self.pv_window is not None and not self.pv_window > 0:
            raise ValueError("pv_window must be positive")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be >= 1")

    def with_rel_tol(self, rel_tol):
        return replace(self, rel_tol=rel_tol)

    def as_dict(self):
        return {
            "rel_tol": self.rel_tol,
            "abs_tol": self.abs_tol,
            "max_subdivisions": self.max_subdivisions,
            "pv_window": self.pv_window,
            "tail_panels": self.tail_panels,
        }


DEFAULT_SPEC = QuadratureSpec()


class QuadResult(NamedTuple):
    value: float | np.ndarray
    error: float


def integrate_semi_infinite(f, spec=DEFAULT_SPEC, scale=1.0):
    """Integrate ``f(u)`` over ``[0, inf)``.

    Parameters
    ----------
    f : callable
        Scalar- or array-valued, side-effect free, decaying at least
        exponentially.
    spec : QuadratureSpec
    scale : float
        Decay rate of the integrand (e.g. ``s`` for ``exp(-u s)``); the
        variable is rescaled to ``v = u * scale`` before integrating.

    Returns
    -------
    QuadResult
    """
    if not scale > 0:
        raise ValueError("decay scale must be positive")

    def g(v):
        return np.asarray(f(v / scale)) / scale

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        val, err, info = quad_vec(
            g,
            0.0,
            np.inf,
            epsabs=spec.abs_tol,
            epsrel=spec.rel_tol,
            norm="max",
            limit=spec.max_subdivisions,
            full_output=True,
        )
    if info.status == 1:
        raise NoConvergence(f"subdivision limit {spec.max_subdivisions} reached (error {err:.3e})")
    if np.ndim(val) == 0:
        val = float(val)
    return QuadResult(val, float(err))


def wynn_epsilon(partial_sums):
    """Accelerate a sequence of partial sums with Wynn's epsilon algorithm.

    Returns the deepest even-column estimate and its distance from the
    previous one as an error indicator.
    """
    cur = np.asarray(partial_sums, dtype=float)
    prev = np.zeros(cur.size + 1)
    best, last = cur[-1], cur[-2]
    k = 0
    while cur.size >= 2:
        d = np.diff(cur)
        if np.any(d == 0.0):
            break
        prev, cur = cur, prev[1:cur.size] + 1.0 / d
        k += 1
        if k % 2 == 0:
            last, best = best, cur[-1]
    return float(best), float(abs(best - last))


_GL_X, _GL_W = np.polynomial.legendre.leggauss(32)


def _gauss_panels(f, edges):
    """Integrate ``f`` over consecutive panels with 32-point Gauss-Legendre."""
    a, b = edges[:-1], edges[1:]
    half = 0.5 * (b - a)
    mid = 0.5 * (b + a)
    x = mid[:, None] + half[:, None] * _GL_X[None, :]
    return (np.asarray(f(x)) * _GL_W[None, :]).sum(axis=1) * half


def _quad(f, a, b, spec):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        val, err = quad(f, a, b, epsabs=spec.abs_tol, epsrel=spec.rel_tol, limit=spec.max_subdivisions)
    return val, err


def _window_term(numerator, k0, w, spec):
    """Symmetric excision ``P int_{k0-w}^{k0+w} numerator(k)/(k-k0) dk``."""
    return _quad(lambda t: (numerator(k0 + t) - numerator(k0 - t)) / t, 0.0, w, spec)


def oscillatory_tail(f, start, omega, spec=DEFAULT_SPEC):
    """``int_start^inf f(k) dk`` for ``f`` oscillating with angular frequency ``omega``.

    The range is cut into half-periods ``pi/omega``; the partial sums are
    accelerated with :func:`wynn_epsilon`. ``f`` must accept numpy arrays.
    """
    n = spec.tail_panels
    edges = start + (math.pi / omega) * np.arange(n + 1)
    panels = _gauss_panels(f, edges)
    partial = np.cumsum(panels)
    val, err = wynn_epsilon(partial)
    if not math.isfinite(val):
        raise NoConvergence("oscillatory tail acceleration failed")
    return val, err


def integrate_pv(numerator, k0, spec=DEFAULT_SPEC, omega=None):
    """Principal value ``P int_0^inf numerator(k) / (k - k0) dk``.

    Parameters
    ----------
    numerator : callable
        Smooth near ``k0``; must accept numpy arrays when ``omega`` is given.
    k0 : float
        Location of the simple pole (> window half-width).
    omega : float, optional
        Angular frequency of an oscillating numerator (e.g. ``s`` for
        ``sin(k s)``). ``None`` means the integrand decays on its own.

    Returns
    -------
    QuadResult
    """
    w = spec.pv_window if spec.pv_window is not None else k0 / 100.0
    if not k0 > w:
        raise PoleAtBoundary(f"pole k0 = {k0} lies within the excision window {w} of the origin")

    def f(k):
        return numerator(k) / (k - k0)

    win, e1 = _window_term(numerator, k0, w, spec)
    left, e2 = _quad(f, 0.0, k0 - w, spec)
    if omega is None:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", IntegrationWarning)
            right, e3 = quad(f, k0 + w, np.inf, epsabs=spec.abs_tol, epsrel=spec.rel_tol, limit=spec.max_subdivisions)
    else:
        # fixed Gauss panels are only accurate well away from the pole
        split = max(k0 + w, k0 + 10.0 * math.pi / omega)
        near, e3 = _quad(f, k0 + w, split, spec)
        far, e4 = oscillatory_tail(f, split, omega, spec)
        right, e3 = near + far, e3 + e4
    return QuadResult(win + left + right, e1 + e2 + e3)


# -- sine and cosine integrals ------------------------------------------------

_SERIES_MAX = 4.0


def _sici_series(x):
    x2 = x * x
    si_term = x
    si = x
    ci = 0.0
    ci_term = 1.0
    n = 1
    while True:
        # si_term ~ (-1)^n x^(2n+1)/(2n+1)!, ci_term ~ (-1)^n x^(2n)/(2n)!
        ci_term *= -x2 / ((2 * n - 1) * (2 * n))
        si_term *= -x2 / ((2 * n) * (2 * n + 1))
        dci = ci_term / (2 * n)
        dsi = si_term / (2 * n + 1)
        ci += dci
        si += dsi
        if abs(dsi) < 1e-18 * abs(si) and abs(dci) < 1e-18 * max(abs(ci), 1e-300):
            break
        n += 1
        if n > 200:
            break
    return si, EULER_GAMMA + math.log(x) + ci


def _sici_cf(x):
    # modified Lentz evaluation of the continued fraction for E1(ix)
    tiny = 1e-300
    b = complex(1.0, x)
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(2, 100000):
        a = -float((i - 1) ** 2)
        b += 2.0
        d = 1.0 / (a * d + b)
        c = b + a / c
        delta = c * d
        h *= delta
        if abs(delta.real - 1.0) + abs(delta.imag) < 1e-16:
            break
    h *= complex(math.cos(x), -math.sin(x))
    return 0.5 * math.pi + h.imag, -h.real


def sici(x):
    """Return ``(Si(x), Ci(x))`` for ``x > 0``."""
    x = float(x)
    if not x > 0:
        raise DomainError(f"Ci is undefined for x = {x} <= 0")
    if x <= _SERIES_MAX:
        return _sici_series(x)
    return _sici_cf(x)


def si(x):
    """Sine integral; odd in ``x``."""
    x = float(x)
    if x == 0.0:
        return 0.0
    return math.copysign(sici(abs(x))[0], x)


def ci(x):
    """Cosine integral for ``x > 0``."""
    return sici(x)[1]
