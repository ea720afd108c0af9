"""Independent brute-force validators.

* :func:`fd_f_apply` differentiates a radial kernel numerically in Cartesian
  coordinates.
* :func:`potential_tensor_explicit` writes the retarded dipole coupling
  tensor out term by term, without the F operator.
* :func:`pv_contour_shift` evaluates principal values by displacing the pole
  off the real axis and extrapolating the shift to zero.
* :func:`box_mode_sum_nonresonant` sums the nonresonant per-mode correlator
  over a cubic quantization box.
"""

from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import IntegrationWarning, quad

from cp3.correlations import polarization_basis
from cp3.errors import InsufficientBox, StepTooLarge, UnsupportedCheck, ZeroRadius
from cp3.kernels import ZERO_RADIUS

# -- finite differences ---------------------------------------------------------


def _scalar_fn(kernel):
    return kernel.value if hasattr(kernel, "value") else kernel


def fd_f_apply(kernel, R_vec, h):
    """F operator by central second differences of ``g(|r|)``.

    ``kernel`` is a :class:`~cp3.kernels.RadialKernel` or any callable of the
    radius. Truncation error is O(h**2).
    """
    R_vec = np.asarray(R_vec, dtype=float).reshape(3)
    R = float(np.linalg.norm(R_vec))
    if R < ZERO_RADIUS:
        raise ZeroRadius("finite differences at the origin")
    if h > R / 10:
        raise StepTooLarge(f"step {h} exceeds |R|/10 = {R / 10}")
    g = _scalar_fn(kernel)

    def at(dx):
        return float(g(np.linalg.norm(R_vec + dx)))

    E = np.eye(3) * h
    g0 = at(np.zeros(3))
    H = np.empty((3, 3))
    for i in range(3):
        H[i, i] = (at(E[i]) - 2 * g0 + at(-E[i])) / h**2
        for j in range(i + 1, 3):
            H[i, j] = H[j, i] = (
                at(E[i] + E[j]) - at(E[i] - E[j]) - at(-E[i] + E[j]) + at(-E[i] - E[j])
            ) / (4 * h * h)
    return -np.eye(3) * np.trace(H) + H


def fd_f_apply_richardson(kernel, R_vec, h):
    """Two-step Richardson extrapolation of :func:`fd_f_apply` (O(h**4))."""
    return (4 * fd_f_apply(kernel, R_vec, h / 2) - fd_f_apply(kernel, R_vec, h)) / 3


# -- explicit coupling tensor -----------------------------------------------------


def potential_tensor_explicit(k, kp, c_vec):
    """Retarded dipole-dipole coupling tensor written out explicitly.

    ``-1/2 [ (d - cc) k^2 cos(kc)/c - (d - 3cc)(k sin(kc)/c^2 + cos(kc)/c^3) + (k <-> k') ]``
    """
    c_vec = np.asarray(c_vec, dtype=float)
    c = float(np.linalg.norm(c_vec))
    if c < ZERO_RADIUS:
        raise ZeroRadius("zero separation")
    n = c_vec / c
    d = np.eye(3)
    nn = np.outer(n, n)

    def bracket(q):
        return (d - nn) * q * q * math.cos(q * c) / c - (d - 3 * nn) * (
            q * math.sin(q * c) / c**2 + math.cos(q * c) / c**3
        )

    return -0.5 * (bracket(k) + bracket(kp))


# -- principal value by contour shift ---------------------------------------------


def pv_contour_shift(numerator, k0, omega, kind="sin", shifts=None):
    """``P int_0^inf num(k)/(k-k0) dk`` via ``Re int num/(k - k0 - i eps)``, eps -> 0.

    The numerator must be ``A(k) sin(omega k)`` or ``A(k) cos(omega k)`` with
    the smooth amplitude ``A`` passed as ``numerator``; the Fourier tails are
    left to QUADPACK's QAWF routine. The shifted values are Richardson
    extrapolated assuming an error series in integer powers of eps.
    By default six shifts halving from ``0.16 * min(k0, 1/omega)`` are used.

    Returns
    -------
    value, spread : float
        The extrapolated value and its change over the last extrapolation
        step.
    """
    if shifts is None:
        shifts = tuple(0.16 * min(k0, 1.0 / omega) * 0.5**i for i in range(6))
    shifts = tuple(shifts)

    def shifted(eps):
        def amp(k):
            x = k - k0
            return numerator(k) * x / (x * x + eps * eps)

        with warnings.catch_warnings():
            warnings.simplefilter("ignore", IntegrationWarning)
            split = k0 + 1.0
            head = quad(amp, 0.0, split, weight=kind, wvar=omega, points=None, limit=2000, epsabs=1e-14, epsrel=1e-13)[0]
            tail = quad(amp, split, np.inf, weight=kind, wvar=omega, limlst=200, epsabs=1e-14)[0]
        return head + tail

    vals = [shifted(e) for e in shifts]
    # Neville-style extrapolation to eps = 0 with ratio-2 shifts
    table = [vals]
    for order in range(1, len(vals)):
        prev = table[-1]
        fac = 2.0**order
        table.append([(fac * prev[i + 1] - prev[i]) / (fac - 1) for i in range(len(prev) - 1)])
    best = table[-1][0]
    spread = abs(best - table[-2][-1]) if len(table) > 1 else float("nan")
    return best, spread


# -- box-mode summation ----------------------------------------------------------------


@dataclass(frozen=True)
class BoxSpec:
    """Cubic quantization box with periodic modes ``k = 2 pi n / L``.

    Modes with ``|k| <= k_cut`` are kept; each single-mode amplitude is damped
    by the smooth factor ``exp(-(k/kappa)**2)`` with
    ``kappa = k_cut / regulator_ratio`` so that the cutoff edge carries no
    weight. ``t_nodes`` Gauss-Legendre nodes resolve the ``1/(k + k')``
    denominator through its Laplace representation.
    """

    L: float
    k_cut: float
    regulator_ratio: float = 3.5
    t_nodes: int = 32

    def __post_init__(self):
        if not self.L > 0:
            raise ValueError("box edge must be positive")
        if not self.k_cut > 2 * math.pi / self.L:
            raise ValueError("k_cut must exceed the first shell 2*pi/L")

    @property
    def volume(self):
        return self.L**3

    @property
    def kappa(self):
        return self.k_cut / self.regulator_ratio

    @property
    def n_max(self):
        return int(math.floor(self.k_cut * self.L / (2 * math.pi)))

    def scaled(self, L_factor=1.0, k_factor=1.0):
        return BoxSpec(self.L * L_factor, self.k_cut * k_factor, self.regulator_ratio, self.t_nodes)

    def as_dict(self):
        return {"L": self.L, "k_cut": self.k_cut, "regulator_ratio": self.regulator_ratio, "t_nodes": self.t_nodes}


def half_lattice(box):
    """Yield slabs of integer vectors ``n`` with ``|2 pi n / L| <= k_cut``, one of each ``+-n`` pair."""
    N = box.n_max
    lim = (box.k_cut * box.L / (2 * math.pi)) ** 2
    ny, nz = np.meshgrid(np.arange(-N, N + 1), np.arange(-N, N + 1), indexing="ij")
    ny, nz = ny.ravel(), nz.ravel()
    for nx in range(0, N + 1):
        keep = nx * nx + ny * ny + nz * nz <= lim
        if nx == 0:
            keep &= (ny > 0) | ((ny == 0) & (nz > 0))
        m = int(keep.sum())
        if m:
            yield np.column_stack([np.full(m, nx), ny[keep], nz[keep]])


def _t_rule(n, scale):
    x, w = np.polynomial.legendre.leggauss(n)
    x = 0.5 * (x + 1)
    w = 0.5 * w
    t = scale * x / (1 - x)
    return t, w * scale / (1 - x) ** 2


def box_mode_sum_nonresonant(box, r, rp, atom_c, return_stats=False):
    r"""Nonresonant field correlation by explicit summation over box modes.

    The per-mode nonresonant correlator is summed over all pairs of modes.
    The double sum factorizes: the term with ``1/(k + k')`` is written as
    :math:`\int_0^\infty dt\, e^{-t(k+k')}` and each factor becomes a single
    sum over modes; the other term is a product of single sums outright.

    Returns
    -------
    ndarray, shape (3, 3)
        Or ``(tensor, stats)`` with ``return_stats``.
    """
    model = atom_c.model
    R_vec = np.asarray(r, dtype=float) - atom_c.position
    Rp_vec = np.asarray(rp, dtype=float) - atom_c.position
    R, Rp = np.linalg.norm(R_vec), np.linalg.norm(Rp_vec)
    if min(R, Rp) < ZERO_RADIUS:
        raise ZeroRadius("field point coincides with atom C")
    if box.L < 10 * max(R, Rp):
        raise InsufficientBox(f"L = {box.L} is below 10 * max(R, R') = {10 * max(R, Rp)}")
    k0 = model.k_res
    mu = model.mu
    t, wt = _t_rule(box.t_nodes, 0.5 * (R + Rp))
    pref = 2 * math.pi / box.volume
    # single sums over modes: a carries 1/(k + k0), b does not; one row per t node
    acc = {key: [] for key in ("aR", "aRp", "bR", "bRp", "aR0", "aRp0")}
    n_modes = 0
    started = time.perf_counter()
    for slab in half_lattice(box):
        kv = slab * (2 * math.pi / box.L)
        k = np.linalg.norm(kv, axis=1)
        e1, e2 = polarization_basis(kv)
        # sum over the two polarizations of e (e . mu)
        pol = e1 * (e1 @ mu)[:, None] + e2 * (e2 @ mu)[:, None]
        # +k and -k modes combine into 2 cos(k . R)
        base = (2 * pref) * (k * np.exp(-((k / box.kappa) ** 2)))[:, None] * pol
        bR = base * np.cos(kv @ R_vec)[:, None]
        bRp = base * np.cos(kv @ Rp_vec)[:, None]
        inv = (1.0 / (k + k0))[:, None]
        aR, aRp = bR * inv, bRp * inv
        E = np.exp(-np.outer(t, k))
        acc["aR"].append(E @ aR)
        acc["aRp"].append(E @ aRp)
        acc["bR"].append(E @ bR)
        acc["bRp"].append(E @ bRp)
        acc["aR0"].append(aR.sum(axis=0))
        acc["aRp0"].append(aRp.sum(axis=0))
        n_modes += 2 * len(k)
    sums = {key: _compensated_sum(v) for key, v in acc.items()}
    cross = np.einsum("q,ql,qm->lm", wt, sums["aR"], sums["bRp"]) + np.einsum(
        "q,ql,qm->lm", wt, sums["bR"], sums["aRp"]
    )
    direct = np.outer(sums["aR0"], sums["aRp0"])
    tensor = -2.0 * (cross + direct)
    if return_stats:
        return tensor, {"modes": n_modes, "seconds": time.perf_counter() - started}
    return tensor


def _compensated_sum(parts):
    """Sum a list of equally shaped arrays with Neumaier compensation."""
    total = np.zeros_like(parts[0])
    comp = np.zeros_like(parts[0])
    for p in parts:
        y = total + p
        big = np.abs(total) >= np.abs(p)
        comp += np.where(big, (total - y) + p, (p - y) + total)
        total = y
    return total + comp


def box_mode_sum_resonant(*args, **kwargs):
    """Not provided: the resonant bracket has a pole on the mode continuum."""
    raise UnsupportedCheck(
        "the resonant correlator is not summed over box modes; it is validated through the "
        "principal-value versus imaginary-frequency identity instead"
    )


@dataclass(frozen=True)
class BoxExtrapolation:
    value: np.ndarray
    grid: dict
    modes: int
    seconds: float


def box_mode_sum_extrapolated(box, r, rp, atom_c, L_order=1.0, k_order=2.0):
    """Richardson extrapolation of the mode sum over ``(L, 2L) x (k_cut, 2 k_cut)``.

    The Gaussian regulator leaves an O(kappa**-2) error; finite-box images
    decay as ``L**-L_order``.
    """
    vals = {}
    modes = 0
    started = time.perf_counter()
    for lf in (1, 2):
        for kf in (1, 2):
            v, st = box_mode_sum_nonresonant(box.scaled(lf, kf), r, rp, atom_c, return_stats=True)
            vals[(lf, kf)] = v
            modes += st["modes"]
    fk = 2.0**k_order
    fl = 2.0**L_order
    by_L = {lf: (fk * vals[(lf, 2)] - vals[(lf, 1)]) / (fk - 1) for lf in (1, 2)}
    value = (fl * by_L[2] - by_L[1]) / (fl - 1)
    grid = {f"L*{lf},k_cut*{kf}": v for (lf, kf), v in vals.items()}
    return BoxExtrapolation(value, grid, modes, time.perf_counter() - started)
