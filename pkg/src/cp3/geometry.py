"""Atom triangles and the natural unit convention.

All quantities are evaluated with hbar = c = 1. Lengths are measured in units
of an inverse reference wavenumber (by default the excited atom's transition
wavenumber), so every formula only ever sees the products k*R and u*R.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from cp3.errors import CoincidentAtoms, CollinearAtoms, NonPositiveScale

COINCIDENCE_TOL = 1e-12
COLLINEAR_TOL = 1e-9


@dataclass(frozen=True)
class UnitSystem:
    """Conversion from user units into the natural (dimensionless) convention.

    Parameters
    ----------
    reference_wavenumber : float
        Wavenumber, in user units, that is mapped to 1.
    """

    reference_wavenumber: float = 1.0

    def __post_init__(self):
        if not self.reference_wavenumber > 0:
            raise NonPositiveScale("reference wavenumber must be positive")

    def length(self, x):
        return np.asarray(x, dtype=float) * self.reference_wavenumber

    def wavenumber(self, k):
        return np.asarray(k, dtype=float) / self.reference_wavenumber


def _vec3(x):
    v = np.asarray(x, dtype=float).reshape(3)
    return v.copy()


@dataclass(frozen=True, eq=False)
class AtomTriangle:
    """Positions of atoms A, B, C with the side labels used throughout.

    ``a = |r_B - r_C|``, ``b = |r_C - r_A|``, ``c = |r_B - r_A|``; the side
    vectors point ``C->B``, ``A->C`` and ``A->B`` respectively.
    """

    r_A: np.ndarray
    r_B: np.ndarray
    r_C: np.ndarray

    @property
    def a_vec(self):
        return self.r_B - self.r_C

    @property
    def b_vec(self):
        return self.r_C - self.r_A

    @property
    def c_vec(self):
        return self.r_B - self.r_A

    @property
    def a(self):
        return float(np.linalg.norm(self.a_vec))

    @property
    def b(self):
        return float(np.linalg.norm(self.b_vec))

    @property
    def c(self):
        return float(np.linalg.norm(self.c_vec))

    @property
    def sides(self):
        return self.a, self.b, self.c

    @property
    def perimeter(self):
        return self.a + self.b + self.c

    @property
    def a_hat(self):
        return self.a_vec / self.a

    @property
    def b_hat(self):
        return self.b_vec / self.b

    @property
    def c_hat(self):
        return self.c_vec / self.c

    def cycled(self):
        """Relabel A->B->C: the atom at r_B becomes A, r_C becomes B, r_A becomes C.

        Side lengths map as (a, b, c) -> (b, c, a).
        """
        return AtomTriangle(self.r_B, self.r_C, self.r_A)

    def as_dict(self):
        return {"A": self.r_A.tolist(), "B": self.r_B.tolist(), "C": self.r_C.tolist()}


def triangle_from_positions(r_A, r_B, r_C):
    """Build a validated :class:`AtomTriangle`.

    Raises
    ------
    CoincidentAtoms
        If two atoms are closer than 1e-12.
    CollinearAtoms
        If a triangle inequality holds with a margin below 1e-9 of the perimeter.
    """
    r_A, r_B, r_C = _vec3(r_A), _vec3(r_B), _vec3(r_C)
    t = AtomTriangle(r_A, r_B, r_C)
    a, b, c = t.sides
    if min(a, b, c) < COINCIDENCE_TOL:
        raise CoincidentAtoms(f"coincident atoms: sides a={a}, b={b}, c={c}")
    p = a + b + c
    margin = min(a + b - c, b + c - a, c + a - b)
    if margin < COLLINEAR_TOL * p:
        raise CollinearAtoms(f"collinear atoms: sides a={a}, b={b}, c={c}")
    return t


def scale_triangle(t, lam):
    """Scale all positions (and hence sides) by ``lam`` about the origin."""
    if not lam > 0:
        raise NonPositiveScale(f"scale factor must be positive, got {lam}")
    return AtomTriangle(t.r_A * lam, t.r_B * lam, t.r_C * lam)


def equilateral(d, normal_axis=2):
    """Equilateral triangle of side ``d`` in the plane orthogonal to ``normal_axis``."""
    pts = np.array([[0.0, 0.0], [d, 0.0], [0.5 * d, 0.5 * np.sqrt(3.0) * d]])
    full = np.zeros((3, 3))
    axes = [i for i in range(3) if i != normal_axis]
    full[:, axes] = pts
    return triangle_from_positions(*full)
