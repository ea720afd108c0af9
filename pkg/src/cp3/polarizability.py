"""Two-level atom polarizabilities at real and imaginary frequency.

In natural units the excited-state tensor is

    alpha_mp(iu) = -2 k_res mu_m mu_p / (k_res**2 + u**2)

and the ground state carries the opposite sign. The scalar (isotropic) value
uses the full dipole strength |mu|**2, i.e. it equals the trace of the tensor.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from cp3.errors import NearResonance

RESONANCE_FLOOR = 1e-6


class State(enum.Enum):
    GROUND = "ground"
    EXCITED = "excited"


def _as_dipole(mu):
    mu = np.asarray(mu, dtype=float)
    if mu.ndim == 0:
        return np.array([0.0, 0.0, float(mu)])
    return mu.reshape(3).copy()


@dataclass(frozen=True, eq=False)
class PolarizabilityModel:
    """Single-resonance two-level atom.

    Parameters
    ----------
    k_res : float
        Transition wavenumber (> 0).
    mu : float or array_like
        Transition dipole; a scalar is taken to point along z.
    state : State
    """

    k_res: float
    mu: np.ndarray = field(default_factory=lambda: np.array([0.0, 0.0, 1.0]))
    state: State = State.GROUND

    def __post_init__(self):
        if not self.k_res > 0:
            raise ValueError(f"k_res must be positive, got {self.k_res}")
        object.__setattr__(self, "mu", _as_dipole(self.mu))
        object.__setattr__(self, "state", State(self.state))

    @property
    def sign(self):
        return 1.0 if self.state is State.GROUND else -1.0

    @property
    def mu2(self):
        return float(self.mu @ self.mu)

    @property
    def excited(self):
        return self.state is State.EXCITED

    def with_dipole(self, mu):
        return PolarizabilityModel(self.k_res, mu, self.state)

    def alpha_imag_scalar(self, u):
        k = self.k_res
        return self.sign * 2.0 * k * self.mu2 / (k * k + np.asarray(u, dtype=float) ** 2)

    def alpha_imag(self, u):
        """3x3 polarizability tensor at imaginary wavenumber ``iu``."""
        k = self.k_res
        return self.sign * 2.0 * k * np.outer(self.mu, self.mu) / (k * k + u * u)

    def _check_detuning(self, k):
        if abs(k - self.k_res) / self.k_res < RESONANCE_FLOOR:
            raise NearResonance(
                f"k = {k} is within a relative {RESONANCE_FLOOR} of the resonance k_res = {self.k_res}"
            )

    def alpha_real_scalar(self, k):
        self._check_detuning(k)
        kr = self.k_res
        return self.sign * 2.0 * kr * self.mu2 / (kr * kr - k * k)

    def alpha_real(self, k):
        """3x3 polarizability tensor at real wavenumber ``k`` (no damping)."""
        self._check_detuning(k)
        kr = self.k_res
        return self.sign * 2.0 * kr * np.outer(self.mu, self.mu) / (kr * kr - k * k)

    def as_dict(self):
        return {"k_res": self.k_res, "mu": self.mu.tolist(), "state": self.state.value}


@dataclass(frozen=True)
class StaticPolarizability:
    """Frequency-independent polarizability, frozen at its zero-frequency value.

    Only used to isolate geometric scaling of the potentials.
    """

    alpha0: float

    def alpha_imag_scalar(self, u):
        return self.alpha0 + 0.0 * np.asarray(u, dtype=float)

    def alpha_real_scalar(self, k):
        return self.alpha0

    @classmethod
    def frozen(cls, model):
        return cls(float(model.alpha_imag_scalar(0.0)))


def ground(k_res, mu=1.0):
    return PolarizabilityModel(k_res, mu, State.GROUND)


def excited(k_res, mu=1.0):
    return PolarizabilityModel(k_res, mu, State.EXCITED)
