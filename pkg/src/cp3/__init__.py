"""Three-body dispersion interaction with one excited atom.

Natural units (hbar = c = 1): lengths and wavenumbers are reciprocal.
"""

__version__ = "0.1.0"

from cp3.correlations import Atom, CorrelationResult, correlation_tensor, correlation_tensor_pv
from cp3.errors import ComputationError, ConfigError, Cp3Error
from cp3.geometry import AtomTriangle, UnitSystem, equilateral, scale_triangle, triangle_from_positions
from cp3.kernels import CosOverR, ExpOverR, InverseR, SinOverR, f_apply
from cp3.polarizability import PolarizabilityModel, State, StaticPolarizability, excited, ground
from cp3.potentials import EnergyBreakdown, energy_scan, pair_energy, three_body_closed, three_body_symmetrized
from cp3.quadrature import DEFAULT_SPEC, QuadratureSpec

__all__ = [
    "Atom",
    "AtomTriangle",
    "ComputationError",
    "ConfigError",
    "CorrelationResult",
    "CosOverR",
    "Cp3Error",
    "DEFAULT_SPEC",
    "EnergyBreakdown",
    "ExpOverR",
    "InverseR",
    "PolarizabilityModel",
    "QuadratureSpec",
    "SinOverR",
    "State",
    "StaticPolarizability",
    "UnitSystem",
    "correlation_tensor",
    "correlation_tensor_pv",
    "energy_scan",
    "equilateral",
    "excited",
    "f_apply",
    "ground",
    "pair_energy",
    "scale_triangle",
    "three_body_closed",
    "three_body_symmetrized",
    "triangle_from_positions",
]
