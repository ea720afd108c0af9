import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cp3.errors import NearResonance
from cp3.polarizability import PolarizabilityModel, State, StaticPolarizability, excited, ground
from tests.conftest import unit

MU = np.array([0.3, -0.5, 0.8])


def test_excited_static_value():
    m = excited(1.7, MU)
    np.testing.assert_allclose(m.alpha_imag(0.0), -2 * np.outer(MU, MU) / 1.7, rtol=1e-15)


def test_ground_static_value_from_state_sum():
    # second-order perturbation sum over the upper level: 2 |<e|d|g>|^2 / (E_e - E_g)
    k_res = 0.6
    m = ground(k_res, MU)
    by_states = sum(2 * np.outer(MU, MU) / dE for dE in (k_res,))
    np.testing.assert_allclose(m.alpha_imag(0.0), by_states, rtol=1e-15)


def test_large_u_decay():
    m = excited(1.0, MU)
    a1, a2 = m.alpha_imag(1e3), m.alpha_imag(1e4)
    np.testing.assert_allclose(a2 * 100, a1, rtol=1e-5)
    assert np.max(np.abs(a2)) < 1e-7


def test_real_at_zero_equals_imag_at_zero():
    for m in (ground(1.3, MU), excited(0.4, MU)):
        np.testing.assert_array_equal(m.alpha_real(0.0), m.alpha_imag(0.0))
        assert m.alpha_real_scalar(0.0) == m.alpha_imag_scalar(0.0)


def test_divergence_below_resonance():
    m = ground(1.0, 1.0)
    vals = [m.alpha_real_scalar(1.0 - d) for d in (1e-2, 1e-3, 1e-4, 1e-5)]
    assert all(v > 0 for v in vals)
    assert all(b > 5 * a for a, b in zip(vals, vals[1:]))
    with pytest.raises(NearResonance):
        m.alpha_real_scalar(1.0 - 1e-7)
    with pytest.raises(NearResonance):
        m.alpha_real(1.0 + 5e-7)


def test_sign_flip_above_resonance():
    k_res = 1.3
    m = ground(k_res, MU)
    np.testing.assert_allclose(m.alpha_real(k_res * math.sqrt(2)), -2 * np.outer(MU, MU) / k_res, rtol=1e-14)


def test_real_frequency_against_shifted_resolvent():
    # Re[mu^2 (1/(k_res - z) + 1/(k_res + z))] with z = k + i eps, eps -> 0
    k_res, k = 1.3, 0.85
    m = ground(k_res, 1.0)
    vals = []
    for eps in (1e-3, 5e-4):
        z = k + 1j * eps
        vals.append((1 / (k_res - z) + 1 / (k_res + z)).real)
    extrap = (4 * vals[1] - vals[0]) / 3
    assert m.alpha_real_scalar(k) == pytest.approx(extrap, rel=1e-9)


def test_scalar_is_trace_and_unit_strength():
    for m in (ground(0.9, MU), excited(2.0, MU)):
        for u in (0.0, 0.3, 5.0):
            assert m.alpha_imag_scalar(u) == pytest.approx(np.trace(m.alpha_imag(u)), rel=1e-15)
    assert excited(1.0, [0, 0, 1.0]).alpha_imag_scalar(0.0) == -2.0


@given(st.floats(0.01, 10), st.floats(0, 100), st.floats(0.01, 3))
def test_sign_invariants(k_res, u, mu):
    assert ground(k_res, mu).alpha_imag_scalar(u) > 0
    assert excited(k_res, mu).alpha_imag_scalar(u) < 0
    assert ground(k_res, mu).alpha_imag_scalar(u) + excited(k_res, mu).alpha_imag_scalar(u) == 0


@given(st.floats(0.01, 10), st.floats(0.001, 50), st.floats(0.001, 50))
def test_magnitude_monotone(k_res, u1, u2):
    if u1 == u2:
        return
    lo, hi = sorted((u1, u2))
    m = excited(k_res, MU)
    assert abs(m.alpha_imag_scalar(hi)) < abs(m.alpha_imag_scalar(lo))


def test_rank_one_consistency(rng):
    for _ in range(20):
        mu = unit(rng) * rng.uniform(0.1, 2)
        m = excited(rng.uniform(0.1, 3), mu)
        u = rng.uniform(0, 5)
        hat = mu / np.linalg.norm(mu)
        assert np.max(np.abs(m.alpha_imag(u) - m.alpha_imag_scalar(u) * np.outer(hat, hat))) < 1e-14


def test_ground_plus_excited_tensor_cancels():
    for u in (0.0, 0.7, 12.0):
        np.testing.assert_array_equal(ground(1.1, MU).alpha_imag(u) + excited(1.1, MU).alpha_imag(u), np.zeros((3, 3)))


def test_model_construction():
    m = PolarizabilityModel(2.0, 0.5)
    np.testing.assert_array_equal(m.mu, [0, 0, 0.5])
    assert m.state is State.GROUND and not m.excited
    assert excited(1.0).excited
    assert m.with_dipole([1, 0, 0]).mu2 == 1.0
    assert m.as_dict() == {"k_res": 2.0, "mu": [0.0, 0.0, 0.5], "state": m.state.value}
    with pytest.raises(ValueError):
        PolarizabilityModel(0.0)


def test_static_surrogate():
    m = excited(1.5, MU)
    s = StaticPolarizability.frozen(m)
    assert s.alpha0 == pytest.approx(-2 * float(MU @ MU) / 1.5)
    assert s.alpha_imag_scalar(10.0) == s.alpha0
    assert s.alpha_real_scalar(3.0) == s.alpha0
