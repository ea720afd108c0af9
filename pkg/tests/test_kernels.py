import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cp3.errors import AsymmetricInput, ZeroRadius
from cp3.kernels import (
    CosOverR,
    ExpOverR,
    InverseR,
    SinOverR,
    dipole_contraction,
    f_apply,
    f_apply_exp_scaled,
    ff_apply,
    potential_tensor_nonresonant,
    potential_tensor_resonant,
    triple_contraction,
)
from cp3.oracle import fd_f_apply, fd_f_apply_richardson, potential_tensor_explicit
from tests.conftest import random_rotation, rel, unit

R_FIXED = np.array([0.3, -0.4, 1.2])

# frozen from the finite-difference oracle (h = 2e-3, Richardson), 9 decimals
FROZEN = {
    "cos": (
        CosOverR(1.3),
        [[-0.742633065, -0.162143925, 0.486431775], [-0.162143925, -0.648049109, -0.6485757], [0.486431775, -0.6485757, 1.081486092]],
    ),
    "sin": (
        SinOverR(1.3),
        [[0.765438675, -0.024104237, 0.07231271], [-0.024104237, 0.77949948, -0.096416946], [0.07231271, -0.096416946, 1.036611337]],
    ),
    "exp": (
        ExpOverR(0.8),
        [[-0.440504415, -0.082267295, 0.246801886], [-0.082267295, -0.392515159, -0.329069181], [0.246801886, -0.329069181, 0.485002657]],
    ),
}


@pytest.mark.parametrize("name", sorted(FROZEN))
def test_frozen_values(name):
    kernel, expected = FROZEN[name]
    np.testing.assert_allclose(f_apply(kernel, R_FIXED), expected, rtol=0, atol=2e-9)


@pytest.mark.parametrize("R", [0.5, 2.0, 7.0])
def test_inverse_r_on_axis(R):
    np.testing.assert_allclose(f_apply(InverseR(), [0, 0, R]), np.diag([-1.0, -1.0, 2.0]) / R**3, rtol=1e-14)


def test_cos_zero_is_inverse(rng):
    for _ in range(10):
        R = unit(rng) * rng.uniform(0.1, 5)
        np.testing.assert_array_equal(f_apply(CosOverR(0.0), R), f_apply(InverseR(), R))
        assert CosOverR(0.0).value(np.linalg.norm(R)) == InverseR().value(np.linalg.norm(R))


def test_cos_on_axis_matches_explicit_bracket():
    k, r = 1.7, 2.3
    # -F[cos kc/c] equals the explicit coupling tensor with k' = k
    np.testing.assert_allclose(-f_apply(CosOverR(k), [0, 0, r]), potential_tensor_explicit(k, k, [0, 0, r]), rtol=1e-13, atol=1e-16)


@pytest.mark.parametrize("family", ["cos", "sin", "exp", "inv"])
def test_against_finite_differences(rng, family):
    for _ in range(25):
        x = rng.uniform(0.1, 10)
        R = rng.uniform(0.3, 3)
        kernel = {"cos": CosOverR, "sin": SinOverR, "exp": ExpOverR, "inv": lambda p: InverseR()}[family](x / R)
        R_vec = unit(rng) * R
        assert rel(fd_f_apply_richardson(kernel, R_vec, 0.01 * min(R, R / x)), f_apply(kernel, R_vec)) < 1e-6


def test_growing_exponential_against_fd(rng):
    R_vec = unit(rng) * 1.3
    kernel = ExpOverR(-2.0)
    assert rel(fd_f_apply_richardson(kernel, R_vec, 5e-3), f_apply(kernel, R_vec)) < 1e-7


def test_exp_scaled_matches_plain():
    R_vec = np.array([0.4, 1.1, -0.2])
    R = np.linalg.norm(R_vec)
    for u in (-1.5, 0.0, 0.7):
        np.testing.assert_allclose(np.exp(-u * R) * f_apply_exp_scaled(u, R_vec), f_apply(ExpOverR(u), R_vec), rtol=1e-13)


@given(st.floats(0.01, 10), st.floats(0.05, 50))
def test_derivatives_finite(p, R):
    for kernel in (CosOverR(p), SinOverR(p), ExpOverR(p), ExpOverR(-p / 10), InverseR()):
        assert np.all(np.isfinite(kernel.derivatives(R)))


def test_symmetric_and_rotation_covariant(rng):
    for kernel in (CosOverR(1.1), SinOverR(0.4), ExpOverR(2.0), InverseR()):
        for _ in range(10):
            R_vec = unit(rng) * rng.uniform(0.2, 4)
            T = f_apply(kernel, R_vec)
            assert np.max(np.abs(T - T.T)) < 1e-13
            Q = random_rotation(rng)
            scale = np.max(np.abs(T))
            assert np.max(np.abs(f_apply(kernel, Q @ R_vec) - Q @ T @ Q.T)) < 1e-12 * max(scale, 1.0)


def test_zero_radius():
    with pytest.raises(ZeroRadius):
        f_apply(InverseR(), [0, 0, 1e-13])
    with pytest.raises(ZeroRadius):
        potential_tensor_nonresonant(1.0, 1.0, [0, 0, 0])
    with pytest.raises(ZeroRadius):
        potential_tensor_resonant(1.0, [0, 0, 0])


def test_static_coupling():
    c_vec = np.array([0.3, -1.0, 0.5])
    c = np.linalg.norm(c_vec)
    n = c_vec / c
    expected = (np.eye(3) - 3 * np.outer(n, n)) / c**3
    np.testing.assert_allclose(potential_tensor_nonresonant(0.0, 0.0, c_vec), expected, rtol=1e-13)
    np.testing.assert_allclose(-f_apply(InverseR(), c_vec), expected, rtol=1e-13)


def test_equal_wavenumbers_and_swap():
    c_vec = np.array([1.0, 2.0, -0.5])
    np.testing.assert_allclose(potential_tensor_nonresonant(1.4, 1.4, c_vec), -f_apply(CosOverR(1.4), c_vec), rtol=1e-15)
    np.testing.assert_array_equal(potential_tensor_nonresonant(0.3, 2.2, c_vec), potential_tensor_nonresonant(2.2, 0.3, c_vec))


def test_explicit_bracket_agreement(rng):
    for _ in range(100):
        k, kp = rng.uniform(0, 5, size=2)
        c_vec = unit(rng) * rng.uniform(0.2, 5)
        assert rel(potential_tensor_explicit(k, kp, c_vec), potential_tensor_nonresonant(k, kp, c_vec)) < 1e-12


def test_explicit_bracket_frozen():
    expected = [
        [0.946660053698, -0.255770611147, 1.278853055734],
        [-0.255770611147, 1.483778337107, 0.511541222294],
        [1.278853055734, 0.511541222294, -0.971619529903],
    ]
    np.testing.assert_allclose(potential_tensor_nonresonant(0.7, 1.9, [0.5, 0.2, -1.0]), expected, atol=1e-12)


def test_resonant_equals_nonresonant_at_k0(rng):
    # a single cosine without the 1/2 equals the averaged pair at k = k' = k0
    for _ in range(10):
        k0 = rng.uniform(0.1, 4)
        c_vec = unit(rng) * rng.uniform(0.3, 5)
        np.testing.assert_allclose(potential_tensor_resonant(k0, c_vec), potential_tensor_nonresonant(k0, k0, c_vec), rtol=1e-14)


def test_resonant_static_limit():
    c_vec = np.array([0.0, 0.6, 0.8]) * 2.0
    n = c_vec / 2.0
    np.testing.assert_allclose(potential_tensor_resonant(1e-9, c_vec), (np.eye(3) - 3 * np.outer(n, n)) / 8.0, rtol=1e-12)


def test_resonant_at_half_wave_against_fd():
    k0, c = 1.0, np.pi
    fd = -fd_f_apply(CosOverR(k0), [0, 0, c], 1e-3)
    assert rel(potential_tensor_resonant(k0, [0, 0, c]), fd) < 1e-6


def test_triple_contraction_basics(rng):
    eye = np.eye(3)
    assert triple_contraction(eye, eye, eye) == 3.0
    S = [(lambda m: m + m.T)(rng.normal(size=(3, 3))) for _ in range(3)]
    assert triple_contraction(S[0], S[1], np.zeros((3, 3))) == 0.0
    base = triple_contraction(*S)
    assert abs(triple_contraction(S[1], S[2], S[0]) - base) < 1e-13 * max(1, abs(base))
    assert abs(triple_contraction(S[2], S[0], S[1]) - base) < 1e-13 * max(1, abs(base))


def test_asymmetric_rejected():
    A = np.arange(9.0).reshape(3, 3)
    with pytest.raises(AsymmetricInput):
        triple_contraction(A, np.eye(3), np.eye(3))
    with pytest.raises(AsymmetricInput):
        dipole_contraction(np.eye(3), A, np.eye(3), [0, 0, 1])


def test_dipole_contraction_brute_force(rng):
    S = [(lambda m: m + m.T)(rng.normal(size=(3, 3))) for _ in range(3)]
    mu = rng.normal(size=3)
    Tc, Tb, Ta = S
    brute = 0.0
    for l in range(3):
        for m in range(3):
            for n in range(3):
                for p in range(3):
                    brute += Tc[l, m] * Tb[l, n] * Ta[m, p] * mu[n] * mu[p]
    assert dipole_contraction(Tc, Tb, Ta, mu) == pytest.approx(brute, rel=1e-13)
    eye = np.eye(3)
    assert dipole_contraction(eye, eye, eye, [0, 0, 2.0]) == pytest.approx(4.0)
    assert dipole_contraction(Tc, Tb, Ta, np.zeros(3)) == 0.0


def test_isotropic_average_monte_carlo(rng):
    S = [(lambda m: m + m.T)(rng.normal(size=(3, 3))) for _ in range(3)]
    Tc, Tb, Ta = S
    n = 1_000_000
    mu = rng.normal(size=(n, 3))
    mu /= np.linalg.norm(mu, axis=1, keepdims=True)
    # (T_b mu) . T_c (T_a mu) averaged over directions
    avg = np.mean(np.sum((mu @ Tb.T) * (mu @ (Tc @ Ta).T), axis=1))
    target = triple_contraction(Tc, Tb, Ta) / 3
    scale = np.linalg.norm(Tb) * np.linalg.norm(Tc @ Ta)
    assert abs(avg - target) < 1e-3 * scale


def test_ff_apply_factorizes():
    # G(R, R') = g(R) h(R') gives F^R g (x) F^R' h
    R_vec, Rp_vec = np.array([0.3, 1.0, -0.2]), np.array([-0.7, 0.1, 0.9])
    g, h = CosOverR(1.2), ExpOverR(0.5)
    dg = g.derivatives(np.linalg.norm(R_vec))
    dh = h.derivatives(np.linalg.norm(Rp_vec))
    D = np.outer(dg, dh)
    expected = np.einsum("ln,mp->lnmp", f_apply(g, R_vec), f_apply(h, Rp_vec))
    np.testing.assert_allclose(ff_apply(D, R_vec, Rp_vec), expected, rtol=1e-13, atol=1e-15)
