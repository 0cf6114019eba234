import math

import numpy as np
import pytest
from scipy.integrate import quad

from mmslab import (CurvatureProfile, SignedDensity, heat_apply, heat_operator,
                    j_profile, laplacian_apply, r_profile, spectrum,
                    two_point_space)
from conftest import sin_density


# ---------------------------------------------------------------------------
# Laplacian
# ---------------------------------------------------------------------------

def test_laplacian_constant_is_zero(circle64):
    out = laplacian_apply(circle64, np.full(circle64.n, 3.7))
    assert np.max(np.abs(out.values)) < 1e-12


def test_laplacian_two_point():
    sp = two_point_space(1.0)
    out = laplacian_apply(sp, np.array([1.0, -1.0]))
    assert out.values == pytest.approx([-2.0, 2.0], abs=0)


def test_laplacian_sin_second_difference(circle256):
    h = 2 * math.pi / 256
    f = sin_density(circle256)
    out = laplacian_apply(circle256, f)
    assert np.max(np.abs(out.values + f)) <= h * h


def test_laplacian_divergence_and_symmetry(circle64, rng):
    m = circle64.measure
    for _ in range(10):
        f = rng.standard_normal(circle64.n)
        g = rng.standard_normal(circle64.n)
        lf = laplacian_apply(circle64, f).values
        lg = laplacian_apply(circle64, g).values
        assert abs(np.sum(lf * m)) < 1e-10
        assert np.sum(lf * g * m) == pytest.approx(np.sum(f * lg * m), abs=1e-10)


# ---------------------------------------------------------------------------
# spectrum
# ---------------------------------------------------------------------------

def test_spectrum_ground_state(circle64):
    dec = spectrum(circle64)
    assert dec.eigenvalues[0] == 0.0
    assert dec.eigenvalues[1] > 0
    const = circle64.total_mass ** -0.5
    assert np.max(np.abs(dec.eigenfunctions[:, 0] - const)) < 1e-10


def test_spectrum_two_point():
    dec = spectrum(two_point_space(1.0))
    assert dec.eigenvalues == pytest.approx([0.0, 2.0], abs=1e-12)
    phi1 = dec.eigenfunctions[:, 1]
    assert phi1[0] == pytest.approx(2 ** -0.5, rel=1e-12)
    assert phi1[0] == pytest.approx(-phi1[1], rel=1e-12)


def test_spectrum_circle_closed_form(circle256):
    h = 2 * math.pi / 256
    dec = spectrum(circle256)
    for k in range(1, 6):
        lam = 2 * (1 - math.cos(k * h)) / h ** 2
        # doubly degenerate pair
        assert dec.eigenvalues[2 * k - 1] == pytest.approx(lam, rel=1e-10)
        assert dec.eigenvalues[2 * k] == pytest.approx(lam, rel=1e-10)


def test_spectrum_invariants(circle64):
    dec = spectrum(circle64)
    m = circle64.measure
    assert np.all(np.diff(dec.eigenvalues) > -1e-12)
    res = dec.residuals()
    assert np.all(res <= 1e-10 * (1 + dec.eigenvalues))
    gram = dec.eigenfunctions.T @ (dec.eigenfunctions * m[:, None])
    assert np.max(np.abs(gram - np.eye(circle64.n))) < 1e-9
    means = m @ dec.eigenfunctions[:, 1:]
    assert np.max(np.abs(means)) < 1e-9
    # deterministic sign convention
    for i in range(dec.k):
        col = dec.eigenfunctions[:, i]
        nz = np.flatnonzero(np.abs(col) > 1e-12 * np.max(np.abs(col)))
        assert col[nz[0]] > 0


def test_spectrum_slice_and_errors(circle64):
    dec = spectrum(circle64, 5)
    assert dec.k == 5
    with pytest.raises(ValueError):
        spectrum(circle64, 0)
    with pytest.raises(ValueError):
        spectrum(circle64, circle64.n + 1)


# ---------------------------------------------------------------------------
# heat semigroup
# ---------------------------------------------------------------------------

def test_heat_time_zero_identity(circle64, rng):
    f = rng.standard_normal(circle64.n)
    out = heat_apply(circle64, f, 0.0)
    assert np.max(np.abs(out.values - f)) < 1e-10


def test_heat_eigenfunction_decay_every_pair(circle64):
    dec = spectrum(circle64)
    for i in range(dec.k):
        phi = dec.eigenfunctions[:, i]
        # per-mode time keeps the decay factor moderate, so the relative
        # comparison stays above the spectral sum's float noise floor
        t = 0.3 / max(dec.eigenvalues[i], 1.0)
        out = heat_apply(circle64, phi, t)
        expected = math.exp(-dec.eigenvalues[i] * t) * phi
        scale = np.max(np.abs(expected))
        assert np.max(np.abs(out.values - expected)) < 1e-10 * scale
    # low modes also at a long horizon
    for i in (0, 1, 2, 3):
        phi = dec.eigenfunctions[:, i]
        out = heat_apply(circle64, phi, 0.9)
        expected = math.exp(-dec.eigenvalues[i] * 0.9) * phi
        assert np.max(np.abs(out.values - expected)) < 1e-10 * np.max(np.abs(expected))


def test_heat_mass_and_maximum_principle(circle64, rng):
    m = circle64.measure
    for _ in range(20):
        f = rng.standard_normal(circle64.n)
        t = float(rng.uniform(0, 5))
        out = heat_apply(circle64, f, t).values
        mass_in = np.sum(f * m)
        assert abs(np.sum(out * m) - mass_in) <= 1e-10 * max(abs(mass_in), 1.0)
        assert out.max() <= f.max() + 1e-10
        assert out.min() >= f.min() - 1e-10


def test_heat_positivity_preservation(circle64, rng):
    rho = rng.uniform(0.0, 1.0, circle64.n)
    rho /= np.sum(rho * circle64.measure)
    out = heat_apply(circle64, rho, 0.7).values
    assert out.min() >= -1e-10
    assert np.sum(out * circle64.measure) == pytest.approx(1.0, abs=1e-10)


def test_heat_semigroup_property(circle64, rng):
    f = rng.standard_normal(circle64.n)
    a = heat_apply(circle64, heat_apply(circle64, f, 0.2), 0.5).values
    b = heat_apply(circle64, f, 0.7).values
    assert np.max(np.abs(a - b)) <= 1e-9 * max(np.max(np.abs(b)), 1.0)


def test_heat_contractions(circle64, rng):
    for _ in range(100):
        f = SignedDensity(circle64, rng.standard_normal(circle64.n))
        for t in rng.uniform(0, 10, 10):
            out = heat_apply(circle64, f, float(t))
            assert out.norm_l1 <= f.norm_l1 * (1 + 1e-12) + 1e-12
            assert out.norm_linf <= f.norm_linf * (1 + 1e-12) + 1e-12


def test_heat_negative_time_rejected(circle64):
    with pytest.raises(ValueError):
        heat_apply(circle64, np.ones(circle64.n), -0.1)


def test_heat_operator_is_stochastic(two_point):
    P = heat_operator(two_point, 0.4)
    expected = 0.5 * (1 - math.exp(-0.8))
    assert P[0, 1] == pytest.approx(expected, rel=1e-12)
    assert P @ np.ones(2) == pytest.approx([1.0, 1.0], abs=1e-12)


def test_degenerate_cluster_projector_invariance(circle64, rng):
    dec = spectrum(circle64)
    clusters = [c for c in dec.clusters() if len(c) > 1]
    assert clusters, "circle spectrum must contain degenerate pairs"
    pair = clusters[0]
    phi = dec.eigenfunctions.copy()
    theta = rng.uniform(0, 2 * math.pi)
    rot = np.array([[math.cos(theta), -math.sin(theta)],
                    [math.sin(theta), math.cos(theta)]])
    phi[:, pair] = phi[:, pair] @ rot
    t = 0.8
    m = circle64.measure
    ref = heat_operator(circle64, t)
    alt = (phi * np.exp(-dec.eigenvalues * t)) @ (phi.T * m)
    assert np.max(np.abs(ref - alt)) < 1e-10


# ---------------------------------------------------------------------------
# curvature profiles
# ---------------------------------------------------------------------------

def test_profile_reference_values():
    assert r_profile(0.0, 1.0) == 2.0
    assert j_profile(0.0, math.pi) == pytest.approx(2.0, rel=1e-14)
    assert r_profile(1.0, math.log(2) / 2) == pytest.approx(1.0, rel=1e-12)
    assert j_profile(1.0, 50.0) == pytest.approx(math.sqrt(math.pi / 2), rel=1e-10)


def test_profile_positive_and_increasing():
    # strictly increasing until the K < 0 / K > 0 asymptotes saturate in floats
    ts = np.geomspace(1e-4, 2.0, 40)
    tail = np.geomspace(2.0, 50.0, 20)
    for K in (-2.0, -0.5, 0.0, 0.5, 2.0):
        rs = [r_profile(K, t) for t in ts]
        js = [j_profile(K, t) for t in ts]
        assert all(v > 0 for v in rs)
        assert all(v > 0 for v in js)
        assert np.all(np.diff(rs) > 0)
        assert np.all(np.diff(js) > 0)
        assert np.all(np.diff([r_profile(K, t) for t in tail]) >= 0)
        assert np.all(np.diff([j_profile(K, t) for t in tail]) >= 0)


def test_profile_small_k_continuity():
    for t in (0.01, 1.0, 50.0):
        assert r_profile(1e-12, t) == 2 * t
        assert j_profile(-1e-12, t) == 2 * math.sqrt(t / math.pi)
    # approaching K = 0 smoothly from both sides
    for K in (1e-6, -1e-6):
        assert r_profile(K, 1.0) == pytest.approx(2.0, rel=1e-5)
        assert j_profile(K, 1.0) == pytest.approx(2 / math.sqrt(math.pi), rel=1e-5)


def test_profile_quadrature_consistency():
    for K in (-2.0, -0.5, 0.0, 0.5, 2.0):
        for t in (0.01, 0.1, 1.0):
            val, err = quad(lambda s: math.sqrt(2.0 / (math.pi * r_profile(K, s))),
                            0.0, t, points=[0.0], limit=200)
            assert j_profile(K, t) == pytest.approx(val, rel=1e-8)


def test_profile_errors_and_wrapper():
    with pytest.raises(ValueError):
        r_profile(1.0, 0.0)
    with pytest.raises(ValueError):
        j_profile(-1.0, -0.5)
    prof = CurvatureProfile(2.0)
    assert prof.r(0.5) == r_profile(2.0, 0.5)
    assert prof.j(0.5) == j_profile(2.0, 0.5)
