import cmath
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from elastic_kh.dispersion import (
    FrequencyPoint,
    bound_constants,
    check_simple_root,
    complex_sqrt_halfplane,
    decay_rates,
    dphi_dx_closed_form,
    growth_rate,
    in_xi,
    mu_pair,
    mu_residual,
    quartic_coefficients,
    quartic_roots,
    symbol_direct,
    symbol_reduced,
    verify_x2_excluded,
)
from elastic_kh.errors import DomainError
from elastic_kh.state import BackgroundState

from conftest import in_window_states

finite = st.floats(-1e6, 1e6, allow_nan=False)


def mp_mu(state, tau, eta):
    """High-precision decay rates with the principal branch (Re >= 0)."""
    mpmath.mp.dps = 40
    tau = mpmath.mpc(tau.real, tau.imag)
    c2 = mpmath.mpf(state.c) ** 2
    out = []
    for sgn in (1, -1):
        z = ((tau + sgn * 1j * state.v1_plus * eta) ** 2 + state.g_sq * eta**2) / c2 + eta**2
        out.append(complex(mpmath.sqrt(z)))
    return out


@pytest.mark.parametrize("z, w", [(2j, 1 + 1j), (4, 2), (3 + 4j, 2 + 1j), (-4, 2j), (0, 0), (-4 - 0j, 2j)])
def test_complex_sqrt_examples(z, w):
    assert complex_sqrt_halfplane(z) == pytest.approx(w, abs=1e-15)


@given(finite, finite)
def test_complex_sqrt_branch(a, b):
    z = complex(a, b)
    w = complex(complex_sqrt_halfplane(z))
    assert w.real >= 0
    assert abs(w * w - z) <= 1e-14 * max(abs(z), 1e-300) + 1e-300
    if b != 0:
        assert math.copysign(1, w.imag) == math.copysign(1, b) or w.imag == 0


def test_complex_sqrt_random_sweep():
    rng = np.random.default_rng(7)
    z = (rng.standard_normal(10_000) + 1j * rng.standard_normal(10_000)) * 10.0 ** rng.uniform(-8, 8, 10_000)
    w = complex_sqrt_halfplane(z)
    assert np.all(w.real >= 0)
    assert np.max(np.abs(w * w - z) / np.abs(z)) < 1e-14


def test_in_xi():
    assert FrequencyPoint(1.0, 0.0).in_Xi
    assert not FrequencyPoint(0.0, 1.0).in_Xi
    assert not FrequencyPoint(-1.0 + 1j, 1.0).in_Xi
    assert not in_xi(1j * 2.0, 1.0)


def test_mu_at_zero_wavenumber():
    p = mu_pair(BackgroundState.from_km(0.3, 1.0), FrequencyPoint(1.0, 0.0))
    assert p.mu_plus == pytest.approx(1.0) and p.mu_minus == pytest.approx(1.0)


def test_mu_euler_root(euler_state):
    x1 = quartic_roots(euler_state).x1
    p = mu_pair(euler_state, FrequencyPoint(x1, 1.0))
    # frozen from the 40-digit oracle below
    assert p.mu_plus == pytest.approx(0.7861513777574233 + 0.6180339887498948j, abs=1e-15)
    assert p.mu_minus == pytest.approx(np.conj(p.mu_plus), abs=1e-15)
    assert p.a == pytest.approx(math.sqrt(5) - 2, rel=1e-14)
    assert p.b == pytest.approx(0.9717365435132913, rel=1e-14)
    assert p.r == pytest.approx(1.0, rel=1e-14)
    assert p.mu_plus == pytest.approx(mp_mu(euler_state, complex(x1), 1.0)[0], abs=1e-15)


def test_mu_outside_xi():
    with pytest.raises(DomainError):
        mu_pair(BackgroundState.from_km(0, 1), FrequencyPoint(-0.5, 1.0))


@settings(max_examples=200)
@given(st.floats(1e-3, 10), st.floats(-10, 10), st.floats(-10, 10), st.floats(-3, 3), st.floats(0, 3), st.floats(0.2, 3))
def test_mu_properties(gamma, delta, eta, v, g, c):
    s = BackgroundState(1.0, v, g, 0.5 * g, c)
    p = FrequencyPoint(complex(gamma, delta), eta)
    pair = mu_pair(s, p)
    assert pair.mu_plus.real > 0 and pair.mu_minus.real > 0
    assert mu_residual(s, p) <= 1e-12 * (1 + eta**2 + abs(p.tau) ** 2) * max(1.0, 1.0 / c**2) * (1 + v * v + g * g)
    assert pair.r**2 == pytest.approx(pair.a**2 + pair.b**2, rel=1e-12)
    ref = mp_mu(s, p.tau, eta)
    assert pair.mu_plus == pytest.approx(ref[0], rel=1e-12, abs=1e-300)
    assert pair.mu_minus == pytest.approx(ref[1], rel=1e-12, abs=1e-300)


@given(st.floats(1e-3, 10), st.floats(-10, 10), st.floats(-3, 3), st.floats(0, 3))
def test_mu_conjugate_for_real_tau(gamma, eta, v, g):
    s = BackgroundState(1.0, v, g, 0.0, 1.0)
    pair = mu_pair(s, FrequencyPoint(gamma, eta))
    assert pair.mu_minus == pytest.approx(np.conj(pair.mu_plus), rel=1e-13, abs=1e-300)


def test_symbol_zero_wavenumber(elastic_state):
    for tau in (0.3, 1 + 2j, 5 - 1j):
        p = FrequencyPoint(tau, 0.0)
        assert symbol_direct(elastic_state, p) == pytest.approx(tau**2, rel=1e-14)
        assert symbol_reduced(elastic_state, p) == pytest.approx(tau**2, rel=1e-14)


@pytest.mark.parametrize("state", in_window_states())
@pytest.mark.parametrize("eta", [0.1, 1.0, 7.0, -3.0])
def test_symbol_vanishes_on_shell(state, eta):
    p = FrequencyPoint(growth_rate(state, eta), eta)
    tol = 1e-10 * eta**2 * state.c**2
    assert abs(symbol_direct(state, p)) <= tol
    assert abs(symbol_reduced(state, p)) <= tol


def test_symbol_even_in_eta():
    rng = np.random.default_rng(3)
    s = BackgroundState(1.0, 1.1, 0.4, -0.2, 1.3)
    tau = rng.uniform(0.01, 4, 200) + 1j * rng.uniform(-4, 4, 200)
    eta = rng.uniform(-4, 4, 200)
    a = symbol_direct(s, FrequencyPoint(tau, eta))
    b = symbol_direct(s, FrequencyPoint(tau, -eta))
    assert np.allclose(a, b, rtol=1e-12, atol=1e-12)


def test_symbol_forms_agree():
    rng = np.random.default_rng(11)
    for _ in range(5):
        s = BackgroundState(1.0, rng.uniform(-3, 3), rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(0.5, 2))
        tau = rng.uniform(1e-3, 5, 1000) + 1j * rng.uniform(-5, 5, 1000)
        eta = rng.uniform(-5, 5, 1000)
        p = FrequencyPoint(tau, eta)
        d = symbol_direct(s, p)
        r = symbol_reduced(s, p)
        assert np.all(np.abs(d - r) <= 1e-10 * np.maximum(np.abs(d), 1.0))


def test_quartic_euler(euler_state):
    r = quartic_roots(euler_state)
    assert r.x1_sq == pytest.approx(math.sqrt(5) - 2, rel=1e-14)
    assert r.x2_sq == pytest.approx(-math.sqrt(5) - 2, rel=1e-14)
    assert r.lam == r.x1_sq
    assert r.y2**2 == pytest.approx(math.sqrt(5) + 2, rel=1e-14)


def quartic_oracle(state):
    _, p, q = quartic_coefficients(state)
    roots = np.roots([1.0, 0.0, p, 0.0, q])
    sq = np.sort_complex(roots**2)
    return sorted({round(float(z.real), 9) for z in sq})


@pytest.mark.parametrize("K, M", [(0, 1), (0.3, 0.9), (1, 1.5), (2, 2.1), (1, 0.5), (0, 2.0)])
def test_quartic_matches_companion_roots(K, M):
    s = BackgroundState.from_km(K, M)
    r = quartic_roots(s)
    got = sorted([round(r.x1_sq, 9), round(r.x2_sq, 9)])
    assert got == pytest.approx(quartic_oracle(s), abs=2e-9)
    _, p, q = quartic_coefficients(s)
    scale = 1 + abs(p) ** 2 + abs(q)
    for x in (r.x1_sq, r.x2_sq):
        assert abs(x * x + p * x + q) <= 1e-10 * scale
    assert r.x1_sq + r.x2_sq == pytest.approx(-2 * (s.v1_plus**2 + s.g_sq + s.c**2), rel=1e-10)


@pytest.mark.parametrize("K", [0.0, 0.3, 1.0, 2.0])
def test_quartic_endpoints(K):
    assert abs(quartic_roots(BackgroundState.from_km(K, K)).x1_sq) <= 1e-12
    assert abs(quartic_roots(BackgroundState.from_km(K, math.sqrt(K * K + 2))).x1_sq) <= 1e-12
    for M in np.linspace(K, math.sqrt(K * K + 2), 22)[1:-1]:
        assert quartic_roots(BackgroundState.from_km(K, M)).x1_sq > 0
    below = [0.5 * K] if K > 0 else []
    for M in below + [math.sqrt(K * K + 2) + 0.3]:
        assert quartic_roots(BackgroundState.from_km(K, M)).x1_sq < 0


def test_quartic_elastic_value():
    assert quartic_roots(BackgroundState.from_km(1, 1.5)).x1_sq == pytest.approx(math.sqrt(19) - 4.25, rel=1e-13)


def test_growth_rate(euler_state):
    assert growth_rate(euler_state, 4.0) == pytest.approx(4 * math.sqrt(math.sqrt(5) - 2), rel=1e-14)
    assert growth_rate(euler_state, 4.0) == pytest.approx(1.9434731, abs=1e-7)
    assert growth_rate(euler_state, 0.0) == 0.0
    assert growth_rate(euler_state, -4.0) == growth_rate(euler_state, 4.0)
    with pytest.raises(DomainError, match="no unstable root"):
        growth_rate(BackgroundState.from_km(0, 1.5), 1.0)


def test_growth_rate_maximizer():
    s = BackgroundState.from_km(0.0, math.sqrt(3) / 2)
    assert quartic_roots(s).x1 == pytest.approx(0.5, rel=1e-14)
    scan = [quartic_roots(BackgroundState.from_km(0.0, M)).x1 for M in np.linspace(0.01, 1.41, 2001)]
    assert max(scan) == pytest.approx(0.5, abs=1e-6)
    assert max(scan) <= 0.5 + 1e-15


def test_simple_root_euler(euler_state):
    chk = check_simple_root(euler_state, 1.0)
    assert abs(chk.phi_value) <= 1e-10
    # closed form 2 X1 (X1^2 + v^2 + G^2 + c^2) / (c^4 mu~+ mu~-), frozen
    assert chk.dphi_dX == pytest.approx(2.172868967, rel=1e-8)
    assert dphi_dx_closed_form(euler_state) == pytest.approx(chk.dphi_dX, rel=1e-8)


def test_simple_root_eta_independent(elastic_state):
    assert check_simple_root(elastic_state, 1.0) == check_simple_root(elastic_state, 7.0)


@pytest.mark.parametrize("K", [0.0, 0.5, 1.0, 2.0])
def test_simple_root_positive_slope(K):
    for M in np.linspace(K + 0.02, math.sqrt(K * K + 2) - 0.02, 15):
        s = BackgroundState.from_km(K, M)
        chk = check_simple_root(s, 1.0)
        assert abs(chk.phi_value) <= 1e-10
        assert chk.dphi_dX > 1e-6
        assert dphi_dx_closed_form(s) == pytest.approx(chk.dphi_dX, rel=1e-6)


def test_simple_root_errors():
    with pytest.raises(DomainError):
        check_simple_root(BackgroundState.from_km(1, 0.5), 1.0)
    with pytest.raises(DomainError):
        check_simple_root(BackgroundState.from_km(0, 1), 0.0)


@pytest.mark.parametrize("K", [0.0, 0.5, 1.0])
def test_x2_root_excluded(K):
    rep = verify_x2_excluded(BackgroundState.from_km(K, 1.0 + K * 0.2))
    assert rep.distance_to_minus_one <= 1e-6
    assert not rep.in_xi


def test_x2_euler_value(euler_state):
    rep = verify_x2_excluded(euler_state)
    assert rep.y2**2 == pytest.approx(4.2360680, abs=1e-7)


def test_bound_constants_euler():
    bc = bound_constants(BackgroundState.from_km(0.0, 1.0, eps0=0.1))
    assert bc.c1 == pytest.approx(2 - 2 * (math.sqrt(1.04) - 0.02), rel=1e-12)
    assert bc.c1 == pytest.approx(0.0003921, abs=1e-7)
    assert bc.c_star >= 0.5


def test_bound_constants_window_check():
    with pytest.raises(DomainError):
        bound_constants(BackgroundState.from_km(1.0, 1.02, eps0=0.05))
    with pytest.raises(DomainError):
        bound_constants(BackgroundState.from_km(0.0, 1.4, eps0=0.05))


@given(st.floats(0, 3), st.floats(0.01, 0.3), st.floats(0, 1), st.floats(0.2, 3))
def test_bound_constants_positive(K, eps0, frac, c):
    hi = math.sqrt(K * K + 2) - eps0
    lo = K + eps0
    if hi <= lo:
        return
    s = BackgroundState.from_km(K, lo + frac * (hi - lo), c=c, eps0=eps0)
    bc = bound_constants(s)
    assert bc.c1 > 0 and bc.c_star >= 0.5 and bc.c2 > 0 and bc.c3 > 0


def test_vectorized_decay_rates_match_scalar(elastic_state):
    tau = np.array([0.5 + 1j, 2.0, 0.1 - 3j])
    eta = np.array([1.0, -2.0, 0.3])
    mp, mm = decay_rates(elastic_state, tau, eta)
    for k in range(3):
        pair = mu_pair(elastic_state, FrequencyPoint(tau[k], eta[k]))
        assert mp[k] == pair.mu_plus and mm[k] == pair.mu_minus
