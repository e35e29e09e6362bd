"""Acceptance criteria 1-10, each at its stated tolerance and runtime budget.

Every test appends one "criterion N: PASS/FAIL ..." line that is printed in the
terminal summary, then asserts.
"""

import math
import time

import numpy as np
import pytest

from elastic_kh.dispersion import (
    FrequencyPoint,
    bound_constants,
    decay_rates,
    quartic_roots,
    symbol_direct,
    symbol_reduced,
)
from elastic_kh.hadamard import find_n_star, illposedness_table, sequence_initial_norms
from elastic_kh.modes import ExponentialProfile, boundary_residuals, build_mode, interior_residual
from elastic_kh.norms import QuadratureGrid, SpectralDensity, halfspace_norm_exponential, halfspace_norm_quadrature
from elastic_kh.simulator import (
    Grid1D,
    SimState,
    assemble_generator,
    energy_monitor,
    evolve,
    leading_eigenpair,
    max_stable_dt,
    measure_growth,
    sample_mode,
    spectral_abscissa,
)
from elastic_kh.state import BackgroundState, Classification, stability_window

import conftest


def report(number, ok, detail, elapsed, budget):
    ok = bool(ok) and elapsed < budget
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'} {detail} [{elapsed:.2f}s / {budget:g}s]"
    conftest.ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def test_criterion_01_window_endpoints():
    t0 = time.perf_counter()
    worst_end, worst_inner = 0.0, math.inf
    for K in (0.0, 0.3, 1.0, 2.0):
        for c in (1.0, 2.5):
            for M in (K, math.sqrt(K * K + 2)):
                worst_end = max(worst_end, abs(quartic_roots(BackgroundState.from_km(K, M, c=c)).x1_sq) / c**2)
            for M in np.linspace(K, math.sqrt(K * K + 2), 22)[1:-1]:
                worst_inner = min(worst_inner, quartic_roots(BackgroundState.from_km(K, M, c=c)).x1_sq)
    ok = worst_end <= 1e-10 and worst_inner > 0
    assert report(1, ok, f"max |x1_sq|/c^2 at endpoints {worst_end:.2e}, min interior x1_sq {worst_inner:.3e}", time.perf_counter() - t0, 1)


def test_criterion_02_euler_reduction():
    t0 = time.perf_counter()
    eps0 = 0.05
    ok = True
    for c in (1.0, 3.0):
        for M, expect in ((eps0, Classification.IN_UNIFORM), (1.0, Classification.IN_UNIFORM),
                          (math.sqrt(2) - eps0, Classification.IN_UNIFORM), (eps0 / 2, Classification.MARGINAL),
                          (math.sqrt(2) - eps0 / 2, Classification.MARGINAL), (math.sqrt(2) + 0.01, Classification.ABOVE)):
            st = BackgroundState.from_km(0.0, M, c=c, eps0=eps0)
            ok &= stability_window(st).classification == expect
        win = stability_window(BackgroundState.from_km(0.0, 1.0, c=c, eps0=eps0))
        lo, hi = (win.u_low + c * win.eps0) / c, (win.u_upp - c * win.eps0) / c
        ok &= abs(lo - eps0) <= 1e-15 and abs(hi - (math.sqrt(2) - eps0)) <= 1e-15
    err = abs(quartic_roots(BackgroundState.from_km(0.0, 1.0)).x1_sq - (math.sqrt(5) - 2))
    ok &= err <= 1e-12
    assert report(2, ok, f"window [eps0, sqrt2-eps0] in Mach units, |x1_sq(M=1)-(sqrt5-2)| = {err:.1e}", time.perf_counter() - t0, 1)


def test_criterion_03_symbol_equivalence():
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(5):
        st = BackgroundState(1.0, rng.uniform(-3, 3), rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(0.3, 3))
        n = 10_000
        tau = rng.uniform(1e-3, 10, n) + 1j * rng.uniform(-10, 10, n)
        eta = rng.uniform(-10, 10, n)
        p = FrequencyPoint(tau, eta)
        diff = np.abs(symbol_direct(st, p) - symbol_reduced(st, p))
        scale = np.maximum(1.0, np.abs(tau) ** 2 + eta**2 * st.c**2)
        worst = max(worst, float(np.max(diff / scale)))
    assert report(3, worst <= 1e-10, f"max scaled difference {worst:.2e} over 5 x 1e4 points", time.perf_counter() - t0, 5)


def test_criterion_04_root_identities():
    t0 = time.perf_counter()
    prod = mod = 0.0
    for st in conftest.in_window_states():
        X1 = quartic_roots(st).x1
        for eta in (0.1, 1.0, 10.0, 100.0):
            mp, mm = decay_rates(st, X1 * eta, eta)
            prod = max(prod, abs(mp * mm - eta**2) / eta**2)
            mod = max(mod, abs(abs(mp) - eta) / eta, abs(abs(mm) - eta) / eta)
    ok = prod <= 1e-10 and mod <= 1e-10
    assert report(4, ok, f"|mu+mu- - eta^2|/eta^2 {prod:.1e}, ||mu|-|eta||/|eta| {mod:.1e}", time.perf_counter() - t0, 1)


def test_criterion_05_mode_exactness():
    t0 = time.perf_counter()
    depths = np.linspace(0.0, 10.0, 50)
    worst = 0.0
    for st in conftest.in_window_states():
        for eta in (0.3, 1.0, 4.0, -2.0):
            mode = build_mode(st, eta, g_hat=0.7 - 0.2j)
            worst = max(worst, interior_residual(st, mode, depths), *boundary_residuals(st, mode).values())
    assert report(5, worst <= 1e-10, f"max relative residual {worst:.1e} at 50 depths", time.perf_counter() - t0, 1)


def test_criterion_06_bound_sandwiches():
    t0 = time.perf_counter()
    slack = 1e-12
    eps0 = 0.05
    ok = True
    margins = []
    for K in (0.0, 1.0):
        for c in (1.0, 2.0):
            s = math.sqrt(K * K + 2)
            for M in np.linspace(K + eps0, s - eps0, 200):
                st = BackgroundState.from_km(K, M, c=c, eps0=eps0)
                bc = bound_constants(st)
                eta = 1.0
                tau = quartic_roots(st).x1 * eta
                mp, mm = decay_rates(st, tau, eta)
                v = st.v1_plus
                for mu, sgn in ((mp, 1), (mm, -1)):
                    q1 = abs((mp - mm) / mu) ** 2
                    q2 = abs(mu / (mp + mm))
                    adv = tau + sgn * 1j * v * eta
                    D = adv**2 + st.g_sq * eta**2
                    q3 = abs(1j * eta * adv / D)
                    q4 = abs(1j * eta / adv) ** 2
                    checks = [
                        # C1 is attained at M = K + eps0; it is computed by cancellation
                        bc.c1 - slack <= q1 < 4,
                        0.5 < q2 <= bc.c_star * (1 + slack),
                        s / (2 * c) < q3 <= bc.c2 / c * (1 + slack),
                        1 / (c * c * (K * K + 2)) < q4 <= bc.c3 * (1 + slack),
                    ]
                    ok &= all(checks)
                    margins.append(q1 / bc.c1)
    assert report(6, ok, f"all four sandwiches hold on 2 x 200 M points (min q1/C1 = {min(margins):.12f})", time.perf_counter() - t0, 5)


def random_profile_density(rng):
    lo = rng.uniform(-3, 2)
    band = (lo, lo + rng.uniform(0.5, 2))
    cu = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    cl = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    du = (rng.uniform(0.6, 1.5), rng.uniform(-0.3, 0.3), rng.uniform(-1.5, 1.5))
    dl = (rng.uniform(0.6, 1.5), rng.uniform(-0.3, 0.3), rng.uniform(-1.5, 1.5))

    def coef(cs, e):
        return cs[0] + cs[1] * e + cs[2] * np.sin(e)

    def decay(ds, e):
        return ds[0] + ds[1] * np.cos(e) + 1j * ds[2] * e

    def amp(eta):
        eta = np.asarray(eta, dtype=float)
        return [(ExponentialProfile(coef(cu, eta), decay(du, eta), "upper"),
                 ExponentialProfile(coef(cl, eta), decay(dl, eta), "lower"))]

    cache = {}

    def sampler(eta, x2, order, side):
        key = (side, eta.tobytes(), x2.tobytes())
        if key not in cache:
            ds, cs = (du, cu) if side == "upper" else (dl, cl)
            rate = (-1 if side == "upper" else 1) * decay(ds, eta)[:, None]
            cache[key] = (rate, coef(cs, eta)[:, None] * np.exp(rate * x2[None, :]))
        rate, base = cache[key]
        return base * rate**order

    return SpectralDensity(amp, band), sampler, band


def test_criterion_07_norm_engine():
    t0 = time.perf_counter()
    rng = np.random.default_rng(77)
    worst = 0.0
    for _ in range(20):
        density, sampler, band = random_profile_density(rng)
        grid = QuadratureGrid(band, eta_points=101, x2_max=40.0, x2_points=4001)
        for j in range(5):
            closed = halfspace_norm_exponential(density, j)
            numeric = halfspace_norm_quadrature(sampler, j, grid)
            worst = max(worst, abs(numeric.value - closed) / closed)
    assert report(7, worst <= 1e-6, f"max relative difference {worst:.1e} (20 profiles, j=0..4)", time.perf_counter() - t0, 10)


def test_criterion_08_hadamard_table():
    t0 = time.perf_counter()
    st = BackgroundState.from_km(0.0, 1.0)
    j = k = 3
    T0 = 1.0
    ns = [5, 10, 20, 40]
    rows = illposedness_table(st, j, k, T0, ns)
    X1 = quartic_roots(st).x1
    # initial norms: n * ||U_n(0)|| is bounded (within 10% growth) and each component obeys C/n
    scaled = [r.n * 10**r.initial.log10_combined for r in rows]
    law = all(b <= 1.1 * a for a, b in zip(scaled, scaled[1:]))
    law &= all(sequence_initial_norms(st, n, j).within_bounds for n in ns)
    ratios = [r.log10_ratio for r in rows]
    increasing = all(b > a for a, b in zip(ratios, ratios[1:]))
    floor = all(r.log10_ratio >= X1 * r.n * T0 / math.log(10) - 2 for r in rows)
    n_star = find_n_star(st, 2.0, T0, j, k)
    at_star = illposedness_table(st, j, k, T0, [n_star])[0]
    consistent = math.isfinite(n_star) and at_star.log10_ratio >= math.log10(2.0)
    consistent &= all(r.log10_ratio >= math.log10(2.0) for r in rows if r.n >= n_star)
    ok = law and increasing and floor and consistent
    detail = f"n*||U(0)|| {[round(x, 4) for x in scaled]}, log10 ratios {[round(x, 3) for x in ratios]}, n_star={n_star}"
    assert report(8, ok, detail, time.perf_counter() - t0, 30)


def abscissa_error(K, M, eta, N, L=40.0):
    st = BackgroundState.from_km(K, M)
    gen = assemble_generator(st, eta, Grid1D(L, N))
    pred = quartic_roots(st).x1 * eta
    return abs(spectral_abscissa(gen, "semigroup") - pred) / pred


def test_criterion_09_simulator():
    t0 = time.perf_counter()
    ok = True
    parts = []
    for K, M, eta in ((0.0, 1.0, 1.0), (0.5, 1.2, 1.0), (1.0, 1.5, 1.0)):
        e512 = abscissa_error(K, M, eta, 512)
        e1024 = abscissa_error(K, M, eta, 1024)
        ok &= e512 <= 0.02 and e1024 < e512
        parts.append(f"({K},{M},{eta}) {e512:.1e}->{e1024:.1e}")
    st = BackgroundState.from_km(0.0, 1.0)
    gen = assemble_generator(st, 1.0, Grid1D(40.0, 512))
    traj = evolve(gen, sample_mode(build_mode(st, 1.0), gen.grid), max_stable_dt(gen), 8.0, save_every=1000)
    fit = measure_growth(traj)
    rate_err = abs(fit.rate - quartic_roots(st).x1) / quartic_roots(st).x1
    ok &= rate_err <= 0.02
    below = BackgroundState.from_km(1.0, 0.5)
    worst_below = 0.0
    for N in (128, 256):
        gen = assemble_generator(below, 1.0, Grid1D(40.0, N))
        worst_below = max(worst_below, leading_eigenpair(gen, "dense").value.real)
    ok &= worst_below <= 1e-3
    detail = f"abscissa rel err {'; '.join(parts)}; march rate err {rate_err:.1e}; below-window max Re {worst_below:.1e}"
    assert report(9, ok, detail, time.perf_counter() - t0, 300)


def test_criterion_10_energy_identity():
    t0 = time.perf_counter()
    st = BackgroundState(1.0, 0.0, 0.3, 0.4, 1.0)
    eta = 1.5
    res = []
    for N in (101, 201, 401, 801):
        gen = assemble_generator(st, eta, Grid1D(20.0, N))
        y = gen.grid.nodes
        s = SimState.zeros(gen.grid, eta)
        s.upper["h"] = np.exp(-((y - 5.0) ** 2)) + 0j
        s.upper["E12"] = 0.3 * np.exp(-((y - 6.0) ** 2)) + 0j
        s.lower["w2"] = 0.4 * np.exp(-((y - 4.0) ** 2)) + 0j
        s.g_hat = 1.0
        traj = evolve(gen, s, max_stable_dt(gen), 2.0)
        res.append(float(np.max(energy_monitor(traj).residual)))
    orders = [math.log2(a / b) for a, b in zip(res, res[1:])]
    ok = min(orders) >= 3.9 and res[-1] <= 1e-6
    detail = f"residuals {[f'{r:.2e}' for r in res]}, observed orders {[round(o, 2) for o in orders]}"
    assert report(10, ok, detail, time.perf_counter() - t0, 120)
