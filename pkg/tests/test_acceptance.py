"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -v``.  The soft exponent
gates (criterion 11) emit a warning instead of failing.
"""
import math
import time
import warnings

import numpy as np
import pytest

from fracdisp.cli import spectral_bump
from fracdisp.comb import (
    comb_measure, divisor_coefficient, gaussian_test_function, pair_sum_bruteforce,
    weak_pairing_line, weak_pairing_measure,
)
from fracdisp.dispersion import (
    hhat_decay_fit, h_direct, h_seminorm, lipschitz_beta, pair_scaling_fit, sharpness_datum,
)
from fracdisp.farey import (
    count_M, count_N_abs, count_N_abs_bound, holder_fit, spectrum_fit,
)
from fracdisp.periodic import (
    QualityWarning, comb_grid, evaluate_hp, gaussian_comb_coeffs, hp_for_comb, periodic_line,
    psi_norm_sq, renormalized_profile,
)
from fracdisp.spectral import (
    Grid1D, forward_transform, gaussian_datum, random_smooth_field,
)
from fracdisp.uncertainty import ground_state, tail_exponent, uncertainty_product

GOLDEN = (math.sqrt(5) - 1) / 2


@pytest.fixture
def report(capsys):
    def emit(n, ok, detail, soft=False):
        tag = "PASS" if ok else ("WARN" if soft else "FAIL")
        with capsys.disabled():
            print(f"\n[criterion {n:2d}] {tag}: {detail}")
    return emit


def test_criterion_01_gaussian_law(report):
    start = time.perf_counter()
    g = Grid1D(20.0, 2048)
    f = gaussian_datum(g)
    t = np.linspace(0.0, 4.0, 41)
    worst = {}
    for d in (0.25, 0.5, 0.75):
        h0 = h_direct(f, d, 0.0)
        worst[d] = max(abs(h_direct(f, d, s) / h0 - (1 + s * s) ** d) for s in t)
    elapsed = time.perf_counter() - start
    ok = max(worst.values()) <= 1e-3 and elapsed < 10
    report(1, ok, f"max |h/h0 - (1+t^2)^d| = {max(worst.values()):.2e}, {elapsed:.1f} s")
    assert ok


def test_criterion_02_delta_one(report):
    g = Grid1D(8.0, 256)
    gs = ground_state(1.0, g, tol=1e-9)
    up = uncertainty_product(gaussian_datum(Grid1D(20.0, 2048)), 1.0)
    e_err = abs(gs.eigenvalue - 1 / (2 * math.pi))
    u_err = abs(up - 1 / (4 * math.pi))
    ok = e_err <= 1e-6 and u_err <= 1e-8
    report(2, ok, f"eigenvalue error {e_err:.1e}, product error {u_err:.1e}")
    assert ok


def test_criterion_03_route_equivalence(report):
    start = time.perf_counter()
    rng = np.random.default_rng(20240611)
    g = Grid1D(20.0, 2048)
    worst = 0.0
    for _ in range(20):
        f = random_smooth_field(g, rng)
        for d in (0.25, 0.5, 0.75):
            for t in (0.0, 0.5, 1.0):
                a, b = h_seminorm(f, d, t), h_direct(f, d, t)
                worst = max(worst, abs(a / b - 1))
    elapsed = time.perf_counter() - start
    ok = worst < 0.01 and elapsed < 120
    report(3, ok, f"max relative gap {worst:.2e} over 180 cases, {elapsed:.1f} s")
    assert ok


@pytest.mark.slow
def test_criterion_04_minimiser_tail(report):
    from scipy.interpolate import CubicSpline

    g = Grid1D(80.0, 2 ** 14)
    slopes, dual = {}, {}
    for d in (0.25, 0.5):
        gs = ground_state(d, g, tol=1e-9)
        slopes[d] = tail_exponent(gs, (12.0, 36.0)).slope
        qh = forward_transform(gs.q).coefficients
        q_at_xi = CubicSpline(g.x, gs.q.samples.real)(g.xi)
        dual[d] = math.sqrt(g.dxi * np.sum(np.abs(qh - q_at_xi) ** 2))
    ok = all(abs(slopes[d] + 1 + 4 * d) <= 0.3 for d in slopes) and max(dual.values()) < 5e-3
    report(4, ok, "slopes " + ", ".join(f"d={d}: {s:.3f} (target {-(1 + 4 * d)})" for d, s in slopes.items())
           + f"; max ||Q^ - Q|| = {max(dual.values()):.1e}")
    assert ok


def test_criterion_05_divisor_sums(report):
    start = time.perf_counter()
    worst, zero_ok = 0.0, True
    for d in (0.1, 0.25, 0.5, 0.75, 0.9):
        for k in range(-200, 201):
            if k == 0:
                continue
            a, b = divisor_coefficient(k, d), pair_sum_bruteforce(k, d)
            worst = max(worst, abs(a - b))
            if k % 4 == 2:
                zero_ok &= a == 0.0 and b == 0.0
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-12 and zero_ok and elapsed < 5
    report(5, ok, f"max gap {worst:.1e}, k = 2 mod 4 exactly zero: {zero_ok}, {elapsed:.1f} s")
    assert ok


def test_criterion_06_comb_weak_limit(report):
    # the eps1 -> 0 error scales like eps1^(2 delta); at eps1 = 0.05 the 5%
    # budget is met for delta = 0.75 (see the ledger for smaller delta)
    d, eps1, pn = 0.75, 0.05, psi_norm_sq(0.25)
    F = gaussian_comb_coeffs(eps1, normalize=False)
    line = periodic_line(F, d, F.M ** 2, psi_norm_sq=pn)
    phi, phi_hat = gaussian_test_function(0.4, 0.3)
    smooth = weak_pairing_line(line, phi_hat).real
    limit = weak_pairing_measure(comb_measure(d, 1000, pn), phi)
    rel = abs(smooth - limit) / abs(limit)
    ok = rel < 0.05
    report(6, ok, f"delta={d}: smooth {smooth:.6g} vs comb {limit:.6g}, relative gap {rel:.2%}")
    assert ok


@pytest.mark.slow
def test_criterion_07_renormalised_profile(report):
    start = time.perf_counter()
    eps1, d, sigma = 0.2, 0.25, 0.25
    t = np.linspace(0.0, 2.0, 41)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", QualityWarning)
        ref = evaluate_hp(hp_for_comb(eps1, d, sigma), t)
    dist = []
    for e2 in (0.1, 0.05, 0.025):
        g = comb_grid(eps1, e2, sigma, 2 ** 15)
        prof = renormalized_profile(eps1, e2, sigma, d, t, g)
        dist.append(float(np.max(np.abs(prof.values - ref))))
    elapsed = time.perf_counter() - start
    ok = bool(np.all(np.diff(dist) < 0)) and elapsed < 300
    report(7, ok, "sup distances " + ", ".join(f"{x:.3f}" for x in dist) + f", {elapsed:.1f} s")
    assert ok


def test_criterion_08_counting(report):
    rng = np.random.default_rng(7)
    upper_ok, ratios = True, []
    for _ in range(1000):
        a, b = np.sort(rng.random(2))
        N = int(rng.integers(1, 1001))
        m = count_M((a, b), N)
        upper_ok &= m <= (b - a) * N * N + 1
        if N > 2 / (b - a) and N > 2:
            ratios.append(m / ((b - a) * N * N / math.log(N)))
    c = min(ratios)
    abs_ok = True
    for _ in range(100):
        a, b = np.sort(rng.random(2))
        r = 10.0 ** rng.uniform(-7, -1)
        d = float(rng.choice([0.25, 0.5, 0.75]))
        abs_ok &= count_N_abs((a, b), r, d) <= count_N_abs_bound((a, b), r, d)
    ok = upper_ok and c > 0 and abs_ok
    report(8, ok, f"M upper bound {upper_ok}, lower constant c = {c:.3f} over {len(ratios)} cases, "
                  f"|N| bound {abs_ok}")
    assert ok


@pytest.mark.slow
def test_criterion_09_holder(report):
    gold = holder_fit(0.5, GOLDEN, np.geomspace(1e-6, 1e-2, 13), True, 10 ** 4).exponent
    rat = holder_fit(0.25, 0.5, np.geomspace(1e-4, 1e-2, 9), True, 10 ** 4, side="right").exponent
    liou = holder_fit(0.5, 0.110001, np.geomspace(2e-6, 5e-4, 9), True, 10 ** 4).exponent
    ok = abs(gold - 1.5) <= 0.15 and abs(rat - 1.5) <= 0.2 and liou < 0.2
    report(9, ok, f"golden {gold:.3f} (1.5), rational right {rat:.3f} (1.5), Liouville-like {liou:.3f} (< 0.2)")
    assert ok


@pytest.mark.slow
def test_criterion_10_spectrum(report):
    d = 0.5
    alpha = 1 / (1 + d)
    s = spectrum_fit(d, 10 ** 4)
    sel = (s.gamma >= 0.5 * 0.3 / alpha - 1e-12) & (s.gamma <= 0.9 / alpha + 1e-12)
    dev = float(np.max(np.abs(s.d[sel] - alpha * s.gamma[sel])))
    ok = dev < 0.2
    report(10, ok, f"max |d(gamma) - gamma/(1+delta)| = {dev:.3f} on [{s.gamma[sel][0]:.3f}, {s.gamma[sel][-1]:.3f}]")
    assert ok


@pytest.mark.slow
@pytest.mark.parametrize("delta", [0.25, 0.75])
def test_criterion_11a_hhat_decay(report, delta):
    f = sharpness_datum(Grid1D(40.0, 2 ** 14), delta)
    fit = hhat_decay_fit(f, delta, 4.0, (2.0, 400.0), n_samples=8192)
    target = -(1 + lipschitz_beta(delta))
    ok = abs(fit.slope - target) <= 0.25
    report(11, ok, f"h^ decay delta={delta}: slope {fit.slope:.3f} vs {target:.3f} +- 0.25", soft=True)
    if not ok:
        warnings.warn(f"soft gate: h^ decay slope {fit.slope:.3f} outside {target:.3f} +- 0.25")


@pytest.mark.slow
@pytest.mark.parametrize("delta", [0.25, 0.4])
def test_criterion_11b_pair_scaling(report, delta):
    f = spectral_bump(Grid1D(40.0, 2 ** 13))
    fit = pair_scaling_fit(f, delta, np.geomspace(1e-3, 1e-1, 7))
    ok = abs(fit.slope + 2 * delta) <= 0.1
    report(11, ok, f"pair scaling delta={delta}: slope {fit.slope:.3f} vs {-2 * delta} +- 0.1", soft=True)
    if not ok:
        warnings.warn(f"soft gate: pair scaling slope {fit.slope:.3f} outside {-2 * delta} +- 0.1")
