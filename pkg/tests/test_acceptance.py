"""Acceptance criteria 1-10, each printing one PASS/FAIL line.

Run alone with ``pytest -s tests/test_acceptance.py`` to see the lines inline;
they are also collected into the terminal summary.
"""

import itertools
import math
import time
from fractions import Fraction

import numpy as np

from conftest import record_criterion
from convexlab import verify
from convexlab.exact import (
    d_kappa,
    det_rational,
    log_fraction,
    log_p_asymptotic,
    p_square,
    p_triangle,
    sigma_inverse,
)
from convexlab.geometry import (
    affine_perimeter,
    ap_star,
    closure_lengths,
    limit_shape_subdivision,
    make_polygon,
    perimeter_defect,
)
from convexlab.processes import c_infinity, cbar_process, ybar_covariance, ybar_variance
from convexlab.sampling import (
    assemble_points,
    ecp_of,
    kappa_sample,
    rejection_batch,
    in_size_set,
    square_sample,
    triangle_sample,
)

ALPHA = 1e-3


def test_criterion_01_exact_values():
    t0 = time.perf_counter()
    ok = p_triangle(4) == Fraction(2, 3) and p_triangle(5) == Fraction(11, 36)
    # ratio recurrences built from scratch reproduce both closed forms
    tri, sq = Fraction(1), Fraction(1)
    for n in range(3, 31):
        ok &= p_triangle(n) == tri and p_square(n) == sq
        tri *= Fraction(2 * 3 * n * (3 * n - 1) * (3 * n - 2), (2 * n + 2) * (2 * n + 1) * n**3)
        sq *= Fraction(2 * (2 * n - 1), n) ** 2 / (n + 1) ** 2
    elapsed = time.perf_counter() - t0
    passed = ok and elapsed < 1.0
    record_criterion(1, passed, f"p_triangle(4)=2/3, p_triangle(5)=11/36, closed forms n<=30 ({elapsed:.3f}s)")
    assert passed


def test_criterion_02_determinants():
    t0 = time.perf_counter()
    ok = all(d_kappa(k) == det_rational(sigma_inverse(k)) for k in range(3, 13))
    spots = [d_kappa(k) for k in (3, 4, 5)]
    ok &= spots == [Fraction(27, 4), Fraction(16), Fraction(605, 16)]
    elapsed = time.perf_counter() - t0
    passed = ok and elapsed < 1.0
    record_criterion(2, passed, f"d_kappa = det for kappa 3..12; spots {[str(v) for v in spots]} ({elapsed:.3f}s)")
    assert passed


def test_criterion_03_monte_carlo_probability(rng):
    t0 = time.perf_counter()
    tri = verify.estimate_probability(make_polygon(3), 5, 10**6, rng)
    sq = verify.estimate_probability(make_polygon(4), 5, 10**6, rng)
    elapsed = time.perf_counter() - t0
    z3 = (tri.estimate - 11 / 36) / tri.stderr
    z4 = (sq.estimate - 49 / 144) / sq.stderr
    passed = abs(z3) < 3 and abs(z4) < 3 and elapsed < 60
    record_criterion(3, passed, f"P3(5)={tri.estimate:.5f} (z={z3:+.2f}), P4(5)={sq.estimate:.5f} "
                                f"(z={z4:+.2f}) at 1e6 trials ({elapsed:.1f}s)")
    assert passed


def _chi2(observed, probs):
    return verify.chisquare_binned(np.asarray(observed), np.asarray(probs, dtype=float))[2]


def test_criterion_04_sampler_distributions(rng):
    t0 = time.perf_counter()
    count = 10**5
    # triangle sampler: size vector against the product of binomials
    n = 6
    s = np.array([triangle_sample(n, rng).s for _ in range(count)])
    support = [t for t in itertools.product(range(n), repeat=3) if sum(t) == n]
    probs = [math.prod(math.comb(n - 1, v) for v in t) for t in support]
    index = {t: i for i, t in enumerate(support)}
    obs = np.bincount([index[tuple(r)] for r in s], minlength=len(support))
    p_tri = _chi2(obs, probs)

    # square sampler: split count against C(n-1, i) C(n-1, i-1)
    n = 8
    i = np.array([square_sample(n, rng).extra["i"] for _ in range(count)])
    support = np.arange(1, n)
    probs = [math.comb(n - 1, k) * math.comb(n - 1, k - 1) for k in support]
    p_sq = _chi2([(i == k).sum() for k in support], probs)

    # kappa sampler on the triangle against accepted uniform draws
    poly = make_polygon(3)
    n = 6
    ks = [kappa_sample(poly, n, rng) for _ in range(count)]
    pts, _ = rejection_batch(poly, n, count, rng)
    ref = [ecp_of(poly, p) for p in pts]
    events = {
        "s=(2,2,2)": lambda c: tuple(c.s) == (2, 2, 2),
        "s0=1": lambda c: c.s[0] == 1,
        "sum ell<0.1": lambda c: c.ell.sum() < 0.1,
        "ell0<ell1": lambda c: c.ell[0] < c.ell[1],
    }
    zs = {}
    for name, ev in events.items():
        ka = sum(bool(ev(c)) for c in ks)
        kb = sum(bool(ev(c)) for c in ref)
        gap, se = verify.proportion_gap(ka, count, kb, count)
        zs[name] = gap / se
    elapsed = time.perf_counter() - t0
    passed = p_tri > ALPHA and p_sq > ALPHA and all(abs(z) < 3 for z in zs.values()) and elapsed < 600
    zs_text = ", ".join(f"{k} z={v:+.2f}" for k, v in zs.items())
    record_criterion(4, passed, f"triangle s chi2 p={p_tri:.3g}; square i chi2 p={p_sq:.3g}; "
                                f"kappa=3 vs rejection: {zs_text} ({elapsed:.0f}s)")
    assert passed


def test_criterion_05a_boundary_distance_law_literal(rng):
    # literal targets: mean 2 and variance 4 for n * ell[j]; the sampled law has
    # rate 4m/(kappa r) = 1 for the unit square, so this check is expected to fail
    t0 = time.perf_counter()
    n, replicas = 2000, 10**4
    x = np.array([n * square_sample(n, rng).ell[0] for _ in range(replicas)])
    mean, var = float(x.mean()), float(x.var(ddof=1))
    se = float(x.std(ddof=1) / math.sqrt(replicas))
    mean_ok = abs(mean - 2.0) < 3 * se
    var_ok = abs(var / 4.0 - 1) <= 0.10
    elapsed = time.perf_counter() - t0
    passed = mean_ok and var_ok and elapsed < 900
    record_criterion(5, passed, f"n*ell mean={mean:.4f}+-{se:.4f} (target 2), var={var:.4f} (target 4); "
                                f"observed law matches rate {verify.ell_rate(make_polygon(4)):g} ({elapsed:.0f}s)")
    assert passed


def test_criterion_05b_size_covariance(rng):
    t0 = time.perf_counter()
    outs = [verify.test_size_covariance(k, 2000, 10**4, rng) for k in (3, 4)]
    elapsed = time.perf_counter() - t0
    passed = all(o.passed for o in outs) and elapsed < 900
    text = "; ".join(f"kappa={k} max |z|={o.details['max_z']:.2f}" for k, o in zip((3, 4), outs))
    record_criterion(5, passed, f"size covariance vs inverse matrix within 5 stderr: {text} ({elapsed:.0f}s)")
    assert passed


def test_criterion_06_fluctuation_moments(rng):
    t0 = time.perf_counter()
    m, replicas, batch = 2000, 2 * 10**4, 1000
    times = [0.25, 0.5, 0.75, 0.3, 0.7]
    chunks = []
    for _ in range(replicas // batch):
        zeta = rng.exponential(size=(batch, m))
        xi = rng.exponential(size=(batch, m))
        chunks.append(np.stack([cbar_process(zeta, xi, u) for u in times], axis=1))
    cbar = np.concatenate(chunks)
    limit = c_infinity(np.array(times))
    se = cbar.std(axis=0, ddof=1) / math.sqrt(replicas)
    z_mean = np.abs(cbar.mean(axis=0) - limit)[:3] / se[:3]
    y = math.sqrt(m) * (cbar - limit)
    var = float(y[:, 1, 0].var(ddof=1))
    var_target = ybar_variance(1, 0.5)
    a = y[:, 3, 0]
    b = y[:, 4, 0] - y[:, 3, 0]
    prod = (a - a.mean()) * (b - b.mean())
    cov, cov_se = float(prod.mean()), float(prod.std(ddof=1) / math.sqrt(replicas))
    cov_target = ybar_covariance(1, 1, 0.3, 0.7)
    elapsed = time.perf_counter() - t0
    passed = (bool(np.all(z_mean < 3)) and abs(var / var_target - 1) <= 0.05
              and cov < 0 and abs(cov - cov_target) < 3 * cov_se and elapsed < 900)
    record_criterion(6, passed, f"mean max |z|={z_mean.max():.2f}; var={var:.4f} vs {var_target:.4f}; "
                                f"increment cov={cov:.4f}+-{cov_se:.4f} vs {cov_target:.4f} ({elapsed:.0f}s)")
    assert passed


def test_criterion_07_barycenter(rng):
    t0 = time.perf_counter()
    out = verify.test_barycenter(4, 2000, 2 * 10**4, rng)
    elapsed = time.perf_counter() - t0
    rvar = out.details["residual_variance"]
    passed = (abs(out.estimate - 0.25) < 5 * out.stderr and abs(rvar / 0.125 - 1) <= 0.10
              and elapsed < 600)
    record_criterion(7, passed, f"slope={out.estimate:.4f}+-{out.stderr:.4f} (target 0.25), "
                                f"residual var={rvar:.4f} (target 0.125) ({elapsed:.0f}s)")
    assert passed


def test_criterion_08_geometry(rng):
    t0 = time.perf_counter()
    rel = []
    for kappa in range(3, 9):
        poly = make_polygon(kappa)
        rel.append(abs(affine_perimeter(*limit_shape_subdivision(poly, 512)) / ap_star(poly) - 1))
    trip, defect = 0.0, 0.0
    for kappa in range(3, 9):
        poly = make_polygon(kappa)
        n = 4 * kappa
        for _ in range(20):
            # a strictly feasible ell (scaled so the largest closure stays below r)
            d = rng.exponential(size=kappa)
            ell = 0.8 * rng.uniform() * poly.r / closure_lengths(poly, d).max() * d
            s = rng.multinomial(n, np.full(kappa, 1 / kappa))
            while not in_size_set(s, n):
                s = rng.multinomial(n, np.full(kappa, 1 / kappa))
            cfg = assemble_points(poly, ell, s, rng)
            back = ecp_of(poly, cfg.points)
            assert np.array_equal(back.s, s)
            trip = max(trip, float(np.abs(back.ell - ell).max()))
            defect = max(defect, abs(perimeter_defect(poly, ell)))
    elapsed = time.perf_counter() - t0
    passed = max(rel) < 1e-5 and trip < 1e-9 and defect < 1e-10 and elapsed < 5
    record_criterion(8, passed, f"affine perimeter max rel err={max(rel):.2e}; round trip {trip:.1e}; "
                                f"perimeter identity {defect:.1e} ({elapsed:.2f}s)")
    assert passed


def test_criterion_09_asymptotics():
    t0 = time.perf_counter()
    gaps = {}
    for kappa, exact in ((3, p_triangle), (4, p_square)):
        gaps[kappa] = [abs(log_fraction(exact(n)) - log_p_asymptotic(kappa, n)) for n in (50, 100, 200, 400)]
    n = 10**6
    growth = math.exp(2 * math.log(n) + log_p_asymptotic(4, n) / n) / (16 * math.e**2)
    elapsed = time.perf_counter() - t0
    passed = (all(np.all(np.diff(g) < 0) and g[-1] < 0.05 for g in gaps.values())
              and abs(growth - 1) < 0.01 and elapsed < 1.0)
    record_criterion(9, passed, f"log gaps at n=400: kappa=3 {gaps[3][-1]:.4f}, kappa=4 {gaps[4][-1]:.4f}; "
                                f"n^2 P^(1/n) / 16e^2 = {growth:.5f} ({elapsed:.3f}s)")
    assert passed


def test_criterion_10_hausdorff_scaling(rng):
    t0 = time.perf_counter()
    out = verify.test_hausdorff_scaling(4, [250, 500, 1000, 2000, 4000], 200, rng)
    elapsed = time.perf_counter() - t0
    passed = -0.6 <= out.estimate <= -0.4 and elapsed < 1200
    record_criterion(10, passed, f"log-log slope of median Hausdorff distance={out.estimate:.3f} "
                                 f"(window [-0.6, -0.4]) ({elapsed:.0f}s)")
    assert passed
