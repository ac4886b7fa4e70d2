"""Statistical checks tying the samplers to exact and limiting laws.

Every check returns a ``McSummary`` carrying its estimate, target, tolerance
and a pass flag.  Thresholds: 3 standard errors for means, ``p > 0.001``
for chi-square and Kolmogorov-Smirnov tests, 5 standard errors for entrywise
covariance and regression checks.
"""

from __future__ import annotations

import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np
from scipy import stats

from . import exact
from .geometry import RegularPolygon, limit_shape, make_polygon
from .processes import hausdorff_distance
from .sampling import (
    convex_position_mask,
    ecp_of,
    in_size_set,
    kappa_sample,
    named_stream,
    rejection_batch,
    square_sample,
    triangle_sample,
    uniform_in_polygon,
)

ALPHA = 1e-3


@dataclass
class McSummary:
    test: str
    estimate: float
    stderr: float
    replicas: int
    seconds: float = 0.0
    target: float | None = None
    tolerance: str = ""
    passed: bool | None = None
    statistic: float | None = None
    dof: int | None = None
    p_value: float | None = None
    params: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["pass"] = out.pop("passed")
        return _jsonable(out)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    return obj


def within(estimate: float, target: float, stderr: float, k: float = 3.0) -> bool:
    return bool(abs(estimate - target) <= k * stderr)


def chisquare_binned(observed: np.ndarray, probs: np.ndarray, min_expected: float = 5.0):
    """Chi-square goodness of fit, pooling low-expectation cells into one bin."""
    observed = np.asarray(observed, dtype=float)
    probs = np.asarray(probs, dtype=float)
    probs = probs / probs.sum()
    expected = probs * observed.sum()
    big = expected >= min_expected
    obs = list(observed[big])
    exp = list(expected[big])
    if np.any(~big):
        obs.append(observed[~big].sum())
        exp.append(expected[~big].sum())
    stat, p = stats.chisquare(obs, exp)
    return float(stat), len(obs) - 1, float(p)


def _sampler_for(kappa: int) -> Callable:
    if kappa == 3:
        return lambda n, rng: triangle_sample(n, rng)
    if kappa == 4:
        return lambda n, rng: square_sample(n, rng)
    poly = make_polygon(kappa)
    return lambda n, rng: kappa_sample(poly, n, rng)


def ell_rate(poly: RegularPolygon) -> float:
    """Rate of the limiting exponential law of ``n * ell[j]``, equal to ``4 m / (kappa r)``."""
    return 4.0 * poly.m_const / (poly.kappa * poly.r)


# ---------------------------------------------------------------------------
# probabilities


def estimate_probability(poly: RegularPolygon, n: int, trials: int, rng: np.random.Generator,
                         batch: int = 1 << 16) -> McSummary:
    """Bernoulli estimate of the probability that n uniform points are in convex position."""
    if n < 3 or trials < 1:
        raise ValueError("need n >= 3 and trials >= 1")
    t0 = time.perf_counter()
    hits, done = 0, 0
    while done < trials:
        size = min(batch, trials - done)
        hits += int(convex_position_mask(uniform_in_polygon(poly, rng, (size, n))).sum())
        done += size
    p = hits / trials
    se = math.sqrt(max(p * (1 - p), 1e-300) / trials)
    target = None
    if poly.kappa in (3, 4):
        target = float(exact.exact_probability(poly.kappa, n))
    out = McSummary(
        test="estimate_probability", estimate=p, stderr=se, replicas=trials,
        target=target, tolerance="3 stderr", params={"kappa": poly.kappa, "n": n},
    )
    if target is not None:
        out.passed = within(p, target, se)
    out.seconds = time.perf_counter() - t0
    return out


def _positive_part_mean(l1, l2, l3):
    """Mean over a triangle of the positive part of a linear function with vertex values l."""
    v = np.sort(np.stack([l1, l2, l3], axis=-1), axis=-1)[..., ::-1]
    a, b, c = v[..., 0], v[..., 1], v[..., 2]
    mean = (a + b + c) / 3.0
    with np.errstate(divide="ignore", invalid="ignore"):
        one_pos = a**3 / (3.0 * (a - b) * (a - c))
        two_pos = mean + (-c) ** 3 / (3.0 * (a - c) * (b - c))
    out = np.where(c >= 0, mean, np.where(a <= 0, 0.0, np.where(b <= 0, one_pos, two_pos)))
    return np.nan_to_num(out)


def four_point_probability(poly: RegularPolygon, pairs: int, rng: np.random.Generator,
                           batch: int = 1 << 17) -> tuple[float, float]:
    """Probability that 4 uniform points are in convex position, by semi-analytic integration.

    Four points fail to be in convex position exactly when one lies in the
    triangle of the other three, so the probability is
    ``1 - 4 E[area(abc)] / area``.  For each random pair (a, b) the integral
    over c of ``|cross(b - a, c - a)|`` is computed exactly on a triangle
    fan, leaving only a 4-dimensional average over (a, b).
    Returns ``(value, stderr)``.
    """
    v = poly.vertices
    fan = [(v[0], v[i], v[i + 1]) for i in range(1, poly.kappa - 1)]
    areas = np.array([0.5 * abs((q - p)[0] * (r - p)[1] - (q - p)[1] * (r - p)[0]) for p, q, r in fan])
    total_area = areas.sum()
    sums, sq, done = 0.0, 0.0, 0
    while done < pairs:
        size = min(batch, pairs - done)
        a = uniform_in_polygon(poly, rng, size)
        b = uniform_in_polygon(poly, rng, size)
        d = b - a
        integral = np.zeros(size)
        for (p, q, r), area in zip(fan, areas):
            ls = [d[:, 0] * (w[1] - a[:, 1]) - d[:, 1] * (w[0] - a[:, 0]) for w in (p, q, r)]
            pos = _positive_part_mean(*ls)
            neg = _positive_part_mean(*[-x for x in ls])
            integral += area * (pos + neg)
        tri = 0.5 * integral / total_area
        sums += tri.sum()
        sq += (tri**2).sum()
        done += size
    mean = sums / pairs
    var = sq / pairs - mean**2
    value = 1.0 - 4.0 * mean / total_area
    return value, 4.0 * math.sqrt(max(var, 0.0) / pairs) / total_area


# ---------------------------------------------------------------------------
# limit laws


def _collect(kappa: int, n: int, replicas: int, rng: np.random.Generator):
    draw = _sampler_for(kappa)
    return [draw(n, rng) for _ in range(replicas)]


def test_ell_exponential(kappa: int, n: int, replicas: int, rng: np.random.Generator,
                         rate: float | None = None) -> McSummary:
    """Mean, variance, KS and independence checks of ``n * ell`` against an exponential law.

    ``rate`` defaults to ``ell_rate``.
    """
    t0 = time.perf_counter()
    poly = make_polygon(kappa)
    rate = ell_rate(poly) if rate is None else rate
    cfgs = _collect(kappa, n, replicas, rng)
    x = n * np.array([c.ell for c in cfgs])
    first = x[:, 0]
    mean = float(first.mean())
    se = float(first.std(ddof=1) / math.sqrt(replicas))
    var = float(first.var(ddof=1))
    ks = stats.kstest(first, "expon", args=(0, 1.0 / rate))
    corr = float(np.corrcoef(x[:, 0], x[:, 1])[0, 1])
    corr_bound = 3.0 / math.sqrt(replicas)
    target_mean, target_var = 1.0 / rate, 1.0 / rate**2
    checks = {
        "mean": within(mean, target_mean, se),
        "variance": abs(var / target_var - 1) <= 0.10,
        "ks": ks.pvalue > ALPHA,
        "independence": abs(corr) < corr_bound,
    }
    return McSummary(
        test="ell_exponential", estimate=mean, stderr=se, replicas=replicas,
        target=target_mean, tolerance="mean 3 stderr; variance 10%; KS p>0.001; |corr|<3/sqrt(R)",
        passed=all(checks.values()), statistic=float(ks.statistic), p_value=float(ks.pvalue),
        params={"kappa": kappa, "n": n, "rate": rate},
        details={"variance": var, "target_variance": target_var, "corr_01": corr,
                 "corr_bound": corr_bound, "checks": checks,
                 "pooled_mean": float(x.mean())},
        seconds=time.perf_counter() - t0,
    )


def size_covariance_target(kappa: int) -> np.ndarray:
    inv = np.array([[float(v) for v in row] for row in exact.sigma_inverse(kappa)])
    return np.linalg.inv(inv)


def test_size_covariance(kappa: int, n: int, replicas: int, rng: np.random.Generator) -> McSummary:
    """Sample covariance of ``x = (s - n/kappa) / sqrt(n/kappa)`` (first kappa-1 entries)."""
    t0 = time.perf_counter()
    cfgs = _collect(kappa, n, replicas, rng)
    s = np.array([c.s for c in cfgs], dtype=float)
    x = (s - n / kappa) / math.sqrt(n / kappa)
    assert np.allclose(x.sum(axis=1), 0.0, atol=1e-9)
    y = x[:, : kappa - 1]
    yc = y - y.mean(axis=0)
    prods = yc[:, :, None] * yc[:, None, :]
    cov = prods.mean(axis=0) * replicas / (replicas - 1)
    se = prods.std(axis=0, ddof=1) / math.sqrt(replicas)
    target = size_covariance_target(kappa)
    z = np.abs(cov - target) / se
    return McSummary(
        test="size_covariance", estimate=float(cov[0, 0]), stderr=float(se[0, 0]),
        replicas=replicas, target=float(target[0, 0]), tolerance="every entry within 5 stderr",
        passed=bool(np.all(z <= 5.0)), params={"kappa": kappa, "n": n},
        details={"covariance": cov, "target": target, "max_z": float(z.max())},
        seconds=time.perf_counter() - t0,
    )


def barycenter_data(cfgs, kappa: int, n: int):
    """Normalized contact-point offsets and the matching size differences, pooled over sides."""
    poly = make_polygon(kappa)
    d = poly.directions
    eta, diff = [], []
    scale = math.sqrt(n / kappa)
    for cfg in cfgs:
        b_prev = np.roll(cfg.ecp.b, 1, axis=0)
        off = np.einsum("ij,ij->i", cfg.contact_points - b_prev, d)
        frac = off / cfg.ecp.c
        x = (cfg.s - n / kappa) / scale
        eta.append(scale * (frac - 0.5))
        diff.append(x - np.roll(x, -1))
    return np.concatenate(eta), np.concatenate(diff)


def test_barycenter(kappa: int, n: int, replicas: int, rng: np.random.Generator) -> McSummary:
    """Regression of the contact-point offsets on the neighbouring size differences."""
    t0 = time.perf_counter()
    cfgs = _collect(kappa, n, replicas, rng)
    eta, diff = barycenter_data(cfgs, kappa, n)
    # one side per replica keeps the regression samples independent
    eta1, diff1 = eta[::kappa], diff[::kappa]
    fit = stats.linregress(diff1, eta1)
    resid = eta1 - (fit.intercept + fit.slope * diff1)
    rvar = float(resid.var(ddof=2))
    mean_eta = float(eta1.mean())
    mean_se = float(eta1.std(ddof=1) / math.sqrt(len(eta1)))
    checks = {
        "slope": within(fit.slope, 0.25, fit.stderr, 5.0),
        "residual_variance": abs(rvar / 0.125 - 1) <= 0.10,
        "mean_zero": within(mean_eta, 0.0, mean_se),
    }
    return McSummary(
        test="barycenter", estimate=float(fit.slope), stderr=float(fit.stderr), replicas=replicas,
        target=0.25, tolerance="slope 5 stderr; residual variance 10%; mean 3 stderr",
        passed=all(checks.values()), params={"kappa": kappa, "n": n},
        details={"residual_variance": rvar, "intercept": float(fit.intercept),
                 "mean_eta": mean_eta, "mean_eta_se": mean_se, "checks": checks},
        seconds=time.perf_counter() - t0,
    )


def test_hausdorff_scaling(kappa: int, n_list, replicas: int, rng: np.random.Generator,
                           resolution: int | None = None) -> McSummary:
    """Median Hausdorff distance between the sample hull and the limit shape across n."""
    t0 = time.perf_counter()
    poly = make_polygon(kappa)
    shape = limit_shape(poly, 2048)
    draw = _sampler_for(kappa)
    medians, minima = [], []
    for n in n_list:
        res = resolution or max(4096, 4 * n)
        d = np.array([hausdorff_distance(draw(n, rng).points, shape, res) for _ in range(replicas)])
        medians.append(float(np.median(d)))
        minima.append(float(d.min()))
    slope, intercept = np.polyfit(np.log(n_list), np.log(medians), 1)
    scaled = np.sqrt(n_list) * np.array(medians)
    spread = float(scaled.max() / scaled.min() - 1)
    checks = {
        "slope": -0.6 <= slope <= -0.4,
        "positive": min(minima) > 0,
        "scaled_stable": spread <= 0.20,
    }
    return McSummary(
        test="hausdorff_scaling", estimate=float(slope), stderr=float("nan"), replicas=replicas,
        target=-0.5, tolerance="slope in [-0.6, -0.4]; sqrt(n)*median within 20%",
        passed=all(checks.values()), params={"kappa": kappa, "n_list": list(n_list)},
        details={"medians": medians, "sqrt_n_median": scaled, "spread": spread,
                 "minimum": minima, "checks": checks},
        seconds=time.perf_counter() - t0,
    )


def test_full_sided_fraction(kappa: int, n_list, rng: np.random.Generator,
                             samples: int = 2000) -> McSummary:
    """Fraction of rejection samples whose circumscribed polygon has all sides positive.

    Also checks, sample by sample, that this happens exactly when the
    size-vector has no two cyclically adjacent zeros.
    """
    t0 = time.perf_counter()
    poly = make_polygon(kappa)
    fracs, ses, mismatches = [], [], 0
    for n in n_list:
        pts, _ = rejection_batch(poly, n, samples, rng)
        full = 0
        for p in pts:
            cfg = ecp_of(poly, p)
            sided = bool(np.all(cfg.ecp.c > 1e-9 * poly.r))
            full += sided
            mismatches += sided != in_size_set(cfg.s, n)
        f = full / samples
        fracs.append(f)
        ses.append(math.sqrt(max(f * (1 - f), 1.0 / samples) / samples))
    gain = fracs[-1] - fracs[0]
    gain_se = math.hypot(ses[-1], ses[0])
    checks = {"equivalence": mismatches == 0, "increasing": gain >= -3 * gain_se}
    return McSummary(
        test="full_sided_fraction", estimate=fracs[-1], stderr=ses[-1], replicas=samples,
        tolerance="no mismatches; last fraction not below first by more than 3 stderr",
        passed=all(checks.values()), params={"kappa": kappa, "n_list": list(n_list)},
        details={"fractions": fracs, "stderr": ses, "mismatches": mismatches, "checks": checks},
        seconds=time.perf_counter() - t0,
    )


def proportion_gap(k1: int, n1: int, k2: int, n2: int) -> tuple[float, float]:
    """Difference of two proportions and its standard error."""
    p1, p2 = k1 / n1, k2 / n2
    return p1 - p2, math.sqrt(p1 * (1 - p1) / n1 + p2 * (1 - p2) / n2)


# ---------------------------------------------------------------------------
# suites


def _suite_checks(scale: str) -> dict[str, Callable[[np.random.Generator], McSummary]]:
    quick = scale == "quick"
    reps = 2000 if quick else 10_000
    big = 2000 if quick else 20_000
    nl = [250, 500, 1000] if quick else [250, 500, 1000, 2000, 4000]
    return {
        "probability_triangle_5": lambda r: estimate_probability(make_polygon(3), 5, 10**5 if quick else 10**6, r),
        "probability_square_5": lambda r: estimate_probability(make_polygon(4), 5, 10**5 if quick else 10**6, r),
        "ell_exponential_square": lambda r: test_ell_exponential(4, 2000, reps, r),
        "size_covariance_triangle": lambda r: test_size_covariance(3, 2000, big, r),
        "size_covariance_square": lambda r: test_size_covariance(4, 2000, big, r),
        "barycenter_square": lambda r: test_barycenter(4, 2000, big, r),
        "hausdorff_square": lambda r: test_hausdorff_scaling(4, nl, 50 if quick else 200, r),
        "full_sided_pentagon": lambda r: test_full_sided_fraction(5, [5, 7, 9], r, 500 if quick else 2000),
    }


SUITES = ("quick", "full")


def threads_from_env() -> int:
    try:
        return max(1, int(os.environ.get("CONVEXLAB_THREADS", "1")))
    except ValueError:
        return 1


def run_suite(name: str, seed: int, only: list[str] | None = None) -> list[McSummary]:
    """Run a named suite; each check draws from its own stream derived from ``seed``."""
    if name not in SUITES:
        raise ValueError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
    checks = _suite_checks(name)
    if only:
        checks = {k: v for k, v in checks.items() if k in only}

    def one(item):
        label, fn = item
        res = fn(named_stream(seed, label))
        res.test = label
        return res

    with ThreadPoolExecutor(max_workers=threads_from_env()) as pool:
        return list(pool.map(one, checks.items()))


def write_report(results: list[McSummary], path: str) -> None:
    with open(path, "w") as fh:
        json.dump({"schema": 1, "results": [r.to_dict() for r in results]}, fh, indent=2)
