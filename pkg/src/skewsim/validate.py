"""Invariant battery behind the `validate` subcommand.

Each check returns (name, passed, detail); the CLI prints one line per check
and exits nonzero if any fails.  Statistical checks here use reduced sample
sizes; the full-scale versions live in the test suite.
"""

from __future__ import annotations

import math

import numpy as np

from . import analytics, baseline, bridge, exactsim, models, numerics, skewlaw, stats
from .numerics import RngStream
from .skewlaw import SkewParams

GRID_T = (0.05, 1.0, 5.0)
GRID_X = (-2.0, 0.0, 0.3)
GRID_BETA = (-0.8, -0.1716, 0.6)
GRID_MU = (-math.pi / 2, 0.0, 15.69)


def _norm_points(t, x, p):
    return [x, x + p.mu * t]


def check_quadrature():
    cases = [
        (lambda y: np.exp(-y * y / 2) / numerics.SQRT_2PI, -math.inf, math.inf, 1.0),
        (lambda y: 3 * y * y, 0.0, 1.0, 1.0),
        (lambda y: y * y * np.exp(-y * y / 2) / numerics.SQRT_2PI, -math.inf, math.inf, 1.0),
        (lambda y: y**4 * np.exp(-y * y / 2) / numerics.SQRT_2PI, -math.inf, math.inf, 3.0),
    ]
    worst = 0.0
    for f, lo, hi, truth in cases:
        r = numerics.integrate(f, lo, hi, 1e-11)
        worst = max(worst, abs(r.value - truth))
    return "quadrature catalogue", worst < 1e-9, f"worst abs err {worst:.2e}"


def check_rng_reproducibility():
    a = RngStream(123, 5).uniforms(1000)
    b = RngStream(123, 5).uniforms(1000)
    same = bool(np.array_equal(a, b))
    c = RngStream(123, 6).uniforms(1000)
    distinct = not np.array_equal(a, c)
    return "rng reproducibility", same and distinct, "bit-identical, streams differ"


def check_normalization():
    worst = 0.0
    for t in GRID_T:
        for x in GRID_X:
            for beta in GRID_BETA:
                for mu in GRID_MU:
                    p = SkewParams(beta, mu)
                    r = numerics.integrate(
                        lambda y: skewlaw.skew_density_vec(t, x, y, p),
                        -math.inf,
                        math.inf,
                        1e-10,
                        points=_norm_points(t, x, p),
                    )
                    worst = max(worst, abs(r.value - 1.0))
    return "density normalization grid", worst <= 1e-8, f"worst |int - 1| = {worst:.2e}"


def check_chapman_kolmogorov():
    s, t = 0.3, 0.7
    x = 0.2
    worst = 0.0
    for y in (-1.0, 0.0, 1.0):
        for beta in GRID_BETA:
            for mu in GRID_MU:
                p = SkewParams(beta, mu)
                pts = [x, x + mu * s, y, y - mu * t]
                direct = skewlaw.skew_density(s + t, x, y, p)
                # tolerance scaled to the target: deep-tail values sit near 1e-22
                r = numerics.integrate(
                    lambda z: skewlaw.skew_density_vec(s, x, z, p)
                    * np.array([skewlaw.skew_density(t, float(zz), y, p) for zz in np.atleast_1d(z)]),
                    -math.inf,
                    math.inf,
                    direct * 1e-8,
                    points=pts,
                )
                worst = max(worst, abs(r.value - direct) / direct)
    return "Chapman-Kolmogorov grid", worst <= 1e-6, f"worst rel err = {worst:.2e}"


def check_positivity():
    ok = True
    for t in GRID_T:
        for x in GRID_X:
            for beta in GRID_BETA:
                for mu in GRID_MU:
                    p = SkewParams(beta, mu)
                    ys = np.linspace(x + mu * t - 6 * math.sqrt(t), x + mu * t + 6 * math.sqrt(t), 101)
                    vals = skewlaw.skew_density_vec(t, x, ys, p)
                    ok = ok and bool(np.all(vals > 0.0))
    return "density positivity grid", ok, "p > 0 everywhere sampled"


def check_envelopes(n: int = 10**4, seed: int = 2):
    rng = RngStream(seed)
    worst = 0.0
    for beta, mu in ((0.6, -math.pi / 2), (-0.17157287525380996, 15.692388155425114)):
        p = SkewParams(beta, mu)
        for _ in range(n):
            T = 0.1 + 2.0 * rng.uniform()
            t = T * (0.05 + 0.9 * rng.uniform())
            a = 4.0 * (rng.uniform() - 0.5)
            b = 4.0 * (rng.uniform() - 0.5)
            y = 6.0 * (rng.uniform() - 0.5)
            K = skewlaw.bridge_bound(t, T, a, b, p)
            q = skewlaw.bridge_density(t, T, a, b, y, p)
            mean = a + (t / T) * (b - a)
            var = t * (T - t) / T
            q00 = math.exp(-((y - mean) ** 2) / (2 * var)) / math.sqrt(2 * math.pi * var)
            if q00 > 0:
                worst = max(worst, q / (K * q00))
    return "bridge envelope soundness", worst <= 1.0 + 1e-12, f"max q/(K q00) = {worst:.12f}"


def check_model_audits():
    try:
        models.example1_model()
        m2, lmap = models.example2_model()
        for x in (-3.0, -0.5, 0.0, 0.5, 3.0):
            if abs(lmap.phi_inverse(lmap.phi(x)) - x) > 1e-10:
                return "model audits", False, f"lamperti round trip failed at {x}"
        return "model audits", True, "example1/example2 construction audits pass"
    except ValueError as exc:
        return "model audits", False, str(exc)


def check_analytics():
    beta = 0.6
    worst_flux = 0.0
    worst_ode = 0.0
    lam, z = 1.0, 2.0
    for x in (-1.3, 0.7):
        h = 1e-4
        upp = analytics.u_lambda(x + h, z, lam, beta)
        mid = analytics.u_lambda(x, z, lam, beta)
        low = analytics.u_lambda(x - h, z, lam, beta)
        resid = 0.5 * (upp - 2 * mid + low) / (h * h) - lam * mid
        worst_ode = max(worst_ode, abs(resid) / abs(mid))
    h = 1e-6
    dp = (analytics.u_lambda(h, z, lam, beta) - analytics.u_lambda(0.0, z, lam, beta)) / h
    dm = (analytics.u_lambda(0.0, z, lam, beta) - analytics.u_lambda(-h, z, lam, beta)) / h
    flux = abs((1 + beta) * dp - (1 - beta) * dm) / max(abs((1 + beta) * dp), 1e-300)
    ok = worst_ode <= 1e-5 and flux <= 1e-4
    return "u_lambda ODE/flux", ok, f"ode rel {worst_ode:.2e}, flux rel {flux:.2e}"


def check_ell_consistency(seed: int = 4):
    rng = RngStream(seed)
    worst = 0.0
    ss_cache = {}
    for _ in range(50):
        beta = 0.6 if rng.uniform() < 0.5 else -0.6
        ss = ss_cache.setdefault(beta, analytics.ScaleSpeed(beta))
        t = 0.2 + 2 * rng.uniform()
        x = 4 * (rng.uniform() - 0.5)
        y = 4 * (rng.uniform() - 0.5)
        lhs = analytics.ell(t, x, y, beta) * ss.m_slope(y)
        rhs = skewlaw.skew_density(t, x, y, SkewParams(beta, 0.0))
        worst = max(worst, abs(lhs - rhs) / max(rhs, 1e-300))
    return "ell * m' = density", worst <= 1e-10, f"worst rel {worst:.2e}"


def check_joint_law():
    t, x, beta = 1.0, 0.5, 0.6

    # double quadrature: mass of continuous part + atom
    def y_integral(ls):
        out = []
        for l in np.atleast_1d(ls):
            r = numerics.integrate(
                lambda ys: np.array(
                    [skewlaw.joint_position_local_time(t, x, float(y), float(l), beta).continuous_part for y in np.atleast_1d(ys)]
                ),
                -math.inf,
                math.inf,
                1e-10,
            )
            out.append(r.value)
        return np.array(out)

    cont = numerics.integrate(y_integral, 0.0, math.inf, 1e-8).value
    atom = numerics.integrate(
        lambda ys: np.array(
            [skewlaw.joint_position_local_time(t, x, float(y), 0.0, beta).atom_at_zero for y in np.atleast_1d(ys)]
        ),
        -math.inf,
        math.inf,
        1e-10,
    ).value
    total = cont + atom
    return "joint law total mass", abs(total - 1.0) <= 1e-7, f"|mass - 1| = {abs(total - 1):.2e}"


def check_bridge_smoke(seed: int = 11):
    p = SkewParams(0.6, -math.pi / 2)
    rng = RngStream(seed)
    n = 20000
    vals, _ = bridge.sample_skew_bridge_points_sync(0.5, 1.0, np.full(n, 0.2), -0.4, p, rng)
    cdfg = _bridge_cdf(0.5, 1.0, 0.2, -0.4, p)
    rep = stats.ks_one_sample(vals, cdfg)
    return "bridge sampler KS (2e4)", not rep.rejected_at_1pct, str(rep)


def _bridge_cdf(t, T, a, b, p):
    mean = a + (t / T) * (b - a)
    sd = math.sqrt(t * (T - t) / T)
    lo, hi = mean - 10 * sd, mean + 10 * sd
    lo, hi = min(lo, -1e-9), max(hi, 1e-9)
    f = lambda ys: np.array([skewlaw.bridge_density(t, T, a, b, float(y), p) for y in np.atleast_1d(ys)])
    e1, c1 = numerics.cumulative_grid(f, lo, 0.0, 2048)
    e2, c2 = numerics.cumulative_grid(f, 0.0, hi, 2048)
    edges = np.concatenate([e1, e2[1:]])
    cum = np.concatenate([c1, c1[-1] + c2[1:]])
    return lambda v: np.interp(np.asarray(v, dtype=float), edges, cum, left=0.0, right=cum[-1])


def check_euler_smoke(seed: int = 13):
    cfg = baseline.EulerConfig(dt=1e-3, T=1.0, x0=0.0, model=models.null_model(0.0, 0.0))
    vals = baseline.euler_endpoints(cfg, 20000, seed)
    var = float(np.var(vals))
    return "euler beta=0 variance", abs(var - 1.0) < 0.03, f"var = {var:.4f}"


ALL_CHECKS = [
    check_quadrature,
    check_rng_reproducibility,
    check_normalization,
    check_chapman_kolmogorov,
    check_positivity,
    check_envelopes,
    check_model_audits,
    check_analytics,
    check_ell_consistency,
    check_joint_law,
    check_bridge_smoke,
    check_euler_smoke,
]


def run_all(verbose: bool = True):
    results = []
    for fn in ALL_CHECKS:
        name, ok, detail = fn()
        results.append((name, ok, detail))
        if verbose:
            print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    return results
