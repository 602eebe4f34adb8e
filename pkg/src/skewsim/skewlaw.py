"""Closed-form laws of the skew Brownian motion with drift.

Transition density (four sign cases), joint law with the local time at zero,
bridge density, and the rejection envelopes used by the samplers.

Numerical form: each case's bracket
    1 - beta*mu*sqrt(2 pi t) * exp((z + t beta mu)^2 / 2t) * Nc((z + t beta mu)/sqrt t),
with z = |x| + |y|, is evaluated through the scaled tail mills() so it never
overflows; the drift tilt exp(mu(y-x) - mu^2 t/2) is folded into the Gaussian
exponents before exponentiation.  Sign conventions: x = 0 and y = 0 take the
">= 0" branch; the density is continuous in x at 0 but jumps in y at 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import numerics
from .numerics import SQRT_2PI, mills, mills_vec

__all__ = [
    "SkewParams",
    "JointDensityValue",
    "gauss_kernel",
    "skew_density",
    "skew_density_vec",
    "mirror",
    "gamma_factor",
    "joint_position_local_time",
    "bridge_density",
    "bridge_bound",
    "skew_cdf",
    "cdf_interpolant",
    "alpha_bar",
]


@dataclass(frozen=True)
class SkewParams:
    """Skewness/drift pair (beta, mu); |beta| < 1 enforced at construction."""

    beta: float
    mu: float

    def __post_init__(self):
        if not (math.isfinite(self.beta) and math.isfinite(self.mu)):
            raise ValueError("SkewParams: beta and mu must be finite")
        if abs(self.beta) >= 1.0:
            raise ValueError(f"SkewParams: |beta| < 1 required, got {self.beta}")


@dataclass(frozen=True)
class JointDensityValue:
    """Joint law value at (y, l): density on l > 0 plus the atom on {L = 0}."""

    continuous_part: float
    atom_at_zero: float


def _check_t(t):
    if not (t > 0.0) or not math.isfinite(t):
        raise ValueError(f"time must be positive and finite, got {t!r}")


def gauss_kernel(t: float, x: float, y: float, mu: float) -> float:
    """Transition density of Brownian motion with constant drift mu."""
    _check_t(t)
    d = y - x - mu * t
    return math.exp(-d * d / (2.0 * t)) / math.sqrt(2.0 * math.pi * t)


def _bracket(t: float, z: float, bm: float) -> float:
    if bm == 0.0:
        return 1.0
    return 1.0 - bm * math.sqrt(2.0 * math.pi * t) * mills((z + t * bm) / math.sqrt(t))


def _bracket_vec(t, z, bm):
    if bm == 0.0:
        return np.ones_like(np.asarray(z, dtype=float))
    return 1.0 - bm * np.sqrt(2.0 * np.pi * t) * mills_vec((z + t * bm) / np.sqrt(t))


def gamma_factor(t: float, z: float, p: SkewParams) -> float:
    """Envelope factor gamma(t, z); > 1 iff beta*mu < 0, in (0, 1] otherwise."""
    _check_t(t)
    if z < 0:
        raise ValueError("gamma_factor: z must be >= 0")
    return _bracket(t, z, p.beta * p.mu)


def rho(t: float, x: float, y: float, beta: float, mu: float) -> float:
    """Drift-tilt-free kernel: skew_density = exp(mu(y-x) - mu^2 t/2) * rho.

    The tilt cancels exactly in bridge ratios, so the bridge machinery works
    on rho alone and never sees the (possibly astronomical) tilt exponents.
    """
    sy = y >= 0
    z = abs(x) + abs(y)
    w = 1.0 + beta if sy else 1.0 - beta
    g = _bracket(t, z, beta * mu)
    c = 1.0 / math.sqrt(2.0 * math.pi * t)
    if (x >= 0) == sy:
        d = y - x
        diff = math.exp(-d * d / (2.0 * t)) * (-math.expm1(-2.0 * abs(x) * abs(y) / t))
        return c * (diff + w * math.exp(-z * z / (2.0 * t)) * g)
    return c * w * math.exp(-z * z / (2.0 * t)) * g


def skew_density(t: float, x: float, y: float, p: SkewParams) -> float:
    """Transition density of the skew Brownian motion with drift at (t, x, y)."""
    _check_t(t)
    beta, mu = p.beta, p.mu
    sy = y >= 0
    z = abs(x) + abs(y)
    w = 1.0 + beta if sy else 1.0 - beta
    g = _bracket(t, z, beta * mu)
    c = 1.0 / math.sqrt(2.0 * math.pi * t)
    tilt_exp = mu * (y - x) - 0.5 * mu * mu * t
    e_g = math.exp(-z * z / (2.0 * t) + tilt_exp)
    if (x >= 0) == sy:
        d = y - x - mu * t
        e_d = math.exp(-d * d / (2.0 * t)) * (-math.expm1(-2.0 * abs(x) * abs(y) / t))
        return c * (e_d + w * e_g * g)
    return c * w * e_g * g


def skew_density_vec(t: float, x: float, y, p: SkewParams):
    """Vectorized skew_density in y (scalar t, x)."""
    _check_t(t)
    y = np.asarray(y, dtype=float)
    beta, mu = p.beta, p.mu
    sy = y >= 0
    z = abs(x) + np.abs(y)
    w = np.where(sy, 1.0 + beta, 1.0 - beta)
    g = _bracket_vec(t, z, beta * mu)
    c = 1.0 / math.sqrt(2.0 * math.pi * t)
    tilt_exp = mu * (y - x) - 0.5 * mu * mu * t
    e_g = np.exp(-z * z / (2.0 * t) + tilt_exp)
    d = y - x - mu * t
    e_d = np.exp(-d * d / (2.0 * t)) * (-np.expm1(-2.0 * abs(x) * np.abs(y) / t))
    same = (x >= 0) == sy
    return c * (np.where(same, e_d, 0.0) + w * e_g * g)


def mirror(t: float, x: float, y: float, p: SkewParams) -> float:
    """skew_density after the sign flip (x, y, beta, mu) -> (-x, -y, -beta, -mu).

    Equal to skew_density(t, x, y, p) for y != 0; at the jump point y = 0 the
    ">= 0" branch convention makes the two sides differ by (1+beta)/(1-beta).
    """
    return skew_density(t, -x, -y, SkewParams(-p.beta, -p.mu))


def joint_position_local_time(t: float, x: float, y: float, l: float, beta: float) -> JointDensityValue:
    """Joint density of (position, local time at 0) for the driftless skew motion.

    Stated for x >= 0; x < 0 is served through the mirror map with beta -> -beta.
    """
    _check_t(t)
    if l < 0:
        raise ValueError("joint_position_local_time: l must be >= 0")
    if abs(beta) >= 1:
        raise ValueError("joint_position_local_time: |beta| < 1 required")
    if x < 0:
        return joint_position_local_time(t, -x, -y, l, -beta)
    c3 = 1.0 / math.sqrt(2.0 * math.pi * t**3)
    u = l + abs(y) + x
    w = 1.0 + beta if y >= 0 else 1.0 - beta
    cont = w * u * c3 * math.exp(-u * u / (2.0 * t))
    if y >= 0 and x > 0:
        d = y - x
        atom = (
            math.exp(-d * d / (2.0 * t))
            * (-math.expm1(-2.0 * x * y / t))
            / math.sqrt(2.0 * math.pi * t)
        )
    else:
        atom = 0.0
    return JointDensityValue(continuous_part=cont, atom_at_zero=atom)


def _check_bridge_times(t, T):
    if not (0.0 < t < T):
        raise ValueError(f"bridge time must satisfy 0 < t < T, got t={t!r}, T={T!r}")


def bridge_density(t: float, T: float, a: float, b: float, y: float, p: SkewParams) -> float:
    """Conditional density of the drifted skew motion at t given values a at 0, b at T."""
    _check_bridge_times(t, T)
    beta, mu = p.beta, p.mu
    # p(t,a,y) p(T-t,y,b) / p(T,a,b); the drift tilts cancel exactly
    return rho(t, a, y, beta, mu) * rho(T - t, y, b, beta, mu) / rho(T, a, b, beta, mu)


def alpha_bar(beta: float) -> float:
    return max((1.0 + beta) / 2.0, (1.0 - beta) / 2.0)


def bridge_bound(t: float, T: float, a: float, b: float, p: SkewParams) -> float:
    """Constant K with bridge_density(t,T,a,b,y) <= K * Brownian-bridge density, all y."""
    _check_bridge_times(t, T)
    beta, mu = p.beta, p.mu
    ab = alpha_bar(beta)
    d = b - a
    p0 = math.exp(-d * d / (2.0 * T)) / math.sqrt(2.0 * math.pi * T)
    k = 4.0 * ab * ab * p0 / rho(T, a, b, beta, mu)
    bm = beta * mu
    if bm < 0.0:
        k *= _bracket(t, abs(a), bm) * _bracket(T - t, abs(b), bm)
    return k


def _mass_points(t, x, p):
    """Interior split hints for quadrature: kink at 0, start point, drifted mean."""
    return (x, x + p.mu * t)


def skew_cdf(t: float, x: float, y: float, p: SkewParams, tol: float = 1e-10) -> float:
    """P(B_t <= y | B_0 = x) by adaptive quadrature of skew_density."""
    _check_t(t)
    pts = [c for c in _mass_points(t, x, p) if c < y]
    res = numerics.integrate(
        lambda u: skew_density_vec(t, x, u, p), -math.inf, y, tol, points=pts
    )
    return min(max(res.value, 0.0), 1.0)


def cdf_interpolant(t: float, x: float, p: SkewParams, n: int = 8192, pad: float = 10.0):
    """Fast CDF of skew_density(t, x, ., p) as a linear interpolant on a dense grid.

    Grid covers the mass region [min(x, x+mu t) - pad*sqrt(t), max(..) + pad*sqrt(t)];
    tails beyond it are below ~1e-22 of mass.  Returns a callable on arrays.
    """
    _check_t(t)
    s = math.sqrt(t)
    lo = min(x, x + p.mu * t) - pad * s
    hi = max(x, x + p.mu * t) + pad * s
    lo = min(lo, -pad * s if abs(x) < pad * s else lo)
    hi = max(hi, pad * s if abs(x) < pad * s else hi)
    f = lambda u: skew_density_vec(t, x, u, p)
    # keep the kink at 0 on a panel edge
    if lo < 0.0 < hi:
        nneg = max(8, int(round(n * (0.0 - lo) / (hi - lo))))
        e1, c1 = numerics.cumulative_grid(f, lo, 0.0, nneg)
        e2, c2 = numerics.cumulative_grid(f, 0.0, hi, max(8, n - nneg))
        edges = np.concatenate([e1, e2[1:]])
        cum = np.concatenate([c1, c1[-1] + c2[1:]])
    else:
        edges, cum = numerics.cumulative_grid(f, lo, hi, n)

    def cdf(v):
        return np.interp(np.asarray(v, dtype=float), edges, cum, left=0.0, right=cum[-1])

    cdf.total_mass = float(cum[-1])
    cdf.support = (lo, hi)
    return cdf
