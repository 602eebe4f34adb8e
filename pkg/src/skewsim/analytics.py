"""Scale/speed pair, hitting-time Laplace transforms, and the bridge-maximum
decomposition for the driftless skew motion.

u_lambda is evaluated through exponential-difference forms (expm1 ratios)
so large sqrt(2 lambda) |z| never overflows a sinh.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from . import numerics

__all__ = ["ScaleSpeed", "ell", "u_lambda", "max_decomposition_density", "max_transform_total"]


@dataclass(frozen=True)
class ScaleSpeed:
    """Natural scale s and integrated speed measure m of the skew motion."""

    beta: float

    def __post_init__(self):
        if abs(self.beta) >= 1:
            raise ValueError("|beta| < 1 required")

    def s(self, x: float) -> float:
        return 2.0 * x / (1.0 + self.beta) if x >= 0 else 2.0 * x / (1.0 - self.beta)

    def s_slope(self, x: float) -> float:
        return 2.0 / (1.0 + self.beta) if x >= 0 else 2.0 / (1.0 - self.beta)

    def m_slope(self, x: float) -> float:
        return (1.0 + self.beta) if x >= 0 else (1.0 - self.beta)


def ell(t: float, x: float, y: float, beta: float) -> float:
    """Transition kernel relative to the speed measure; symmetric in (x, y)."""
    if t <= 0 or not math.isfinite(t):
        raise ValueError("t must be positive and finite")
    if abs(beta) >= 1:
        raise ValueError("|beta| < 1 required")
    c = 1.0 / math.sqrt(2.0 * math.pi * t)
    sx, sy = x >= 0, y >= 0
    if sx != sy:
        return c * math.exp(-(x - y) ** 2 / (2.0 * t))
    w = 1.0 + beta if sy else 1.0 - beta
    diff = math.exp(-(y - x) ** 2 / (2.0 * t)) * (-math.expm1(-2.0 * abs(x) * abs(y) / t))
    return c * (diff / w + math.exp(-(abs(x) + abs(y)) ** 2 / (2.0 * t)))


def _edge_weight(qz: float, beta: float) -> float:
    # (1+beta) / (2 cosh(qz) - (1-beta) e^{-qz}) = (1+beta) e^{-qz} / (1 + beta e^{-2qz}), z > 0
    e = math.exp(-qz)
    return (1.0 + beta) * e / (1.0 + beta * e * e)


def u_lambda(x: float, z: float, lam: float, beta: float) -> float:
    """Laplace transform at lam of the first hitting time of level z from x."""
    if lam <= 0:
        raise ValueError("lambda must be > 0")
    if abs(beta) >= 1:
        raise ValueError("|beta| < 1 required")
    if x == z:
        return 1.0
    if z < 0 or (z == 0 and x < 0):
        # mirror the negative-side cases onto the positive ones
        return u_lambda(-x, -z, lam, -beta)
    q = math.sqrt(2.0 * lam)
    if x > z:  # x > z >= 0
        return math.exp(-q * (x - z))
    if x == 0.0:
        return _edge_weight(q * z, beta)
    if x < 0.0:  # x < 0 < z
        return math.exp(q * x) * _edge_weight(q * z, beta)
    # 0 < x < z: sinh(q(z-x))/sinh(qz) * w + sinh(qx)/sinh(qz), in decay form
    r1 = math.exp(-q * x) * math.expm1(-2.0 * q * (z - x)) / math.expm1(-2.0 * q * z)
    r2 = math.exp(-q * (z - x)) * math.expm1(-2.0 * q * x) / math.expm1(-2.0 * q * z)
    return r1 * _edge_weight(q * z, beta) + r2


def max_decomposition_density(
    a: float, b: float, T: float, lam: float, z: float, beta: float
) -> float:
    """Bridge-maximum decomposition integrand u(a;z) u(z;b) s'(z) / ell(T,a,b).

    Evaluated verbatim from its source display; see the I(lambda) caveats in
    the test suite - the z-integral is not a probability for all lambda.
    """
    if lam <= 0:
        raise ValueError("lambda must be > 0")
    if T <= 0:
        raise ValueError("T must be > 0")
    if z < max(a, b):
        raise ValueError("z must be >= max(a, b)")
    ss = ScaleSpeed(beta)
    return u_lambda(a, z, lam, beta) * u_lambda(z, b, lam, beta) * ss.s_slope(z) / ell(T, a, b, beta)


def max_transform_total(a: float, b: float, T: float, lam: float, beta: float, tol: float = 1e-10) -> float:
    """I(lambda): the max-decomposition density integrated over z >= max(a, b)."""
    lo = max(a, b)
    res = numerics.integrate(
        lambda zz: [max_decomposition_density(a, b, T, lam, float(v), beta) for v in zz],
        lo,
        math.inf,
        tol,
    )
    return res.value
