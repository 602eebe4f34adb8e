"""Exact sampling of skew-Brownian-with-drift bridge values.

Proposals are Brownian-bridge Gaussians; acceptance is q / (K * q00) with K
from skewlaw.bridge_bound.  Multi-time skeletons factor sequentially through
the Markov property: each point is drawn on the sub-bridge from the previous
accepted value to the fixed right endpoint.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import EnvelopeError, RejectionBudgetError
from .numerics import SQRT_2PI, RngStream, mills_vec
from .skewlaw import SkewParams, alpha_bar, bridge_bound, rho

# slack for the envelope-soundness monitor: the bound is analytic, so any
# excess beyond float roundoff means a wrong envelope, not noise
_ENVELOPE_SLACK = 1e-9

DEFAULT_MAX_ATTEMPTS = 10**6


@dataclass(frozen=True)
class BridgeRequest:
    t: float
    T: float
    a: float
    b: float
    params: SkewParams
    max_attempts: int = DEFAULT_MAX_ATTEMPTS

    def __post_init__(self):
        if not (0.0 < self.t < self.T):
            raise ValueError(f"BridgeRequest: need 0 < t < T, got t={self.t}, T={self.T}")
        if self.max_attempts < 1:
            raise ValueError("BridgeRequest: max_attempts >= 1 required")


@dataclass
class BridgeSample:
    value: float
    attempts: int


@dataclass
class BridgeCounters:
    """Proposal/accept tallies, pooled and per-call."""

    proposals: int = 0
    accepts: int = 0
    per_call_ratios: list = field(default_factory=list)

    def record(self, attempts: int):
        self.proposals += attempts
        self.accepts += 1
        self.per_call_ratios.append(1.0 / attempts)


def sample_brownian_bridge_point(t: float, T: float, a: float, b: float, rng: RngStream) -> float:
    """One Brownian-bridge value at t given endpoints (0, a) and (T, b)."""
    if not (0.0 < t < T):
        raise ValueError(f"need 0 < t < T, got t={t}, T={T}")
    mean = a + (t / T) * (b - a)
    sd = math.sqrt(t * (T - t) / T)
    return mean + sd * rng.normal()


def sample_skew_bridge_point(req: BridgeRequest, rng: RngStream, counters: BridgeCounters | None = None) -> BridgeSample:
    """Exact draw from the skew bridge density by rejection against q00."""
    t, T, a, b = req.t, req.T, req.a, req.b
    beta, mu = req.params.beta, req.params.mu
    K = bridge_bound(t, T, a, b, req.params)
    mean = a + (t / T) * (b - a)
    var = t * (T - t) / T
    sd = math.sqrt(var)
    rab = rho(T, a, b, beta, mu)
    denom = K * rab / (sd * SQRT_2PI)
    for attempt in range(1, req.max_attempts + 1):
        y = mean + sd * rng.normal()
        d = y - mean
        q00_part = math.exp(-d * d / (2.0 * var))
        f = rho(t, a, y, beta, mu) * rho(T - t, y, b, beta, mu) / (denom * q00_part)
        if f > 1.0 + _ENVELOPE_SLACK:
            raise EnvelopeError(
                f"bridge envelope violated: f={f:.6g} at y={y:.6g}, "
                f"(t,T,a,b)=({t},{T},{a},{b})",
                ratio=f,
            )
        if rng.uniform() <= f:
            if counters is not None:
                counters.record(attempt)
            return BridgeSample(value=y, attempts=attempt)
    raise RejectionBudgetError(
        f"bridge sampler exhausted {req.max_attempts} attempts at (t,T,a,b)=({t},{T},{a},{b})",
        attempts=req.max_attempts,
    )


def sample_skew_bridge_skeleton(
    times,
    T: float,
    a: float,
    b: float,
    params: SkewParams,
    rng: RngStream,
    max_attempts: int = DEFAULT_MAX_ATTEMPTS,
    counters: BridgeCounters | None = None,
):
    """Bridge values at sorted interior times, left to right.

    Point i is drawn from the bridge over [t_{i-1}, T] re-anchored at the
    previously accepted value, which reproduces the joint bridge law exactly.
    """
    times = [float(t) for t in times]
    if any(t2 <= t1 for t1, t2 in zip(times, times[1:])):
        raise ValueError("times must be strictly increasing")
    if times and not (0.0 < times[0] and times[-1] < T):
        raise ValueError("times must lie strictly inside (0, T)")
    values = []
    prev_t, prev_v = 0.0, a
    for i, t in enumerate(times):
        req = BridgeRequest(t - prev_t, T - prev_t, prev_v, b, params, max_attempts)
        try:
            s = sample_skew_bridge_point(req, rng, counters)
        except RejectionBudgetError as exc:
            exc.index = i
            raise
        values.append(s.value)
        prev_t, prev_v = t, s.value
    return values


# ---------------------------------------------------------------------------
# synchronized vectorized sampler (shared (t, T, b); per-component anchor a)
# ---------------------------------------------------------------------------


def _rho_vec2(t, x, y, beta, mu):
    """rho with x and y both arrays (scalar t)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    sy = y >= 0
    z = np.abs(x) + np.abs(y)
    w = np.where(sy, 1.0 + beta, 1.0 - beta)
    bm = beta * mu
    if bm == 0.0:
        g = 1.0
    else:
        g = 1.0 - bm * math.sqrt(2.0 * math.pi * t) * mills_vec((z + t * bm) / math.sqrt(t))
    c = 1.0 / math.sqrt(2.0 * math.pi * t)
    diff = np.exp(-(y - x) ** 2 / (2.0 * t)) * (-np.expm1(-2.0 * np.abs(x) * np.abs(y) / t))
    same = (x >= 0) == sy
    return c * (np.where(same, diff, 0.0) + w * np.exp(-z * z / (2.0 * t)) * g)


def sample_skew_bridge_points_sync(
    t: float,
    T: float,
    a,
    b: float,
    params: SkewParams,
    rng: RngStream,
    max_rounds: int = 10**4,
):
    """Independent skew-bridge points at one time t for a vector of anchors a.

    Component i is an exact draw from the bridge (0, a_i) -> (T, b) at t.
    Used by grid-skeleton Monte Carlo where many trajectories advance in step.
    """
    if not (0.0 < t < T):
        raise ValueError(f"need 0 < t < T, got t={t}, T={T}")
    a = np.asarray(a, dtype=float)
    beta, mu = params.beta, params.mu
    m = a.shape[0]
    bvec = np.full(m, float(b))
    ab = alpha_bar(beta)
    rab = _rho_vec2(T, a, bvec, beta, mu)
    p0 = np.exp(-(b - a) ** 2 / (2.0 * T)) / math.sqrt(2.0 * math.pi * T)
    K = 4.0 * ab * ab * p0 / rab
    bm = beta * mu
    if bm < 0.0:
        g1 = 1.0 - bm * math.sqrt(2.0 * math.pi * t) * mills_vec((np.abs(a) + t * bm) / math.sqrt(t))
        g2 = 1.0 - bm * math.sqrt(2.0 * math.pi * (T - t)) * mills_vec(
            (abs(b) + (T - t) * bm) / math.sqrt(T - t)
        )
        K = K * g1 * g2
    mean = a + (t / T) * (b - a)
    var = t * (T - t) / T
    sd = math.sqrt(var)

    out = np.empty(m)
    attempts = np.zeros(m, dtype=np.int64)
    todo = np.arange(m)
    for _ in range(max_rounds):
        k = todo.size
        if k == 0:
            return out, attempts
        y = mean[todo] + sd * rng.normals(k)
        q00 = np.exp(-(y - mean[todo]) ** 2 / (2.0 * var)) / (sd * SQRT_2PI)
        q = _rho_vec2(t, a[todo], y, beta, mu) * _rho_vec2(T - t, y, np.full(k, float(b)), beta, mu) / rab[todo]
        f = q / (K[todo] * q00)
        if np.any(f > 1.0 + _ENVELOPE_SLACK):
            bad = float(np.max(f))
            raise EnvelopeError(f"bridge envelope violated in sync sampler: f={bad:.6g}", ratio=bad)
        attempts[todo] += 1
        acc = rng.uniforms(k) <= f
        out[todo[acc]] = y[acc]
        todo = todo[~acc]
    raise RejectionBudgetError(f"sync bridge sampler exceeded {max_rounds} rounds", attempts=max_rounds)
