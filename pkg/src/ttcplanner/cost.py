"""Cost terms of a lateral plan, with finite-difference gradients."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional, Sequence

import numpy as np

from .safety import SafetyParams, sample_grid, ttc_arrays, ttc_penalty


@dataclass(frozen=True)
class CostWeights:
    lambda1: float = 1.0
    lambda2: float = 5.0
    lambda3: float = 1.0
    lambda4: float = 1.0
    lambda5: float = 1.0

    def __post_init__(self):
        vals = (self.lambda1, self.lambda2, self.lambda3, self.lambda4, self.lambda5)
        if any(not math.isfinite(w) or w < 0 for w in vals):
            raise ValueError(f"cost weights must be finite and >= 0, got {vals}")
        if self.lambda1 > 0 and self.lambda2 > 0:
            ratio = self.lambda2 / self.lambda1
            if not 0.01 <= ratio <= 10:
                warnings.warn(
                    f"lambda2/lambda1 = {ratio:g} is outside [0.01, 10]; the TTC term may dominate or vanish",
                    stacklevel=2,
                )


@dataclass(frozen=True)
class ActuationLimits:
    a_y_max: float = 3.0
    j_y_max: float = 5.0
    delta_max: float = 0.5
    wheelbase: float = 2.8

    def __post_init__(self):
        for name in ("a_y_max", "j_y_max", "delta_max", "wheelbase"):
            val = getattr(self, name)
            if not (math.isfinite(val) and val > 0):
                raise ValueError(f"{name} must be positive, got {val}")
        if self.delta_max >= math.pi / 2:
            raise ValueError("delta_max must be below pi/2")

    @property
    def kappa_max(self) -> float:
        return math.tan(self.delta_max) / self.wheelbase


class CostBreakdown(NamedTuple):
    smooth: float
    ttc: float
    bounds: float
    total: float


def _hinge_sq(values, limit):
    return np.maximum(np.abs(values) - limit, 0.0) ** 2


def smoothness_from_samples(y: np.ndarray, dt: float, order: int = 3) -> float:
    """Sum of squared ``order``-th finite differences scaled to approximate the integral of y^(order)^2."""
    if y.size <= order:
        raise ValueError(f"need more than {order} samples for the smoothness cost")
    d = np.diff(y, n=order)
    return float(np.sum(d * d) / dt ** (2 * order - 1))


def smoothness_cost(plan, dt: float, order: int = 3, t_from: Optional[float] = None) -> float:
    """Discrete integral of squared lateral jerk (``order=3``) or acceleration (``order=2``)."""
    if order not in (2, 3):
        raise ValueError("order must be 2 (acceleration) or 3 (jerk)")
    t0 = plan.t_begin if t_from is None else t_from
    if plan.t_end - t0 < 4 * dt - 1e-12:
        raise ValueError("plan horizon must cover at least 4 samples")
    times, step = sample_grid(t0, plan.t_end, dt)
    return smoothness_from_samples(plan.lateral(times, 0), step, order)


def bounds_from_samples(ay, jy, v: float, limits: ActuationLimits, weights: CostWeights) -> float:
    kappa = np.asarray(ay) / v**2
    return float(
        weights.lambda3 * np.sum(_hinge_sq(ay, limits.a_y_max))
        + weights.lambda4 * np.sum(_hinge_sq(jy, limits.j_y_max))
        + weights.lambda5 * np.sum(_hinge_sq(kappa, limits.kappa_max))
    )


def sampled_jerk(y: np.ndarray, dt: float) -> np.ndarray:
    """Third differences of sampled positions over dt^3.

    Unlike the analytic jerk, which jumps at piece joints, this is continuous
    in the plan parameters, so hinge terms built on it stay continuous too.
    """
    return np.diff(y, n=3) / dt**3


def bounds_cost(plan, limits: ActuationLimits, weights: CostWeights, dt: float, t_from: Optional[float] = None) -> float:
    """Squared-hinge penalties on the actuation limits (curvature taken as a_y / v^2), summed over samples."""
    t0 = plan.t_begin if t_from is None else t_from
    times, step = sample_grid(t0, plan.t_end, dt)
    y = plan.lateral(times, 0)
    return bounds_from_samples(plan.lateral(times, 2), sampled_jerk(y, step), plan.v, limits, weights)


class SampledContext:
    """Obstacle states cached on a fixed time grid, for repeated cost evaluation."""

    def __init__(self, tracks: Sequence, t0: float, t1: float, dt: float):
        self.times, self.step = sample_grid(t0, t1, dt)
        self.tracks = list(tracks)
        if self.tracks:
            states = [tr.at(self.times) for tr in self.tracks]
            self.obs = np.array(states)  # (n_obs, 4, n_times)
        else:
            self.obs = np.empty((0, 4, self.times.size))

    def ttc(self, plan):
        t = self.times
        ex = plan.longitudinal(t)
        ey = plan.lateral(t, 0)
        evy = plan.lateral(t, 1)
        return ttc_arrays(ex, ey, plan.v, evy, self.obs[:, 0], self.obs[:, 1], self.obs[:, 2], self.obs[:, 3])


def evaluate_breakdown(
    plan,
    ctx: SampledContext,
    safety: SafetyParams,
    weights: CostWeights,
    limits: ActuationLimits,
    smooth_order: int = 3,
) -> CostBreakdown:
    t = ctx.times
    y = plan.lateral(t, 0)
    smooth = smoothness_from_samples(y, ctx.step, smooth_order)
    if ctx.obs.shape[0]:
        _, _, ttcs = ctx.ttc(plan)
        ttc_term = float(np.sum(ttc_penalty(ttcs, safety.t_safe, safety.normalized)) * ctx.step)
    else:
        ttc_term = 0.0
    bounds = bounds_from_samples(plan.lateral(t, 2), sampled_jerk(y, ctx.step), plan.v, limits, weights)
    total = weights.lambda1 * smooth + weights.lambda2 * ttc_term + bounds
    return CostBreakdown(smooth, ttc_term, bounds, total)


def total_cost(
    plan,
    tracks: Sequence,
    params: SafetyParams,
    weights: CostWeights,
    limits: ActuationLimits,
    dt: float,
    t_from: Optional[float] = None,
    smooth_order: int = 3,
) -> CostBreakdown:
    """J = lambda1 * smooth + lambda2 * ttc + bounds over [t_from, plan end]."""
    t0 = plan.t_begin if t_from is None else t_from
    ctx = SampledContext(tracks, t0, plan.t_end, dt)
    return evaluate_breakdown(plan, ctx, params, weights, limits, smooth_order)


def fd_steps(params: np.ndarray, rel_step: float = 1e-6) -> np.ndarray:
    return rel_step * np.maximum(1.0, np.abs(params))


def cost_gradient(
    objective: Callable[[np.ndarray], float],
    params,
    lower=None,
    upper=None,
    steps=None,
) -> np.ndarray:
    """Central-difference gradient; one-sided second-order stencils at box faces.

    Default step is 1e-6 * max(1, |p|) per component.
    """
    p = np.asarray(params, dtype=float)
    lo = np.full_like(p, -np.inf) if lower is None else np.asarray(lower, dtype=float)
    hi = np.full_like(p, np.inf) if upper is None else np.asarray(upper, dtype=float)
    if np.any(p < lo - 1e-12) or np.any(p > hi + 1e-12):
        raise ValueError(f"parameters {p} outside the feasible box")
    h = fd_steps(p) if steps is None else np.broadcast_to(np.asarray(steps, dtype=float), p.shape)
    g = np.empty_like(p)
    f0 = None
    for i in range(p.size):
        e = np.zeros_like(p)
        e[i] = h[i]
        if p[i] + h[i] <= hi[i] and p[i] - h[i] >= lo[i]:
            g[i] = (objective(p + e) - objective(p - e)) / (2 * h[i])
        else:
            if f0 is None:
                f0 = objective(p)
            sgn = 1.0 if p[i] + 2 * h[i] <= hi[i] else -1.0
            f1 = objective(p + sgn * e)
            f2 = objective(p + 2 * sgn * e)
            g[i] = sgn * (-3 * f0 + 4 * f1 - f2) / (2 * h[i])
    return g


def richardson_gradient(objective, params, h, lower=None, upper=None):
    """(gradient at step h, at h/2, Richardson combination (4*g_{h/2} - g_h)/3)."""
    g1 = cost_gradient(objective, params, lower, upper, steps=h)
    g2 = cost_gradient(objective, params, lower, upper, steps=np.asarray(h) / 2)
    return g1, g2, (4 * g2 - g1) / 3


def ttc_cost_sample_gradient(plan, ctx: SampledContext, safety: SafetyParams):
    """Analytic derivative of the TTC cost w.r.t. each lateral sample y_k and ydot_k.

    Returns two arrays of shape (n_times,). Non-closing samples contribute zero.
    """
    t = ctx.times
    ey = plan.lateral(t, 0)
    evy = plan.lateral(t, 1)
    ex = plan.longitudinal(t)
    dJ_dy = np.zeros_like(t)
    dJ_dv = np.zeros_like(t)
    ts = safety.t_safe
    for ox, oy, ovx, ovy in ctx.obs:
        rx, ry = ox - ex, oy - ey
        wx, wy = ovx - plan.v, ovy - evy
        num = rx * rx + ry * ry
        den = -(rx * wx + ry * wy)
        active = (den > 0) & (num > 0)
        ttc = np.where(active, num / np.where(active, den, 1.0), np.inf)
        active &= ttc < ts
        if not np.any(active):
            continue
        scale = 1.0 / ts**2 if safety.normalized else 1.0
        dphi = np.where(active, -2.0 * (ts - np.where(active, ttc, 0.0)) * scale, 0.0)
        den_safe = np.where(active, den, 1.0)
        # d num/d ey = -2 ry ; d den/d ey = wy ; d den/d evy = ry
        dttc_dy = (-2 * ry * den_safe - num * wy) / den_safe**2
        dttc_dv = (-num * ry) / den_safe**2
        dJ_dy += dphi * dttc_dy * ctx.step
        dJ_dv += dphi * dttc_dv * ctx.step
    return dJ_dy, dJ_dv
