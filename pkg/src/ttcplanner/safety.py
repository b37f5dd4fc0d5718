"""Time-to-collision and its quadratic penalty."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence, Tuple

import numpy as np

from .geometry import PlanarPoint


CLOSING_EPS = 1e-12


class TTCSample(NamedTuple):
    t: float
    gap: float
    closing_speed: float
    ttc: float


@dataclass(frozen=True)
class SafetyParams:
    t_safe: float = 3.0
    safe_distance: float = 5.0
    ttc_thresholds: Tuple[float, ...] = (3.0, 2.0, 1.0)
    normalized: bool = True

    def __post_init__(self):
        object.__setattr__(self, "ttc_thresholds", tuple(float(x) for x in self.ttc_thresholds))
        if not self.t_safe > 0:
            raise ValueError(f"t_safe must be positive, got {self.t_safe}")
        if self.safe_distance < 0:
            raise ValueError("safe_distance must be >= 0")
        th = self.ttc_thresholds
        if any(x <= 0 for x in th) or any(a <= b for a, b in zip(th, th[1:])):
            raise ValueError(f"ttc_thresholds must be positive and strictly descending, got {th}")


def gap(ego: PlanarPoint, obs: PlanarPoint) -> float:
    """Center-to-center Euclidean distance."""
    return math.hypot(ego[0] - obs[0], ego[1] - obs[1])


def ttc_arrays(ex, ey, evx, evy, ox, oy, ovx, ovy):
    """Vectorized gap, closing speed and TTC.

    Closing speed is minus the time derivative of the gap, i.e. the
    line-of-sight projection of the relative velocity. Non-closing pairs get
    TTC = +inf; coincident positions get TTC = 0.
    """
    rx = np.asarray(ox, dtype=float) - ex
    ry = np.asarray(oy, dtype=float) - ey
    wx = np.asarray(ovx, dtype=float) - evx
    wy = np.asarray(ovy, dtype=float) - evy
    d = np.hypot(rx, ry)
    with np.errstate(divide="ignore", invalid="ignore"):
        closing = np.where(d > 0, -(rx * wx + ry * wy) / np.where(d > 0, d, 1.0), 0.0)
        # closing speeds at round-off level of the relative speed count as not closing
        closing = np.where(np.abs(closing) <= CLOSING_EPS * (1.0 + np.hypot(wx, wy)), 0.0, closing)
        ttc = np.where(closing > 0, d / np.where(closing > 0, closing, 1.0), np.inf)
    ttc = np.where(d == 0, 0.0, ttc)
    return d, closing, ttc


def ttc(ego_state: Sequence[float], obs_state: Sequence[float], t: float = 0.0) -> TTCSample:
    """TTC between two (x, y, vx, vy) states."""
    d, c, tt = ttc_arrays(*ego_state, *obs_state)
    return TTCSample(t, float(d), float(c), float(tt))


def ttc_penalty(ttc_value, t_safe: float, normalized: bool = True):
    """Zero above ``t_safe``, quadratic in the deficit below it.

    With ``normalized`` the deficit is divided by ``t_safe`` first, so the
    penalty lies in [0, 1].
    """
    if not t_safe > 0:
        raise ValueError("t_safe must be positive")
    tv = np.asarray(ttc_value, dtype=float)
    deficit = np.where(tv < t_safe, t_safe - np.minimum(tv, t_safe), 0.0)
    if normalized:
        deficit = deficit / t_safe
    out = deficit**2
    return float(out) if np.ndim(ttc_value) == 0 else out


def sample_grid(t0: float, t1: float, dt: float) -> Tuple[np.ndarray, float]:
    """Uniform grid from t0 to t1 with spacing as close to ``dt`` as tiling allows.

    Returns the times and the spacing actually used.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    n = max(int(round((t1 - t0) / dt)), 1)
    return np.linspace(t0, t1, n + 1), (t1 - t0) / n


def ttc_profile(plan, tracks, times) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(gap, closing, ttc) arrays of shape (n_tracks, n_times)."""
    times = np.asarray(times, dtype=float)
    n = len(tracks)
    if n == 0:
        empty = np.empty((0, times.size))
        return empty, empty, empty
    ex = plan.longitudinal(times)
    ey = plan.lateral(times, 0)
    evx = plan.longitudinal(times, 1)
    evy = plan.lateral(times, 1)
    out = [ttc_arrays(ex, ey, evx, evy, *tr.at(times)) for tr in tracks]
    gaps, closing, ttcs = (np.array(z) for z in zip(*out))
    return gaps, closing, ttcs


def ttc_cost(plan, tracks, params: SafetyParams, dt: float, t_from: float = None) -> float:
    """Rectangle-rule sum of the TTC penalty over obstacles and plan samples."""
    t0 = plan.t_begin if t_from is None else t_from
    times, step = sample_grid(t0, plan.t_end, dt)
    if not tracks:
        return 0.0
    _, _, ttcs = ttc_profile(plan, tracks, times)
    return float(np.sum(ttc_penalty(ttcs, params.t_safe, params.normalized)) * step)
