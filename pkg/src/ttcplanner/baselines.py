"""Comparison planners that ignore traffic: closed-form quintics and spline profiles."""

from __future__ import annotations

import enum
from math import comb
from typing import Optional

import numpy as np
from scipy.interpolate import BSpline

from .maneuver import Hold, JunctionState, ManeuverPlan, double_lane_change, single_lane_change, symmetric_junction
from .polynomial import TIME_EPS


class BaselineKind(enum.Enum):
    ClosedQuintic = "quintic"
    ClosedDoubleQuintic = "double_quintic"
    Bezier = "bezier"
    BSpline = "bspline"


def _check_window(t, t_start, t_end):
    t = np.asarray(t, dtype=float)
    if np.any(t < t_start - TIME_EPS) or np.any(t > t_end + TIME_EPS):
        raise ValueError(f"t outside piece window [{t_start}, {t_end}]")
    return np.clip(t, t_start, t_end)


class BezierPiece:
    """Degree-5 Bezier curve in the (t, y) plane, evaluated as a function of time.

    Time controls are strictly increasing, so t(u) is invertible.
    """

    kind = "bezier"

    def __init__(self, t_ctrl, y_ctrl, t_start: Optional[float] = None, t_end: Optional[float] = None):
        self.t_ctrl = np.asarray(t_ctrl, dtype=float)
        self.y_ctrl = np.asarray(y_ctrl, dtype=float)
        if self.t_ctrl.shape != self.y_ctrl.shape or self.t_ctrl.ndim != 1:
            raise ValueError("time and level controls must be 1-D and the same length")
        if np.any(np.diff(self.t_ctrl) <= 0):
            raise ValueError("time controls must be strictly increasing")
        self.t_start = float(self.t_ctrl[0]) if t_start is None else float(t_start)
        self.t_end = float(self.t_ctrl[-1]) if t_end is None else float(t_end)
        self.degree = self.t_ctrl.size - 1
        # derivative control polygons up to third order
        self._dt = [self.t_ctrl]
        self._dy = [self.y_ctrl]
        for k in range(3):
            n = self.degree - k
            self._dt.append(n * np.diff(self._dt[-1]))
            self._dy.append(n * np.diff(self._dy[-1]))

    @staticmethod
    def _bernstein(ctrl, u):
        n = ctrl.size - 1
        if n < 0:
            return np.zeros_like(u)
        basis = np.array([comb(n, i) * u**i * (1 - u) ** (n - i) for i in range(n + 1)])
        return ctrl @ basis

    def _u_of_t(self, t):
        u = (t - self.t_ctrl[0]) / (self.t_ctrl[-1] - self.t_ctrl[0])
        lo, hi = np.zeros_like(u), np.ones_like(u)
        for _ in range(60):
            f = self._bernstein(self._dt[0], u) - t
            lo = np.where(f < 0, u, lo)
            hi = np.where(f >= 0, u, hi)
            step = f / self._bernstein(self._dt[1], u)
            u_new = u - step
            bad = (u_new <= lo) | (u_new >= hi)
            u_new = np.where(bad, 0.5 * (lo + hi), u_new)
            if np.max(np.abs(u_new - u)) < 1e-15:
                u = u_new
                break
            u = u_new
        return u

    def evaluate(self, t, order: int = 0):
        tt = _check_window(t, self.t_start, self.t_end)
        u = self._u_of_t(np.atleast_1d(tt))
        b = lambda seq, k: self._bernstein(seq[k], u)
        t1, t2, t3 = b(self._dt, 1), b(self._dt, 2), b(self._dt, 3)
        y1, y2, y3 = b(self._dy, 1), b(self._dy, 2), b(self._dy, 3)
        if order == 0:
            out = b(self._dy, 0)
        elif order == 1:
            out = y1 / t1
        elif order == 2:
            out = (y2 * t1 - y1 * t2) / t1**3
        elif order == 3:
            out = ((y3 * t1 - y1 * t3) * t1 - 3.0 * t2 * (y2 * t1 - y1 * t2)) / t1**5
        else:
            raise ValueError("order must be 0..3")
        return float(out[0]) if np.ndim(t) == 0 else out

    def clipped(self, t_cut: float) -> "BezierPiece":
        return BezierPiece(self.t_ctrl, self.y_ctrl, self.t_start, t_cut)


class BSplinePiece:
    """Clamped cubic B-spline y(t) on a uniform knot vector over [t0, t0 + T]."""

    kind = "bspline"

    def __init__(self, controls, t0: float, T: float, t_end: Optional[float] = None):
        self.controls = np.asarray(controls, dtype=float)
        self.t0, self.T = float(t0), float(T)
        k = 3
        n = self.controls.size
        if n < k + 1:
            raise ValueError("need at least four controls")
        inner = np.linspace(0.0, 1.0, n - k + 1)[1:-1]
        knots = np.concatenate([[0.0] * (k + 1), inner, [1.0] * (k + 1)])
        self._spl = BSpline(knots, self.controls, k)
        self._derivs = [self._spl] + [self._spl.derivative(m) for m in (1, 2, 3)]
        self.t_start = self.t0
        self.t_end = self.t0 + self.T if t_end is None else float(t_end)

    def evaluate(self, t, order: int = 0):
        if order not in (0, 1, 2, 3):
            raise ValueError("order must be 0..3")
        tt = _check_window(t, self.t_start, self.t_end)
        u = (tt - self.t0) / self.T
        out = self._derivs[order](u) / self.T**order
        return float(out) if np.ndim(t) == 0 else np.asarray(out, dtype=float)

    def clipped(self, t_cut: float) -> "BSplinePiece":
        return BSplinePiece(self.controls, self.t0, self.T, t_cut)


def bezier_controls(delta_y: float, T: float, y0: float = 0.0, t0: float = 0.0, spread: float = 0.1):
    """Three coincident level controls at each end, time controls spread over ``spread * T``."""
    tc = t0 + T * np.array([0.0, spread / 2, spread, 1 - spread, 1 - spread / 2, 1.0])
    yc = y0 + delta_y * np.array([0.0, 0.0, 0.0, 1.0, 1.0, 1.0])
    return tc, yc


def bspline_controls(delta_y: float, y0: float = 0.0):
    return y0 + delta_y * np.array([0.0, 0.0, 0.0, 0.5, 1.0, 1.0, 1.0])


def plan_baseline(
    kind,
    delta_y: float,
    T: float,
    v: float,
    horizon: Optional[float] = None,
    y0: float = 0.0,
    t_start: float = 0.0,
    x0: float = 0.0,
) -> ManeuverPlan:
    """Rest-to-rest lateral shift by ``delta_y`` over [t_start, t_start + T] with a given profile family."""
    if not T > 0:
        raise ValueError(f"maneuver time must be positive, got {T}")
    kind = BaselineKind(kind) if not isinstance(kind, BaselineKind) else kind
    if kind is BaselineKind.ClosedQuintic:
        plan = single_lane_change(delta_y, T, v, horizon, y0, t_start, x0)
    elif kind is BaselineKind.ClosedDoubleQuintic:
        junction = symmetric_junction(delta_y, T, y0, t_start)
        plan = double_lane_change(delta_y, junction, T, v, horizon, y0, t_start, x0)
    else:
        pieces = [Hold(y0, 0.0, t_start)] if t_start > 0 else []
        if kind is BaselineKind.Bezier:
            pieces.append(BezierPiece(*bezier_controls(delta_y, T, y0, t_start)))
        else:
            pieces.append(BSplinePiece(bspline_controls(delta_y, y0), t_start, T))
        end = t_start + T
        if horizon is not None and horizon > end + TIME_EPS:
            pieces.append(Hold(y0 + delta_y, end, horizon))
        plan = ManeuverPlan(pieces, v, x0)
    plan.kind = kind.value
    plan.meta.update(baseline=kind.value, delta_y=delta_y, T=T)
    return plan


def plan_baseline_sequence(kind, steps, v: float, horizon: Optional[float] = None, y0: float = 0.0, x0: float = 0.0):
    """Back-to-back ``("hold", duration)`` and ``("shift", delta_y, T)`` steps in one profile family."""
    kind = BaselineKind(kind) if not isinstance(kind, BaselineKind) else kind
    pieces, t, y = [], 0.0, y0
    for step in steps:
        if step[0] == "hold":
            if step[1] > TIME_EPS:
                pieces.append(Hold(y, t, t + step[1]))
                t += step[1]
        elif step[0] == "shift":
            _, delta, T = step
            part = plan_baseline(kind, delta, T, v, None, y, t, x0)
            pieces.extend(p for p in part.pieces if not isinstance(p, Hold))
            t, y = t + T, y + delta
        else:
            raise ValueError(f"unknown step {step[0]!r}")
    if horizon is not None:
        if horizon < t - TIME_EPS:
            raise ValueError(f"steps end at {t}, beyond the horizon {horizon}")
        if horizon > t + TIME_EPS:
            pieces.append(Hold(y, t, horizon))
    return ManeuverPlan(pieces, v, x0, kind=kind.value, meta={"baseline": kind.value, "steps": tuple(steps)})
