"""Piecewise lateral plans assembled from quintic pieces and holds."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from .polynomial import TIME_EPS, BoundaryConditions, QuinticSegment, solve_boundary


@dataclass(frozen=True)
class Hold:
    """Constant lateral level over [t_start, t_end]."""

    level: float
    t_start: float
    t_end: float
    kind: str = field(default="hold", compare=False)

    def __post_init__(self):
        if not self.t_end > self.t_start:
            raise ValueError(f"hold needs t_end > t_start, got [{self.t_start}, {self.t_end}]")

    @property
    def duration(self) -> float:
        return self.t_end - self.t_start

    def evaluate(self, t, order: int = 0):
        t_arr = np.asarray(t, dtype=float)
        val = self.level if order == 0 else 0.0
        out = np.full_like(t_arr, val)
        return float(out) if np.ndim(t) == 0 else out


class LateralState(NamedTuple):
    t: float
    y: float
    v: float = 0.0
    a: float = 0.0


class JunctionState(NamedTuple):
    """Switching time and the lateral state shared by both quintic segments."""

    t_s: float
    y_s: float
    v_s: float = 0.0
    a_s: float = 0.0


class ManeuverPlan:
    """Ordered pieces tiling [t_begin, t_end] at constant longitudinal speed ``v``.

    Lateral position is absolute; longitudinal position is ``x0 + v * t``.
    """

    def __init__(self, pieces: Sequence, v: float, x0: float = 0.0, kind: str = "plan", meta: Optional[dict] = None):
        pieces = list(pieces)
        if not pieces:
            raise ValueError("a plan needs at least one piece")
        if not (np.isfinite(v) and v > 0):
            raise ValueError(f"longitudinal speed must be positive, got {v}")
        for prev, nxt in zip(pieces, pieces[1:]):
            if abs(prev.t_end - nxt.t_start) > 1e-9:
                raise ValueError(
                    f"pieces must tile the horizon: gap/overlap at t={prev.t_end} vs {nxt.t_start}"
                )
        self.pieces = tuple(pieces)
        self.v = float(v)
        self.x0 = float(x0)
        self.kind = kind
        self.meta = dict(meta or {})
        self._starts = np.array([p.t_start for p in self.pieces])

    def __repr__(self):
        return f"ManeuverPlan(kind={self.kind!r}, pieces={len(self.pieces)}, t=[{self.t_begin}, {self.t_end}], v={self.v})"

    @property
    def t_begin(self) -> float:
        return self.pieces[0].t_start

    @property
    def t_end(self) -> float:
        return self.pieces[-1].t_end

    @property
    def total_horizon(self) -> float:
        return self.t_end

    @property
    def maneuver_start(self) -> float:
        """Start time of the first piece that is not a constant hold."""
        moving = [p for p in self.pieces if not isinstance(p, Hold)]
        return moving[0].t_start if moving else self.t_begin

    @property
    def maneuver_end(self) -> float:
        """End time of the last piece that is not a constant hold."""
        moving = [p for p in self.pieces if not isinstance(p, Hold)]
        return moving[-1].t_end if moving else self.t_begin

    @property
    def joints(self) -> List[float]:
        return [p.t_end for p in self.pieces[:-1]]

    def lateral(self, t, order: int = 0):
        """Lateral position (order 0) or its derivatives (1..3) at ``t``."""
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        if np.any(t_arr < self.t_begin - TIME_EPS) or np.any(t_arr > self.t_end + TIME_EPS):
            raise ValueError(f"t outside plan window [{self.t_begin}, {self.t_end}]")
        # a sample on a joint belongs to the earlier piece
        idx = np.clip(np.searchsorted(self._starts, t_arr, side="left") - 1, 0, len(self.pieces) - 1)
        out = np.empty_like(t_arr)
        for i, piece in enumerate(self.pieces):
            mask = idx == i
            if np.any(mask):
                tt = np.clip(t_arr[mask], piece.t_start, piece.t_end)
                out[mask] = piece.evaluate(tt, order)
        if np.ndim(t) == 0:
            return float(out[0])
        return out

    def longitudinal(self, t, order: int = 0):
        t_arr = np.asarray(t, dtype=float)
        if order == 0:
            out = self.x0 + self.v * t_arr
        elif order == 1:
            out = np.full_like(t_arr, self.v)
        else:
            out = np.zeros_like(t_arr)
        return float(out) if np.ndim(t) == 0 else out

    def state(self, t: float) -> LateralState:
        return LateralState(t, *(self.lateral(t, k) for k in range(3)))

    def sample(self, t) -> dict:
        """Positions and derivatives at ``t`` as a dict of arrays."""
        t = np.asarray(t, dtype=float)
        return {
            "t": t,
            "x": self.longitudinal(t),
            "y": self.lateral(t, 0),
            "vx": self.longitudinal(t, 1),
            "vy": self.lateral(t, 1),
            "ay": self.lateral(t, 2),
            "jy": self.lateral(t, 3),
        }

    def joint_residuals(self) -> np.ndarray:
        """|jump| in y, y', y'' at every joint, shape (n_joints, 3)."""
        res = []
        for a, b in zip(self.pieces, self.pieces[1:]):
            t = a.t_end
            res.append([abs(a.evaluate(t, k) - b.evaluate(b.t_start, k)) for k in range(3)])
        return np.array(res).reshape(-1, 3)

    def with_prefix(self, t_cut: float, tail: "ManeuverPlan") -> "ManeuverPlan":
        """Keep this plan up to ``t_cut`` and continue with ``tail`` (which starts at t_cut)."""
        head = truncate_pieces(self.pieces, t_cut)
        return ManeuverPlan(head + list(tail.pieces), self.v, self.x0, kind=tail.kind, meta=tail.meta)


def truncate_pieces(pieces: Iterable, t_cut: float) -> list:
    """Pieces restricted to times <= t_cut (the piece containing t_cut is clipped)."""
    out = []
    for p in pieces:
        if p.t_start >= t_cut - TIME_EPS:
            break
        if p.t_end <= t_cut + TIME_EPS:
            out.append(p)
        else:
            out.append(_clip_piece(p, t_cut))
            break
    return out


def _clip_piece(p, t_cut):
    if isinstance(p, Hold):
        return Hold(p.level, p.t_start, t_cut)
    if isinstance(p, QuinticSegment):
        return QuinticSegment(p.coeffs, p.t_start, t_cut)
    return p.clipped(t_cut)


def _append_hold(pieces: list, level: float, t_until: float):
    t_from = pieces[-1].t_end if pieces else None
    if t_from is not None and t_until > t_from + TIME_EPS:
        pieces.append(Hold(level, t_from, t_until))


def transition(start: LateralState, target: float, t_end: float, end_v: float = 0.0, end_a: float = 0.0) -> QuinticSegment:
    bc = BoundaryConditions(start.y, target, start.v, end_v, start.a, end_a)
    return solve_boundary(bc, t_end - start.t, t_start=start.t)


def junction_pieces(start: LateralState, junction: JunctionState, end: LateralState) -> list:
    """Two quintics: start -> junction state at t_s -> end."""
    if not start.t < junction.t_s < end.t:
        raise ValueError(
            f"switching time {junction.t_s} must lie strictly inside ({start.t}, {end.t})"
        )
    first = transition(start, junction.y_s, junction.t_s, junction.v_s, junction.a_s)
    js = LateralState(junction.t_s, junction.y_s, junction.v_s, junction.a_s)
    second = transition(js, end.y, end.t, end.v, end.a)
    return [first, second]


def junction_plan(
    start: LateralState,
    junction: JunctionState,
    end: LateralState,
    v: float,
    horizon: Optional[float] = None,
    x0: float = 0.0,
    prefix: Sequence = (),
    kind: str = "double_quintic",
) -> ManeuverPlan:
    pieces = list(prefix) + junction_pieces(start, junction, end)
    if horizon is not None:
        _append_hold(pieces, end.y, horizon)
    return ManeuverPlan(pieces, v, x0, kind=kind, meta={"junction": junction, "end": end})


def single_lane_change(
    delta_y: float,
    T: float,
    v: float,
    horizon: Optional[float] = None,
    y0: float = 0.0,
    t_start: float = 0.0,
    x0: float = 0.0,
) -> ManeuverPlan:
    """Rest-to-rest quintic from y0 to y0 + delta_y over [t_start, t_start + T], then a hold."""
    if not T > 0:
        raise ValueError(f"maneuver time must be positive, got {T}")
    pieces = []
    if t_start > 0:
        pieces.append(Hold(y0, 0.0, t_start))
    pieces.append(solve_boundary(BoundaryConditions.rest_to_rest(y0, y0 + delta_y), T, t_start))
    if horizon is not None:
        _append_hold(pieces, y0 + delta_y, horizon)
    return ManeuverPlan(pieces, v, x0, kind="quintic")


def symmetric_junction(delta_y_total: float, T: float, y0: float = 0.0, t0: float = 0.0) -> JunctionState:
    """Rest junction halfway in time and displacement."""
    return JunctionState(t0 + T / 2, y0 + delta_y_total / 2, 0.0, 0.0)


def double_lane_change(
    delta_y_total: float,
    junction: JunctionState,
    T: float,
    v: float,
    horizon: Optional[float] = None,
    y0: float = 0.0,
    t_start: float = 0.0,
    x0: float = 0.0,
) -> ManeuverPlan:
    """Two quintics joined C2 at ``junction``: rest at t_start -> junction -> rest at t_start + T."""
    start = LateralState(t_start, y0, 0.0, 0.0)
    end = LateralState(t_start + T, y0 + delta_y_total, 0.0, 0.0)
    prefix = [Hold(y0, 0.0, t_start)] if t_start > 0 else []
    return junction_plan(start, junction, end, v, horizon, x0, prefix)


def phased_plan(
    start: LateralState,
    steps: Sequence[Tuple],
    v: float,
    horizon: Optional[float] = None,
    x0: float = 0.0,
    prefix: Sequence = (),
    kind: str = "phased",
) -> ManeuverPlan:
    """Chain of ("hold", duration) and ("shift", target, duration) steps.

    The first shift starts from ``start`` (which may be moving); every later
    shift starts from rest at the previous target. Zero-length holds are dropped.
    """
    pieces = list(prefix)
    state = start
    for step in steps:
        if step[0] == "hold":
            dur = step[1]
            if dur < 0:
                raise ValueError(f"hold duration must be >= 0, got {dur}")
            if state.v != 0.0 or state.a != 0.0:
                raise ValueError("a hold can only follow a rest state")
            if dur > TIME_EPS:
                pieces.append(Hold(state.y, state.t, state.t + dur))
                state = LateralState(state.t + dur, state.y)
        elif step[0] == "shift":
            _, target, dur = step
            if not dur > 0:
                raise ValueError(f"shift duration must be positive, got {dur}")
            pieces.append(transition(state, target, state.t + dur))
            state = LateralState(state.t + dur, target)
        else:
            raise ValueError(f"unknown step {step[0]!r}")
    if horizon is not None:
        if horizon < state.t - TIME_EPS:
            raise ValueError(f"phases end at {state.t}, beyond the horizon {horizon}")
        _append_hold(pieces, state.y, horizon)
    return ManeuverPlan(pieces, v, x0, kind=kind)


def overtake(
    D: float,
    T1: float,
    T2: float,
    T3: float,
    T4: float,
    v: float,
    horizon: float,
    y0: float = 0.0,
    x0: float = 0.0,
) -> ManeuverPlan:
    """Four-phase out-and-back: stay, shift by D on [T1,T2], hold, return on [T3,T4], stay."""
    if not (0 <= T1 < T2 <= T3 < T4 <= horizon + TIME_EPS):
        raise ValueError(
            f"overtake phases need 0 <= T1 < T2 <= T3 < T4 <= horizon, got {(T1, T2, T3, T4, horizon)}"
        )
    start = LateralState(0.0, y0)
    steps = [("hold", T1), ("shift", y0 + D, T2 - T1), ("hold", T3 - T2), ("shift", y0, T4 - T3)]
    plan = phased_plan(start, steps, v, horizon, x0, kind="overtake")
    plan.meta.update(D=D, phases=(T1, T2, T3, T4))
    return plan


def avoidance_swerve(
    peak: float,
    direction: int,
    t_enter: float,
    t_exit: float,
    v: float,
    horizon: Optional[float] = None,
    y0: float = 0.0,
    x0: float = 0.0,
) -> ManeuverPlan:
    """Out-and-back swerve of height ``peak`` centred in [t_enter, t_exit].

    A zero peak gives the straight, no-avoidance path.
    """
    if direction not in (1, -1):
        raise ValueError("direction must be +1 or -1")
    if peak < 0:
        raise ValueError("peak must be >= 0")
    if not t_exit > t_enter:
        raise ValueError("t_exit must exceed t_enter")
    horizon = t_exit if horizon is None else horizon
    mid = 0.5 * (t_enter + t_exit)
    plan = overtake(direction * peak, t_enter, mid, mid, t_exit, v, horizon, y0, x0)
    plan.kind = "avoidance"
    return plan
