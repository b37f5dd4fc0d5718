"""Surrounding-vehicle tracks: constant, delayed copy, braking, oscillating, replay."""

from __future__ import annotations

import csv
import io
import math
import os
from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.ndimage import uniform_filter1d

TRACK_KINDS = ("constant", "delayed_offset", "braking", "oscillating", "replay")


class ReplayFormatError(ValueError):
    """Malformed replay CSV; ``line`` is the 1-based line number in the file."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)


@dataclass(frozen=True, eq=False)
class ObstacleTrack:
    """Uniformly sampled obstacle states on [0, horizon]."""

    id: str
    kind: str
    t: np.ndarray
    x: np.ndarray
    y: np.ndarray
    vx: np.ndarray
    vy: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in TRACK_KINDS:
            raise ValueError(f"unknown track kind {self.kind!r}")
        arrays = [np.asarray(a, dtype=float) for a in (self.t, self.x, self.y, self.vx, self.vy)]
        n = arrays[0].size
        if n < 2 or any(a.shape != (n,) for a in arrays):
            raise ValueError("track arrays must be 1-D, equal length and have >= 2 samples")
        if not all(np.all(np.isfinite(a)) for a in arrays):
            raise ValueError("track samples must be finite")
        steps = np.diff(arrays[0])
        if np.any(steps <= 0) or not np.allclose(steps, steps[0], rtol=1e-9, atol=1e-12):
            raise ValueError("track samples must be uniformly spaced in time")
        for name, a in zip(("t", "x", "y", "vx", "vy"), arrays):
            a.setflags(write=False)
            object.__setattr__(self, name, a)

    @property
    def dt(self) -> float:
        return float(self.t[1] - self.t[0])

    @property
    def horizon(self) -> float:
        return float(self.t[-1])

    def at(self, t) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """Linearly interpolated (x, y, vx, vy) at times inside the track window."""
        t = np.asarray(t, dtype=float)
        if np.any(t < self.t[0] - 1e-9) or np.any(t > self.t[-1] + 1e-9):
            raise ValueError(f"track {self.id!r} queried outside [{self.t[0]}, {self.t[-1]}]")
        return tuple(np.interp(t, self.t, a) for a in (self.x, self.y, self.vx, self.vy))

    def position(self, t: float) -> Tuple[float, float]:
        x, y, _, _ = self.at(t)
        return float(x), float(y)


def time_grid(horizon: float, dt: float) -> np.ndarray:
    if not dt > 0:
        raise ValueError("dt must be positive")
    if not horizon > 0:
        raise ValueError("horizon must be positive")
    n = int(round(horizon / dt))
    return dt * np.arange(n + 1)


def constant_track(
    x0: float, y0: float, speed: float, horizon: float, dt: float, id: str = "hdv", heading: float = 0.0
) -> ObstacleTrack:
    """Straight motion at constant speed; ``heading`` in radians from +x (0 follows the road)."""
    t = time_grid(horizon, dt)
    if heading == 0.0:
        vx, vy = speed, 0.0
    else:
        vx, vy = speed * math.cos(heading), speed * math.sin(heading)
    return ObstacleTrack(
        id, "constant", t, x0 + vx * t, y0 + vy * t, np.full_like(t, vx), np.full_like(t, vy),
        meta={"x0": x0, "y0": y0, "speed": speed, "heading": heading},
    )


def delayed_offset_track(ego_plan, tau: float, delta: float, horizon: float, dt: float, id: str = "hdv") -> ObstacleTrack:
    """Ego plan shifted ``tau`` seconds ahead in time and ``delta`` metres sideways.

    Past the end of the ego plan the copy continues from the plan's terminal state.
    """
    if tau < 0:
        raise ValueError("tau must be >= 0")
    t = time_grid(horizon, dt)
    s = t + tau
    inside = np.clip(s, ego_plan.t_begin, ego_plan.t_end)
    beyond = np.maximum(s - ego_plan.t_end, 0.0)
    vy_end = ego_plan.lateral(ego_plan.t_end, 1)
    x = ego_plan.longitudinal(s)
    y = ego_plan.lateral(inside, 0) + vy_end * beyond + delta
    vy = np.where(beyond > 0, vy_end, ego_plan.lateral(inside, 1))
    vx = np.full_like(t, ego_plan.v)
    return ObstacleTrack(id, "delayed_offset", t, x, y, vx, vy, meta={"tau": tau, "delta": delta})


def braking_track(
    x0: float, y0: float, v0: float, decel: float, v_floor: float, horizon: float, dt: float, id: str = "hdv"
) -> ObstacleTrack:
    """Constant deceleration from v0 down to v_floor, then constant speed."""
    if decel < 0:
        raise ValueError("decel must be >= 0")
    if not 0 <= v_floor <= v0:
        raise ValueError("need 0 <= v_floor <= v0")
    t = time_grid(horizon, dt)
    t_stop = (v0 - v_floor) / decel if decel > 0 else math.inf
    tb = np.minimum(t, t_stop)
    v = v0 - decel * tb
    x = x0 + v0 * tb - 0.5 * decel * tb**2 + v_floor * (t - tb)
    return ObstacleTrack(
        id, "braking", t, x, np.full_like(t, y0), v, np.zeros_like(t),
        meta={"x0": x0, "y0": y0, "v0": v0, "decel": decel, "v_floor": v_floor},
    )


def oscillating_track(
    x0: float, y0: float, v_mean: float, v_amp: float, period: float, horizon: float, dt: float, id: str = "hdv"
) -> ObstacleTrack:
    """Speed v_mean + v_amp*sin(2*pi*t/period); position is the exact integral."""
    if not period > 0:
        raise ValueError("period must be positive")
    if v_amp < 0 or v_amp > v_mean:
        raise ValueError("need 0 <= v_amp <= v_mean (no reversing)")
    t = time_grid(horizon, dt)
    w = 2 * math.pi / period
    v = v_mean + v_amp * np.sin(w * t)
    x = x0 + v_mean * t + (v_amp / w) * (1 - np.cos(w * t))
    return ObstacleTrack(
        id, "oscillating", t, x, np.full_like(t, y0), v, np.zeros_like(t),
        meta={"x0": x0, "y0": y0, "v_mean": v_mean, "v_amp": v_amp, "period": period},
    )


def read_replay_csv(source: Union[str, os.PathLike, io.TextIOBase]) -> np.ndarray:
    """Parse a ``t,x,y`` CSV into an (N, 3) array with strict validation."""
    if isinstance(source, (str, os.PathLike)):
        with open(source, newline="") as fh:
            text = fh.read()
    else:
        text = source.read()
    reader = csv.reader(io.StringIO(text))
    rows = []
    header_seen = False
    for line_no, row in enumerate(reader, start=1):
        if not row or all(not c.strip() for c in row):
            continue
        if not header_seen:
            cols = [c.strip().lower() for c in row]
            if cols != ["t", "x", "y"]:
                raise ReplayFormatError(f"expected header 't,x,y', got {','.join(row)!r}", line_no)
            header_seen = True
            continue
        if len(row) != 3:
            raise ReplayFormatError(f"expected 3 fields, got {len(row)}", line_no)
        try:
            vals = [float(c) for c in row]
        except ValueError:
            raise ReplayFormatError(f"non-numeric field in {row!r}", line_no) from None
        if not all(math.isfinite(v) for v in vals):
            raise ReplayFormatError(f"non-finite value in {row!r}", line_no)
        if rows and vals[0] <= rows[-1][1][0]:
            raise ReplayFormatError(f"time {vals[0]} does not increase (previous {rows[-1][1][0]})", line_no)
        rows.append((line_no, vals))
    if not header_seen:
        raise ReplayFormatError("empty replay file")
    if len(rows) < 2:
        raise ReplayFormatError(f"need at least 2 data rows, got {len(rows)}")
    return np.array([v for _, v in rows])


def similarity_transform(xy: np.ndarray, scale: float = 1.0, rotation: float = 0.0, translation=(0.0, 0.0)) -> np.ndarray:
    """scale * R(rotation) @ p + translation for each row of ``xy``."""
    c, s = math.cos(rotation), math.sin(rotation)
    R = np.array([[c, -s], [s, c]])
    return scale * (np.asarray(xy, dtype=float) @ R.T) + np.asarray(translation, dtype=float)


def replay_track(
    csv_samples,
    transform: Tuple[float, float, Sequence[float]] = (1.0, 0.0, (0.0, 0.0)),
    smoothing_window: int = 1,
    horizon: float = 10.0,
    dt: float = 0.05,
    id: str = "replay",
) -> ObstacleTrack:
    """Track from recorded positions, smoothed and resampled in the road frame.

    ``csv_samples`` is a path, a text stream or an (N, 3) array of (t, x, y).
    Outside the recorded time span positions are extrapolated linearly from
    the nearest end segment.
    """
    if isinstance(csv_samples, np.ndarray):
        data = np.asarray(csv_samples, dtype=float)
        if data.ndim != 2 or data.shape[1] != 3 or data.shape[0] < 2:
            raise ReplayFormatError("replay samples must be an (N>=2, 3) array")
        if np.any(np.diff(data[:, 0]) <= 0):
            raise ReplayFormatError("replay times must be strictly increasing")
    else:
        data = read_replay_csv(csv_samples)
    if int(smoothing_window) < 1:
        raise ValueError("smoothing_window must be >= 1")
    scale, rotation, translation = transform
    ts = data[:, 0]
    xy = similarity_transform(data[:, 1:], scale, rotation, translation)
    w = int(smoothing_window)
    if w > 1:
        xy = uniform_filter1d(xy, size=w, axis=0, mode="nearest")
    t = time_grid(horizon, dt)
    x = _interp_extrap(t, ts, xy[:, 0])
    y = _interp_extrap(t, ts, xy[:, 1])
    vx = np.gradient(x, t)
    vy = np.gradient(y, t)
    return ObstacleTrack(
        id, "replay", t, x, y, vx, vy,
        meta={"scale": scale, "rotation": rotation, "translation": list(translation), "smoothing_window": w},
    )


def _interp_extrap(t, ts, vals):
    out = np.interp(t, ts, vals)
    lo = t < ts[0]
    hi = t > ts[-1]
    if np.any(lo):
        slope = (vals[1] - vals[0]) / (ts[1] - ts[0])
        out[lo] = vals[0] + slope * (t[lo] - ts[0])
    if np.any(hi):
        slope = (vals[-1] - vals[-2]) / (ts[-1] - ts[-2])
        out[hi] = vals[-1] + slope * (t[hi] - ts[-1])
    return out
