"""Straight multi-lane road model and normal-offset boundary curves."""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, NamedTuple, Sequence, Tuple

import numpy as np

DEFAULT_EPS = 1e-9


class PlanarPoint(NamedTuple):
    x: float
    y: float


@dataclass(frozen=True)
class LaneModel:
    """Parallel straight lanes of equal width, centers ordered left-increasing."""

    lane_width: float = 3.5
    lane_centers: Tuple[float, ...] = (0.0, 3.5, 7.0)

    def __post_init__(self):
        object.__setattr__(self, "lane_centers", tuple(float(c) for c in self.lane_centers))
        if not (np.isfinite(self.lane_width) and self.lane_width > 0):
            raise ValueError(f"lane_width must be positive, got {self.lane_width}")
        if len(self.lane_centers) == 0:
            raise ValueError("at least one lane center is required")
        spacing = np.diff(self.lane_centers)
        if np.any(spacing <= 0):
            raise ValueError("lane_centers must be strictly increasing")
        if not np.allclose(spacing, self.lane_width, rtol=0, atol=1e-9):
            raise ValueError("adjacent lane centers must be exactly one lane_width apart")

    @classmethod
    def uniform(cls, n_lanes: int, lane_width: float = 3.5, first_center: float = 0.0) -> "LaneModel":
        return cls(lane_width, tuple(first_center + k * lane_width for k in range(n_lanes)))

    @property
    def n_lanes(self) -> int:
        return len(self.lane_centers)

    def all_boundaries(self) -> List[float]:
        """Every distinct boundary line, right to left."""
        half = self.lane_width / 2
        return [self.lane_centers[0] - half] + [c + half for c in self.lane_centers]


def lane_boundaries(lane: LaneModel, lane_index: int) -> Tuple[float, float]:
    """(left, right) boundary offsets of one lane."""
    if not 0 <= lane_index < lane.n_lanes:
        raise IndexError(f"lane_index {lane_index} out of range for {lane.n_lanes} lanes")
    c = lane.lane_centers[lane_index]
    return c + lane.lane_width / 2, c - lane.lane_width / 2


def unit_normals(xdot, ydot, eps: float = DEFAULT_EPS) -> np.ndarray:
    """Left-pointing normals (-ydot, xdot) / sqrt(xdot^2 + ydot^2 + eps), shape (N, 2)."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    xdot = np.asarray(xdot, dtype=float)
    ydot = np.asarray(ydot, dtype=float)
    scale = 1.0 / np.sqrt(xdot**2 + ydot**2 + eps)
    return np.stack([-ydot * scale, xdot * scale], axis=-1)


def offset_boundaries(
    x: Sequence[float],
    y: Sequence[float],
    xdot: Sequence[float],
    ydot: Sequence[float],
    w: float,
    eps: float = DEFAULT_EPS,
) -> Tuple[List[PlanarPoint], List[PlanarPoint]]:
    """Curves at distance ``w`` to either side of a sampled path.

    Each output point is ``r +/- w * n`` where ``n`` is the regularized unit
    normal of the path velocity.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1 or x.size < 2:
        raise ValueError("path needs at least 2 samples with matching x/y")
    if not (np.all(np.isfinite(xdot)) and np.all(np.isfinite(ydot))):
        raise ValueError("path derivatives must be finite")
    n = unit_normals(xdot, ydot, eps)
    r = np.stack([x, y], axis=-1)
    left = r + w * n
    right = r - w * n
    return (
        [PlanarPoint(float(a), float(b)) for a, b in left],
        [PlanarPoint(float(a), float(b)) for a, b in right],
    )
