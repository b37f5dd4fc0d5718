"""Quintic polynomial segments and the six-condition boundary solve."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import numpy as np

ArrayLike = Union[float, np.ndarray]

# Tolerance used when checking that an evaluation time lies in a window.
TIME_EPS = 1e-9


@dataclass(frozen=True)
class BoundaryConditions:
    """Lateral state (y, y', y'') at both ends of a segment."""

    y0: float
    yT: float
    v0: float = 0.0
    vT: float = 0.0
    acc0: float = 0.0
    accT: float = 0.0

    def __post_init__(self):
        vals = (self.y0, self.yT, self.v0, self.vT, self.acc0, self.accT)
        if not all(np.isfinite(vals)):
            raise ValueError(f"boundary conditions must be finite, got {vals}")

    @classmethod
    def rest_to_rest(cls, y0: float, yT: float) -> "BoundaryConditions":
        return cls(y0=y0, yT=yT)

    @property
    def delta_y(self) -> float:
        return self.yT - self.y0

    def rhs(self) -> np.ndarray:
        """Right-hand side ordered like the rows of :func:`boundary_matrix`."""
        return np.array([self.y0, self.yT, self.v0, self.vT, self.acc0, self.accT], dtype=float)


def boundary_matrix(T: float) -> np.ndarray:
    """6x6 matrix mapping coefficients a0..a5 to the boundary values.

    Rows are y(0), y(T), y'(0), y'(T), y''(0), y''(T).
    """
    return np.array(
        [
            [1.0, 0.0, 0.0, 0.0, 0.0, 0.0],
            [1.0, T, T**2, T**3, T**4, T**5],
            [0.0, 1.0, 0.0, 0.0, 0.0, 0.0],
            [0.0, 1.0, 2 * T, 3 * T**2, 4 * T**3, 5 * T**4],
            [0.0, 0.0, 2.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 2.0, 6 * T, 12 * T**2, 20 * T**3],
        ]
    )


# derivative multipliers: row k gives the factor on a_i t^(i-k) for the k-th derivative
_DERIV_FACTORS = np.array(
    [
        [1, 1, 1, 1, 1, 1],
        [0, 1, 2, 3, 4, 5],
        [0, 0, 2, 6, 12, 20],
        [0, 0, 0, 6, 24, 60],
    ],
    dtype=float,
)


@dataclass(frozen=True)
class QuinticSegment:
    """y(t) = sum a_i * tau**i with tau = t - t_start, valid on [t_start, t_end]."""

    coeffs: tuple
    t_start: float
    t_end: float
    kind: str = field(default="quintic", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(float(c) for c in self.coeffs))
        if len(self.coeffs) != 6:
            raise ValueError("a quintic segment needs exactly 6 coefficients")
        if not all(np.isfinite(self.coeffs)):
            raise ValueError("segment coefficients must be finite")
        if not self.t_end > self.t_start:
            raise ValueError(f"t_end ({self.t_end}) must exceed t_start ({self.t_start})")

    @property
    def duration(self) -> float:
        return self.t_end - self.t_start

    def evaluate(self, t: ArrayLike, order: int = 0) -> ArrayLike:
        """Value (order 0) or derivative (orders 1..3) at absolute time ``t``."""
        if order not in (0, 1, 2, 3):
            raise ValueError(f"order must be 0..3, got {order}")
        t_arr = np.asarray(t, dtype=float)
        lo, hi = self.t_start - TIME_EPS, self.t_end + TIME_EPS
        if np.any((t_arr < lo) | (t_arr > hi)):
            raise ValueError(
                f"t outside segment window [{self.t_start}, {self.t_end}]"
            )
        tau = np.clip(t_arr - self.t_start, 0.0, self.duration)
        out = np.zeros_like(tau)
        # Horner over the differentiated coefficients
        c = np.asarray(self.coeffs) * _DERIV_FACTORS[order]
        for i in range(5, order - 1, -1):
            out = out * tau + c[i]
        if np.ndim(t) == 0:
            return float(out)
        return out

    def state(self, t: float) -> tuple:
        """(y, y', y'') at ``t``."""
        return tuple(self.evaluate(t, k) for k in range(3))

    def shifted(self, dy: float) -> "QuinticSegment":
        c = list(self.coeffs)
        c[0] += dy
        return QuinticSegment(tuple(c), self.t_start, self.t_end)


def solve_boundary(bc: BoundaryConditions, T: float, t_start: float = 0.0) -> QuinticSegment:
    """Quintic over [t_start, t_start + T] meeting all six conditions in ``bc``.

    Coefficients are expressed in local time so the system depends on T only.
    """
    if not (np.isfinite(T) and T > 0):
        raise ValueError(f"segment duration must be positive, got {T}")
    a = np.linalg.solve(boundary_matrix(T), bc.rhs())
    return QuinticSegment(tuple(a), t_start, t_start + T)


def boundary_residuals(seg: QuinticSegment, bc: BoundaryConditions) -> np.ndarray:
    """Signed residuals of the six boundary conditions, in the order of ``bc.rhs()``."""
    t0, t1 = seg.t_start, seg.t_end
    got = np.array(
        [
            seg.evaluate(t0, 0),
            seg.evaluate(t1, 0),
            seg.evaluate(t0, 1),
            seg.evaluate(t1, 1),
            seg.evaluate(t0, 2),
            seg.evaluate(t1, 2),
        ]
    )
    return got - bc.rhs()


def jerk_integral(seg: QuinticSegment) -> float:
    """Exact integral of the squared third derivative over the segment window."""
    a3, a4, a5 = seg.coeffs[3:]
    T = seg.duration
    # jerk(tau) = 6 a3 + 24 a4 tau + 60 a5 tau^2
    p = np.polynomial.Polynomial([6 * a3, 24 * a4, 60 * a5])
    q = (p * p).integ()
    return float(q(T) - q(0.0))
