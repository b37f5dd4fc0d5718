"""Post-hoc summaries of rollout logs, covering safety margins and ride comfort."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Sequence, Tuple

import numpy as np

from .safety import SafetyParams

SCALAR_FIELDS = (
    "min_ttc",
    "ttc_violation_count",
    "min_gap",
    "avg_gap",
    "max_curvature",
    "avg_curvature",
    "max_lateral_jerk",
    "rms_lateral_jerk",
    "avg_abs_lateral_jerk",
    "longitudinal_distance",
    "total_time",
)


@dataclass(frozen=True)
class MetricSummary:
    min_ttc: float
    ttc_violation_count: int
    min_gap: float
    avg_gap: float
    ttc_below_fractions: Dict[float, float]
    max_curvature: float
    avg_curvature: float
    max_lateral_jerk: float
    rms_lateral_jerk: float
    avg_abs_lateral_jerk: float
    longitudinal_distance: float
    total_time: float
    min_gap_by_obstacle: Dict[str, float] = field(default_factory=dict)
    min_ttc_by_obstacle: Dict[str, float] = field(default_factory=dict)
    n_steps: int = 0

    def as_row(self) -> Dict[str, float]:
        """Flat numeric view (fractions keyed ``ttc_below_<s>s``)."""
        row = {k: float(getattr(self, k)) for k in SCALAR_FIELDS}
        for th, frac in sorted(self.ttc_below_fractions.items(), reverse=True):
            row[f"ttc_below_{th:g}s"] = float(frac)
        return row

    def to_dict(self) -> dict:
        d = asdict(self)
        d["ttc_below_fractions"] = {f"{k:g}": v for k, v in self.ttc_below_fractions.items()}
        return d


def summarize(log, params: SafetyParams) -> MetricSummary:
    """Metrics over every logged step of ``log``."""
    n = log.n_steps
    if n == 0:
        raise ValueError("cannot summarize an empty log")
    cols = log.columns
    gaps = log.gaps()
    ttcs = log.ttcs()
    if gaps.shape[0]:
        step_gap = gaps.min(axis=0)
        step_ttc = ttcs.min(axis=0)
    else:
        step_gap = np.full(n, np.inf)
        step_ttc = np.full(n, np.inf)
    fractions = {float(th): float(np.count_nonzero(step_ttc < th)) / n for th in params.ttc_thresholds}
    kappa = np.abs(cols["curvature"])
    jerk = np.asarray(cols["jy"], dtype=float)
    t, x = cols["t"], cols["x"]
    x_end = float(np.interp(log.maneuver_end, t, x))
    x_start = float(np.interp(log.maneuver_start, t, x))
    return MetricSummary(
        min_ttc=float(step_ttc.min()),
        ttc_violation_count=int(np.count_nonzero(step_ttc < params.t_safe)),
        min_gap=float(step_gap.min()),
        avg_gap=float(step_gap.mean()),
        ttc_below_fractions=fractions,
        max_curvature=float(kappa.max()),
        avg_curvature=float(kappa.mean()),
        max_lateral_jerk=float(np.abs(jerk).max()),
        rms_lateral_jerk=float(math.sqrt(float(np.sum(jerk * jerk)) / n)),
        avg_abs_lateral_jerk=float(np.abs(jerk).mean()),
        longitudinal_distance=x_end - x_start,
        total_time=float(log.maneuver_end - log.maneuver_start),
        min_gap_by_obstacle={i: float(g.min()) for i, g in zip(log.obstacle_ids, gaps)},
        min_ttc_by_obstacle={i: float(v.min()) for i, v in zip(log.obstacle_ids, ttcs)},
        n_steps=n,
    )


def percent_delta(new: float, old: float) -> float:
    """(new - old) / old in percent; nan when undefined."""
    if not (math.isfinite(new) and math.isfinite(old)) or old == 0:
        return 0.0 if new == old else math.nan
    return (new - old) / abs(old) * 100.0


@dataclass
class Comparison:
    names: List[str]
    rows: List[Dict[str, float]]
    deltas: List[Dict[str, float]]

    @property
    def metrics(self) -> List[str]:
        return list(self.rows[0])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["name"] + self.metrics + [f"{m}_delta_pct" for m in self.metrics])
        for name, row, delta in zip(self.names, self.rows, self.deltas):
            w.writerow([name] + [_num(row[m]) for m in self.metrics] + [_num(delta[m]) for m in self.metrics])
        return buf.getvalue()

    def to_text(self) -> str:
        """Metrics as rows, entries as columns, each cell ``value (delta%)``."""
        header = ["metric"] + self.names
        body = []
        for m in self.metrics:
            cells = [m]
            for k, (row, delta) in enumerate(zip(self.rows, self.deltas)):
                cell = f"{row[m]:.6g}"
                if k > 0:
                    d = delta[m]
                    cell += " (n/a)" if math.isnan(d) else f" ({d:+.1f}%)"
                cells.append(cell)
            body.append(cells)
        widths = [max(len(r[i]) for r in [header] + body) for i in range(len(header))]
        fmt = lambda r: "  ".join(c.ljust(w) if i == 0 else c.rjust(w) for i, (c, w) in enumerate(zip(r, widths)))
        lines = [fmt(header), "  ".join("-" * w for w in widths)] + [fmt(r) for r in body]
        return "\n".join(lines) + "\n"


def _num(x: float) -> str:
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(float(x))


def compare(summaries: Sequence[Tuple[str, MetricSummary]]) -> Comparison:
    """Side-by-side table with percentage changes relative to the first entry."""
    if len(summaries) < 2:
        raise ValueError("compare needs at least two summaries")
    names = [n for n, _ in summaries]
    rows = [s.as_row() for _, s in summaries]
    ref = rows[0]
    deltas = [{m: percent_delta(r[m], ref[m]) for m in r} for r in rows]
    return Comparison(names, rows, deltas)
