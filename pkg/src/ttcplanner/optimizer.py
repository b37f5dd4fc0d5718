"""Box-constrained minimization of the planning cost over maneuver degrees of freedom.

Endpoint conditions are built into every parameterization, so any parameter
vector inside the box yields a plan that meets them exactly; the optimizer
only moves the free quantities (junction state, switching time, phase
durations).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from .cost import (
    ActuationLimits,
    CostBreakdown,
    CostWeights,
    SampledContext,
    cost_gradient,
    evaluate_breakdown,
)
from .maneuver import JunctionState, LateralState, ManeuverPlan, junction_plan, phased_plan
from .polynomial import BoundaryConditions, solve_boundary
from .safety import SafetyParams, ttc_profile, sample_grid


# ---------------------------------------------------------------------------
# parameterizations


class JunctionParameterization:
    """Double quintic start -> junction -> end with free switching time and junction state.

    Parameters are ``[s, dy, dv, da]`` plus the maneuver duration when
    ``duration_bounds`` is given. ``s`` places the switch as a fraction of the
    duration; ``(dy, dv, da)`` offsets the junction from the state the single
    reference quintic (same endpoints and duration) has at that time. Zero
    offsets reproduce the single quintic exactly for any ``s``, which keeps
    the switching time and the junction state nearly decoupled.
    """

    def __init__(
        self,
        start: LateralState,
        end: LateralState,
        v: float,
        horizon: float,
        x0: float = 0.0,
        prefix: Sequence = (),
        init="quintic",
        duration_bounds: Optional[Tuple[float, float]] = None,
        s_bounds: Tuple[float, float] = (0.05, 0.95),
    ):
        self.start, self.end = start, end
        self.v, self.horizon, self.x0 = v, horizon, x0
        self.prefix = tuple(prefix)
        dur = end.t - start.t
        if not dur > 0:
            raise ValueError("end time must follow start time")
        if end.t > horizon + 1e-9:
            raise ValueError("maneuver ends after the planning horizon")
        self.nominal_duration = dur
        self.free_duration = duration_bounds is not None
        span = max(abs(end.y - start.y), 1.0)
        dy = 0.75 * span
        dv = max(3.0 * span / dur, 2.0 * abs(start.v), 1e-3)
        da = max(10.0 * span / dur**2, 2.0 * abs(start.a), 1e-3)
        lower = [s_bounds[0], -dy, -dv, -da]
        upper = [s_bounds[1], dy, dv, da]
        self.names = ["s", "dy", "dv", "da"]
        if self.free_duration:
            d_lo, d_hi = duration_bounds
            if not 0 < d_lo <= dur <= d_hi:
                raise ValueError(f"duration bounds {duration_bounds} must bracket the nominal {dur}")
            d_hi = min(d_hi, horizon - start.t)
            lower.append(d_lo)
            upper.append(d_hi)
            self.names.append("duration")
        self.lower = np.array(lower, dtype=float)
        self.upper = np.array(upper, dtype=float)
        self.span = span
        self.initial = self._initial(init, dur)

    def _duration(self, p) -> float:
        return float(p[4]) if self.free_duration else self.nominal_duration

    def reference(self, duration: float):
        """Single quintic joining the endpoint states over ``duration``."""
        bc = BoundaryConditions(self.start.y, self.end.y, self.start.v, self.end.v, self.start.a, self.end.a)
        return solve_boundary(bc, duration, self.start.t)

    def offsets_for(self, junction: JunctionState, duration: Optional[float] = None) -> np.ndarray:
        dur = self.nominal_duration if duration is None else duration
        s = (junction.t_s - self.start.t) / dur
        ref = self.reference(dur).state(junction.t_s)
        p = [s, junction.y_s - ref[0], junction.v_s - ref[1], junction.a_s - ref[2]]
        if self.free_duration:
            p.append(dur)
        return np.array(p, dtype=float)

    def _initial(self, init, dur):
        if isinstance(init, JunctionState):
            p = self.offsets_for(init, dur)
        elif init == "quintic":
            p = np.array([0.5, 0.0, 0.0, 0.0] + ([dur] if self.free_duration else []))
        elif init == "rest":
            mid = self.start.t + 0.5 * dur
            p = self.offsets_for(JunctionState(mid, 0.5 * (self.start.y + self.end.y), 0.0, 0.0), dur)
        else:
            raise ValueError(f"unknown junction init {init!r}")
        return self.clip(p)

    def clip(self, p):
        return np.clip(p, self.lower, self.upper)

    def junction(self, p) -> Tuple[JunctionState, LateralState]:
        dur = self._duration(p)
        t_s = self.start.t + p[0] * dur
        y, v, a = self.reference(dur).state(t_s)
        end = LateralState(self.start.t + dur, self.end.y, self.end.v, self.end.a)
        return JunctionState(t_s, y + p[1], v + p[2], a + p[3]), end

    def build(self, p) -> ManeuverPlan:
        junction, end = self.junction(p)
        return junction_plan(self.start, junction, end, self.v, self.horizon, self.x0, self.prefix)

    def seeds(self) -> List[np.ndarray]:
        """Base point plus +-0.15 of the duration in s and +-0.15 of the span in the junction level."""
        base = self.initial
        out = [base]
        for i, delta in ((0, 0.15), (0, -0.15), (1, 0.15 * self.span), (1, -0.15 * self.span)):
            p = base.copy()
            p[i] += delta
            out.append(self.clip(p))
        return out

    def describe(self, p) -> dict:
        junction, end = self.junction(p)
        return {
            "t_s": float(junction.t_s),
            "y_s": float(junction.y_s),
            "v_s": float(junction.v_s),
            "a_s": float(junction.a_s),
            "t_end": float(end.t),
        }


def phase_times(start: LateralState, template: Sequence[Tuple], durations) -> tuple:
    """Absolute ``(step, level, t_begin, t_end)`` for each phase of a phased template."""
    out, t, level = [], start.t, start.y
    for step, dur in zip(template, durations):
        if step[0] == "shift":
            level = step[1]
        out.append((step[0], float(level), float(t), float(t + dur)))
        t += dur
    return tuple(out)


class PhasedParameterization:
    """Free durations of a chain of holds and rest-to-rest shifts (overtakes).

    ``template`` entries are ("hold", lo, hi, init) or ("shift", target, lo, hi, init).
    """

    def __init__(self, start: LateralState, template: Sequence[Tuple], v: float, horizon: float,
                 x0: float = 0.0, prefix: Sequence = (), kind: str = "overtake"):
        self.start, self.v, self.horizon, self.x0 = start, v, horizon, x0
        self.prefix = tuple(prefix)
        self.template = [tuple(t) for t in template]
        self.kind = kind
        lower, upper, init, names = [], [], [], []
        for k, step in enumerate(self.template):
            lo, hi, x = step[-3:]
            if not lo <= x <= hi:
                raise ValueError(f"initial duration {x} outside [{lo}, {hi}] for phase {k}")
            if step[0] == "shift" and lo <= 0:
                raise ValueError("shift durations need a positive lower bound")
            lower.append(lo)
            upper.append(hi)
            init.append(x)
            names.append(f"{step[0]}{k}")
        self.lower = np.array(lower, dtype=float)
        self.upper = np.array(upper, dtype=float)
        avail = horizon - start.t
        if self.lower.sum() > avail + 1e-9:
            raise ValueError("minimum phase durations exceed the available horizon")
        init = np.array(init, dtype=float)
        excess = self.upper.sum() - avail
        if excess > 0:
            # shrink only the slack above the initial durations so the initial plan stays feasible
            anchor = init if init.sum() <= avail + 1e-9 else self.lower
            room = self.upper - anchor
            if room.sum() > 0:
                self.upper = self.upper - min(excess, room.sum()) * room / room.sum()
        self.names = names
        self.initial = self.clip(np.array(init, dtype=float))

    def clip(self, p):
        return np.clip(p, self.lower, self.upper)

    def steps(self, p):
        out = []
        for step, dur in zip(self.template, p):
            if step[0] == "hold":
                out.append(("hold", float(dur)))
            else:
                out.append(("shift", step[1], float(dur)))
        return out

    def build(self, p) -> ManeuverPlan:
        plan = phased_plan(self.start, self.steps(p), self.v, self.horizon, self.x0, self.prefix, kind=self.kind)
        plan.meta["phase_durations"] = tuple(float(x) for x in p)
        plan.meta["phase_times"] = phase_times(self.start, self.template, p)
        return plan

    def seeds(self) -> List[np.ndarray]:
        base = self.initial
        out = [base]
        width = self.upper - self.lower
        for i in range(min(2, base.size)):
            for sgn in (1, -1):
                p = base.copy()
                p[i] += sgn * 0.15 * width[i]
                out.append(self.clip(p))
        while len(out) < 5:
            out.append(base.copy())
        return out[:5]

    def describe(self, p) -> dict:
        return {n: float(x) for n, x in zip(self.names, p)}


# ---------------------------------------------------------------------------
# problem and solver


@dataclass
class OptimizerConfig:
    max_iters: int = 50
    tol_cost: float = 1e-6
    tol_step: float = 1e-8
    shrink: float = 0.5
    sufficient_decrease: float = 1e-4
    max_backtracks: int = 40

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if not (self.tol_cost > 0 and self.tol_step > 0):
            raise ValueError("tolerances must be positive")
        if not 0 < self.shrink < 1:
            raise ValueError("shrink must be in (0, 1)")
        if not 0 < self.sufficient_decrease < 1:
            raise ValueError("sufficient_decrease must be in (0, 1)")


@dataclass
class OptimizeReport:
    iterations: int
    cost_history: List[float]
    converged: bool
    final_params: np.ndarray
    final_plan: ManeuverPlan
    breakdown: CostBreakdown
    initial_params: np.ndarray = None
    reason: str = ""


class PlanningProblem:
    """Cost of a parameterized plan against known obstacle tracks."""

    def __init__(
        self,
        param,
        tracks: Sequence,
        safety: SafetyParams,
        weights: CostWeights,
        limits: ActuationLimits,
        dt: float,
        smooth_order: int = 3,
    ):
        self.param = param
        self.tracks = list(tracks)
        self.safety, self.weights, self.limits = safety, weights, limits
        self.dt = dt
        self.smooth_order = smooth_order
        self.ctx = SampledContext(self.tracks, param.start.t, param.horizon, dt)

    @property
    def lower(self):
        return self.param.lower

    @property
    def upper(self):
        return self.param.upper

    def check(self, p):
        p = np.asarray(p, dtype=float)
        if np.any(p < self.lower - 1e-9) or np.any(p > self.upper + 1e-9):
            raise ValueError(f"parameters {p} outside the feasible box [{self.lower}, {self.upper}]")
        return p

    def breakdown(self, p) -> CostBreakdown:
        plan = self.param.build(self.check(p))
        return evaluate_breakdown(plan, self.ctx, self.safety, self.weights, self.limits, self.smooth_order)

    def cost(self, p) -> float:
        return self.breakdown(p).total

    def gradient(self, p) -> np.ndarray:
        return cost_gradient(self.cost, p, self.lower, self.upper)


def optimize(problem: PlanningProblem, config: Optional[OptimizerConfig] = None, x_init=None) -> OptimizeReport:
    """Projected descent with Armijo backtracking in box-normalized coordinates.

    The direction is a two-metric projection step: variables pinned at a face
    of the box by their gradient follow plain steepest descent, the rest are
    scaled by a BFGS inverse-Hessian estimate. Every accepted step strictly
    lowers the cost, so ``cost_history`` is non-increasing.
    """
    config = config or OptimizerConfig()
    lo, hi = problem.lower, problem.upper
    width = np.where(hi > lo, hi - lo, 1.0)
    p0 = problem.param.initial if x_init is None else problem.param.clip(np.asarray(x_init, dtype=float))
    to_p = lambda z: np.clip(lo + z * width, lo, hi)
    z = np.clip((p0 - lo) / width, 0.0, 1.0)
    n = z.size

    p_best = p0.copy()
    f = problem.cost(p_best)
    if not np.isfinite(f):
        raise ValueError(f"non-finite cost {f} at the initial parameters")
    history = [f]
    converged, reason = False, "max_iters"
    H = None
    g = problem.gradient(p_best) * width
    for _ in range(config.max_iters):
        pg = z - np.clip(z - g, 0.0, 1.0)
        if np.max(np.abs(pg)) < 1e-12:
            converged, reason = True, "stationary"
            break
        if H is None:
            H = np.eye(n) * (0.1 / max(np.max(np.abs(g)), 1e-12))
        eps = min(1e-3, float(np.max(np.abs(pg))))
        pinned = ((z <= eps) & (g > 0)) | ((z >= 1.0 - eps) & (g < 0))
        free = ~pinned
        d = -g * np.diag(H).mean()
        if free.any():
            d[free] = -H[np.ix_(free, free)] @ g[free]

        accepted = False
        trial = 1.0
        for _ in range(config.max_backtracks):
            z_new = np.clip(z + trial * d, 0.0, 1.0)
            step_vec = z_new - z
            slope = float(g @ step_vec)
            if slope < 0:
                f_new = problem.cost(to_p(z_new))
                if np.isfinite(f_new) and f_new < f and f_new <= f + config.sufficient_decrease * slope:
                    accepted = True
                    break
            trial *= config.shrink
        if not accepted:
            # the curvature estimate can point the wrong way after a jump in
            # the sampled hinge terms; fall back to probing coordinates
            z_new, f_new = _compass_step(problem.cost, to_p, z, f, g)
            if z_new is None:
                converged, reason = True, "no_descent"
                break
            step_vec = z_new - z

        g_new = problem.gradient(to_p(z_new)) * width
        yv = g_new - g
        sy = float(step_vec @ yv)
        if sy > 1e-12 * float(step_vec @ step_vec) ** 0.5 * float(yv @ yv) ** 0.5 and sy > 0:
            if len(history) == 1:
                H = np.eye(n) * (sy / float(yv @ yv))
            rho = 1.0 / sy
            V = np.eye(n) - rho * np.outer(step_vec, yv)
            H = V @ H @ V.T + rho * np.outer(step_vec, step_vec)
        decrease = f - f_new
        z, f, g = z_new, f_new, g_new
        p_best = to_p(z)
        history.append(f)
        if decrease <= config.tol_cost * max(abs(history[-2]), 1e-12):
            converged, reason = True, "tol_cost"
            break
        if float(np.max(np.abs(step_vec))) < config.tol_step:
            converged, reason = True, "tol_step"
            break

    p = p_best
    plan = problem.param.build(p)
    return OptimizeReport(
        iterations=len(history) - 1,
        cost_history=history,
        converged=converged,
        final_params=p,
        final_plan=plan,
        breakdown=problem.breakdown(p),
        initial_params=p0,
        reason=reason,
    )


def _compass_step(cost, to_p, z, f, g, radii=(0.05, 0.01, 0.002, 4e-4)):
    order = np.argsort(-np.abs(g))
    for r in radii:
        for i in order:
            first = -1.0 if g[i] > 0 else 1.0
            for sgn in (first, -first):
                zt = z.copy()
                zt[i] = np.clip(zt[i] + sgn * r, 0.0, 1.0)
                if zt[i] == z[i]:
                    continue
                ft = cost(to_p(zt))
                if np.isfinite(ft) and ft < f:
                    return zt, ft
    return None, f


def optimize_multistart(problem: PlanningProblem, config: Optional[OptimizerConfig] = None) -> OptimizeReport:
    """Best of the parameterization's deterministic seeds (first wins ties)."""
    best = None
    for seed in problem.param.seeds():
        rep = optimize(problem, config, seed)
        if best is None or rep.cost_history[-1] < best.cost_history[-1]:
            best = rep
    return best


# ---------------------------------------------------------------------------
# risk classification


@dataclass
class Verdict:
    risky: bool
    min_ttc: float
    min_gap: float
    reason: str = ""
    new_plan: Optional[ManeuverPlan] = None
    report: Optional[OptimizeReport] = None

    @property
    def label(self) -> str:
        return "risky" if self.risky else "safe"


def assess(plan: ManeuverPlan, tracks: Sequence, safety: SafetyParams, dt: float = 0.05, t_from: Optional[float] = None):
    """(min TTC, min gap) over sampled times of the remaining plan."""
    if not tracks:
        return np.inf, np.inf
    t0 = plan.t_begin if t_from is None else t_from
    times, _ = sample_grid(t0, plan.t_end, dt)
    gaps, _, ttcs = ttc_profile(plan, tracks, times)
    return float(np.min(ttcs)), float(np.min(gaps))


def classify_and_replan(
    plan: ManeuverPlan,
    tracks: Sequence,
    safety: SafetyParams,
    dt: float = 0.05,
    t_now: Optional[float] = None,
    make_problem: Optional[Callable[[ManeuverPlan, float], Optional[PlanningProblem]]] = None,
    config: Optional[OptimizerConfig] = None,
) -> Verdict:
    """Label the remaining plan safe or risky; re-optimize risky plans.

    Risky means sampled TTC < t_safe or sampled gap < safe_distance.
    ``make_problem(plan, t_now)`` builds the re-anchored problem (same
    endpoints); when omitted or when it returns None no replacement is made.
    """
    t_now = plan.t_begin if t_now is None else t_now
    min_ttc, min_gap = assess(plan, tracks, safety, dt, t_now)
    reasons = []
    if min_ttc < safety.t_safe:
        reasons.append(f"min TTC {min_ttc:.3f}s < {safety.t_safe}s")
    if min_gap < safety.safe_distance:
        reasons.append(f"min gap {min_gap:.3f}m < {safety.safe_distance}m")
    verdict = Verdict(bool(reasons), min_ttc, min_gap, "; ".join(reasons))
    if verdict.risky and make_problem is not None:
        problem = make_problem(plan, t_now)
        if problem is not None:
            rep = optimize_multistart(problem, config)
            verdict.new_plan = rep.final_plan
            verdict.report = rep
    return verdict
