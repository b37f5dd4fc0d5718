"""Scenario configs, plan construction and the stepped rollout with TTC-triggered replanning."""

from __future__ import annotations

import copy
import csv
import dataclasses
import io
import json
import math
import os
import typing
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .baselines import BaselineKind, plan_baseline, plan_baseline_sequence
from .cost import ActuationLimits, CostWeights, evaluate_breakdown
from .geometry import LaneModel
from .maneuver import (
    Hold,
    JunctionState,
    LateralState,
    ManeuverPlan,
    avoidance_swerve,
    double_lane_change,
    overtake,
    single_lane_change,
    truncate_pieces,
)
from .optimizer import (
    JunctionParameterization,
    OptimizerConfig,
    PhasedParameterization,
    PlanningProblem,
    assess,
    optimize_multistart,
)
from .polynomial import TIME_EPS
from .safety import SafetyParams, sample_grid, ttc_arrays
from .traffic import (
    ObstacleTrack,
    braking_track,
    constant_track,
    delayed_offset_track,
    oscillating_track,
    read_replay_csv,
    replay_track,
)

PLANNERS = ("proposed",) + tuple(k.value for k in BaselineKind)
MANEUVER_KINDS = ("lane_change", "consecutive", "overtake", "avoidance")
OBSTACLE_KINDS = ("constant", "delayed_offset", "braking", "oscillating", "replay")
MIN_REPLAN_WINDOW = 0.5


class ConfigError(ValueError):
    """Invalid scenario configuration; ``path`` names the offending field."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


# ---------------------------------------------------------------------------
# config schema


@dataclass(frozen=True)
class EgoSpec:
    speed: float
    x: float = 0.0
    y: float = 0.0

    def __post_init__(self):
        if not self.speed > 0:
            raise ValueError(f"speed must be positive, got {self.speed}")


@dataclass(frozen=True)
class ManeuverSpec:
    """Lateral maneuver request.

    lane_change uses ``delta_y``, ``T`` and ``t_start``; consecutive uses
    ``delta_y`` per change with durations ``T1`` and ``T2``; overtake uses ``D``
    with absolute phase times ``T1..T4``; avoidance uses ``peak``,
    ``direction``, ``t_enter`` and ``t_exit``.
    """

    kind: str
    delta_y: Optional[float] = None
    T: Optional[float] = None
    t_start: float = 0.0
    T1: Optional[float] = None
    T2: Optional[float] = None
    T3: Optional[float] = None
    T4: Optional[float] = None
    D: Optional[float] = None
    peak: Optional[float] = None
    direction: int = 1
    t_enter: Optional[float] = None
    t_exit: Optional[float] = None

    _REQUIRED = {
        "lane_change": ("delta_y", "T"),
        "consecutive": ("delta_y", "T1", "T2"),
        "overtake": ("D", "T1", "T2", "T3", "T4"),
        "avoidance": ("peak", "t_enter", "t_exit"),
    }

    def __post_init__(self):
        if self.kind not in MANEUVER_KINDS:
            raise ValueError(f"kind must be one of {MANEUVER_KINDS}, got {self.kind!r}")
        for name in self._REQUIRED[self.kind]:
            if getattr(self, name) is None:
                raise ValueError(f"{name} is required for kind {self.kind!r}")
        if self.t_start < 0:
            raise ValueError("t_start must be >= 0")
        if self.kind == "lane_change" and not self.T > 0:
            raise ValueError("T must be positive")
        if self.kind == "consecutive" and not (self.T1 > 0 and self.T2 > 0):
            raise ValueError("T1 and T2 must be positive")
        if self.kind == "overtake" and not 0 <= self.T1 < self.T2 <= self.T3 < self.T4:
            raise ValueError("overtake phases need 0 <= T1 < T2 <= T3 < T4")
        if self.kind == "avoidance":
            if self.direction not in (1, -1):
                raise ValueError("direction must be +1 or -1")
            if self.peak < 0 or not 0 <= self.t_enter < self.t_exit:
                raise ValueError("avoidance needs peak >= 0 and 0 <= t_enter < t_exit")

    @property
    def t_final(self) -> float:
        """Time by which the lateral motion is complete."""
        if self.kind == "lane_change":
            return self.t_start + self.T
        if self.kind == "consecutive":
            return self.t_start + self.T1 + self.T2
        if self.kind == "overtake":
            return self.T4
        return self.t_exit


@dataclass(frozen=True)
class ObstacleSpec:
    id: str
    kind: str = "constant"
    x0: float = 0.0
    y0: float = 0.0
    speed: float = 0.0
    heading: float = 0.0
    decel: float = 0.0
    v_floor: float = 0.0
    v_mean: float = 0.0
    v_amp: float = 0.0
    period: float = 10.0
    tau: float = 0.0
    delta: float = 0.0
    csv: Optional[str] = None
    scale: float = 1.0
    rotation: float = 0.0
    translation: Tuple[float, float] = (0.0, 0.0)
    smoothing_window: int = 1

    def __post_init__(self):
        if self.kind not in OBSTACLE_KINDS:
            raise ValueError(f"kind must be one of {OBSTACLE_KINDS}, got {self.kind!r}")
        if self.kind == "replay" and not self.csv:
            raise ValueError("replay obstacles need a csv path")
        object.__setattr__(self, "translation", tuple(float(v) for v in self.translation))


@dataclass(frozen=True)
class PlanningSpec:
    optimize: bool = True
    replan: bool = True
    cooldown: float = 0.5
    free_duration: bool = False
    duration_max: Optional[float] = None
    smooth_order: int = 3

    def __post_init__(self):
        if self.cooldown < 0:
            raise ValueError("cooldown must be >= 0")
        if self.smooth_order not in (2, 3):
            raise ValueError("smooth_order must be 2 or 3")


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    ego: EgoSpec
    maneuver: ManeuverSpec
    horizon: float
    obstacles: Tuple[ObstacleSpec, ...] = ()
    lanes: LaneModel = field(default_factory=LaneModel)
    safety: SafetyParams = field(default_factory=SafetyParams)
    weights: CostWeights = field(default_factory=CostWeights)
    limits: ActuationLimits = field(default_factory=ActuationLimits)
    planning: PlanningSpec = field(default_factory=PlanningSpec)
    dt: float = 0.05
    description: str = ""
    labels: Dict[str, Any] = field(default_factory=dict)
    base_dir: Optional[str] = field(default=None, compare=False)

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.horizon < self.maneuver.t_final - TIME_EPS:
            raise ValueError(f"horizon {self.horizon} ends before the maneuver completes at {self.maneuver.t_final}")
        if self.horizon < 4 * self.dt:
            raise ValueError("horizon must span at least four steps")
        ids = [o.id for o in self.obstacles]
        if len(set(ids)) != len(ids):
            raise ValueError(f"obstacle ids must be unique, got {ids}")
        if self.planning.free_duration:
            if self.maneuver.kind not in ("lane_change", "consecutive"):
                raise ValueError("free_duration applies to lane_change and consecutive maneuvers only")
            dmax = self.planning.duration_max
            if dmax is None or dmax < self._nominal_duration():
                raise ValueError("planning.duration_max must be at least the nominal maneuver duration")
            if self.maneuver.t_start + dmax > self.horizon + TIME_EPS:
                raise ValueError("planning.duration_max reaches beyond the horizon")

    def _nominal_duration(self) -> float:
        m = self.maneuver
        return m.T if m.kind == "lane_change" else m.T1 + m.T2


def _unwrap_optional(tp):
    if typing.get_origin(tp) is Union:
        args = [a for a in typing.get_args(tp) if a is not type(None)]
        if len(args) == 1:
            return args[0], True
    return tp, False


def _coerce(tp, value, path):
    tp, optional = _unwrap_optional(tp)
    if value is None:
        if optional:
            return None
        raise ConfigError(path, "must not be null")
    if dataclasses.is_dataclass(tp):
        return _build(tp, value, path)
    origin = typing.get_origin(tp)
    if origin in (tuple, Tuple):
        if not isinstance(value, (list, tuple)):
            raise ConfigError(path, f"expected a list, got {type(value).__name__}")
        args = typing.get_args(tp)
        if len(args) == 2 and args[1] is Ellipsis:
            return tuple(_coerce(args[0], v, f"{path}[{i}]") for i, v in enumerate(value))
        if len(args) != len(value):
            raise ConfigError(path, f"expected {len(args)} entries, got {len(value)}")
        return tuple(_coerce(a, v, f"{path}[{i}]") for i, (a, v) in enumerate(zip(args, value)))
    if origin in (dict, Dict):
        if not isinstance(value, dict):
            raise ConfigError(path, f"expected an object, got {type(value).__name__}")
        return dict(value)
    if tp is bool:
        if not isinstance(value, bool):
            raise ConfigError(path, f"expected true/false, got {value!r}")
        return value
    if tp is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(path, f"expected an integer, got {value!r}")
        return value
    if tp is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(path, f"expected a number, got {value!r}")
        if not math.isfinite(value):
            raise ConfigError(path, "must be finite")
        return float(value)
    if tp is str:
        if not isinstance(value, str):
            raise ConfigError(path, f"expected a string, got {value!r}")
        return value
    return value


def _build(cls, data, path=""):
    if not isinstance(data, dict):
        raise ConfigError(path, f"expected an object, got {type(data).__name__}")
    hints = typing.get_type_hints(cls)
    names = {f.name for f in dataclasses.fields(cls) if f.init and f.name != "base_dir"}
    unknown = sorted(set(data) - names)
    if unknown:
        where = f"{path}.{unknown[0]}" if path else unknown[0]
        raise ConfigError(where, "unknown field")
    kwargs = {}
    for name in names:
        if name in data:
            sub = f"{path}.{name}" if path else name
            kwargs[name] = _coerce(hints[name], data[name], sub)
    try:
        return cls(**kwargs)
    except TypeError as exc:
        missing = [f.name for f in dataclasses.fields(cls)
                   if f.init and f.name not in kwargs and f.default is dataclasses.MISSING
                   and f.default_factory is dataclasses.MISSING and f.name != "base_dir"]
        if missing:
            raise ConfigError(f"{path}.{missing[0]}" if path else missing[0], "required field missing") from exc
        raise ConfigError(path, str(exc)) from exc
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(path or cls.__name__, str(exc)) from exc


def config_from_dict(data: dict, base_dir: Optional[str] = None) -> ScenarioConfig:
    cfg = _build(ScenarioConfig, data)
    return dataclasses.replace(cfg, base_dir=base_dir)


def scenario_dir() -> Path:
    """Directory searched for scenario names; ``PLANNER_SCENARIO_DIR`` overrides the bundled corpus."""
    env = os.environ.get("PLANNER_SCENARIO_DIR")
    return Path(env) if env else Path(__file__).with_name("scenarios")


def resolve_scenario(ref: Union[str, os.PathLike]) -> Path:
    p = Path(ref)
    if p.is_file():
        return p
    for cand in (scenario_dir() / p, scenario_dir() / f"{p}.json"):
        if cand.is_file():
            return cand
    raise FileNotFoundError(f"scenario not found: {ref}")


def load_json(path: Union[str, os.PathLike]) -> dict:
    """Read JSON; parse errors become ConfigError with line and column."""
    text = Path(path).read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("", f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc


def load_scenario(ref: Union[str, os.PathLike], overrides: Optional[Dict[str, Any]] = None) -> ScenarioConfig:
    path = resolve_scenario(ref)
    data = load_json(path)
    if overrides:
        data = apply_overrides(data, overrides)
    return config_from_dict(data, base_dir=str(path.parent))


def _schema_for(cls, key):
    hints = typing.get_type_hints(cls)
    if key not in hints or key == "base_dir":
        return None
    return hints[key]


def apply_overrides(data: dict, overrides: Dict[str, Any]) -> dict:
    """Copy of raw config ``data`` with dotted-path values replaced.

    Every path must name a field of the config schema (list entries by index,
    e.g. ``obstacles.0.speed``); anything else raises ConfigError.
    """
    out = copy.deepcopy(data)
    for dotted, value in overrides.items():
        parts = dotted.split(".")
        node, tp = out, ScenarioConfig
        for i, key in enumerate(parts):
            here = ".".join(parts[: i + 1])
            base, _ = _unwrap_optional(tp)
            origin = typing.get_origin(base)
            if origin in (tuple, Tuple) and isinstance(node, list):
                if not key.isdigit() or int(key) >= len(node):
                    raise ConfigError(here, "no such list entry")
                tp = typing.get_args(base)[0]
                idx = int(key)
                if i == len(parts) - 1:
                    node[idx] = value
                else:
                    node = node[idx]
                continue
            if not dataclasses.is_dataclass(base):
                raise ConfigError(here, "unknown field")
            sub = _schema_for(base, key)
            if sub is None:
                raise ConfigError(here, "unknown field")
            if i == len(parts) - 1:
                node[key] = value
            else:
                if key not in node or node[key] is None:
                    node[key] = {}
                node = node[key]
                tp = sub
    return out


# ---------------------------------------------------------------------------
# plans and tracks


def build_tracks(config: ScenarioConfig, ego_reference: Optional[ManeuverPlan] = None) -> List[ObstacleTrack]:
    H, dt = config.horizon, config.dt
    out = []
    for k, o in enumerate(config.obstacles):
        try:
            if o.kind == "constant":
                tr = constant_track(o.x0, o.y0, o.speed, H, dt, o.id, o.heading)
            elif o.kind == "braking":
                tr = braking_track(o.x0, o.y0, o.speed, o.decel, o.v_floor, H, dt, o.id)
            elif o.kind == "oscillating":
                tr = oscillating_track(o.x0, o.y0, o.v_mean, o.v_amp, o.period, H, dt, o.id)
            elif o.kind == "delayed_offset":
                ref = ego_reference if ego_reference is not None else nominal_plan(config)
                tr = delayed_offset_track(ref, o.tau, o.delta, H, dt, o.id)
            else:
                path = Path(o.csv)
                if not path.is_absolute() and config.base_dir:
                    path = Path(config.base_dir) / path
                samples = read_replay_csv(path)
                tr = replay_track(samples, (o.scale, o.rotation, o.translation), o.smoothing_window, H, dt, o.id)
        except (ValueError, OSError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"obstacles[{k}]", str(exc)) from exc
        out.append(tr)
    return out


def _overtake_steps(m: ManeuverSpec, y0: float):
    if m.kind == "overtake":
        D, T1, T2, T3, T4 = m.D, m.T1, m.T2, m.T3, m.T4
    else:
        mid = 0.5 * (m.t_enter + m.t_exit)
        D, T1, T2, T3, T4 = m.direction * m.peak, m.t_enter, mid, mid, m.t_exit
    return D, (T1, T2, T3, T4)


def nominal_plan(config: ScenarioConfig) -> ManeuverPlan:
    """Closed-form plan the proposed planner starts from (no traffic)."""
    m, e = config.maneuver, config.ego
    H = config.horizon
    if m.kind == "lane_change":
        plan = single_lane_change(m.delta_y, m.T, e.speed, H, e.y, m.t_start, e.x)
    elif m.kind == "consecutive":
        junction = JunctionState(m.t_start + m.T1, e.y + m.delta_y, 0.0, 0.0)
        plan = double_lane_change(2 * m.delta_y, junction, m.T1 + m.T2, e.speed, H, e.y, m.t_start, e.x)
    elif m.kind == "overtake":
        plan = overtake(m.D, m.T1, m.T2, m.T3, m.T4, e.speed, H, e.y, e.x)
    else:
        plan = avoidance_swerve(m.peak, m.direction, m.t_enter, m.t_exit, e.speed, H, e.y, e.x)
    return plan


def baseline_plan(config: ScenarioConfig, kind) -> ManeuverPlan:
    m, e = config.maneuver, config.ego
    H = config.horizon
    kind = BaselineKind(kind)
    if m.kind == "lane_change":
        return plan_baseline(kind, m.delta_y, m.T, e.speed, H, e.y, m.t_start, e.x)
    if m.kind == "consecutive":
        steps = [("hold", m.t_start), ("shift", m.delta_y, m.T1), ("shift", m.delta_y, m.T2)]
    else:
        D, (T1, T2, T3, T4) = _overtake_steps(m, e.y)
        steps = [("hold", T1), ("shift", D, T2 - T1), ("hold", T3 - T2), ("shift", -D, T4 - T3)]
    return plan_baseline_sequence(kind, steps, e.speed, H, e.y, e.x)


def _phased_template(phases, t_now: float, state: LateralState):
    """Remaining phases from ``t_now`` as a PhasedParameterization template, or None."""
    template = []
    for step, level, a, b in phases:
        if b <= t_now + TIME_EPS:
            continue
        rem = b - max(a, t_now)
        if step == "shift":
            if a < t_now and rem < MIN_REPLAN_WINDOW:
                return None
            template.append(("shift", level, 0.5 * rem, 1.5 * rem, rem))
        else:
            template.append(("hold", 0.0, 2.0 * rem + 1.0, rem))
    if not any(t[0] == "shift" for t in template):
        return None
    return template


def make_parameterization(config: ScenarioConfig, plan: Optional[ManeuverPlan], t_now: float):
    """Free maneuver parameters re-anchored at ``t_now`` on ``plan`` (None plan means initial planning)."""
    m, e = config.maneuver, config.ego
    H = config.horizon
    base = plan if plan is not None else nominal_plan(config)
    if plan is None:
        prefix, start = [], None
    else:
        prefix = truncate_pieces(plan.pieces, t_now) if t_now > plan.t_begin + TIME_EPS else []
        start = plan.state(t_now)
    if m.kind in ("lane_change", "consecutive"):
        if m.kind == "lane_change":
            t0, t_end, y_end = m.t_start, m.t_start + m.T, e.y + m.delta_y
        else:
            t0, t_end, y_end = m.t_start, m.t_start + m.T1 + m.T2, e.y + 2 * m.delta_y
        if plan is None:
            start = LateralState(t0, e.y)
            prefix = [Hold(e.y, 0.0, t0)] if t0 > TIME_EPS else []
            init = "quintic" if m.kind == "lane_change" else JunctionState(t0 + m.T1, e.y + m.delta_y, 0.0, 0.0)
            cur_end = t_end
        else:
            if t_now < t0:
                start = LateralState(t0, e.y)
                prefix = truncate_pieces(plan.pieces, t0) if t0 > TIME_EPS else []
            cur_end = plan.meta.get("end", LateralState(t_end, y_end)).t
            junction = plan.meta.get("junction")
            if cur_end - start.t < MIN_REPLAN_WINDOW:
                return None
            init = junction if junction is not None and junction.t_s > start.t + 0.05 * (cur_end - start.t) else "quintic"
        bounds = None
        if config.planning.free_duration:
            lo_abs, hi_abs = t_end, m.t_start + config.planning.duration_max
            bounds = (max(lo_abs - start.t, 1e-3), hi_abs - start.t)
            bounds = (min(bounds[0], cur_end - start.t), bounds[1])
        end = LateralState(cur_end, y_end)
        return JunctionParameterization(start, end, e.speed, H, e.x, prefix, init=init, duration_bounds=bounds)
    # overtake / avoidance
    if plan is None:
        D, (T1, T2, T3, T4) = _overtake_steps(m, e.y)
        phases = (("hold", e.y, 0.0, T1), ("shift", e.y + D, T1, T2), ("hold", e.y + D, T2, T3), ("shift", e.y, T3, T4))
        start = LateralState(0.0, e.y)
    else:
        phases = plan.meta.get("phase_times")
        if phases is None:
            D, (T1, T2, T3, T4) = _overtake_steps(m, e.y)
            phases = (("hold", e.y, 0.0, T1), ("shift", e.y + D, T1, T2), ("hold", e.y + D, T2, T3), ("shift", e.y, T3, T4))
    if abs(start.v) < 1e-9 and abs(start.a) < 1e-9:
        start = LateralState(start.t, start.y)
    template = _phased_template(phases, start.t, start)
    if template is None:
        return None
    try:
        return PhasedParameterization(start, template, e.speed, H, e.x, prefix, kind=m.kind if m.kind == "overtake" else "avoidance")
    except ValueError:
        return None


def make_problem(config: ScenarioConfig, tracks, plan: Optional[ManeuverPlan], t_now: float) -> Optional[PlanningProblem]:
    param = make_parameterization(config, plan, t_now)
    if param is None:
        return None
    return PlanningProblem(
        param, tracks, config.safety, config.weights, config.limits, config.dt, config.planning.smooth_order
    )


def plan_initial(config: ScenarioConfig, planner: str, tracks, opt_config: Optional[OptimizerConfig] = None):
    """(plan, report) before the rollout; ``report`` is None for closed-form plans."""
    if planner != "proposed":
        return baseline_plan(config, planner), None
    if not config.planning.optimize:
        plan = make_parameterization(config, None, 0.0)
        return (plan.build(plan.initial) if plan is not None else nominal_plan(config)), None
    problem = make_problem(config, tracks, None, 0.0)
    rep = optimize_multistart(problem, opt_config)
    return rep.final_plan, rep


# ---------------------------------------------------------------------------
# rollout


@dataclass
class SimLog:
    """Per-step record of one rollout."""

    name: str
    planner: str
    dt: float
    obstacle_ids: List[str]
    columns: Dict[str, np.ndarray]
    replans: List[dict]
    maneuver_start: float
    maneuver_end: float
    speed: float
    plan: Optional[ManeuverPlan] = None
    meta: Dict[str, Any] = field(default_factory=dict)

    @property
    def n_steps(self) -> int:
        return int(self.columns["t"].size)

    def gaps(self) -> np.ndarray:
        """(n_obstacles, n_steps)."""
        return np.array([self.columns[f"gap_{i}"] for i in self.obstacle_ids]).reshape(len(self.obstacle_ids), self.n_steps)

    def ttcs(self) -> np.ndarray:
        return np.array([self.columns[f"ttc_{i}"] for i in self.obstacle_ids]).reshape(len(self.obstacle_ids), self.n_steps)

    def column_names(self) -> List[str]:
        return list(self.columns)

    def to_csv(self, target=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        names = self.column_names()
        w.writerow(names)
        cols = [self.columns[n] for n in names]
        for k in range(self.n_steps):
            w.writerow([_fmt(c[k]) for c in cols])
        text = buf.getvalue()
        if target is not None:
            Path(target).write_text(text)
        return text

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "planner": self.planner,
            "dt": self.dt,
            "speed": self.speed,
            "obstacle_ids": list(self.obstacle_ids),
            "maneuver_start": self.maneuver_start,
            "maneuver_end": self.maneuver_end,
            "replans": self.replans,
            "meta": self.meta,
            "columns": {k: [_json_num(x) for x in v] for k, v in self.columns.items()},
        }

    def to_json(self, target=None) -> str:
        text = json.dumps(_jsonable(self.to_dict()), sort_keys=True, indent=1, allow_nan=False)
        if target is not None:
            Path(target).write_text(text)
        return text


def _fmt(x) -> str:
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(x)


def _json_num(x):
    x = float(x)
    return x if math.isfinite(x) else None


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        return _json_num(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def curvature(v: float, vy, ay):
    """Planar path curvature with x = v t."""
    vy = np.asarray(vy, dtype=float)
    return v * np.asarray(ay, dtype=float) / (v * v + vy * vy) ** 1.5


def run_scenario(
    config: ScenarioConfig,
    planner: str = "proposed",
    opt_config: Optional[OptimizerConfig] = None,
    tracks: Optional[Sequence[ObstacleTrack]] = None,
) -> SimLog:
    """Deterministic rollout. Only the proposed planner replans, at most once per cooldown window."""
    if planner not in PLANNERS:
        raise ConfigError("planner", f"unknown planner {planner!r}; choose from {PLANNERS}")
    tracks = list(tracks) if tracks is not None else build_tracks(config)
    plan, report = plan_initial(config, planner, tracks, opt_config)
    times, _ = sample_grid(0.0, config.horizon, config.dt)
    n = times.size
    cols = {k: np.empty(n) for k in ("t", "x", "y", "vx", "vy", "ay", "jy", "curvature")}
    ids = [tr.id for tr in tracks]
    obs = [tr.at(times) for tr in tracks]
    for i in ids:
        cols[f"gap_{i}"] = np.empty(n)
        cols[f"ttc_{i}"] = np.empty(n)
    replans: List[dict] = []
    can_replan = planner == "proposed" and config.planning.optimize and config.planning.replan and bool(tracks)
    last_attempt = -math.inf
    v = config.ego.speed

    for k, t in enumerate(times):
        y = plan.lateral(t, 0)
        vy, ay, jy = (plan.lateral(t, o) for o in (1, 2, 3))
        x = plan.longitudinal(t)
        cols["t"][k], cols["x"][k], cols["y"][k], cols["vx"][k] = t, x, y, v
        cols["vy"][k], cols["ay"][k], cols["jy"][k] = vy, ay, jy
        cols["curvature"][k] = curvature(v, vy, ay)
        for i, (ox, oy, ovx, ovy) in zip(ids, obs):
            d, _, tt = ttc_arrays(x, y, v, vy, ox[k], oy[k], ovx[k], ovy[k])
            cols[f"gap_{i}"][k] = d
            cols[f"ttc_{i}"][k] = tt
        if not can_replan or k == n - 1 or t - last_attempt < config.planning.cooldown - 1e-9:
            continue
        min_ttc, min_gap = assess(plan, tracks, config.safety, config.dt, t)
        reasons = []
        if min_ttc < config.safety.t_safe:
            reasons.append(f"min TTC {min_ttc:.3f} s below {config.safety.t_safe} s")
        if min_gap < config.safety.safe_distance:
            reasons.append(f"min gap {min_gap:.3f} m below {config.safety.safe_distance} m")
        if not reasons:
            continue
        problem = make_problem(config, tracks, plan, t)
        if problem is None:
            continue
        last_attempt = t
        current = evaluate_breakdown(plan, problem.ctx, config.safety, config.weights, config.limits,
                                     config.planning.smooth_order).total
        rep = optimize_multistart(problem, opt_config)
        new_cost = rep.cost_history[-1]
        adopted = bool(new_cost < current - 1e-9 * (1.0 + abs(current)))
        replans.append({
            "t": float(t),
            "step": k,
            "reason": "; ".join(reasons),
            "adopted": adopted,
            "cost_before": float(current),
            "cost_after": float(new_cost),
            "iterations": rep.iterations,
        })
        if adopted:
            plan = rep.final_plan

    meta = {"maneuver": config.maneuver.kind, "labels": dict(config.labels)}
    if report is not None:
        meta["initial_optimization"] = {
            "iterations": report.iterations,
            "converged": report.converged,
            "reason": report.reason,
            "cost_initial": report.cost_history[0],
            "cost_final": report.cost_history[-1],
        }
    return SimLog(
        name=config.name,
        planner=planner,
        dt=config.dt,
        obstacle_ids=ids,
        columns=cols,
        replans=replans,
        maneuver_start=float(plan.maneuver_start),
        maneuver_end=float(plan.maneuver_end),
        speed=v,
        plan=plan,
        meta=meta,
    )


def load_variants(ref) -> List[Tuple[str, Dict[str, Any]]]:
    data = load_json(resolve_scenario(ref))
    items = data.get("variants") if isinstance(data, dict) else None
    if not isinstance(items, list):
        raise ConfigError("variants", "expected a list of variants")
    if not items:
        raise ConfigError("variants", "empty variant list")
    out = []
    for k, item in enumerate(items):
        if not isinstance(item, dict) or "name" not in item:
            raise ConfigError(f"variants[{k}]", "each variant needs a name")
        extra = set(item) - {"name", "overrides", "description"}
        if extra:
            raise ConfigError(f"variants[{k}].{sorted(extra)[0]}", "unknown field")
        ov = item.get("overrides", {})
        if not isinstance(ov, dict):
            raise ConfigError(f"variants[{k}].overrides", "expected an object")
        out.append((str(item["name"]), ov))
    return out


def run_ablation(base: Union[dict, str, os.PathLike], variants: Sequence[Tuple[str, Dict[str, Any]]],
                 planner: str = "proposed", opt_config: Optional[OptimizerConfig] = None,
                 base_dir: Optional[str] = None):
    """One rollout per (name, overrides) variant; returns [(name, log, summary)]."""
    from .metrics import summarize

    if not variants:
        raise ConfigError("variants", "empty variant list")
    if isinstance(base, dict):
        raw = base
    else:
        path = resolve_scenario(base)
        raw, base_dir = load_json(path), str(path.parent)
    out = []
    for name, ov in variants:
        cfg = config_from_dict(apply_overrides(raw, ov), base_dir)
        cfg = dataclasses.replace(cfg, name=f"{cfg.name}:{name}")
        log = run_scenario(cfg, planner, opt_config)
        out.append((name, log, summarize(log, cfg.safety)))
    return out
