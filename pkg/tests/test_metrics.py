import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ttcplanner.metrics import MetricSummary, compare, percent_delta, summarize
from ttcplanner.safety import SafetyParams
from ttcplanner.simulation import config_from_dict, run_scenario


def make_config(dy=0.0, obstacles=(), T=3.0, speed=20.0, horizon=6.0):
    return config_from_dict({
        "name": "probe",
        "ego": {"speed": speed},
        "maneuver": {"kind": "lane_change", "delta_y": dy, "T": T, "t_start": 1.0},
        "obstacles": list(obstacles),
        "horizon": horizon,
    })


def test_straight_log_with_receding_obstacle():
    cfg = make_config(obstacles=[{"id": "fast", "x0": 20.0, "speed": 30.0}])
    s = summarize(run_scenario(cfg, "quintic"), cfg.safety)
    assert s.min_ttc == math.inf
    assert all(v == 0.0 for v in s.ttc_below_fractions.values())
    assert s.max_curvature == 0.0 and s.avg_curvature == 0.0
    assert s.min_gap == pytest.approx(20.0)
    assert s.ttc_violation_count == 0


def test_empty_log_rejected():
    cfg = make_config()
    log = run_scenario(cfg, "quintic")
    log.columns = {k: v[:0] for k, v in log.columns.items()}
    with pytest.raises(ValueError):
        summarize(log, cfg.safety)


def test_summary_consistency_with_columns():
    cfg = make_config(3.5, [{"id": "lead", "x0": 40.0, "speed": 14.0}, {"id": "side", "x0": 5.0, "y0": 3.5, "speed": 18.0}])
    log = run_scenario(cfg, "bezier")
    s = summarize(log, cfg.safety)
    gaps = log.gaps()
    assert s.min_gap == float(np.min(gaps))
    jy = log.columns["jy"]
    assert s.rms_lateral_jerk**2 * s.n_steps == pytest.approx(float(np.sum(jy**2)), rel=1e-12)
    assert s.min_gap <= s.avg_gap
    assert s.rms_lateral_jerk <= s.max_lateral_jerk
    assert s.total_time == pytest.approx(3.0)
    assert s.longitudinal_distance == pytest.approx(60.0)
    assert s.min_gap_by_obstacle["lead"] == float(np.min(log.columns["gap_lead"]))
    # strict comparison against t_safe
    step_ttc = log.ttcs().min(axis=0)
    assert s.ttc_violation_count == int(np.sum(step_ttc < cfg.safety.t_safe))


@settings(max_examples=200)
@given(ttcs=st.lists(st.one_of(st.floats(0, 10), st.just(math.inf)), min_size=1, max_size=60))
def test_fraction_monotonicity(ttcs):
    cfg = make_config()
    log = run_scenario(cfg, "quintic")
    n = len(ttcs)
    log.columns = {k: v[:n].copy() for k, v in log.columns.items() if not k.startswith(("gap_", "ttc_"))}
    if log.n_steps < n:
        return
    log.obstacle_ids = ["o"]
    log.columns["gap_o"] = np.full(n, 10.0)
    log.columns["ttc_o"] = np.array(ttcs)
    s = summarize(log, SafetyParams())
    f = s.ttc_below_fractions
    assert 0.0 <= f[1.0] <= f[2.0] <= f[3.0] <= 1.0


def test_percent_delta():
    assert percent_delta(5.4146, 8.64) == pytest.approx(-37.33, abs=0.01)
    assert percent_delta(2.0, 2.0) == 0.0
    assert math.isnan(percent_delta(1.0, 0.0))
    assert percent_delta(math.inf, math.inf) == 0.0


def test_compare_tables():
    cfg = make_config(3.5, [{"id": "lead", "x0": 40.0, "speed": 14.0}])
    a = summarize(run_scenario(cfg, "quintic"), cfg.safety)
    b = summarize(run_scenario(cfg, "bspline"), cfg.safety)
    same = compare([("a", a), ("b", a)])
    assert all(v == 0.0 for v in same.deltas[1].values())
    table = compare([("quintic", a), ("bspline", b)])
    assert table.deltas[1]["max_lateral_jerk"] == pytest.approx(percent_delta(b.max_lateral_jerk, a.max_lateral_jerk))
    csv_text = table.to_csv()
    assert csv_text.splitlines()[0].startswith("name,min_ttc")
    assert len(csv_text.splitlines()) == 3
    text = table.to_text()
    assert "quintic" in text and "%" in text
    with pytest.raises(ValueError):
        compare([("only", a)])


def test_row_and_dict_views():
    cfg = make_config(3.5)
    s = summarize(run_scenario(cfg, "quintic"), cfg.safety)
    row = s.as_row()
    assert set(row) >= {"min_gap", "ttc_below_3s", "ttc_below_1s"}
    d = s.to_dict()
    assert d["ttc_below_fractions"] == {"3": 0.0, "2": 0.0, "1": 0.0}
    assert isinstance(s, MetricSummary)
