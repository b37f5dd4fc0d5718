import copy
import json

import numpy as np
import pytest

from ttcplanner.simulation import (
    PLANNERS,
    ConfigError,
    apply_overrides,
    config_from_dict,
    load_json,
    load_scenario,
    load_variants,
    resolve_scenario,
    run_ablation,
    run_scenario,
)

from conftest import rollout

BASE = {
    "name": "probe",
    "ego": {"speed": 20.0},
    "maneuver": {"kind": "lane_change", "delta_y": 3.5, "T": 3.0},
    "horizon": 5.0,
}


def test_shipped_corpus_loads():
    for name in ("scenario1", "scenario2", "jerk_comparison", "mixed_traffic", "ramp_base", "overtake_base",
                 "scenario1_spaced", "intersection_normal", "intersection_light", "intersection_moderate",
                 "intersection_emergency"):
        cfg = load_scenario(name)
        assert cfg.horizon >= cfg.maneuver.t_final
    assert len(load_variants("ablation_variants")) == 5


@pytest.mark.parametrize(
    "patch,path",
    [
        ({"ego": {"speed": 20.0, "z": 1}}, "ego.z"),
        ({"ego": {"speed": "fast"}}, "ego.speed"),
        ({"maneuver": {"kind": "teleport", "delta_y": 1, "T": 1}}, "maneuver"),
        ({"obstacles": [{"id": "a", "kind": "constant", "x0": 1}, {"id": "b", "kindd": "constant"}]}, "obstacles[1].kindd"),
        ({"dt": -0.1}, ""),
        ({"horizon": 2.0}, ""),
    ],
)
def test_config_errors_name_the_field(patch, path):
    data = {**copy.deepcopy(BASE), **patch}
    with pytest.raises(ConfigError) as err:
        config_from_dict(data)
    assert err.value.path.startswith(path)


def test_malformed_json_reports_location(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{\n  "name": "x",\n  oops\n}')
    with pytest.raises(ConfigError) as err:
        load_json(bad)
    assert "line 3" in str(err.value)


def test_missing_scenario():
    with pytest.raises(FileNotFoundError, match="no_such_scenario_here"):
        resolve_scenario("no_such_scenario_here")


def test_override_paths_are_validated():
    out = apply_overrides(BASE, {"maneuver.T": 2.0, "safety.t_safe": 4.0})
    assert out["maneuver"]["T"] == 2.0 and out["safety"]["t_safe"] == 4.0
    assert BASE["maneuver"]["T"] == 3.0
    with pytest.raises(ConfigError) as err:
        apply_overrides(BASE, {"safety.t_saf": 1.0})
    assert "safety.t_saf" in str(err.value)


def test_scenario_dir_env(tmp_path, monkeypatch):
    (tmp_path / "mine.json").write_text(json.dumps(BASE))
    monkeypatch.setenv("PLANNER_SCENARIO_DIR", str(tmp_path))
    assert load_scenario("mine").name == "probe"


def test_empty_traffic_runs_plan_verbatim():
    cfg = config_from_dict(BASE)
    log = run_scenario(cfg, "proposed")
    assert log.replans == []
    np.testing.assert_array_equal(log.columns["y"], log.plan.lateral(log.columns["t"]))
    assert log.n_steps == 101
    np.testing.assert_allclose(np.diff(log.columns["t"]), cfg.dt)


def test_unknown_planner():
    with pytest.raises(ConfigError):
        run_scenario(config_from_dict(BASE), "magic")


def test_every_planner_runs_scenario2():
    cfg = load_scenario("scenario2")
    for planner in PLANNERS:
        log = run_scenario(cfg, planner) if planner != "proposed" else rollout("scenario2")[1]
        assert log.n_steps == 281
        assert log.columns["y"][-1] == pytest.approx(0.0, abs=1e-9)
        if planner != "proposed":
            assert log.replans == []


def test_overtake_gap_is_v_shaped():
    _, log, _ = rollout("scenario2")
    g = log.columns["gap_hdv"]
    k = int(np.argmin(g))
    assert 0 < k < g.size - 1
    assert np.all(np.diff(g[: k + 1]) <= 1e-12)
    assert np.all(np.diff(g[k:]) >= -1e-12)


def test_replans_keep_the_final_target(scenario1_proposed):
    cfg, log, _ = scenario1_proposed
    assert any(r["adopted"] for r in log.replans)
    assert log.columns["y"][-1] == pytest.approx(7.0, abs=1e-9)
    steps = [r["step"] for r in log.replans]
    assert all(0 <= s < log.n_steps for s in steps)
    times = [r["t"] for r in log.replans]
    assert all(b - a >= cfg.planning.cooldown - 1e-9 for a, b in zip(times, times[1:]))


def test_rollout_bytes_are_deterministic():
    cfg = load_scenario("scenario2")
    a, b = run_scenario(cfg, "proposed"), run_scenario(cfg, "proposed")
    assert a.to_csv() == b.to_csv()
    assert a.to_json() == b.to_json()


def test_identical_ablation_variants_match():
    cfg = load_scenario("scenario2")
    raw = json.loads(resolve_scenario("scenario2").read_text())
    out = run_ablation(raw, [("a", {"safety.t_safe": 2.5}), ("b", {"safety.t_safe": 2.5})], planner="quintic")
    assert out[0][1].to_csv() == out[1][1].to_csv()
    with pytest.raises(ConfigError):
        run_ablation(raw, [])
    with pytest.raises(ConfigError):
        run_ablation(raw, [("x", {"maneuver.T9": 1})])


def test_log_exports(tmp_path):
    _, log, _ = rollout("scenario2")
    text = log.to_csv(tmp_path / "log.csv")
    header = text.splitlines()[0].split(",")
    assert header[:8] == ["t", "x", "y", "vx", "vy", "ay", "jy", "curvature"]
    assert "ttc_hdv" in header
    data = json.loads(log.to_json(tmp_path / "log.json"))
    assert len(data["columns"]["t"]) == log.n_steps
    assert (tmp_path / "log.json").read_text() == log.to_json()


def test_mixed_traffic_builds_every_kind():
    cfg = load_scenario("mixed_traffic")
    log = run_scenario(cfg, "quintic")
    assert set(log.obstacle_ids) == {"braking", "oscillating", "follower", "replay"}
    assert np.all(np.isfinite(log.columns["gap_replay"]))


@pytest.mark.xfail(strict=True, reason="initial HDV2 offset in the first scenario and the 3.5 m lateral pass in the second put the gap under 5 m")
@pytest.mark.parametrize("name", ["scenario1", "scenario2"])
def test_safe_distance_never_breached(name):
    cfg, log, _ = rollout(name)
    assert np.min(log.gaps()) >= cfg.safety.safe_distance
