import io
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ttcplanner.maneuver import double_lane_change, JunctionState, single_lane_change
from ttcplanner.traffic import (
    ObstacleTrack,
    ReplayFormatError,
    braking_track,
    constant_track,
    delayed_offset_track,
    oscillating_track,
    read_replay_csv,
    replay_track,
    time_grid,
)


def fd_velocity_error(track):
    vx = np.gradient(track.x, track.t)
    vy = np.gradient(track.y, track.t)
    inner = slice(1, -1)
    return max(np.max(np.abs(vx - track.vx)[inner]), np.max(np.abs(vy - track.vy)[inner]))


def test_constant_tracks_from_first_scenario():
    hdv1 = constant_track(10.0, 0.0, 15.0, 5.0, 0.05)
    assert hdv1.position(2.0) == pytest.approx((40.0, 0.0))
    hdv3 = constant_track(12.0, 7.0, 10.0, 5.0, 0.05)
    assert hdv3.position(1.0) == pytest.approx((22.0, 7.0))
    still = constant_track(5.0, 1.0, 0.0, 5.0, 0.05)
    assert np.all(still.x == 5.0)


def test_heading_moves_across_the_road():
    tr = constant_track(0.0, -10.0, 10.0, 2.0, 0.05, heading=math.pi / 2)
    x, y = tr.position(1.0)
    assert x == pytest.approx(0.0, abs=1e-12)
    assert y == pytest.approx(0.0, abs=1e-12)


def test_delayed_offset_examples():
    plan = double_lane_change(7.0, JunctionState(3.0, 3.5, 0.2, 0.0), 6.0, 15.0, horizon=8.0)
    same = delayed_offset_track(plan, 0.0, 0.0, 8.0, 0.05)
    np.testing.assert_allclose(same.y, plan.lateral(same.t), atol=1e-12)
    np.testing.assert_allclose(same.x, plan.longitudinal(same.t), atol=1e-12)
    straight = single_lane_change(0.0, 1.0, 15.0, horizon=6.0)
    ahead = delayed_offset_track(straight, 1.0, 0.0, 5.0, 0.05)
    np.testing.assert_allclose(ahead.x, 15.0 * (ahead.t + 1.0), atol=1e-12)
    shifted = delayed_offset_track(plan, 0.5, 3.5, 8.0, 0.05)
    base = delayed_offset_track(plan, 0.5, 0.0, 8.0, 0.05)
    np.testing.assert_allclose(shifted.y - base.y, 3.5, atol=1e-12)
    with pytest.raises(ValueError):
        delayed_offset_track(plan, -1.0, 0.0, 8.0, 0.05)


def test_braking_examples():
    tr = braking_track(0.0, 0.0, 20.0, 2.0, 10.0, 8.0, 0.05)
    assert np.interp(5.0, tr.t, tr.vx) == pytest.approx(10.0)
    assert tr.vx[-1] == pytest.approx(10.0)
    assert tr.position(5.0)[0] == pytest.approx(75.0)
    flat = braking_track(0.0, 0.0, 20.0, 0.0, 10.0, 8.0, 0.05)
    np.testing.assert_allclose(flat.x, constant_track(0.0, 0.0, 20.0, 8.0, 0.05).x)
    saturated = braking_track(0.0, 0.0, 20.0, 5.0, 20.0, 8.0, 0.05)
    assert np.all(saturated.vx == 20.0)
    with pytest.raises(ValueError):
        braking_track(0.0, 0.0, 20.0, 1.0, 25.0, 8.0, 0.05)


def test_oscillating_examples():
    tr = oscillating_track(0.0, 0.0, 22.5, 7.5, 4.0, 8.0, 0.01)
    assert tr.vx.min() == pytest.approx(15.0, abs=1e-6)
    assert tr.vx.max() == pytest.approx(30.0, abs=1e-6)
    assert tr.position(4.0)[0] == pytest.approx(22.5 * 4.0, abs=1e-9)
    calm = oscillating_track(0.0, 0.0, 20.0, 0.0, 4.0, 8.0, 0.05)
    np.testing.assert_allclose(calm.x, constant_track(0.0, 0.0, 20.0, 8.0, 0.05).x)
    with pytest.raises(ValueError):
        oscillating_track(0.0, 0.0, 5.0, 7.5, 4.0, 8.0, 0.05)


@settings(max_examples=50)
@given(
    v0=st.floats(5, 35), decel=st.floats(0, 4), frac=st.floats(0, 1),
    amp=st.floats(0, 1), period=st.floats(2, 10),
)
def test_smooth_kinds_have_consistent_velocities(v0, decel, frac, amp, period):
    dt = 0.05
    tracks = [
        constant_track(0.0, 0.0, v0, 10.0, dt),
        braking_track(0.0, 0.0, v0, decel, frac * v0, 10.0, dt),
        oscillating_track(0.0, 0.0, v0, amp * v0, period, 10.0, dt),
    ]
    for tr in tracks:
        assert fd_velocity_error(tr) < 0.1
        assert tr.t[0] == 0.0 and tr.horizon == pytest.approx(10.0)


def test_replay_pass_through_and_translation():
    t = time_grid(2.0, 0.1)
    data = np.column_stack([t, 3.0 * t, np.sin(t)])
    same = replay_track(data, horizon=2.0, dt=0.1)
    np.testing.assert_allclose(same.x, data[:, 1], atol=1e-12)
    np.testing.assert_allclose(same.y, data[:, 2], atol=1e-12)
    moved = replay_track(data, (1.0, 0.0, (5.0, -2.0)), horizon=2.0, dt=0.1)
    np.testing.assert_allclose(moved.x - same.x, 5.0, atol=1e-12)
    np.testing.assert_allclose(moved.y - same.y, -2.0, atol=1e-12)


def test_replay_smoothing_contracts_noise():
    rng = np.random.default_rng(7)
    t = np.arange(0, 10.0001, 0.05)
    data = np.column_stack([t, 20 * t, rng.normal(0, 0.3, t.size)])
    raw = replay_track(data, horizon=10.0, dt=0.05)
    smooth = replay_track(data, smoothing_window=5, horizon=10.0, dt=0.05)
    assert np.var(smooth.y) < np.var(raw.y)


@pytest.mark.parametrize(
    "text,line",
    [
        ("t,x,y\n0,0,0\n1,a,0\n", 3),
        ("t,x,y\n0,0,0\n0,1,0\n", 3),
        ("t,x,y\n0,0,0\n1,nan,0\n", 3),
        ("t,x,y\n0,0\n", 2),
        ("time,x,y\n0,0,0\n", 1),
    ],
)
def test_replay_rejects_malformed_rows(text, line):
    with pytest.raises(ReplayFormatError) as err:
        read_replay_csv(io.StringIO(text))
    assert err.value.line == line
    assert f"line {line}" in str(err.value)


def test_replay_needs_two_rows():
    with pytest.raises(ReplayFormatError):
        read_replay_csv(io.StringIO("t,x,y\n0,0,0\n"))
    with pytest.raises(ReplayFormatError):
        read_replay_csv(io.StringIO(""))


def test_track_validation_and_window():
    t = np.array([0.0, 0.1, 0.3])
    with pytest.raises(ValueError):
        ObstacleTrack("a", "constant", t, t, t, t, t)
    with pytest.raises(ValueError):
        ObstacleTrack("a", "teleport", t[:2], t[:2], t[:2], t[:2], t[:2])
    tr = constant_track(0.0, 0.0, 1.0, 2.0, 0.1)
    with pytest.raises(ValueError):
        tr.at(2.5)
    with pytest.raises(ValueError):
        tr.x[0] = 1.0
