import numpy as np
import pytest
from hypothesis import given, strategies as st

from ttcplanner.maneuver import (
    Hold,
    JunctionState,
    LateralState,
    ManeuverPlan,
    avoidance_swerve,
    double_lane_change,
    overtake,
    phased_plan,
    single_lane_change,
    symmetric_junction,
)


def test_single_lane_change_examples():
    plan = single_lane_change(3.5, 3.0, 15.0, horizon=6.0)
    assert plan.lateral(3.0) == pytest.approx(3.5, abs=1e-12)
    assert plan.lateral(3.0, 1) == pytest.approx(0.0, abs=1e-12)
    assert plan.lateral(5.0) == 3.5
    flat = single_lane_change(0.0, 3.0, 15.0, horizon=6.0)
    assert np.all(flat.lateral(np.linspace(0, 6, 61)) == 0.0)
    wide = single_lane_change(18.0, 5.0, 18.0)
    assert wide.lateral(5.0) == pytest.approx(18.0, abs=1e-10)


def test_double_lane_change_through_middle_lane():
    plan = double_lane_change(7.0, JunctionState(3.0, 3.5, 0.0, 0.0), 6.0, 15.0)
    assert plan.lateral(3.0) == pytest.approx(3.5, abs=1e-12)
    assert plan.lateral(6.0) == pytest.approx(7.0, abs=1e-12)


def test_junction_velocity_shared_by_both_sides():
    plan = double_lane_change(7.0, JunctionState(3.0, 3.5, 1.0, 0.0), 6.0, 15.0)
    left, right = plan.pieces
    assert left.evaluate(3.0, 1) == pytest.approx(1.0, abs=1e-12)
    assert right.evaluate(3.0, 1) == pytest.approx(1.0, abs=1e-12)


def test_junction_time_validated():
    with pytest.raises(ValueError):
        double_lane_change(7.0, JunctionState(6.0, 3.5), 6.0, 15.0)
    with pytest.raises(ValueError):
        double_lane_change(7.0, JunctionState(0.0, 3.5), 6.0, 15.0)


@given(dy=st.floats(-10, 10), T=st.floats(1.0, 10.0))
def test_symmetric_junction_equals_two_halves(dy, T):
    plan = double_lane_change(dy, symmetric_junction(dy, T), T, 15.0)
    first = single_lane_change(dy / 2, T / 2, 15.0)
    second = single_lane_change(dy / 2, T / 2, 15.0, y0=dy / 2, t_start=T / 2)
    ta = np.linspace(0, T / 2, 41)
    tb = np.linspace(T / 2, T, 41)
    np.testing.assert_allclose(plan.lateral(ta), first.lateral(ta), atol=1e-9)
    np.testing.assert_allclose(plan.lateral(tb[1:]), second.lateral(tb[1:]), atol=1e-9)


def test_overtake_phases():
    plan = overtake(3.5, 2.6, 5.6, 8.0, 11.0, 20.0, 15.0)
    assert plan.lateral(7.0) == 3.5
    assert plan.lateral(15.0) == 0.0
    assert plan.lateral(5.6, 1) == pytest.approx(0.0, abs=1e-12)
    assert plan.lateral(5.6, 2) == pytest.approx(0.0, abs=1e-12)
    assert plan.lateral(1.0) == 0.0
    flat = overtake(0.0, 2.6, 5.6, 8.0, 11.0, 20.0, 15.0)
    assert np.all(flat.lateral(np.linspace(0, 15, 151)) == 0.0)


@pytest.mark.parametrize("phases", [(3, 2, 8, 11), (1, 4, 3, 11), (1, 4, 8, 16), (-1, 4, 8, 11)])
def test_overtake_order_validation(phases):
    with pytest.raises(ValueError):
        overtake(3.5, *phases, 20.0, 15.0)


@given(
    D=st.floats(-8, 8), T1=st.floats(0.0, 3.0), rise=st.floats(0.5, 4.0), fall=st.floats(0.5, 4.0)
)
def test_overtake_without_hold_is_an_up_and_back_double(D, T1, rise, fall):
    T2 = T1 + rise
    T4 = T2 + fall
    a = overtake(D, T1, T2, T2, T4, 15.0, T4 + 1.0)
    b = double_lane_change(0.0, JunctionState(T2, D, 0.0, 0.0), T4 - T1, 15.0, T4 + 1.0, t_start=T1)
    t = np.linspace(0, T4 + 1.0, 301)
    np.testing.assert_allclose(a.lateral(t), b.lateral(t), atol=1e-9)


@given(
    dy=st.floats(-10, 10), T=st.floats(1.0, 8.0), s=st.floats(0.1, 0.9),
    vs=st.floats(-3, 3), as_=st.floats(-3, 3), extra=st.floats(0.0, 5.0),
)
def test_joints_are_c2(dy, T, s, vs, as_, extra):
    plan = double_lane_change(dy, JunctionState(0.5 + s * T, dy * s, vs, as_), T, 15.0, horizon=T + extra + 0.1, t_start=0.5)
    assert np.max(plan.joint_residuals()) <= 1e-8


@given(v=st.floats(0.5, 40), x0=st.floats(-100, 100))
def test_longitudinal_is_linear(v, x0):
    plan = single_lane_change(3.5, 4.0, v, horizon=6.0, x0=x0)
    t = np.linspace(0, 6, 25)
    x = plan.longitudinal(t)
    assert np.all(np.diff(x) > 0)
    np.testing.assert_allclose(np.diff(x) / np.diff(t), v, rtol=1e-9)
    assert plan.longitudinal(0.0, 1) == v


def test_avoidance_levels():
    straight = avoidance_swerve(0.0, 1, 4.0, 8.0, 10.0, horizon=12.0)
    assert np.all(straight.lateral(np.linspace(0, 12, 121)) == 0.0)
    t = np.linspace(0, 12, 1201)
    peaks = [np.max(np.abs(avoidance_swerve(p, -1, 4.0, 8.0, 10.0, 12.0).lateral(t))) for p in (5.0, 10.0, 15.0)]
    assert peaks[0] < peaks[1] < peaks[2]
    # an emergency swerve spanning x in [-20, 20] at 10 m/s, centred at t = 6
    emergency = avoidance_swerve(22.5, 1, 4.0, 8.0, 10.0, 12.0, x0=-60.0)
    assert np.max(np.abs(emergency.lateral(t))) == pytest.approx(22.5, abs=1e-12)
    with pytest.raises(ValueError):
        avoidance_swerve(1.0, 0, 4.0, 8.0, 10.0)
    with pytest.raises(ValueError):
        avoidance_swerve(-1.0, 1, 4.0, 8.0, 10.0)
    with pytest.raises(ValueError):
        avoidance_swerve(1.0, 1, 8.0, 4.0, 10.0)


def test_plan_tiling_and_window():
    with pytest.raises(ValueError):
        ManeuverPlan([Hold(0, 0, 1), Hold(0, 1.5, 2)], 10.0)
    with pytest.raises(ValueError):
        ManeuverPlan([], 10.0)
    with pytest.raises(ValueError):
        ManeuverPlan([Hold(0, 0, 1)], 0.0)
    plan = ManeuverPlan([Hold(0, 0, 1)], 10.0)
    with pytest.raises(ValueError):
        plan.lateral(1.5)


def test_joint_sample_uses_earlier_piece():
    plan = phased_plan(LateralState(0.0, 0.0), [("shift", 1.0, 2.0), ("hold", 1.0)], 10.0)
    # jerk of the quintic at its end is nonzero; the hold afterwards has none
    assert plan.lateral(2.0, 3) == pytest.approx(plan.pieces[0].evaluate(2.0, 3))
    assert plan.lateral(2.0 + 1e-6, 3) == 0.0


def test_maneuver_window_and_prefix():
    plan = single_lane_change(3.5, 4.0, 20.0, horizon=10.0, t_start=1.0)
    assert (plan.maneuver_start, plan.maneuver_end) == (1.0, 5.0)
    shifted = single_lane_change(1.0, 2.0, 20.0, horizon=10.0, y0=plan.lateral(5.0), t_start=5.0)
    tail = ManeuverPlan(shifted.pieces[1:], 20.0)
    joined = plan.with_prefix(5.0, tail)
    assert joined.t_begin == 0.0 and joined.t_end == 10.0
    assert joined.lateral(9.0) == pytest.approx(4.5)
