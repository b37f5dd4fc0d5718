import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ttcplanner.baselines import (
    BaselineKind,
    BezierPiece,
    BSplinePiece,
    bezier_controls,
    bspline_controls,
    plan_baseline,
    plan_baseline_sequence,
)
from ttcplanner.maneuver import single_lane_change
from ttcplanner.polynomial import BoundaryConditions, solve_boundary


def peak_accel(plan, T, n=20001):
    return np.max(np.abs(plan.lateral(np.linspace(0, T, n), 2)))


@settings(max_examples=40)
@given(kind=st.sampled_from(list(BaselineKind)), dy=st.floats(-10, 10), T=st.floats(1, 8))
def test_every_kind_meets_rest_endpoints(kind, dy, T):
    plan = plan_baseline(kind, dy, T, 15.0, horizon=T + 1)
    for t, y in ((0.0, 0.0), (T, dy)):
        assert plan.lateral(t) == pytest.approx(y, abs=1e-9)
        assert plan.lateral(t, 1) == pytest.approx(0.0, abs=1e-9)
        assert plan.lateral(t, 2) == pytest.approx(0.0, abs=1e-7 * (1 + abs(dy)))
    assert plan.lateral(T + 1) == pytest.approx(dy, abs=1e-9)


def test_closed_quintic_matches_boundary_solve():
    plan = plan_baseline(BaselineKind.ClosedQuintic, 3.5, 5.0, 15.0)
    seg = solve_boundary(BoundaryConditions.rest_to_rest(0.0, 3.5), 5.0)
    t = np.linspace(0, 5, 101)
    np.testing.assert_array_equal(plan.lateral(t), seg.evaluate(t))


def test_sharper_profiles_than_quintic():
    q = peak_accel(plan_baseline("quintic", 3.5, 5.0, 15.0), 5.0)
    b = peak_accel(plan_baseline("bezier", 3.5, 5.0, 15.0), 5.0)
    assert b >= q
    # frozen numeric maxima from dense sampling
    assert q == pytest.approx(0.8083, abs=1e-4)
    assert b == pytest.approx(3.31, abs=0.01)


def test_double_quintic_is_symmetric():
    plan = plan_baseline("double_quintic", 3.5, 6.0, 15.0)
    assert plan.lateral(3.0) == pytest.approx(1.75)
    assert len(plan.pieces) == 2


@settings(max_examples=50)
@given(frac=st.floats(0.01, 0.99), dy=st.floats(-5, 5), T=st.floats(1, 6))
def test_bezier_derivatives_match_finite_differences(frac, dy, T):
    piece = BezierPiece(*bezier_controls(dy, T))
    t, h = frac * T, 1e-5 * T
    for k in range(3):
        fd = (piece.evaluate(t + h, k) - piece.evaluate(t - h, k)) / (2 * h)
        ref = piece.evaluate(t, k + 1)
        assert fd == pytest.approx(ref, rel=1e-4, abs=1e-4 * (1 + abs(dy)) / T ** (k + 1))


def test_bspline_uses_seven_controls():
    c = bspline_controls(3.5)
    assert c.size == 7
    piece = BSplinePiece(c, 0.0, 4.0)
    assert piece.evaluate(2.0) == pytest.approx(1.75)
    with pytest.raises(ValueError):
        piece.evaluate(4.5)


def test_bezier_time_controls_validated():
    with pytest.raises(ValueError):
        BezierPiece([0, 2, 1], [0, 0, 1])


def test_baselines_never_see_traffic():
    # the signature takes no tracks; a plan depends only on geometry and timing
    a = plan_baseline("bspline", 3.5, 4.0, 20.0, horizon=8.0)
    b = plan_baseline("bspline", 3.5, 4.0, 20.0, horizon=8.0)
    t = np.linspace(0, 8, 81)
    np.testing.assert_array_equal(a.lateral(t), b.lateral(t))


def test_sequences():
    steps = [("hold", 1.0), ("shift", 3.5, 3.0), ("hold", 2.0), ("shift", -3.5, 3.0)]
    for kind in BaselineKind:
        plan = plan_baseline_sequence(kind, steps, 20.0, horizon=10.0)
        assert plan.lateral(5.0) == pytest.approx(3.5, abs=1e-9)
        assert plan.lateral(10.0) == pytest.approx(0.0, abs=1e-9)
        assert plan.maneuver_start == 1.0 and plan.maneuver_end == 9.0
    with pytest.raises(ValueError):
        plan_baseline_sequence("bezier", steps, 20.0, horizon=5.0)
    with pytest.raises(ValueError):
        plan_baseline_sequence("bezier", [("jump", 1.0)], 20.0)


def test_clipped_pieces_keep_values():
    piece = BezierPiece(*bezier_controls(3.5, 4.0))
    cut = piece.clipped(2.0)
    assert cut.t_end == 2.0
    assert cut.evaluate(1.5) == piece.evaluate(1.5)
