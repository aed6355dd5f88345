import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qharmlab.domains import (
    BallDomain,
    BallUnionDomain,
    BoxDomain,
    IntervalDomain,
    PositiveSideDomain,
    WholeSpace,
)
from qharmlab.params import BallSpec, ReflectionFrame
from qharmlab.potentials import (
    counterexample_potential,
    holder_cusp_potential,
    indicator_data,
    interval_far_side_data,
    parabolic_cap_potential,
    smooth_bump_potential,
    zero_potential,
)


@given(st.floats(-3, 3))
@settings(max_examples=200, deadline=None)
def test_interval_membership_distance_consistency(x):
    dom = IntervalDomain(-1.0, 2.0)
    assert bool(dom.contains(x)) == (dom.distance_to_boundary(x) > 0)


@given(st.floats(-2, 2), st.floats(-2, 2))
@settings(max_examples=200, deadline=None)
def test_ball_membership_distance_consistency(x, y):
    dom = BallDomain(BallSpec([0.25, -0.5], 1.3))
    pt = np.array([x, y])
    assert bool(dom.contains(pt)) == (dom.distance_to_boundary(pt) > 0)


def test_union_of_balls_distance_positive_iff_interior():
    dom = BallUnionDomain([BallSpec([0.0], 1.0), BallSpec([1.5], 1.0)])
    rng = np.random.default_rng(0)
    xs = rng.uniform(-2, 4, 500)
    inside = dom.contains(xs)
    dists = dom.distance_to_boundary(xs)
    assert np.all((dists > 0) == inside)
    # overlap region: distance bound is achieved by the deeper ball
    assert dom.distance_to_boundary(np.asarray(0.9)) == pytest.approx(
        max(1.0 - 0.9, 1.0 - abs(1.5 - 0.9)))


def test_box_domain_membership():
    dom = BoxDomain(height=1.0, half_width=0.5, d=2)
    assert bool(dom.contains(np.array([0.2, 0.5])))
    assert not bool(dom.contains(np.array([0.6, 0.5])))
    assert not bool(dom.contains(np.array([0.0, -0.1])))
    assert dom.distance_to_boundary(np.array([0.2, 0.5])) == pytest.approx(0.3)


def test_whole_space_never_bounded():
    dom = WholeSpace(1)
    assert not dom.bounded
    assert np.all(dom.contains(np.linspace(-100, 100, 7)))
    assert np.all(np.isinf(dom.distance_to_boundary(np.zeros(3))))


def test_positive_side_domain():
    frame = ReflectionFrame(0, 0.0)
    dom = PositiveSideDomain(IntervalDomain(-1, 1), frame)
    assert bool(dom.contains(np.asarray(0.5)))
    assert not bool(dom.contains(np.asarray(-0.5)))
    assert dom.distance_to_boundary(np.asarray(0.2)) == pytest.approx(0.2)


def test_interval_symmetry_check():
    frame = ReflectionFrame(0, 0.0)
    assert IntervalDomain(-1, 1).is_symmetric(frame)
    assert not IntervalDomain(-1, 2).is_symmetric(frame)


# ---------------------------------------------------------------------------
# potentials


@pytest.mark.parametrize("alpha", [0.4, 0.5, 1.0])
def test_counterexample_potential_holder_promise(alpha, rng):
    q = counterexample_potential(0.3, 0.2, alpha)
    assert q.holder_eta == pytest.approx(1.0 - alpha)
    worst = q.spot_check_holder(-1.0, 1.0, 4000, rng)
    assert worst <= 1.0 + 1e-9


def test_counterexample_potential_support_and_values():
    q = counterexample_potential(0.3, 0.2, 0.5)
    assert q(np.asarray(0.3)) == pytest.approx(0.2)  # (r^2)^(1/2) at the center
    assert q(np.asarray(0.09)) == 0.0
    assert q(np.asarray(0.51)) == 0.0
    # alpha = 1 degenerates to the indicator
    q1 = counterexample_potential(0.3, 0.2, 1.0)
    assert q1(np.asarray(0.3)) == 1.0
    assert q1(np.asarray(0.09)) == 0.0


@pytest.mark.parametrize("factory", [
    lambda: parabolic_cap_potential(0.3, 0.2),
    lambda: smooth_bump_potential(0.0, 0.4, 0.7),
    lambda: holder_cusp_potential(0.2, 0.5, 0.8),
])
def test_potential_holder_spot_checks(factory, rng):
    q = factory()
    assert q.spot_check_holder(-1.0, 1.0, 4000, rng) <= 1.0 + 1e-9


def test_zero_potential_shapes():
    q = zero_potential()
    assert q(np.zeros(5)).shape == (5,)
    q2 = zero_potential(d=2)
    assert q2(np.zeros((7, 2))).shape == (7,)


def test_boundary_data_flags_and_values():
    f = interval_far_side_data(-1.5, "left")
    assert f(np.asarray([-2.0, 0.0])).tolist() == [1.0, 0.0]
    assert f.nonnegative and f.bounded
    g = indicator_data(lambda x: np.abs(np.asarray(x)) > 2.0, name="far")
    assert g(np.asarray([3.0, 1.0])).tolist() == [1.0, 0.0]
