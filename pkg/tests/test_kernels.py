import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from qharmlab.errors import (
    CoincidentPointsError,
    OutOfDomainError,
    UnsupportedRegimeError,
    WrongSideError,
)
from qharmlab.kernels import (
    expected_exit_time_ball,
    green_1d,
    green_1d_dx,
    green_ball,
    green_halfspace_diff,
    green_interval,
    halfspace_diff_bound,
    poisson_kernel_ball,
    riesz_kernel,
)
from qharmlab.params import BallSpec, ReflectionFrame, StableParams, exit_time_constant

P_HALF = StableParams(1, 0.5)
P_CAUCHY = StableParams(1, 1.0)
P3 = StableParams(3, 0.5)
P2 = StableParams(2, 1.0)


# ---------------------------------------------------------------------------
# Riesz kernel


def test_riesz_gamma_cancellation_d1_alpha_half():
    # Gamma(1/4) cancels exactly: value is (2 pi)^(-1/2)
    assert riesz_kernel(P_HALF, 0.0, 1.0) == pytest.approx((2 * math.pi) ** -0.5, abs=1e-14)


def test_riesz_log_kernel_unit_distance():
    assert riesz_kernel(P_CAUCHY, 0.0, 1.0) == 0.0


def test_riesz_matches_time_integrated_cauchy_density():
    # d=2, alpha=1: known transition density c*t/(t^2+|x|^2)^(3/2);
    # its time integral at |x|=2 is the potential kernel value.
    x, y = np.zeros(2), np.array([0.0, 2.0])
    rho = 2.0
    dens = lambda t: (1.0 / (2 * math.pi)) * t / (t * t + rho * rho) ** 1.5
    quad_val, _ = integrate.quad(dens, 0.0, np.inf)
    assert riesz_kernel(P2, x, y) == pytest.approx(quad_val, rel=1e-10)


def test_riesz_rejects_coincident_and_recurrent_regimes():
    with pytest.raises(CoincidentPointsError):
        riesz_kernel(P_HALF, 0.3, 0.3)
    with pytest.raises(UnsupportedRegimeError):
        riesz_kernel(StableParams(1, 1.5), 0.0, 1.0)


@given(st.floats(-5, 5), st.floats(-5, 5))
@settings(max_examples=200, deadline=None)
def test_riesz_symmetric_positive(x, y):
    if abs(x - y) < 1e-6:
        return
    k1 = riesz_kernel(P_HALF, x, y)
    assert k1 > 0
    assert k1 == pytest.approx(riesz_kernel(P_HALF, y, x), rel=1e-14)


# ---------------------------------------------------------------------------
# interval Green function (d = alpha = 1)


def test_green_interval_analytic_point():
    want = math.log(1.0 + math.sqrt(2.0)) / math.pi
    assert green_interval(1.0, 0.0, 2**-0.5) == pytest.approx(want, abs=1e-15)


def test_green_interval_swap_and_scaling():
    assert green_interval(1.0, 0.3, 0.7) == pytest.approx(green_interval(1.0, 0.7, 0.3), rel=1e-15)
    assert green_interval(2.0, 0.6, 1.4) == pytest.approx(green_interval(1.0, 0.3, 0.7), rel=1e-15)


def test_green_interval_outside_and_coincident():
    assert green_interval(1.0, 1.5, 0.2) == 0.0
    assert green_interval(1.0, 0.2, -1.0) == 0.0
    with pytest.raises(CoincidentPointsError):
        green_interval(1.0, 0.2, 0.2)


@given(st.floats(-0.99, 0.99), st.floats(-0.99, 0.99), st.floats(0.1, 10.0))
@settings(max_examples=300, deadline=None)
def test_green_interval_positive_symmetric_scalable(x, y, r):
    if abs(x - y) < 1e-6:
        return
    g = green_interval(1.0, x, y)
    assert g > 0
    assert g == pytest.approx(green_interval(1.0, y, x), rel=1e-12)
    assert green_interval(r, r * x, r * y) == pytest.approx(g, rel=1e-11)


# ---------------------------------------------------------------------------
# ball Green function (d > alpha)


def test_green_ball_dominated_by_riesz_on_grid():
    ball = BallSpec(np.zeros(3), 1.0)
    pts = np.linspace(-0.55, 0.55, 10)
    for ux in pts:
        for uy in pts:
            x = np.array([ux, 0.1, 0.0])
            y = np.array([uy, -0.2, 0.15])
            if np.linalg.norm(x - y) < 1e-9:
                continue
            assert green_ball(P3, ball, x, y) <= riesz_kernel(P3, x, y) + 1e-14


def test_green_ball_occupation_identity_against_exit_time():
    # int_B G_B(x, y) dy equals the expected exit time (both closed forms)
    ball = BallSpec(np.array([0.0]), 1.0)
    p = P_HALF
    for x in (0.0, 0.4, -0.7):
        quad_val, _ = integrate.quad(
            lambda y: green_ball(p, ball, np.array([x]), np.array([y])),
            -1.0, 1.0, points=[x], limit=200,
        )
        want = expected_exit_time_ball(p, ball, np.array([x]))
        assert quad_val == pytest.approx(want, rel=1e-4)


def test_green_ball_scaling_identity():
    r = 2.0
    x = np.array([0.1, 0.0, 0.2])
    y = np.array([-0.3, 0.25, 0.0])
    unit = green_ball(P3, BallSpec(np.zeros(3), 1.0), x, y)
    scaled = green_ball(P3, BallSpec(np.zeros(3), r), r * x, r * y)
    assert scaled == pytest.approx(r ** (P3.alpha - 3) * unit, rel=1e-12)


def test_green_ball_domain_monotonicity_in_radius():
    x = np.array([0.2, -0.1, 0.05])
    y = np.array([-0.4, 0.3, 0.1])
    g1 = green_ball(P3, BallSpec(np.zeros(3), 1.0), x, y)
    g2 = green_ball(P3, BallSpec(np.zeros(3), 2.0), x, y)
    assert g1 <= g2


def test_green_ball_outside_returns_zero_and_regime_guard():
    ball = BallSpec(np.zeros(3), 1.0)
    assert green_ball(P3, ball, np.array([0.0, 0.0, 2.0]), np.array([0.1, 0.0, 0.0])) == 0.0
    with pytest.raises(UnsupportedRegimeError):
        green_ball(P_CAUCHY, BallSpec(np.array([0.0]), 1.0), 0.1, 0.5)


# ---------------------------------------------------------------------------
# half-space Green difference


def test_halfspace_diff_example_value():
    frame = ReflectionFrame(axis=2, offset=0.0)
    x = np.array([0.0, 0.0, 0.1])
    y = np.array([0.0, 0.0, 0.5])
    e = 3 - 0.5
    want = P3.A_d_alpha * (0.6**e - 0.4**e) / (0.4**e * 0.6**e)
    got = green_halfspace_diff(P3, frame, x, y)
    assert got == pytest.approx(want, rel=1e-14)
    assert got <= halfspace_diff_bound(P3, frame, x, y)


def test_halfspace_diff_zero_on_hyperplane_and_wrong_side():
    frame = ReflectionFrame(axis=2, offset=0.0)
    on_plane = np.array([0.2, -0.1, 0.0])
    y = np.array([0.0, 0.0, 0.5])
    assert green_halfspace_diff(P3, frame, on_plane, y) == 0.0
    with pytest.raises(WrongSideError):
        green_halfspace_diff(P3, frame, np.array([0.0, 0.0, -0.1]), y)


@given(st.floats(0.01, 2.0), st.floats(0.01, 2.0), st.floats(-1.0, 1.0))
@settings(max_examples=200, deadline=None)
def test_halfspace_diff_nonnegative_and_bounded(xz, yz, ylat):
    frame = ReflectionFrame(axis=2, offset=0.0)
    x = np.array([0.0, 0.0, xz])
    y = np.array([ylat, 0.0, yz])
    if np.linalg.norm(x - y) < 1e-6:
        return
    val = green_halfspace_diff(P3, frame, x, y)
    assert val >= 0.0
    assert val <= halfspace_diff_bound(P3, frame, x, y) * (1 + 1e-12)


# ---------------------------------------------------------------------------
# Poisson kernel


def test_poisson_kernel_normalizes_d1():
    ball = BallSpec(np.array([0.0]), 1.0)
    p = P_HALF
    total = 0.0
    for lo, hi in ((-np.inf, -1.0), (1.0, np.inf)):
        val, _ = integrate.quad(
            lambda z: poisson_kernel_ball(p, ball, np.array([0.0]), np.array([z])),
            lo, hi, limit=400,
        )
        total += val
    assert total == pytest.approx(1.0, abs=1e-6)


def test_poisson_kernel_normalizes_off_center():
    ball = BallSpec(np.array([0.0]), 1.0)
    p = StableParams(1, 0.7)
    total = 0.0
    for lo, hi in ((-np.inf, -1.0), (1.0, np.inf)):
        val, _ = integrate.quad(
            lambda z: poisson_kernel_ball(p, ball, np.array([0.4]), np.array([z])),
            lo, hi, limit=400,
        )
        total += val
    assert total == pytest.approx(1.0, abs=1e-6)


def test_poisson_kernel_radial_symmetry_from_center():
    ball = BallSpec(np.zeros(2), 1.0)
    z = 1.7
    vals = []
    for theta in np.linspace(0, 2 * math.pi, 9)[:-1]:
        point = z * np.array([math.cos(theta), math.sin(theta)])
        vals.append(poisson_kernel_ball(P2, ball, np.zeros(2), point))
    assert np.ptp(vals) < 1e-14 * max(vals)


def test_poisson_kernel_domain_guards():
    ball = BallSpec(np.array([0.0]), 1.0)
    with pytest.raises(OutOfDomainError):
        poisson_kernel_ball(P_HALF, ball, np.array([1.5]), np.array([2.0]))
    with pytest.raises(OutOfDomainError):
        poisson_kernel_ball(P_HALF, ball, np.array([0.0]), np.array([0.5]))


# ---------------------------------------------------------------------------
# expected exit time


def test_expected_exit_time_unit_constant_for_cauchy():
    assert exit_time_constant(1, 1.0) == pytest.approx(1.0, rel=1e-14)
    ball = BallSpec(np.array([0.0]), 1.0)
    assert expected_exit_time_ball(P_CAUCHY, ball, 0.0) == pytest.approx(1.0, rel=1e-14)


def test_expected_exit_time_boundary_exponent():
    ball = BallSpec(np.array([0.0]), 1.0)
    p = P_HALF
    ratios = [
        expected_exit_time_ball(p, ball, 1.0 - d) / d ** (p.alpha / 2.0)
        for d in (1e-3, 1e-5, 1e-7)
    ]
    # value / delta^(alpha/2) tends to the finite limit C * 2^(alpha/2)
    want = exit_time_constant(1, 0.5) * 2 ** (p.alpha / 2.0)
    assert ratios[-1] == pytest.approx(want, rel=1e-3)
    assert abs(ratios[2] - want) < abs(ratios[0] - want)


def test_expected_exit_time_gradient_zero_at_center():
    ball = BallSpec(np.array([0.0]), 1.0)
    h = 1e-6
    d = (expected_exit_time_ball(P_CAUCHY, ball, h) -
         expected_exit_time_ball(P_CAUCHY, ball, -h)) / (2 * h)
    assert abs(d) < 1e-9
    assert expected_exit_time_ball(P_CAUCHY, ball, 2.0) == 0.0


# ---------------------------------------------------------------------------
# one-dimensional dispatcher and analytic x-derivative


def test_green_1d_dispatch_consistency():
    # alpha = 1 goes through the log formula, alpha < 1 through the ball form
    assert green_1d(P_CAUCHY, 1.0, 0.0, 2**-0.5) == pytest.approx(
        math.log(1 + math.sqrt(2)) / math.pi, abs=1e-15)
    ball = BallSpec(np.array([0.0]), 1.0)
    assert green_1d(P_HALF, 1.0, 0.1, 0.6) == pytest.approx(
        green_ball(P_HALF, ball, 0.1, 0.6), rel=1e-14)


@pytest.mark.parametrize("alpha", [0.5, 0.75, 1.0])
def test_green_1d_dx_matches_finite_difference(alpha):
    p = StableParams(1, alpha)
    h = 1e-6
    for (x, y) in [(0.0, 0.3), (0.2, 0.6), (-0.3, 0.4)]:
        fd = (green_1d(p, 1.0, x + h, y) - green_1d(p, 1.0, x - h, y)) / (2 * h)
        assert green_1d_dx(p, 1.0, x, y) == pytest.approx(fd, rel=1e-6)
