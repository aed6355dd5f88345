"""Closed-form kernels of the symmetric stable process.

Implemented surfaces:

* Riesz potential kernel (transient case d > alpha) and the compensated
  logarithmic kernel for d = alpha = 1.
* Green function of an interval for d = alpha = 1,
  ``G(x, y) = log(sqrt(w) + sqrt(1 + w)) / pi`` with
  ``w = (1 - x^2)(1 - y^2)/(x - y)^2`` on the unit interval.
* Green function of a ball for d > alpha,
  ``G(x, y) = B(d, alpha) |x - y|^(alpha - d) * int_0^w s^(alpha/2 - 1) (1 + s)^(-d/2) ds``
  with the same Moebius-invariant ``w``.  The incomplete integral is an
  incomplete Beta function and is evaluated through ``scipy.special.betainc``.
* Free-space Green difference across a reflection hyperplane.
* Ball Poisson kernel (density of the exit position) and the expected exit
  time ``C(d, alpha) (r^2 - |x - c|^2)^(alpha/2)``.

Points are scalars (d = 1) or arrays of shape ``(d,)``.  All functions are
pure; coincident-point inputs raise instead of returning infinity so that
callers deal with the singular diagonal explicitly.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import betainc, beta as beta_function

from .errors import (
    CoincidentPointsError,
    OutOfDomainError,
    UnsupportedRegimeError,
    WrongSideError,
)
from .params import (
    BallSpec,
    ReflectionFrame,
    StableParams,
    exit_time_constant,
    poisson_constant,
    riesz_constant,
)

EPS_COINCIDENT = 1e-300


def _dist(x, y) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return float(np.linalg.norm(np.atleast_1d(x - y)))


def riesz_kernel(p: StableParams, x, y) -> float:
    """Potential kernel: A(d,alpha)|y-x|^(alpha-d), or log(1/|y-x|)/pi at d=alpha=1."""
    rho = _dist(x, y)
    if rho <= EPS_COINCIDENT:
        raise CoincidentPointsError("riesz_kernel is singular at x = y")
    if p.d > p.alpha:
        return p.A_d_alpha * rho ** (p.alpha - p.d)
    if p.d == 1 and p.alpha == 1.0:
        return math.log(1.0 / rho) / math.pi
    raise UnsupportedRegimeError(
        f"no kernel for d={p.d} <= alpha={p.alpha} other than d = alpha = 1"
    )


def _w_factor(rho2: float, sx: float, sy: float) -> float:
    """w = sx*sy/rho2 where sx = r^2 - |x-c|^2 after centering, rescaled to r=1."""
    return sx * sy / rho2


def ball_green_constant(d: int, alpha: float) -> float:
    """B(d, alpha) = Gamma(d/2) / (2^alpha pi^(d/2) Gamma(alpha/2)^2)."""
    return math.gamma(d / 2.0) / (
        2.0**alpha * math.pi ** (d / 2.0) * math.gamma(alpha / 2.0) ** 2
    )


def green_interval(r: float, x: float, y: float) -> float:
    """Green function of (-r, r) for d = alpha = 1 (Cauchy process).

    Scale invariant: ``G_(-r,r)(x, y) = G_(-1,1)(x/r, y/r)``.  Returns 0 when
    either argument lies outside the open interval.
    """
    if r <= 0:
        raise ValueError("interval half-length must be positive")
    x, y = float(x), float(y)
    if abs(x - y) <= EPS_COINCIDENT * max(1.0, r):
        raise CoincidentPointsError("green_interval is singular at x = y")
    if abs(x) >= r or abs(y) >= r:
        return 0.0
    u, v = x / r, y / r
    w = (1.0 - u * u) * (1.0 - v * v) / (u - v) ** 2
    return math.log(math.sqrt(w) + math.sqrt(1.0 + w)) / math.pi


def green_ball(p: StableParams, b: BallSpec, x, y) -> float:
    """Green function of the ball ``b`` for d > alpha.

    Satisfies ``G_B(0,r)(x, y) = r^(alpha-d) G_B(0,1)(x/r, y/r)`` and is
    dominated by the Riesz kernel.
    """
    if not p.d > p.alpha:
        raise UnsupportedRegimeError("green_ball requires d > alpha; use green_interval at d=alpha=1")
    if b.d != p.d:
        raise ValueError("ball dimension does not match StableParams")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    rho = float(np.linalg.norm(x - y))
    if rho <= EPS_COINCIDENT * max(1.0, b.radius):
        raise CoincidentPointsError("green_ball is singular at x = y")
    u = (x - b.center) / b.radius
    v = (y - b.center) / b.radius
    su = 1.0 - float(u @ u)
    sv = 1.0 - float(v @ v)
    if su <= 0.0 or sv <= 0.0:
        return 0.0
    rho_unit = rho / b.radius
    w = _w_factor(rho_unit * rho_unit, su, sv)
    a_, b_ = p.alpha / 2.0, (p.d - p.alpha) / 2.0
    incomplete = beta_function(a_, b_) * betainc(a_, b_, w / (1.0 + w))
    return (
        ball_green_constant(p.d, p.alpha)
        * rho ** (p.alpha - p.d)
        * incomplete
    )


def green_1d(p: StableParams, r: float, x: float, y: float, center: float = 0.0) -> float:
    """Interval Green function on (center-r, center+r) for d = 1, alpha <= 1."""
    if p.d != 1:
        raise UnsupportedRegimeError("green_1d is the one-dimensional dispatcher")
    if p.alpha == 1.0:
        return green_interval(r, x - center, y - center)
    return green_ball(p, BallSpec(np.array([center]), r), x, y)


def green_1d_dx(p: StableParams, r: float, x: float, y: float, center: float = 0.0) -> float:
    """d/dx of the interval Green function, first argument, d = 1.

    Analytic differentiation of the closed forms; singular like
    |x - y|^(alpha - 2) near the diagonal.
    """
    if p.d != 1:
        raise UnsupportedRegimeError("green_1d_dx requires d = 1")
    xs, ys = float(x) - center, float(y) - center
    if abs(xs) >= r or abs(ys) >= r:
        return 0.0
    if abs(xs - ys) <= 1e-14 * max(1.0, r):
        raise CoincidentPointsError("derivative singular at x = y")
    sx = r * r - xs * xs
    sy = r * r - ys * ys
    diff = xs - ys
    w = sx * sy / (r * r * diff * diff)
    dw_dx = -2.0 * sy * (r * r - xs * ys) / (r * r * diff**3)
    if p.alpha == 1.0:
        # G = arcsinh(sqrt(w))/pi
        return dw_dx / (2.0 * math.pi * math.sqrt(w * (1.0 + w)))
    a = p.alpha
    B = ball_green_constant(1, a)
    F = beta_function(a / 2.0, (1.0 - a) / 2.0) * betainc(
        a / 2.0, (1.0 - a) / 2.0, w / (1.0 + w)
    )
    Fprime = w ** (a / 2.0 - 1.0) * (1.0 + w) ** (-0.5)
    rho = abs(diff)
    term1 = (a - 1.0) * rho ** (a - 2.0) * math.copysign(1.0, diff) * F
    term2 = rho ** (a - 1.0) * Fprime * dw_dx
    return B * (term1 + term2)


def green_halfspace_diff(p: StableParams, frame: ReflectionFrame, x, y) -> float:
    """G_H difference A(d,alpha)(|xh-y|^(d-a) - |x-y|^(d-a)) / (|x-y|^(d-a) |xh-y|^(d-a)).

    Equals the free-space Green function at (x, y) minus its value at the
    reflected source; nonnegative on the closed positive side and bounded by
    ``(2 v (2d-2a)) A(d,a) |x-xh| / (|x-y|^(d-a) |xh-y|)``.
    """
    if not p.d > p.alpha:
        raise UnsupportedRegimeError("green_halfspace_diff requires d > alpha")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if frame.signed_distance(x if x.size > 1 else x[0]) < 0 or frame.signed_distance(
        y if y.size > 1 else y[0]
    ) < 0:
        raise WrongSideError("x and y must not lie on the negative side of the frame")
    xh = frame.reflect(x)
    rho = float(np.linalg.norm(x - y))
    rho_h = float(np.linalg.norm(xh - y))
    if rho <= EPS_COINCIDENT:
        raise CoincidentPointsError("green_halfspace_diff is singular at x = y")
    e = p.d - p.alpha
    return p.A_d_alpha * (rho_h**e - rho**e) / (rho**e * rho_h**e)


def poisson_kernel_ball(p: StableParams, b: BallSpec, x, z) -> float:
    """Density at z of the exit position from the ball for a start at x.

    ``C(d,alpha) ((r^2 - |x-c|^2) / (|z-c|^2 - r^2))^(alpha/2) |x-z|^(-d)``;
    integrates to one over the complement (no boundary hitting for alpha < 2).
    """
    if b.d != p.d:
        raise ValueError("ball dimension does not match StableParams")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    z = np.atleast_1d(np.asarray(z, dtype=float))
    sx = b.radius**2 - float(np.sum((x - b.center) ** 2))
    sz = float(np.sum((z - b.center) ** 2)) - b.radius**2
    if sx <= 0.0:
        raise OutOfDomainError("x must lie inside the ball")
    if sz <= 0.0:
        raise OutOfDomainError("z must lie in the interior of the complement")
    rho = float(np.linalg.norm(x - z))
    return poisson_constant(p.d, p.alpha) * (sx / sz) ** (p.alpha / 2.0) * rho ** (-p.d)


def expected_exit_time_ball(p: StableParams, b: BallSpec, x) -> float:
    """E^x tau_B = C(d, alpha) (r^2 - |x - c|^2)^(alpha/2); zero outside."""
    if b.d != p.d:
        raise ValueError("ball dimension does not match StableParams")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    s = b.radius**2 - float(np.sum((x - b.center) ** 2))
    if s <= 0.0:
        return 0.0
    return exit_time_constant(p.d, p.alpha) * s ** (p.alpha / 2.0)


def halfspace_diff_bound(p: StableParams, frame: ReflectionFrame, x, y) -> float:
    """Explicit upper bound c |x - xh| / (|x-y|^(d-a) |xh-y|), c = (2 v (2d-2a)) A(d,a)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    xh = frame.reflect(x)
    rho = float(np.linalg.norm(x - y))
    rho_h = float(np.linalg.norm(xh - y))
    c = max(2.0, 2.0 * (p.d - p.alpha)) * p.A_d_alpha
    return c * float(np.linalg.norm(x - xh)) / (rho ** (p.d - p.alpha) * rho_h)
