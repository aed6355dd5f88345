"""Feynman-Kac functionals of the killed stable process.

The central objects are the gauge ``u_D(x) = E^x exp(int_0^tau_D q(X_s) ds)``
and regular q-harmonic extensions ``u(x) = E^x[e_q(tau_D) f(X_tau_D)]``.
Both are estimated by one vectorized path engine that

* simulates many starts simultaneously from a list of offset points while
  sharing a single Brownian/subordinator increment stream (common random
  numbers, which makes finite differences of Monte Carlo values usable),
* accumulates ``int q(X_s) ds`` by the trapezoid rule on the time grid,
* extends the horizon by doubling when paths have not exited, up to a cap,
  and reports the surviving fraction as truncation bias,
* records capped gauge means after each doubling as the empirical
  gaugeability diagnostic (stable versus divergent).

The same engine accumulates plain path integrals for the Green operator.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate
from scipy.interpolate import CubicSpline

from .domains import Domain, IntervalDomain, BallDomain, require_interval
from .errors import (
    NoiseDominatedError,
    OutOfDomainError,
    TailModelMissingError,
    UnsupportedQuadratureError,
    UnsupportedRegimeError,
)
from .kernels import green_1d
from .params import BallSpec, StableParams
from .potentials import BoundaryData, PotentialSpec
from .sampling import McEstimate, sample_subordinator_increment, spawn_seeds


# ---------------------------------------------------------------------------
# batch engine


@dataclass
class FKDiagnostics:
    horizons: list
    capped_means: list
    truncated_fraction: float
    stable: bool

    def to_dict(self) -> dict:
        return {
            "horizons": list(self.horizons),
            "capped_means": list(self.capped_means),
            "truncated_fraction": self.truncated_fraction,
            "stable": self.stable,
        }


@dataclass
class FKBatch:
    values: np.ndarray          # (n, K) per-path functional values
    diagnostics: FKDiagnostics
    points: list


def _as_point_list(points, d):
    out = []
    for pt in points:
        if d == 1:
            out.append(float(np.atleast_1d(np.asarray(pt, dtype=float))[0]))
        else:
            out.append(np.asarray(pt, dtype=float))
    return out


def _fk_chunk(p: StableParams, dom: Domain, q: Callable, points, n: int, dt: float,
              seed: int, t_max: float, max_doublings: int, boundary, mode: str,
              diag_tol: float):
    rng = np.random.default_rng(seed)
    K = len(points)
    d = p.d
    if d == 1:
        offs = np.asarray(points, dtype=float)[None, :]          # (1, K)
        pos = np.repeat(offs, n, axis=0)                          # (n, K)
    else:
        offs = np.stack(points)[None, :, :]                       # (1, K, d)
        pos = np.repeat(offs, n, axis=0)                          # (n, K, d)
    alive = np.ones((n, K), dtype=bool)
    acc = np.zeros((n, K))
    val = np.zeros((n, K))
    qold = q(pos)
    rows = np.arange(n)

    horizons, capped = [], []
    total_steps_done = 0
    a_half = p.alpha_half

    for epoch in range(max_doublings + 1):
        horizon = t_max * 2.0**epoch
        budget = int(round(horizon / dt)) - total_steps_done
        for _ in range(budget):
            m = rows.size
            if m == 0:
                break
            eta = sample_subordinator_increment(a_half, dt, rng, size=m)
            if d == 1:
                step = np.sqrt(2.0 * eta)[:, None] * rng.standard_normal((m, K))
            else:
                step = np.sqrt(2.0 * eta)[:, None, None] * rng.standard_normal((m, K, d))
            sub_pos = pos[rows] + step
            pos[rows] = sub_pos
            qnew = q(sub_pos)
            sub_alive = alive[rows]
            acc_rows = acc[rows]
            acc_rows[sub_alive] += 0.5 * dt * (qold[rows] + qnew)[sub_alive]
            acc[rows] = acc_rows
            qold[rows] = qnew
            inside = np.asarray(dom.contains(sub_pos)).reshape(m, K)
            exited = sub_alive & ~inside
            if exited.any():
                rr, cc = np.nonzero(exited)
                gidx = rows[rr]
                a_val = acc[gidx, cc]
                if mode == "exp":
                    v = np.exp(a_val)
                    if boundary is not None:
                        bpts = pos[gidx, cc] if d == 1 else pos[gidx, cc, :]
                        v = v * np.asarray(boundary(bpts), dtype=float)
                else:
                    v = a_val
                    if boundary is not None:
                        bpts = pos[gidx, cc] if d == 1 else pos[gidx, cc, :]
                        v = v + np.asarray(boundary(bpts), dtype=float)
                val[gidx, cc] = v
                alive[gidx, cc] = False
            still = alive[rows].any(axis=1)
            rows = rows[still]
        total_steps_done = int(round(horizon / dt))
        # capped gauge means: acc is frozen at exit, running for survivors,
        # so exp(acc) is exactly the gauge functional capped at this horizon
        if mode == "exp":
            capped_vals = np.exp(np.minimum(acc, 700.0))
        else:
            capped_vals = acc
        horizons.append(horizon)
        capped.append(float(capped_vals.mean()))
        if rows.size == 0:
            break

    truncated = alive.any(axis=1).mean()
    if alive.any():
        rr, cc = np.nonzero(alive)
        if mode == "exp":
            val[rr, cc] = np.exp(acc[rr, cc]) if boundary is None else 0.0
        else:
            val[rr, cc] = acc[rr, cc]
    if len(capped) >= 2 and capped[-1] > 0:
        rel = abs(capped[-1] - capped[-2]) / abs(capped[-1])
        stable = rel <= diag_tol
    else:
        stable = True
    diag = FKDiagnostics(horizons, capped, float(truncated), bool(stable))
    return val, diag


def fk_batch(p: StableParams, dom: Domain, q, points, n: int, dt: float, seed: int,
             t_max: float = 8.0, max_doublings: int = 5, boundary=None,
             mode: str = "exp", workers: int = 1, diag_tol: float = 0.02) -> FKBatch:
    """Common-random-number Feynman-Kac batch over a list of start points.

    mode "exp":      value = exp(int q) * f(X_exit)   (f = 1 when boundary None)
    mode "integral": value = int q  + f(X_exit)       (f = 0 when boundary None)
    """
    if not dom.bounded:
        raise ValueError("Feynman-Kac estimation requires a bounded domain")
    pts = _as_point_list(points, p.d)
    for pt in pts:
        if not bool(np.asarray(dom.contains(np.asarray(pt)))):
            raise OutOfDomainError(f"start point {pt} lies outside the domain")
    qf = q if callable(q) else q.func
    if workers <= 1:
        val, diag = _fk_chunk(p, dom, qf, pts, n, dt, seed, t_max, max_doublings,
                              boundary, mode, diag_tol)
        return FKBatch(val, diag, pts)
    seeds = spawn_seeds(seed, workers)
    sizes = [n // workers + (1 if i < n % workers else 0) for i in range(workers)]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        futs = [
            ex.submit(_fk_chunk, p, dom, qf, pts, sizes[i], dt, seeds[i], t_max,
                      max_doublings, boundary, mode, diag_tol)
            for i in range(workers)
        ]
        parts = [f.result() for f in futs]
    val = np.vstack([v for v, _ in parts])
    # reduce diagnostics over workers: average capped means, AND stability
    horizons = max((d.horizons for _, d in parts), key=len)
    capped = [
        float(np.mean([d.capped_means[j] for _, d in parts if j < len(d.capped_means)]))
        for j in range(len(horizons))
    ]
    diag = FKDiagnostics(
        horizons, capped,
        float(np.mean([d.truncated_fraction for _, d in parts])),
        bool(all(d.stable for _, d in parts)),
    )
    return FKBatch(val, diag, pts)


# ---------------------------------------------------------------------------
# gauge and q-harmonic evaluation


def gauge(p: StableParams, dom: Domain, q: PotentialSpec, x, n: int, dt: float,
          seed: int, t_max: float = 8.0, max_doublings: int = 5,
          workers: int = 1) -> McEstimate:
    """Monte Carlo gauge estimate with the doubling-horizon diagnostics in extra."""
    batch = fk_batch(p, dom, q, [x], n, dt, seed, t_max, max_doublings,
                     boundary=None, mode="exp", workers=workers)
    values = batch.values[:, 0]
    return McEstimate(float(values.mean()),
                      float(values.std(ddof=1) / math.sqrt(len(values))),
                      len(values), seed, batch.diagnostics.to_dict())


def q_harmonic_eval(p: StableParams, dom: Domain, q: PotentialSpec, f: BoundaryData,
                    x, n: int, dt: float, seed: int, t_max: float = 8.0,
                    max_doublings: int = 5, workers: int = 1) -> McEstimate:
    """Estimate of the regular q-harmonic extension u(x) = E^x[e_q(tau) f(X_tau)]."""
    batch = fk_batch(p, dom, q, [x], n, dt, seed, t_max, max_doublings,
                     boundary=f, mode="exp", workers=workers)
    values = batch.values[:, 0]
    return McEstimate(float(values.mean()),
                      float(values.std(ddof=1) / math.sqrt(len(values))),
                      len(values), seed, batch.diagnostics.to_dict())


class HarmonicEvaluator:
    """Deterministic-seed evaluator of u with paired (CRN) differences.

    ``diff(a, b)`` simulates both starts in one batch with shared increments,
    so the difference of the two estimates has far smaller variance than two
    independent runs; this is what makes Monte Carlo finite differences
    feasible.  Instances are immutable after construction and cache values
    per evaluation point.
    """

    def __init__(self, p: StableParams, dom: Domain, q: PotentialSpec,
                 f: BoundaryData | None, n: int, dt: float, seed: int,
                 t_max: float = 8.0, max_doublings: int = 5, workers: int = 1):
        self.p = p
        self.dom, self.q, self.f = dom, q, f
        self.n, self.dt, self.seed = n, dt, seed
        self.t_max, self.max_doublings = t_max, max_doublings
        self.workers = workers
        self._cache: dict = {}

    def _key(self, pts):
        return tuple(np.round(np.ravel(pts), 14))

    def batch(self, points) -> FKBatch:
        key = self._key(points)
        if key not in self._cache:
            self._cache[key] = fk_batch(
                self.p, self.dom, self.q, points, self.n, self.dt, self.seed,
                self.t_max, self.max_doublings, boundary=self.f, mode="exp",
                workers=self.workers,
            )
        return self._cache[key]

    def value(self, x) -> McEstimate:
        b = self.batch([x])
        v = b.values[:, 0]
        return McEstimate(float(v.mean()), float(v.std(ddof=1) / math.sqrt(len(v))),
                          len(v), self.seed, b.diagnostics.to_dict())

    def diff(self, a, b):
        """(mean, stderr) of u(a) - u(b) from one joint CRN batch."""
        batch = self.batch([a, b])
        dvals = batch.values[:, 0] - batch.values[:, 1]
        return float(dvals.mean()), float(dvals.std(ddof=1) / math.sqrt(len(dvals)))


class DeterministicEvaluator:
    """Adapter giving closed-form functions the evaluator diff protocol."""

    def __init__(self, func):
        self.func = func

    def value(self, x) -> McEstimate:
        return McEstimate(float(self.func(x)), 0.0, 2, 0)

    def diff(self, a, b):
        return float(self.func(a)) - float(self.func(b)), 0.0


# ---------------------------------------------------------------------------
# Green operator


def green_operator_apply(p: StableParams, dom: Domain, g, x, method: str = "quadrature",
                         n: int = 50_000, dt: float = 0.002, seed: int = 0,
                         t_max: float = 8.0, workers: int = 1):
    """G_D g(x): expected path integral of g before exit.

    ``quadrature`` integrates the closed-form interval kernel against g
    (d = 1, alpha <= 1); ``mc`` accumulates g along killed paths and returns
    an McEstimate.
    """
    if method == "quadrature":
        if p.d != 1:
            raise UnsupportedQuadratureError("closed-form quadrature requires d = 1")
        if isinstance(dom, IntervalDomain):
            c, r = dom.midpoint, dom.half_length
        elif isinstance(dom, BallDomain) and dom.d == 1:
            c, r = float(dom.ball.center[0]), dom.ball.radius
        else:
            raise UnsupportedQuadratureError(
                f"no closed-form Green kernel for domain kind '{dom.kind}'"
            )
        xf = float(np.atleast_1d(np.asarray(x, dtype=float))[0])
        integrand = lambda y: green_1d(p, r, xf, y, center=c) * float(g(np.asarray(y)))
        val, _ = integrate.quad(integrand, c - r, c + r, points=[xf], limit=300)
        return val
    if method == "mc":
        batch = fk_batch(p, dom, g, [x], n, dt, seed, t_max, max_doublings=5,
                         boundary=None, mode="integral", workers=workers)
        v = batch.values[:, 0]
        return McEstimate(float(v.mean()), float(v.std(ddof=1) / math.sqrt(len(v))),
                          len(v), seed, batch.diagnostics.to_dict())
    raise ValueError(f"unknown method '{method}'")


def representation_residual(p: StableParams, dom: Domain, q: PotentialSpec, u_eval,
                            ball: BallSpec, x, n: int, dt: float, seed: int,
                            t_max: float = 8.0) -> McEstimate:
    """Residual u(x) - E^x u(X_tau_B) - G_B(q u)(x) for a ball inside the domain.

    ``u_eval`` must be a vectorized callable defined on all of R^d (exit
    positions land outside the ball by a jump).  Zero within error for
    genuinely q-harmonic u.
    """
    center = ball.center if p.d > 1 else float(ball.center[0])
    if float(np.asarray(dom.distance_to_boundary(np.asarray(center)))) <= ball.radius:
        raise OutOfDomainError("closure of the ball must lie inside the domain")
    qu = lambda y: np.asarray(q(y), dtype=float) * np.asarray(u_eval(y), dtype=float)
    batch = fk_batch(p, BallDomain(ball), qu, [x], n, dt, seed, t_max,
                     max_doublings=5, boundary=u_eval, mode="integral")
    v = batch.values[:, 0]
    xarr = np.asarray([x]) if p.d == 1 else np.asarray(x, dtype=float)[None, :]
    ux = float(np.asarray(u_eval(xarr if p.d > 1 else np.asarray(float(x))), dtype=float))
    resid = ux - v
    return McEstimate(float(resid.mean()),
                      float(resid.std(ddof=1) / math.sqrt(len(resid))),
                      len(resid), seed, batch.diagnostics.to_dict())


# ---------------------------------------------------------------------------
# finite-difference gradients


@dataclass
class GradientEstimate:
    gradient: np.ndarray
    error_estimate: np.ndarray   # Richardson estimate from the h vs h/2 stencils
    stderr: np.ndarray
    h: float


def gradient_fd(u_eval, x, h: float, scheme: str = "central",
                noise_factor: float = 5.0) -> GradientEstimate:
    """Central finite-difference gradient with a step-halving error estimate.

    ``u_eval`` is either a plain callable or an object with
    ``diff(a, b) -> (mean, stderr)`` evaluated under common random numbers.
    Raises NoiseDominatedError when a difference is smaller than
    ``noise_factor`` times its standard error.
    """
    if scheme != "central":
        raise ValueError("only the central scheme is implemented")
    if callable(u_eval) and not hasattr(u_eval, "diff"):
        u_eval = DeterministicEvaluator(u_eval)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    d = x.size
    grad = np.empty(d)
    err = np.empty(d)
    se = np.empty(d)
    for i in range(d):
        e = np.zeros(d)
        e[i] = 1.0

        def shifted(step):
            pt = x + step * e
            return pt if d > 1 else float(pt[0])

        d1, s1 = u_eval.diff(shifted(h), shifted(-h))
        d2, s2 = u_eval.diff(shifted(h / 2.0), shifted(-h / 2.0))
        for dd, ss in ((d1, s1), (d2, s2)):
            if ss > 0.0 and abs(dd) < noise_factor * ss:
                raise NoiseDominatedError(
                    f"difference {dd:.3e} below {noise_factor} x stderr {ss:.3e}"
                )
        D1 = d1 / (2.0 * h)
        D2 = d2 / h
        grad[i] = D2
        err[i] = abs(D2 - D1) / 3.0
        se[i] = s2 / h
    return GradientEstimate(grad, err, se, h)


# ---------------------------------------------------------------------------
# pointwise fractional Laplacian of a grid function


@dataclass
class GridFunction1D:
    """Sampled function on an interval with a declared exterior model.

    ``far_field`` is "zero", a constant, or a callable; evaluation inside
    uses cubic-spline (default) or linear interpolation.
    """

    nodes: np.ndarray
    values: np.ndarray
    far_field: object = None
    interpolation: str = "cubic"
    _spline: object = field(default=None, repr=False)

    def __post_init__(self):
        self.nodes = np.asarray(self.nodes, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.interpolation == "cubic":
            self._spline = CubicSpline(self.nodes, self.values)
        elif self.interpolation != "linear":
            raise ValueError("interpolation must be 'cubic' or 'linear'")

    @property
    def a(self) -> float:
        return float(self.nodes[0])

    @property
    def b(self) -> float:
        return float(self.nodes[-1])

    @property
    def spacing(self) -> float:
        return float(np.min(np.diff(self.nodes)))

    def interior(self, y):
        y = np.asarray(y, dtype=float)
        if self.interpolation == "cubic":
            return self._spline(y)
        return np.interp(y, self.nodes, self.values)

    def exterior(self, y):
        y = np.asarray(y, dtype=float)
        if self.far_field is None:
            raise TailModelMissingError("grid function has no declared exterior model")
        if isinstance(self.far_field, str) and self.far_field == "zero":
            return np.zeros_like(y)
        if callable(self.far_field):
            return np.asarray(self.far_field(y), dtype=float)
        return np.full_like(y, float(self.far_field))

    def __call__(self, y):
        y = np.asarray(y, dtype=float)
        inside = (y >= self.a) & (y <= self.b)
        out = np.empty_like(y, dtype=float)
        out[inside] = self.interior(y[inside])
        if (~inside).any():
            out[~inside] = self.exterior(y[~inside])
        return out


def frac_laplacian_pointwise(p: StableParams, u: GridFunction1D, x: float,
                             eps_split: float | None = None) -> float:
    """Principal-value fractional Laplacian of a grid function at x (d = 1).

    The integral is split at radius ``eps_split`` (default: two grid cells).
    Inside the split the locally linear model of u contributes zero by odd
    symmetry; outside, the interpolant is integrated adaptively and the
    declared far-field model supplies the exterior contribution.
    """
    if p.d != 1:
        raise UnsupportedRegimeError("pointwise fractional Laplacian implemented for d = 1")
    if u.far_field is None:
        raise TailModelMissingError("grid function has no declared exterior model")
    x = float(x)
    a, b, alpha = u.a, u.b, p.alpha
    if not a < x < b:
        raise OutOfDomainError("evaluation point must lie inside the grid")
    eps = eps_split if eps_split is not None else 2.0 * u.spacing
    u0 = float(u.interior(x))

    def integrand(y):
        return (u.interior(y) - u0) * abs(y - x) ** (-1.0 - alpha)

    total = 0.0
    if x - eps > a:
        total += integrate.quad(integrand, a, x - eps, limit=400)[0]
    if x + eps < b:
        total += integrate.quad(integrand, x + eps, b, limit=400)[0]

    if isinstance(u.far_field, str) and u.far_field == "zero":
        total += -u0 * ((x - a) ** -alpha + (b - x) ** -alpha) / alpha
    elif callable(u.far_field):
        tail = lambda y: (float(u.exterior(np.asarray(y))) - u0) * abs(y - x) ** (-1.0 - alpha)
        total += integrate.quad(tail, -np.inf, a, limit=400)[0]
        total += integrate.quad(tail, b, np.inf, limit=400)[0]
    else:
        c = float(u.far_field)
        total += (c - u0) * ((x - a) ** -alpha + (b - x) ** -alpha) / alpha
    return p.A_d_neg_alpha * total
