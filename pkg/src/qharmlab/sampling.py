"""Simulation of the symmetric stable process as subordinated Brownian motion.

Construction: ``X_t = B(eta_t)`` where ``eta`` is the one-sided stable
subordinator with Laplace transform ``E exp(-s eta_t) = exp(-t s^(alpha/2))``
and ``B`` is Brownian motion with transition density
``(4 pi t)^(-d/2) exp(-|x-y|^2 / (4t))`` (variance 2t per coordinate), so the
marginals have characteristic function ``exp(-t |xi|^alpha)`` exactly.

Subordinator increments use the Kanter / Chambers-Mallows-Stuck exact
transformation; the only discretization anywhere is that exits, killing, and
path functionals are resolved on the time grid ``t_k = k dt``.

The reflection coupling mirrors the Brownian driver through a hyperplane
until its first crossing and lets the two drivers coincide afterwards.
Crossings between grid observations are detected by sign change plus one
bisection level on the Brownian bridge.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .domains import Domain, IntervalDomain
from .errors import AsymmetricDomainError, InvalidIndexError, OutOfDomainError, WrongSideError
from .params import BallSpec, ReflectionFrame, StableParams


# ---------------------------------------------------------------------------
# one-sided stable increments


def standard_positive_stable(alpha_half: float, size, rng) -> np.ndarray:
    """Draws with Laplace transform exp(-s^alpha_half) (Kanter's form)."""
    U = rng.uniform(0.0, math.pi, size)
    W = rng.standard_exponential(size)
    a = alpha_half
    return (np.sin(a * U) / np.sin(U) ** (1.0 / a)) * (np.sin((1.0 - a) * U) / W) ** (
        (1.0 - a) / a
    )


def sample_subordinator_increment(alpha_half: float, dt: float, rng, size=None):
    """One increment (or ``size`` of them) of the alpha/2-stable subordinator.

    Self-similar: an increment over dt equals ``dt^(1/alpha_half)`` times a
    standard draw, so ``E exp(-s eta_dt) = exp(-dt s^alpha_half)``.
    """
    if not 0.0 < alpha_half < 1.0:
        raise InvalidIndexError(f"alpha/2 must lie in (0, 1), got {alpha_half}")
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    scale = dt ** (1.0 / alpha_half)
    draws = scale * standard_positive_stable(alpha_half, size if size is not None else 1, rng)
    return draws if size is not None else float(draws[0])


# ---------------------------------------------------------------------------
# path containers


@dataclass
class SubordinatorRecord:
    times: np.ndarray    # t_0 = 0 < t_1 < ... < t_n
    values: np.ndarray   # eta(t_k), nondecreasing, eta(0) = 0

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0])


@dataclass
class ExitInfo:
    exited: bool
    index: int | None
    time: float | None
    position: np.ndarray | float | None


@dataclass
class PathSample:
    subordinator: SubordinatorRecord
    points: np.ndarray          # shape (n+1,) for d = 1, else (n+1, d)
    x0: np.ndarray | float
    exit: ExitInfo | None = None

    @property
    def n_steps(self) -> int:
        return len(self.subordinator.times) - 1


@dataclass
class CoupledPair:
    primary: PathSample
    mirrored: PathSample
    hitting_time: float         # Brownian-time estimate of the driver crossing
    switch_index: int | None    # first grid index at which the paths coincide


@dataclass
class McEstimate:
    """Monte Carlo estimate; stderr is the sample standard deviation / sqrt(n)."""

    mean: float
    stderr: float
    n: int
    seed: int
    extra: dict = field(default_factory=dict)

    def to_row(self, row_id: str) -> dict:
        return {"id": row_id, "value": self.mean, "stderr": self.stderr,
                "n": self.n, "seed": self.seed}


def mc_estimate(values: np.ndarray, seed: int, **extra) -> McEstimate:
    values = np.asarray(values, dtype=float)
    n = values.size
    if n < 2:
        raise ValueError("McEstimate requires n >= 2")
    return McEstimate(float(values.mean()), float(values.std(ddof=1) / math.sqrt(n)),
                      n, seed, dict(extra))


# ---------------------------------------------------------------------------
# single-path sampling


def sample_path(p: StableParams, x0, dt: float, t_max: float, rng) -> PathSample:
    """One trajectory observed on the grid t_k = k dt up to t_max."""
    if dt > t_max:
        raise ValueError("dt must not exceed t_max")
    n = int(round(t_max / dt))
    eta_inc = sample_subordinator_increment(p.alpha_half, dt, rng, size=n)
    eta = np.concatenate(([0.0], np.cumsum(eta_inc)))
    times = dt * np.arange(n + 1)
    if p.d == 1:
        x0v = float(np.atleast_1d(np.asarray(x0, dtype=float))[0])
        steps = np.sqrt(2.0 * eta_inc) * rng.standard_normal(n)
        pts = x0v + np.concatenate(([0.0], np.cumsum(steps)))
    else:
        x0v = np.asarray(x0, dtype=float)
        steps = np.sqrt(2.0 * eta_inc)[:, None] * rng.standard_normal((n, p.d))
        pts = x0v + np.vstack([np.zeros(p.d), np.cumsum(steps, axis=0)])
    return PathSample(SubordinatorRecord(times, eta), pts, x0v)


def bridge_midpoint(a, b, elapsed, rng):
    """Midpoint of the driving Brownian bridge (variance 2*elapsed across it)."""
    return 0.5 * (a + b) + np.sqrt(0.5 * np.asarray(elapsed)) * rng.standard_normal(np.shape(a))


def sample_coupled_pair(p: StableParams, frame: ReflectionFrame, x0, dt: float,
                        t_max: float, rng) -> CoupledPair:
    """Reflection-coupled pair from x0 and its mirror image.

    The mirrored driver is the exact reflection of the primary driver until
    the primary's frame coordinate first crosses the hyperplane, after which
    the two drivers coincide.  Crossing between observation times is resolved
    by sign change plus one Brownian-bridge midpoint draw; both paths share
    one subordinator.
    """
    x0v = np.atleast_1d(np.asarray(x0, dtype=float))
    if frame.signed_distance(x0v if x0v.size > 1 else x0v[0]) < 0.0:
        raise WrongSideError("start point must not lie on the negative side")
    primary = sample_path(p, x0v if p.d > 1 else x0v[0], dt, t_max, rng)
    eta = primary.subordinator.values
    pts = np.atleast_2d(primary.points.reshape(len(eta), -1))
    coord = pts[:, frame.axis] - frame.offset

    switch_index = None
    hitting_time = math.inf
    for k in range(1, len(coord)):
        if coord[k - 1] == 0.0:
            switch_index, hitting_time = k - 1, float(eta[k - 1])
            break
        elapsed = eta[k] - eta[k - 1]
        mid = float(bridge_midpoint(coord[k - 1], coord[k], elapsed, rng))
        first_half = np.sign(mid) != np.sign(coord[k - 1])
        if first_half or np.sign(coord[k]) != np.sign(coord[k - 1]):
            # one bisection level: locate the crossing in half the bracket
            if first_half:
                hitting_time = float(eta[k - 1] + 0.25 * elapsed)
            else:
                hitting_time = float(eta[k - 1] + 0.75 * elapsed)
            switch_index = k
            break

    mirrored_pts = pts.copy()
    upto = switch_index if switch_index is not None else len(coord)
    mirrored_pts[:upto, frame.axis] = 2.0 * frame.offset - mirrored_pts[:upto, frame.axis]
    mirrored_pts = mirrored_pts[:, 0] if p.d == 1 else mirrored_pts
    x0m = frame.reflect(x0v if p.d > 1 else x0v[0])
    mirrored = PathSample(primary.subordinator, mirrored_pts, x0m)
    return CoupledPair(primary, mirrored, hitting_time, switch_index)


def first_exit(path: PathSample, dom: Domain):
    """First grid index at which the state leaves the domain (jump exit).

    No boundary interpolation is attempted: for alpha < 2 the path exits by a
    jump almost surely, and the recorded position is the first observed state
    outside.  Returns ExitInfo with ``exited=False`` when the horizon is
    reached inside.
    """
    inside = np.asarray(dom.contains(path.points))
    if not inside[0]:
        raise OutOfDomainError("path must start inside the domain")
    outside = np.nonzero(~inside)[0]
    if outside.size == 0:
        return ExitInfo(False, None, None, None)
    k = int(outside[0])
    return ExitInfo(True, k, float(path.subordinator.times[k]), path.points[k])


@dataclass
class ExitBatch:
    """Vectorized first-exit sample: grid exit times and jump-exit positions."""

    times: np.ndarray
    positions: np.ndarray
    exited: np.ndarray        # False where the step cap was reached inside
    n: int
    seed: int
    dt: float

    def mean_exit_time(self) -> McEstimate:
        t = self.times[self.exited]
        return mc_estimate(t, self.seed, exited_fraction=float(self.exited.mean()))


def sample_exit_batch(p: StableParams, dom: Domain, x0, n: int, dt: float,
                      seed: int, max_steps: int = 200_000) -> ExitBatch:
    """First-exit times/positions for n independent paths on the dt-grid."""
    rng = np.random.default_rng(seed)
    if p.d == 1:
        pos = np.full(n, float(np.atleast_1d(np.asarray(x0, dtype=float))[0]))
    else:
        pos = np.tile(np.asarray(x0, dtype=float), (n, 1))
    if not np.all(np.asarray(dom.contains(pos))):
        raise OutOfDomainError("x0 must lie inside the domain")
    times = np.full(n, np.nan)
    positions = np.empty_like(pos)
    exited = np.zeros(n, dtype=bool)
    idx = np.arange(n)
    step = 0
    while idx.size and step < max_steps:
        step += 1
        eta = sample_subordinator_increment(p.alpha_half, dt, rng, size=idx.size)
        if p.d == 1:
            pos[idx] = pos[idx] + np.sqrt(2.0 * eta) * rng.standard_normal(idx.size)
        else:
            pos[idx] = pos[idx] + np.sqrt(2.0 * eta)[:, None] * rng.standard_normal(
                (idx.size, p.d)
            )
        outside = ~np.asarray(dom.contains(pos[idx]))
        if outside.any():
            hit = idx[outside]
            times[hit] = step * dt
            positions[hit] = pos[hit]
            exited[hit] = True
            idx = idx[~outside]
    return ExitBatch(times, positions, exited, n, seed, dt)


# ---------------------------------------------------------------------------
# density estimators (d = 1)


@dataclass
class CellHistogram:
    """Cell masses of a subprobability measure with binomial standard errors."""

    edges: np.ndarray
    masses: np.ndarray
    stderrs: np.ndarray
    counts: np.ndarray
    n: int
    seed: int
    t: float
    unreliable: np.ndarray = None  # cells with fewer than 20 hits

    def __post_init__(self):
        if self.unreliable is None:
            self.unreliable = self.counts < 20

    @property
    def total_mass(self) -> float:
        return float(self.masses.sum())

    def to_rows(self, prefix: str = "cell"):
        return [
            {"id": f"{prefix}[{self.edges[i]:.6g},{self.edges[i+1]:.6g})",
             "value": float(self.masses[i]), "stderr": float(self.stderrs[i]),
             "n": self.n, "seed": self.seed}
            for i in range(len(self.masses))
        ]


def _require_d1(p: StableParams, op: str):
    if p.d != 1:
        from .errors import UnsupportedRegimeError

        raise UnsupportedRegimeError(f"{op} is implemented for d = 1")


def _hist_from_positions(edges, pos, alive, n, seed, t):
    ncells = len(edges) - 1
    idx = np.clip(np.searchsorted(edges, pos[alive], side="right") - 1, 0, ncells - 1)
    counts = np.bincount(idx, minlength=ncells).astype(float)
    masses = counts / n
    stderrs = np.sqrt(np.maximum(masses * (1.0 - masses), 0.0) / n)
    return CellHistogram(np.asarray(edges, dtype=float), masses, stderrs,
                         counts.astype(int), n, seed, t)


def estimate_killed_density(p: StableParams, dom: Domain, t: float, x0: float,
                            ncells: int, n: int, seed: int, dt: float) -> CellHistogram:
    """Histogram estimate of the killed transition density at time t (d = 1)."""
    _require_d1(p, "estimate_killed_density")
    if not bool(np.asarray(dom.contains(np.asarray(float(x0))))):
        raise OutOfDomainError("x0 must lie inside the domain")
    if not isinstance(dom, IntervalDomain):
        from .errors import UnsupportedRegimeError

        raise UnsupportedRegimeError("killed-density histograms require an interval domain")
    rng = np.random.default_rng(seed)
    steps = int(round(t / dt))
    pos = np.full(n, float(x0))
    alive = np.ones(n, dtype=bool)
    for _ in range(steps):
        eta = sample_subordinator_increment(p.alpha_half, dt, rng, size=n)
        pos = pos + np.sqrt(2.0 * eta) * rng.standard_normal(n)
        alive &= np.asarray(dom.contains(pos))
    edges = np.linspace(dom.a, dom.b, ncells + 1)
    return _hist_from_positions(edges, pos, alive, n, seed, t)


@dataclass
class ReflectedDensityResult:
    """Two routes to the reflected-difference density on the positive side.

    ``difference``/``difference_stderr``: per-cell coupled-pair estimate of
    p_D(t, x0, .) - p_D(t, x0_mirror, .).
    ``direct``: histogram of the subordinated killed Brownian motion, killed
    at the driver's hyperplane crossing and on leaving D_+.
    """

    primary: CellHistogram
    mirrored: CellHistogram
    edges: np.ndarray
    difference: np.ndarray
    difference_stderr: np.ndarray
    direct: CellHistogram
    positive_cells: np.ndarray


def estimate_reflected_killed_density(p: StableParams, dom: Domain,
                                      frame: ReflectionFrame, t: float, x0: float,
                                      ncells: int, n: int, seed: int, dt: float,
                                      mirror_shift: float = 0.0) -> ReflectedDensityResult:
    """Coupled-difference and direct estimators of the half-domain density (d = 1).

    ``mirror_shift`` displaces the mirrored start (negative control: breaks
    the reflection identity and must be detected by the comparison harness).
    """
    _require_d1(p, "estimate_reflected_killed_density")
    if not isinstance(dom, IntervalDomain):
        from .errors import UnsupportedRegimeError

        raise UnsupportedRegimeError("reflected-density estimation requires an interval domain")
    if not dom.is_symmetric(frame):
        raise AsymmetricDomainError("domain must be symmetric under the reflection frame")
    x0 = float(x0)
    if x0 - frame.offset < 0.0:
        raise WrongSideError("x0 must not lie on the negative side")
    rng = np.random.default_rng(seed)
    steps = int(round(t / dt))
    z = frame.offset
    x0m = 2.0 * z - x0 + mirror_shift

    # --- coupled pair (shared subordinator and driver) ---
    pos = np.full(n, x0)
    switched = np.zeros(n, dtype=bool)
    alive_p = np.ones(n, dtype=bool)
    alive_m = np.ones(n, dtype=bool)
    pure_reflection = mirror_shift != 0.0
    for _ in range(steps):
        eta = sample_subordinator_increment(p.alpha_half, dt, rng, size=n)
        prev = pos
        pos = pos + np.sqrt(2.0 * eta) * rng.standard_normal(n)
        if not pure_reflection:
            mid = bridge_midpoint(prev - z, pos - z, eta, rng)
            crossed = (np.sign(prev - z) != np.sign(pos - z)) | (
                np.sign(mid) != np.sign(prev - z)
            )
            switched |= crossed
            pos_m = np.where(switched, pos, 2.0 * z - pos)
        else:
            # broken-symmetry control: rigidly shifted reflected driver
            pos_m = (2.0 * z - pos) + mirror_shift
        alive_p &= np.asarray(dom.contains(pos))
        alive_m &= np.asarray(dom.contains(pos_m))

    edges = np.linspace(dom.a, dom.b, ncells + 1)
    hist_p = _hist_from_positions(edges, pos, alive_p, n, seed, t)
    hist_m = _hist_from_positions(edges, pos_m, alive_m, n, seed, t)

    idx_p = np.clip(np.searchsorted(edges, pos, side="right") - 1, 0, ncells - 1)
    idx_m = np.clip(np.searchsorted(edges, pos_m, side="right") - 1, 0, ncells - 1)
    diff = np.zeros(ncells)
    diff_var = np.zeros(ncells)
    for c in range(ncells):
        contrib = (alive_p & (idx_p == c)).astype(float) - (alive_m & (idx_m == c)).astype(float)
        diff[c] = contrib.mean()
        diff_var[c] = contrib.var(ddof=1) / n
    diff_stderr = np.sqrt(diff_var)

    # --- direct simulation of the subordinated killed Brownian motion ---
    pos_d = np.full(n, x0)
    alive_d = np.ones(n, dtype=bool)
    for _ in range(steps):
        eta = sample_subordinator_increment(p.alpha_half, dt, rng, size=n)
        prev = pos_d
        pos_d = pos_d + np.sqrt(2.0 * eta) * rng.standard_normal(n)
        mid = bridge_midpoint(prev - z, pos_d - z, eta, rng)
        hit = (np.sign(prev - z) != np.sign(pos_d - z)) | (np.sign(mid) != np.sign(prev - z))
        alive_d &= ~hit
        alive_d &= np.asarray(dom.contains(pos_d)) & (pos_d > z)
    hist_d = _hist_from_positions(edges, pos_d, alive_d, n, seed, t)

    positive = edges[:-1] >= z
    return ReflectedDensityResult(hist_p, hist_m, edges, diff, diff_stderr, hist_d, positive)


# ---------------------------------------------------------------------------
# exact ball-exit sampling


def sample_ball_exit_exact(p: StableParams, b: BallSpec, x, rng, size: int | None = None):
    """Exact draws from the ball exit-position law (Poisson kernel).

    From the center the radial part is ``r / sqrt(t)`` with
    ``t ~ Beta(alpha/2, 1 - alpha/2)`` and a uniform direction; a general
    start uses exact rejection against the central proposal with the bound
    ``P(x, z)/P(c, z) <= ((r^2-|x-c|^2)/r^2)^(alpha/2) (r/(r-|x-c|))^d``.
    """
    if b.d != p.d:
        raise ValueError("ball dimension does not match StableParams")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    ecc = float(np.linalg.norm(x - b.center))
    if ecc >= b.radius:
        raise OutOfDomainError("x must lie inside the ball")
    m = 1 if size is None else int(size)

    def draw_central(k):
        tt = rng.beta(p.alpha / 2.0, 1.0 - p.alpha / 2.0, k)
        rho = b.radius / np.sqrt(tt)
        if p.d == 1:
            sgn = np.where(rng.random(k) < 0.5, -1.0, 1.0)
            return b.center[0] + sgn * rho
        dirs = rng.standard_normal((k, p.d))
        dirs /= np.linalg.norm(dirs, axis=1)[:, None]
        return b.center + rho[:, None] * dirs

    if ecc == 0.0:
        out = draw_central(m)
        return out if size is not None else out[0]

    sx = b.radius**2 - ecc**2
    log_bound = (p.alpha / 2.0) * math.log(sx / b.radius**2) + p.d * math.log(
        b.radius / (b.radius - ecc)
    )
    out = np.empty(m) if p.d == 1 else np.empty((m, p.d))
    filled = 0
    while filled < m:
        k = max(2 * (m - filled), 64)
        z = draw_central(k)
        zc = z - (b.center[0] if p.d == 1 else b.center)
        rho_x = np.abs(z - x[0]) if p.d == 1 else np.linalg.norm(z - x, axis=1)
        rho_c = np.abs(zc) if p.d == 1 else np.linalg.norm(zc, axis=1)
        log_ratio = (p.alpha / 2.0) * math.log(sx / b.radius**2) + p.d * (
            np.log(rho_c) - np.log(rho_x)
        )
        accept = np.log(rng.random(k)) < log_ratio - log_bound
        take = min(int(accept.sum()), m - filled)
        sel = np.nonzero(accept)[0][:take]
        out[filled : filled + take] = z[sel]
        filled += take
    return out if size is not None else out[0]


# ---------------------------------------------------------------------------
# deterministic seed partitioning


def spawn_seeds(seed: int, workers: int) -> list[int]:
    """Counter-based partition of the seed space; deterministic per (seed, workers)."""
    ss = np.random.SeedSequence(seed)
    return [int(child.generate_state(1)[0]) for child in ss.spawn(workers)]
