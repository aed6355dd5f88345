import math

import numpy as np
import pytest
from scipy import integrate, stats

from qharmlab.domains import BallDomain, IntervalDomain, WholeSpace
from qharmlab.errors import AsymmetricDomainError, InvalidIndexError, OutOfDomainError, WrongSideError
from qharmlab.kernels import expected_exit_time_ball, poisson_kernel_ball
from qharmlab.params import BallSpec, ReflectionFrame, StableParams
from qharmlab.sampling import (
    CoupledPair,
    first_exit,
    estimate_killed_density,
    estimate_reflected_killed_density,
    mc_estimate,
    sample_ball_exit_exact,
    sample_coupled_pair,
    sample_exit_batch,
    sample_path,
    sample_subordinator_increment,
    spawn_seeds,
)

P_CAUCHY = StableParams(1, 1.0)
P_HALF = StableParams(1, 0.5)


# ---------------------------------------------------------------------------
# subordinator increments


@pytest.mark.parametrize("alpha", [0.5, 1.0])
def test_subordinator_laplace_transform(alpha):
    rng = np.random.default_rng(11)
    n = 100_000
    dt = 1.0
    draws = sample_subordinator_increment(alpha / 2, dt, rng, size=n)
    for s in (0.5, 1.0, 2.0):
        emp = np.exp(-s * draws)
        want = math.exp(-dt * s ** (alpha / 2))
        assert abs(emp.mean() - want) <= 3.0 * emp.std(ddof=1) / math.sqrt(n)


def test_subordinator_positivity_and_validation():
    rng = np.random.default_rng(1)
    draws = sample_subordinator_increment(0.25, 0.5, rng, size=1_000_000)
    assert np.all(draws >= 0.0)
    with pytest.raises(InvalidIndexError):
        sample_subordinator_increment(1.0, 0.5, rng)
    with pytest.raises(ValueError):
        sample_subordinator_increment(0.5, -1.0, rng)


def test_subordinator_self_similarity_ks():
    # increments over dt=2 match 2^(2/alpha)-scaled dt=1 increments
    alpha = 1.0
    rng = np.random.default_rng(2)
    n = 10_000
    a = sample_subordinator_increment(alpha / 2, 2.0, rng, size=n)
    b = 2.0 ** (2.0 / alpha) * sample_subordinator_increment(alpha / 2, 1.0, rng, size=n)
    stat, pval = stats.ks_2samp(a, b)
    assert pval > 0.01


# ---------------------------------------------------------------------------
# path sampling


@pytest.mark.parametrize("alpha", [0.5, 1.0])
def test_path_characteristic_function(alpha):
    p = StableParams(1, alpha)
    rng = np.random.default_rng(5)
    n = 100_000
    xs = np.array([sample_path(p, 0.0, 0.25, 1.0, rng).points[-1] for _ in range(0)])
    # vectorized equivalent: sum of 4 steps built directly
    steps = 4
    eta = sample_subordinator_increment(alpha / 2, 0.25, rng, size=(n, steps))
    x1 = (np.sqrt(2.0 * eta) * rng.standard_normal((n, steps))).sum(axis=1)
    z = np.exp(1j * x1)
    want = math.exp(-1.0)
    re, im = z.real, z.imag
    assert abs(re.mean() - want) <= 3 * re.std(ddof=1) / math.sqrt(n)
    assert abs(im.mean()) <= 3 * im.std(ddof=1) / math.sqrt(n)


def test_path_shift_equivariance_same_seed():
    p = StableParams(2, 0.8)
    path0 = sample_path(p, np.zeros(2), 0.1, 1.0, np.random.default_rng(42))
    path1 = sample_path(p, np.array([1.5, -2.0]), 0.1, 1.0, np.random.default_rng(42))
    np.testing.assert_allclose(path1.points, path0.points + np.array([1.5, -2.0]), atol=1e-14)


def test_path_median_symmetry():
    p = P_CAUCHY
    rng = np.random.default_rng(7)
    n = 20_000
    eta = sample_subordinator_increment(0.5, 0.5, rng, size=(n, 2))
    x1 = (np.sqrt(2.0 * eta) * rng.standard_normal((n, 2))).sum(axis=1)
    med = np.median(x1)
    # median stderr ~ 1/(2 f(0) sqrt(n)); Cauchy f(0) = 1/pi
    assert abs(med) <= 3 * math.pi / (2 * math.sqrt(n))


def test_path_grid_and_record_invariants():
    p = P_HALF
    path = sample_path(p, 0.3, 0.05, 1.0, np.random.default_rng(3))
    eta = path.subordinator.values
    assert eta[0] == 0.0
    assert np.all(np.diff(eta) >= 0.0)
    assert path.n_steps == 20
    assert path.points[0] == pytest.approx(0.3)


# ---------------------------------------------------------------------------
# reflection coupling


def test_coupled_pair_mirror_switch_invariant():
    p = P_CAUCHY
    frame = ReflectionFrame(0, 0.0)
    for seed in range(12):
        pair = sample_coupled_pair(p, frame, 0.4, 0.05, 2.0, np.random.default_rng(seed))
        prim = np.asarray(pair.primary.points)
        mirr = np.asarray(pair.mirrored.points)
        k = pair.switch_index
        if k is None:
            np.testing.assert_allclose(mirr, -prim, atol=1e-14)
        else:
            np.testing.assert_allclose(mirr[:k], -prim[:k], atol=1e-14)
            np.testing.assert_allclose(mirr[k:], prim[k:], atol=1e-14)
            assert pair.hitting_time <= pair.primary.subordinator.values[k]


def test_coupled_pair_starts_and_wrong_side():
    p = P_CAUCHY
    frame = ReflectionFrame(0, 0.0)
    pair = sample_coupled_pair(p, frame, 0.4, 0.05, 1.0, np.random.default_rng(0))
    assert pair.mirrored.points[0] == pytest.approx(-0.4)
    with pytest.raises(WrongSideError):
        sample_coupled_pair(p, frame, -0.2, 0.05, 1.0, np.random.default_rng(0))


def test_coupled_pair_on_hyperplane_is_identical():
    p = P_CAUCHY
    frame = ReflectionFrame(0, 0.0)
    pair = sample_coupled_pair(p, frame, 0.0, 0.05, 1.0, np.random.default_rng(9))
    np.testing.assert_allclose(pair.mirrored.points, pair.primary.points, atol=1e-14)


def test_coupled_pair_marginal_law_ks():
    # mirrored endpoint at t = 1 versus independent paths started at the mirror
    p = P_CAUCHY
    frame = ReflectionFrame(0, 0.0)
    n = 10_000
    rng = np.random.default_rng(31)
    mirrored_end = np.array([
        sample_coupled_pair(p, frame, 0.4, 0.125, 1.0, rng).mirrored.points[-1]
        for _ in range(n // 10)
    ])
    rng2 = np.random.default_rng(32)
    direct_end = np.array([
        sample_path(p, -0.4, 0.125, 1.0, rng2).points[-1] for _ in range(n // 10)
    ])
    stat, pval = stats.ks_2samp(mirrored_end, direct_end)
    assert pval > 0.01


# ---------------------------------------------------------------------------
# first exit


def test_first_exit_whole_space_never_exits():
    p = P_CAUCHY
    path = sample_path(p, 0.0, 0.1, 2.0, np.random.default_rng(4))
    info = first_exit(path, WholeSpace(1))
    assert not info.exited


def test_first_exit_position_outside():
    p = P_CAUCHY
    dom = IntervalDomain(-1.0, 1.0)
    rng = np.random.default_rng(8)
    exits = 0
    for _ in range(50):
        path = sample_path(p, 0.0, 0.05, 20.0, rng)
        info = first_exit(path, dom)
        if info.exited:
            exits += 1
            assert not bool(dom.contains(np.asarray(info.position)))
            assert info.time == pytest.approx(info.index * 0.05)
    assert exits >= 45  # t_max = 20 with E tau = 1


def test_first_exit_requires_interior_start():
    p = P_CAUCHY
    path = sample_path(p, 3.0, 0.1, 1.0, np.random.default_rng(1))
    with pytest.raises(OutOfDomainError):
        first_exit(path, IntervalDomain(-1.0, 1.0))


def test_exit_time_matches_closed_form_with_dt_refinement():
    p = P_CAUCHY
    dom = IntervalDomain(-1.0, 1.0)
    want = expected_exit_time_ball(p, BallSpec([0.0], 1.0), 0.0)
    res_coarse = sample_exit_batch(p, dom, 0.0, 30_000, 0.008, seed=13)
    res_fine = sample_exit_batch(p, dom, 0.0, 30_000, 0.004, seed=14)
    est_c = res_coarse.mean_exit_time()
    est_f = res_fine.mean_exit_time()
    bias_c = est_c.mean - want
    bias_f = est_f.mean - want
    # positive O(dt) bias that halving reduces (within noise)
    assert bias_c > -3 * est_c.stderr
    assert bias_f <= bias_c + 3 * math.hypot(est_c.stderr, est_f.stderr)
    assert abs(bias_f) <= 3 * est_f.stderr + 2 * abs(est_c.mean - est_f.mean)


# ---------------------------------------------------------------------------
# killed densities


def test_killed_density_mass_decays_in_time():
    p = P_CAUCHY
    dom = IntervalDomain(-1.0, 1.0)
    masses = []
    for i, t in enumerate((0.25, 0.5, 1.0)):
        hist = estimate_killed_density(p, dom, t, 0.0, 10, 20_000, seed=100 + i, dt=0.01)
        masses.append(hist.total_mass)
        assert hist.total_mass <= 1.0 + 3.0 * np.linalg.norm(hist.stderrs)
    assert masses[0] > masses[1] > masses[2]


def test_killed_density_symmetry_two_runs():
    p = P_CAUCHY
    dom = IntervalDomain(-1.0, 1.0)
    x0, y0 = 0.3, -0.5
    h1 = estimate_killed_density(p, dom, 0.25, x0, 10, 50_000, seed=21, dt=0.005)
    h2 = estimate_killed_density(p, dom, 0.25, y0, 10, 50_000, seed=22, dt=0.005)
    cell_of = lambda hist, v: int(np.clip(np.searchsorted(hist.edges, v, "right") - 1, 0, 9))
    m1, s1 = h1.masses[cell_of(h1, y0)], h1.stderrs[cell_of(h1, y0)]
    m2, s2 = h2.masses[cell_of(h2, x0)], h2.stderrs[cell_of(h2, x0)]
    assert abs(m1 - m2) <= 3.0 * math.hypot(s1, s2)


def test_killed_density_guards():
    p = P_CAUCHY
    with pytest.raises(OutOfDomainError):
        estimate_killed_density(p, IntervalDomain(-1, 1), 0.25, 5.0, 10, 100, seed=0, dt=0.01)


def test_reflected_density_two_estimators_agree():
    p = P_CAUCHY
    dom = IntervalDomain(-1.0, 1.0)
    frame = ReflectionFrame(0, 0.0)
    res = estimate_reflected_killed_density(p, dom, frame, 0.25, 0.3, 20, 50_000,
                                            seed=5, dt=0.005)
    pos = res.positive_cells
    z = np.abs(res.difference - res.direct.masses) / np.sqrt(
        res.difference_stderr**2 + res.direct.stderrs**2 + 1e-300)
    assert z[pos].max() <= 3.0
    # difference is a (sub)density on the positive side: nonnegative within noise
    assert np.all(res.difference[pos] >= -3.0 * res.difference_stderr[pos])


def test_reflected_density_on_hyperplane_start_vanishes():
    p = P_CAUCHY
    dom = IntervalDomain(-1.0, 1.0)
    frame = ReflectionFrame(0, 0.0)
    res = estimate_reflected_killed_density(p, dom, frame, 0.25, 0.0, 20, 20_000,
                                            seed=6, dt=0.01)
    pos = res.positive_cells
    assert np.all(np.abs(res.difference[pos]) <= 3.0 * res.difference_stderr[pos] + 1e-12)


def test_reflected_density_asymmetric_domain_guard():
    p = P_CAUCHY
    with pytest.raises(AsymmetricDomainError):
        estimate_reflected_killed_density(p, IntervalDomain(-1.0, 2.0),
                                          ReflectionFrame(0, 0.0), 0.25, 0.3, 10,
                                          100, seed=0, dt=0.01)


# ---------------------------------------------------------------------------
# exact ball-exit sampling


def test_ball_exit_exact_all_outside_and_center_cdf():
    p = P_HALF
    ball = BallSpec(np.array([0.0]), 1.0)
    rng = np.random.default_rng(17)
    draws = sample_ball_exit_exact(p, ball, np.array([0.0]), rng, size=100_000)
    assert np.all(np.abs(draws) > 1.0)
    radii = np.sort(np.abs(draws))
    # radial CDF from the kernel: two-sided mass up to rho
    grid = np.linspace(1.0001, 8.0, 60)
    cdf_model = np.array([
        2 * integrate.quad(
            lambda z: poisson_kernel_ball(p, ball, np.array([0.0]), np.array([z])),
            1.0, g, limit=200)[0]
        for g in grid
    ])
    cdf_emp = np.searchsorted(radii, grid) / len(radii)
    assert np.max(np.abs(cdf_emp - cdf_model)) < 0.01


def test_ball_exit_exact_rejection_matches_kernel_off_center():
    p = StableParams(1, 1.0)
    ball = BallSpec(np.array([0.0]), 1.0)
    rng = np.random.default_rng(23)
    x = np.array([0.5])
    draws = sample_ball_exit_exact(p, ball, x, rng, size=100_000)
    assert np.all(np.abs(draws) > 1.0)
    # bin probabilities against kernel quadrature on both sides
    edges = np.array([-4.0, -2.0, -1.0, 1.0, 1.5, 2.0, 4.0])
    for lo, hi in zip(edges[:-1], edges[1:]):
        if lo < 1.0 and hi > -1.0 and not (hi <= -1.0 or lo >= 1.0):
            continue
        pmodel = integrate.quad(
            lambda z: poisson_kernel_ball(p, ball, x, np.array([z])), lo, hi,
            limit=200)[0]
        pemp = np.mean((draws > lo) & (draws <= hi))
        se = math.sqrt(pmodel * (1 - pmodel) / len(draws))
        assert abs(pemp - pmodel) <= 4.0 * se + 1e-4


def test_ball_exit_exact_rotational_symmetry_d2():
    p = StableParams(2, 1.0)
    ball = BallSpec(np.zeros(2), 1.0)
    rng = np.random.default_rng(29)
    draws = sample_ball_exit_exact(p, ball, np.zeros(2), rng, size=40_000)
    angles = np.arctan2(draws[:, 1], draws[:, 0])
    counts, _ = np.histogram(angles, bins=8, range=(-math.pi, math.pi))
    chi2 = ((counts - len(draws) / 8) ** 2 / (len(draws) / 8)).sum()
    assert chi2 < stats.chi2.ppf(0.999, df=7)


def test_ball_exit_exact_requires_interior():
    p = P_HALF
    with pytest.raises(OutOfDomainError):
        sample_ball_exit_exact(p, BallSpec(np.array([0.0]), 1.0), np.array([1.2]),
                               np.random.default_rng(0))


# ---------------------------------------------------------------------------
# determinism and seed partitioning


def test_bitwise_determinism_single_worker():
    p = P_CAUCHY
    a = sample_exit_batch(p, IntervalDomain(-1, 1), 0.0, 2000, 0.01, seed=77)
    b = sample_exit_batch(p, IntervalDomain(-1, 1), 0.0, 2000, 0.01, seed=77)
    np.testing.assert_array_equal(a.times, b.times)
    np.testing.assert_array_equal(a.positions, b.positions)


def test_spawn_seeds_deterministic_and_distinct():
    s1 = spawn_seeds(123, 4)
    s2 = spawn_seeds(123, 4)
    assert s1 == s2
    assert len(set(s1)) == 4
    assert spawn_seeds(124, 4) != s1


def test_mc_estimate_invariants():
    est = mc_estimate(np.array([1.0, 2.0, 3.0, 4.0]), seed=5)
    assert est.n == 4
    assert est.stderr == pytest.approx(np.std([1, 2, 3, 4], ddof=1) / 2.0)
    with pytest.raises(ValueError):
        mc_estimate(np.array([1.0]), seed=0)
