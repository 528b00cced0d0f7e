"""Generators: distributional checks and exact structural identities."""

import math

import numpy as np
import pytest
from scipy import stats

from helpers import pareto_cdf
from hrvkit import samplers
from hrvkit.errors import ConfigError, DomainError
from hrvkit.samplers import LevyConfig, ScalingFunction, TailModel


# ---------------------------------------------------------------------------
# Models and scaling functions


def test_tail_model_validation():
    assert TailModel(2.0).b(16.0) == 4.0
    with pytest.raises(DomainError):
        TailModel(0.0)
    with pytest.raises(DomainError):
        TailModel(math.inf)
    with pytest.raises(DomainError):
        TailModel(1.0, "lognormal")
    with pytest.raises(DomainError):
        TailModel(1.0).b(0.0)


def test_scaling_function_frozen():
    sf = ScalingFunction(TailModel(2.0), 3)
    assert sf.at(64.0) == pytest.approx(2.0, rel=1e-15)
    assert ScalingFunction(TailModel(1.0), 1).at(10.0) == 10.0
    with pytest.raises(DomainError):
        ScalingFunction(TailModel(1.0), 0)


def test_levy_config_validation():
    model = TailModel(1.0, "canonical_levy_measure")
    LevyConfig(model, small_jump_cutoff=0.5)
    with pytest.raises(ConfigError):
        LevyConfig(TailModel(1.0))
    with pytest.raises(ConfigError):
        LevyConfig(model, small_jump_cutoff=0.0)
    with pytest.raises(ConfigError):
        LevyConfig(model, small_jump_cutoff=1.5)
    with pytest.raises(ConfigError):
        LevyConfig(model, include_brownian=True, sigma=0.0)
    with pytest.raises(ConfigError):
        LevyConfig(model, mode="increments")


# ---------------------------------------------------------------------------
# Seed derivation


def test_rng_for_determinism_and_separation():
    a = samplers.rng_for(7, 1, 2).random(4)
    b = samplers.rng_for(7, 1, 2).random(4)
    c = samplers.rng_for(7, 2, 1).random(4)
    d = samplers.rng_for(8, 1, 2).random(4)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
    assert not np.array_equal(a, d)


# ---------------------------------------------------------------------------
# Pareto draws


def test_pareto_quantile_frozen():
    assert samplers.pareto_quantile(2.0, 0.25) == 2.0
    assert samplers.pareto_quantile(1.0, (0.5, 0.1)).tolist() == [2.0, 10.0]


def test_sample_pareto_support_and_form():
    rng = samplers.rng_for(1, 1)
    x = samplers.sample_pareto(TailModel(1.5), rng, 10_000)
    assert float(x.min()) >= 1.0
    with pytest.raises(DomainError):
        samplers.sample_pareto(TailModel(1.0, "canonical_levy_measure"), rng)


def test_pareto_ks_batch():
    # 100 independent batches of 1e4 draws; the KS statistic must clear the
    # 1% critical value 1.6276/sqrt(n) in at least 95 of them
    n = 10_000
    crit = 1.6276 / math.sqrt(n)
    alpha = 1.3
    cdf = pareto_cdf(alpha)
    passes = 0
    for rep in range(100):
        rng = samplers.rng_for(20260811, 17, rep)
        x = samplers.sample_pareto(TailModel(alpha), rng, n)
        stat = stats.kstest(x, cdf).statistic
        passes += stat < crit
    assert passes >= 95


def test_sample_iid_vector():
    rng = samplers.rng_for(1, 2)
    v = samplers.sample_iid_vector(TailModel(1.0), 3, rng)
    assert v.dim == 3 and all(c >= 1.0 for c in v.coords)
    arr = samplers.sample_iid_vector(TailModel(1.0), 3, rng, size=5)
    assert arr.shape == (5, 3) and float(arr.min()) >= 1.0
    with pytest.raises(DomainError):
        samplers.sample_iid_vector(TailModel(1.0), 0, rng)


# ---------------------------------------------------------------------------
# Ordered point process


def test_poisson_points_from_gammas():
    x = samplers.poisson_points_from_gammas((1.0, 2.0, 4.0), 1.0, depth=4)
    assert x.coords == (1.0, 0.5, 0.25, 0.0)
    with pytest.raises(DomainError):
        samplers.poisson_points_from_gammas((2.0, 1.0), 1.0)
    with pytest.raises(DomainError):
        samplers.poisson_points_from_gammas((0.0, 1.0), 1.0)
    with pytest.raises(DomainError):
        samplers.poisson_points_from_gammas((1.0, 2.0), 1.0, depth=1)


def test_sample_poisson_points_ordering():
    model = TailModel(0.7, "canonical_levy_measure")
    for rep in range(20):
        rng = samplers.rng_for(3, rep)
        x = samplers.sample_poisson_points(model, 12, rng, depth=16)
        body = x.coords[:12]
        assert all(body[k] >= body[k + 1] for k in range(11))
        assert x.coords[12:] == (0.0,) * 4
    with pytest.raises(DomainError):
        samplers.sample_poisson_points(TailModel(1.0), 4, samplers.rng_for(1))
    with pytest.raises(DomainError):
        samplers.sample_poisson_points(model, 20, samplers.rng_for(1), depth=8)


def test_largest_point_is_frechet():
    # Gamma_1^(-1/alpha) has CDF exp(-x^-alpha)
    model = TailModel(2.0, "canonical_levy_measure")
    draws = np.array([
        samplers.sample_poisson_points(model, 1, samplers.rng_for(4, k),
                                       depth=1).coords[0]
        for k in range(4000)])
    stat = stats.kstest(draws, lambda x: np.exp(-x ** -2.0)).statistic
    assert stat < 1.6276 / math.sqrt(4000)


# ---------------------------------------------------------------------------
# Compensator and jump paths


def test_compensator_frozen():
    assert samplers.compensator(1.0, math.exp(-1.0)) == pytest.approx(1.0)
    assert samplers.compensator(1.0, 1.0) == 0.0
    assert samplers.compensator(1.5, 0.01) == pytest.approx(27.0, rel=1e-12)
    assert samplers.compensator(0.5, 0.25) == pytest.approx(0.5, rel=1e-12)
    with pytest.raises(DomainError):
        samplers.compensator(1.0, 0.0)
    with pytest.raises(DomainError):
        samplers.compensator(1.0, 1.5)


def test_compound_poisson_from_arrays_frozen():
    path = samplers.compound_poisson_from_arrays(
        (1.0, 2.0, 4.0), (0.5, 0.2, 0.8), 1.0)
    assert path.jumps == ((0.2, 0.5), (0.5, 1.0), (0.8, 0.25))
    empty = samplers.compound_poisson_from_arrays((), (), 1.0)
    assert empty.jumps == () and empty.base == 0.0
    with pytest.raises(DomainError):
        samplers.compound_poisson_from_arrays((1.0,), (0.5, 0.6), 1.0)


def test_compound_poisson_jump_sizes_respect_cutoff():
    cfg = LevyConfig(TailModel(1.0, "canonical_levy_measure"),
                     small_jump_cutoff=0.3)
    for rep in range(50):
        path = samplers.sample_compound_poisson(cfg, samplers.rng_for(5, rep))
        assert all(s >= 0.3 for s in path.jump_sizes)
    with pytest.raises(ConfigError):
        samplers.sample_compound_poisson(
            LevyConfig(TailModel(1.0, "canonical_levy_measure"),
                       mode="full_path"), samplers.rng_for(5))


def test_compound_poisson_mean_jump_count():
    # at cutoff 1 and alpha 1 the jump rate is exactly 1; the mean count
    # over 1e5 paths must land within 0.03 of it
    cfg = LevyConfig(TailModel(1.0, "canonical_levy_measure"),
                     small_jump_cutoff=1.0)
    total = 0
    n = 100_000
    for rep in range(n):
        total += len(samplers.sample_compound_poisson(
            cfg, samplers.rng_for(20260812, 3, rep)).jumps)
    assert abs(total / n - 1.0) <= 0.03


def test_compound_poisson_times_uniform():
    # pooled jump times over many paths are uniform on (0,1): chi-square
    # over 20 bins at the 1% level
    cfg = LevyConfig(TailModel(1.0, "canonical_levy_measure"),
                     small_jump_cutoff=0.3)
    times = []
    for rep in range(400):
        times.extend(samplers.sample_compound_poisson(
            cfg, samplers.rng_for(20260813, rep)).jump_times)
    counts, _ = np.histogram(times, bins=20, range=(0.0, 1.0))
    assert stats.chisquare(counts).pvalue >= 0.01


# ---------------------------------------------------------------------------
# Compensated small-jump part


def test_smalljump_reference_frozen():
    sup, terminal = samplers.smalljump_sup_from_arrays(
        1, (1.0, 1.0), (0.5,), 3.0, 1.0, 0.7)
    assert sup == pytest.approx(0.35, abs=1e-12)
    assert terminal == pytest.approx(-0.3, abs=1e-12)
    with pytest.raises(DomainError):
        samplers.smalljump_sup_from_arrays(2, (1.0, 1.0), (0.5, 0.5), 3.0,
                                           1.0, 0.7)


def test_smalljump_zero_jumps():
    sup, terminal = samplers.smalljump_sup_from_arrays(
        0, (1.0,), (), 0.0, 1.0, 0.0)
    assert sup == 0.0 and terminal == 0.0


def test_compensated_small_mean_is_zero():
    # alpha 1.5, cutoff 0.01: per-path variance of the terminal value is
    # alpha (1 - eps^(2-alpha)) / (2 - alpha) = 2.7; the mean over 1e5
    # paths stays within 3 standard errors of zero.  Paths are flattened
    # into chunked array draws; the per-path object route is checked in
    # test_levy_path_small_terminal_consistency.
    alpha, eps = 1.5, 0.01
    lam = eps ** -alpha - 1.0
    comp = samplers.compensator(alpha, eps)
    n_paths = 100_000
    chunk = 2_000
    total = 0.0
    for start in range(0, n_paths, chunk):
        rng = samplers.rng_for(20260814, start)
        counts = rng.poisson(lam, chunk)
        u = rng.random(int(counts.sum()))
        sizes = (1.0 + lam * u) ** (-1.0 / alpha)
        bounds = np.concatenate([[0], np.cumsum(counts)])[:-1]
        path_sums = np.add.reduceat(np.concatenate([sizes, [0.0]]),
                                    bounds)
        path_sums[counts == 0] = 0.0
        total += float(path_sums.sum()) - chunk * comp
    mean = total / n_paths
    var = alpha * (1.0 - eps ** (2.0 - alpha)) / (2.0 - alpha)
    assert var == pytest.approx(2.7, rel=1e-12)
    assert abs(mean) <= 3.0 * math.sqrt(var / n_paths)


# ---------------------------------------------------------------------------
# Full jump paths


def _path_config(**kw):
    return LevyConfig(TailModel(kw.pop("alpha", 1.0), "canonical_levy_measure"),
                      mode="full_path", **kw)


def test_levy_path_validation():
    with pytest.raises(ConfigError):
        samplers.sample_levy_path(_path_config(), 1, samplers.rng_for(1))
    with pytest.raises(ConfigError):
        samplers.sample_levy_path(
            LevyConfig(TailModel(1.0, "canonical_levy_measure")), 16,
            samplers.rng_for(1))


def test_levy_path_cutoff_one_reduces_to_large_jumps():
    # at cutoff 1 there is no small part at all: the grid values must equal
    # the large-jump path exactly
    cfg = _path_config(small_jump_cutoff=1.0)
    for rep in range(10):
        s = samplers.sample_levy_path(cfg, 33, samplers.rng_for(6, rep))
        assert s.small_sup_abs == 0.0
        assert s.small_terminal == 0.0
        for t, v in zip(s.grid, s.values):
            assert v == s.large_jumps.value(float(t)) or (
                t == 0.0 and v == 0.0)


def test_levy_path_grid_and_drift():
    cfg0 = _path_config(small_jump_cutoff=1.0)
    cfg2 = _path_config(small_jump_cutoff=1.0, drift=2.0)
    a = samplers.sample_levy_path(cfg0, 17, samplers.rng_for(7, 0))
    b = samplers.sample_levy_path(cfg2, 17, samplers.rng_for(7, 0))
    assert a.grid[0] == 0.0 and a.grid[-1] == 1.0 and a.values[0] == 0.0
    # identical draws, so the paths differ by exactly the drift line
    assert np.allclose(b.values - a.values, 2.0 * a.grid, atol=1e-12)


def test_levy_path_brownian_component():
    cfg = _path_config(small_jump_cutoff=1.0, include_brownian=True, sigma=0.5)
    s = samplers.sample_levy_path(cfg, 65, samplers.rng_for(8, 0))
    assert s.values[0] == 0.0
    assert np.all(np.isfinite(s.values))


def test_levy_path_small_terminal_consistency():
    # object route at modest size: mean terminal within 3 standard errors
    alpha, eps = 1.5, 0.1
    cfg = _path_config(alpha=alpha, small_jump_cutoff=eps)
    n = 500
    terms = [samplers.sample_levy_path(cfg, 2, samplers.rng_for(9, k)).small_terminal
             for k in range(n)]
    var = alpha * (1.0 - eps ** (2.0 - alpha)) / (2.0 - alpha)
    assert abs(float(np.mean(terms))) <= 3.0 * math.sqrt(var / n)
    sups = [samplers.sample_levy_path(cfg, 2, samplers.rng_for(9, k)).small_sup_abs
            for k in range(60)]
    for s, t in zip(sups, terms):
        assert s >= abs(t) - 1e-12
