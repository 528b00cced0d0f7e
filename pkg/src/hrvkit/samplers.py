"""Seeded generation of heavy-tailed variables, vectors, ordered points, and jump paths.

Everything is driven by an explicitly passed numpy Generator; rng_for derives
independent per-task generators from a master seed and an integer key path,
so a replication is a pure function of (master_seed, key).  The Pareto tail
and the canonical jump-size measure are both algebraically exact power laws,
which keeps the scaling function b(u) = u^(1/alpha) in closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ConfigError, DomainError
from .spaces import (
    DEFAULT_TRUNCATION_DEPTH,
    FiniteVector,
    StepFunction,
    TruncatedSequence,
)
from .transforms import t_m

LEVY_FORMS = ("pareto_variable", "canonical_levy_measure")
LEVY_MODES = ("jump_list_only", "full_path")


@dataclass(frozen=True)
class TailModel:
    """Tail index plus the choice of canonical heavy-tailed law.

    pareto_variable: P[X > x] = x^-alpha for x >= 1.
    canonical_levy_measure: jump measure nu(x, inf) = x^-alpha for all x > 0.
    Both make b(u) = u^(1/alpha) exact.
    """

    alpha: float
    levy_form: str = "pareto_variable"

    def __post_init__(self):
        if not (self.alpha > 0 and math.isfinite(self.alpha)):
            raise DomainError("alpha must be a positive finite real")
        if self.levy_form not in LEVY_FORMS:
            raise DomainError(
                f"levy_form must be one of {LEVY_FORMS}, got {self.levy_form!r}")

    def b(self, u: float) -> float:
        if u <= 0:
            raise DomainError("b is defined for positive arguments")
        return u ** (1.0 / self.alpha)


@dataclass(frozen=True)
class ScalingFunction:
    """Threshold scaling for order-j experiments: at(t) = b(t^(1/j)).

    j is the scaling root, i.e. the exponent slowing the time scale; it is
    j_order + 1 for iid-vector experiments and j_order for point-process and
    jump-path experiments.
    """

    model: TailModel
    j: int

    def __post_init__(self):
        if self.j < 1:
            raise DomainError("scaling root j must be a positive integer")

    def at(self, t: float) -> float:
        return self.model.b(t ** (1.0 / self.j))


@dataclass(frozen=True)
class LevyConfig:
    """Configuration of the jump-path sampler.

    small_jump_cutoff is the series-truncation level epsilon in (0, 1]:
    jumps below it are dropped in jump_list_only mode and replaced by the
    compensated small-jump part in full_path mode.
    """

    model: TailModel
    small_jump_cutoff: float = 1e-3
    include_brownian: bool = False
    sigma: float = 0.0
    drift: float = 0.0
    mode: str = "jump_list_only"

    def __post_init__(self):
        if self.model.levy_form != "canonical_levy_measure":
            raise ConfigError(["jump paths require the canonical_levy_measure form"])
        violations = []
        if not (0.0 < self.small_jump_cutoff <= 1.0):
            violations.append("small_jump_cutoff must lie in (0, 1]")
        if self.sigma < 0:
            violations.append("sigma must be nonnegative")
        if self.include_brownian and self.sigma == 0.0:
            violations.append("include_brownian requires sigma > 0")
        if self.mode not in LEVY_MODES:
            violations.append(f"mode must be one of {LEVY_MODES}")
        if violations:
            raise ConfigError(violations)


def rng_for(master_seed: int, *key: int) -> np.random.Generator:
    """Independent generator for the task addressed by an integer key path."""
    ss = np.random.SeedSequence(entropy=int(master_seed),
                                spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


# ---------------------------------------------------------------------------
# Elementary draws


def pareto_quantile(alpha: float, u):
    """Inverse-CDF pullback u -> u^(-1/alpha); vectorized over u in (0, 1]."""
    return np.asarray(u, dtype=np.float64) ** (-1.0 / alpha)


def sample_pareto(model: TailModel, rng: np.random.Generator, size=None):
    if model.levy_form != "pareto_variable":
        raise DomainError("sample_pareto requires the pareto_variable form")
    # 1 - random() lies in (0, 1], so the pullback never overflows
    u = 1.0 - rng.random(size)
    return u ** (-1.0 / model.alpha)


def sample_iid_vector(model: TailModel, p: int, rng: np.random.Generator,
                      size=None):
    """p independent Pareto(alpha) coordinates; a (size, p) array if size given."""
    if p < 1:
        raise DomainError("p must be a positive integer")
    if size is None:
        return FiniteVector(tuple(float(v) for v in sample_pareto(model, rng, p)))
    return sample_pareto(model, rng, (size, p))


def poisson_points_from_gammas(gammas, alpha: float,
                               depth: int = DEFAULT_TRUNCATION_DEPTH
                               ) -> TruncatedSequence:
    """Deterministic pullback (Gamma_l) -> (Gamma_l^(-1/alpha)), nonincreasing."""
    g = np.asarray(gammas, dtype=np.float64)
    if g.size > depth:
        raise DomainError("more points than the truncation depth")
    if g.size and (g[0] <= 0 or np.any(np.diff(g) <= 0)):
        raise DomainError("gammas must be strictly increasing and positive")
    x = g ** (-1.0 / alpha)
    return TruncatedSequence(tuple(float(v) for v in x), depth)


def sample_poisson_points(model: TailModel, m: int, rng: np.random.Generator,
                          depth: int = DEFAULT_TRUNCATION_DEPTH
                          ) -> TruncatedSequence:
    """The m largest points of the canonical Poisson process, in decreasing order."""
    if model.levy_form != "canonical_levy_measure":
        raise DomainError("point process sampling requires canonical_levy_measure")
    if not 1 <= m <= depth:
        raise DomainError("need 1 <= m <= depth")
    gammas = np.cumsum(rng.standard_exponential(m))
    return poisson_points_from_gammas(gammas, model.alpha, depth)


# ---------------------------------------------------------------------------
# Jump paths

_GAMMA_BLOCK = 64


def compensator(alpha: float, eps: float) -> float:
    """Mean of the jump sum over sizes in [eps, 1): integral of x nu(dx)."""
    if not 0.0 < eps <= 1.0:
        raise DomainError("eps must lie in (0, 1]")
    if eps == 1.0:
        return 0.0
    if alpha == 1.0:
        return math.log(1.0 / eps)
    return alpha * (1.0 - eps ** (1.0 - alpha)) / (1.0 - alpha)


def _draw_gammas_below(rng: np.random.Generator, gmax: float) -> list[float]:
    # all arrival points of a unit-rate process below gmax
    out: list[float] = []
    total = 0.0
    done = False
    while not done:
        for e in rng.standard_exponential(_GAMMA_BLOCK):
            total += e
            if total > gmax:
                done = True
                break
            out.append(total)
    return out


def _distinct_uniforms(rng: np.random.Generator, n: int) -> np.ndarray:
    u = rng.random(n)
    if np.unique(u).size == n:
        return u
    seen: set[float] = set()
    for k in range(n):
        while float(u[k]) in seen:
            u[k] = rng.random()
        seen.add(float(u[k]))
    return u


def compound_poisson_from_arrays(gammas, uniforms, alpha: float) -> StepFunction:
    """Jump path from explicit arrival points and their uniform times.

    gammas must be strictly increasing, so sizes gammas^(-1/alpha) come out
    nonincreasing; uniform k is the time of the k-th largest jump.
    """
    g = np.asarray(gammas, dtype=np.float64)
    u = np.asarray(uniforms, dtype=np.float64)
    if g.size != u.size:
        raise DomainError("gammas and uniforms must have equal length")
    n = int(g.size)
    if n == 0:
        return StepFunction((), 0.0)
    sizes = TruncatedSequence(tuple(float(v) for v in g ** (-1.0 / alpha)),
                              depth=n)
    return t_m(sizes, tuple(float(v) for v in u), n)


def sample_compound_poisson(config: LevyConfig,
                            rng: np.random.Generator) -> StepFunction:
    """Path of the jumps with size >= small_jump_cutoff over time [0, 1]."""
    if config.mode != "jump_list_only":
        raise ConfigError(["sample_compound_poisson requires mode jump_list_only"])
    alpha = config.model.alpha
    eps = config.small_jump_cutoff
    gammas = _draw_gammas_below(rng, eps ** (-alpha))
    times = _distinct_uniforms(rng, len(gammas))
    return compound_poisson_from_arrays(gammas, times, alpha)


def smalljump_sup_from_arrays(n: int, e, v, lam: float, alpha: float,
                              comp: float) -> tuple[float, float]:
    """Reference single-path evaluation of (sup |compensated small part|, terminal).

    e holds n+1 standard exponentials (the last one closes the divisor),
    v holds n uniforms mapped to sizes (1 + lam v)^(-1/alpha).  The counting
    kernels implement exactly this recursion; keep the two in sync.
    """
    e = np.asarray(e, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if e.size != n + 1 or v.size != n:
        raise DomainError("need n+1 exponentials and n uniforms")
    sizes = (1.0 + lam * v) ** (-1.0 / alpha)
    div = 0.0
    for k in range(n + 1):
        div = div + float(e[k])
    gam = 0.0
    s = 0.0
    amax = 0.0
    bmin = 0.0
    epos = 0
    for k in range(n):
        gam = gam + float(e[epos])
        epos += 1
        t = gam / div
        b = s - comp * t
        if b < bmin:
            bmin = b
        s = s + float(sizes[k])
        a = s - comp * t
        if a > amax:
            amax = a
    terminal = s - comp
    if terminal < bmin:
        bmin = terminal
    sup = amax if amax > -bmin else -bmin
    return sup, terminal


class LevyPathSample(NamedTuple):
    grid: np.ndarray
    values: np.ndarray
    large_jumps: StepFunction
    small_sup_abs: float
    small_terminal: float


def sample_levy_path(config: LevyConfig, n_grid: int,
                     rng: np.random.Generator) -> LevyPathSample:
    """Grid samples of drift + diffusion + large jumps + compensated small jumps.

    Large means size >= 1 (kept as an attached jump list); small means size
    in [cutoff, 1), simulated from the jump measure and recentred by the
    compensator so the small part has mean zero at t = 1.
    """
    if config.mode != "full_path":
        raise ConfigError(["sample_levy_path requires mode full_path"])
    if n_grid < 2:
        raise ConfigError(["n_grid must be at least 2"])
    alpha = config.model.alpha
    eps = config.small_jump_cutoff
    lam = eps ** (-alpha) - 1.0
    comp = compensator(alpha, eps)

    # small part first: count, then n+1 exponentials, then n size uniforms
    n_small = int(rng.poisson(lam)) if lam > 0 else 0
    e = rng.standard_exponential(n_small + 1)
    v = rng.random(n_small)
    small_sup, small_terminal = smalljump_sup_from_arrays(
        n_small, e, v, lam, alpha, comp)
    small_times = np.cumsum(e[:n_small]) / math.fsum(e)
    small_sizes = (1.0 + lam * v) ** (-1.0 / alpha)

    # large jumps, then the optional diffusion
    large_gammas = _draw_gammas_below(rng, 1.0)
    large_times = _distinct_uniforms(rng, len(large_gammas))
    large = compound_poisson_from_arrays(large_gammas, large_times, alpha)

    grid = np.linspace(0.0, 1.0, n_grid)
    values = config.drift * grid
    if config.include_brownian:
        dt = 1.0 / (n_grid - 1)
        incr = rng.standard_normal(n_grid - 1) * (config.sigma * math.sqrt(dt))
        values = values + np.concatenate([[0.0], np.cumsum(incr)])

    if large.jumps:
        lt = np.asarray(large.jump_times)
        ls = np.concatenate([[0.0], np.cumsum(large.jump_sizes)])
        values = values + ls[np.searchsorted(lt, grid, side="right")]
    if n_small:
        st = small_times
        ss = np.concatenate([[0.0], np.cumsum(small_sizes)])
        values = values + ss[np.searchsorted(st, grid, side="right")]
    values = values - comp * grid

    return LevyPathSample(grid, values, large, float(small_sup),
                          float(small_terminal))
