"""Monte Carlo estimation of t P[scaled sample in A] with convergence sweeps.

Estimates route through the counting kernels: drivers draw uniforms or
exponentials per chunk, apply the inverse-CDF power transforms once with
numpy, and hand plain float64 arrays to the kernel.  Chunks derive their
generators from (master_seed, t index, set index, chunk index), and the only
cross-chunk reduction is an integer hit-count sum, so results are identical
for any worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import ConfigError, DomainError
from .oracles import IidRect, JumpSet, OrderedRect, SumTail, TestSet, oracle_value
from .samplers import LevyConfig, ScalingFunction, TailModel, compensator, rng_for

GENERATORS = ("iid_vector", "poisson_points", "compound_poisson", "levy_path")

_JUMP_GENERATORS = ("compound_poisson", "levy_path")

_FAMILY_FOR_GENERATOR = {
    "iid_vector": (IidRect, SumTail),
    "poisson_points": (OrderedRect,),
    "compound_poisson": (JumpSet,),
    "levy_path": (JumpSet,),
}

_UNSTABLE_EXPECTED_HITS = 10.0


@dataclass(frozen=True)
class ExperimentSpec:
    """A full experiment: generator, limit order, test sets, t grid, and seed."""

    generator: str
    model: TailModel
    order_j: int
    test_sets: tuple[TestSet, ...]
    t_grid: tuple[float, ...]
    replications: int
    master_seed: int
    levy: LevyConfig | None = None
    chunk_size: int = 1_000_000

    def __post_init__(self):
        object.__setattr__(self, "test_sets", tuple(self.test_sets))
        object.__setattr__(self, "t_grid", tuple(float(t) for t in self.t_grid))
        violations = []
        if self.generator not in GENERATORS:
            violations.append(f"generator must be one of {GENERATORS}")
        if self.order_j < 0:
            violations.append("order_j must be nonnegative")
        if self.replications < 1:
            violations.append("replications must be at least 1")
        if self.chunk_size < 1:
            violations.append("chunk_size must be positive")
        if not self.t_grid:
            violations.append("t_grid must be nonempty")
        elif any(t <= 0 for t in self.t_grid):
            violations.append("t_grid entries must be positive")
        elif any(a >= b for a, b in zip(self.t_grid, self.t_grid[1:])):
            violations.append("t_grid must be strictly increasing")
        if not self.test_sets:
            violations.append("test_sets must be nonempty")
        if self.generator in GENERATORS:
            violations.extend(self._pairing_violations())
        if self.generator == "iid_vector":
            if self.model.levy_form != "pareto_variable":
                violations.append("iid_vector requires the pareto_variable form")
        elif self.generator in GENERATORS:
            if self.model.levy_form != "canonical_levy_measure":
                violations.append(
                    f"{self.generator} requires the canonical_levy_measure form")
        if self.generator in _JUMP_GENERATORS and self.levy is not None:
            if self.levy.model != self.model:
                violations.append("levy config model must match the spec model")
        if violations:
            raise ConfigError(violations)

    def _pairing_violations(self) -> list[str]:
        allowed = _FAMILY_FOR_GENERATOR[self.generator]
        out = []
        for ts in self.test_sets:
            fam = ts.family
            if not isinstance(fam, allowed):
                names = "/".join(c.__name__ for c in allowed)
                out.append(
                    f"test set {ts.set_id} incompatible with {self.generator} "
                    f"(needs {names})")
                continue
            if isinstance(fam, IidRect) and fam.m < self.order_j + 1:
                out.append(
                    f"test set {ts.set_id} uses m={fam.m} coordinates, below "
                    f"order_j+1={self.order_j + 1}; the set is not bounded "
                    f"away at this order")
            if isinstance(fam, SumTail) and self.order_j != 0:
                out.append("sum-tail sets require order_j = 0")
            if isinstance(fam, OrderedRect) and fam.j != self.order_j:
                out.append(
                    f"test set {ts.set_id} has {fam.j} thresholds, expected "
                    f"order_j={self.order_j}")
            if isinstance(fam, JumpSet) and fam.j != self.order_j:
                out.append(
                    f"test set {ts.set_id} has {fam.j} thresholds, expected "
                    f"order_j={self.order_j}")
        return out

    @property
    def scaling_root(self) -> int:
        """Exponent r in the threshold scale b(t^(1/r)) for this generator."""
        if self.generator == "iid_vector":
            return self.order_j + 1
        return max(self.order_j, 1)

    @property
    def levy_config(self) -> LevyConfig:
        if self.levy is not None:
            return self.levy
        return LevyConfig(model=self.model)

    def scale_at(self, t: float) -> float:
        return ScalingFunction(self.model, self.scaling_root).at(t)


@dataclass(frozen=True)
class EstimateRecord:
    generator: str
    alpha: float
    order_j: int
    set_id: str
    t: float
    n: int
    estimate: float
    std_error: float
    oracle: float
    rel_error: float
    unstable: bool


# ---------------------------------------------------------------------------
# Chunk drivers (top level so they pickle for worker processes)


def _chunk_counts(spec: ExperimentSpec, variants: tuple, t: float,
                  t_index: int, set_index: int, chunk_index: int,
                  n: int) -> tuple[int, ...]:
    """Hit counts of every threshold variant on one shared chunk of draws."""
    rng = rng_for(spec.master_seed, t_index, set_index, chunk_index)
    alpha = spec.model.alpha
    b = spec.scale_at(t)
    base = variants[0]
    if isinstance(base, IidRect):
        p_eff = max(base.indices)
        u = rng.random((n, p_eff))
        x = (1.0 - u) ** (-1.0 / alpha)
        cols = np.ascontiguousarray(x[:, np.asarray(base.indices) - 1])
        return tuple(
            kernels.rect_hits(cols, b * np.asarray(v.thresholds))
            for v in variants)
    if isinstance(base, SumTail):
        u = rng.random((n, base.p))
        x = (1.0 - u) ** (-1.0 / alpha)
        return tuple(kernels.sum_tail_hits(x, b * v.x) for v in variants)
    if isinstance(base, OrderedRect):
        e = rng.standard_exponential((n, base.j))
        return tuple(
            kernels.ordered_rect_hits(
                e, (b * np.asarray(v.thresholds)) ** -alpha)
            for v in variants)
    if isinstance(base, JumpSet):
        e = rng.standard_exponential((n, base.j))
        u = rng.random((n, base.j))
        return tuple(
            kernels.jumpset_hits(
                e, u, (b * np.asarray(v.thresholds)) ** -alpha, v.rho)
            for v in variants)
    raise ConfigError([f"no driver for family {type(base).__name__}"])


def _chunk_sizes(total: int, chunk: int) -> list[int]:
    full, rem = divmod(total, chunk)
    return [chunk] * full + ([rem] if rem else [])


def _run_chunks(spec: ExperimentSpec, variants: tuple, t: float, t_index: int,
                set_index: int, workers: int) -> tuple[int, ...]:
    sizes = _chunk_sizes(spec.replications, spec.chunk_size)
    totals = [0] * len(variants)
    if workers <= 1:
        for ci, n in enumerate(sizes):
            counts = _chunk_counts(spec, variants, t, t_index, set_index, ci, n)
            for k, c in enumerate(counts):
                totals[k] += c
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(_chunk_counts, spec, variants, t, t_index,
                            set_index, ci, n)
                for ci, n in enumerate(sizes)]
            for fut in futures:
                counts = fut.result()
                for k, c in enumerate(counts):
                    totals[k] += c
    return tuple(totals)


def _finalize(spec: ExperimentSpec, tset: TestSet, t: float,
              hits: int) -> EstimateRecord:
    n = spec.replications
    p_hat = hits / n
    est = t * p_hat
    se = t * math.sqrt(p_hat * (1.0 - p_hat) / n)
    oracle = oracle_value(spec.order_j, spec.model.alpha, tset.family)
    if math.isfinite(oracle) and oracle > 0:
        rel = (est - oracle) / oracle
        unstable = n * (oracle / t) < _UNSTABLE_EXPECTED_HITS
    else:
        rel = math.nan
        unstable = oracle == 0.0
    return EstimateRecord(spec.generator, spec.model.alpha, spec.order_j,
                          tset.set_id, t, n, est, se, oracle, rel, unstable)


def _resolve(spec: ExperimentSpec, t: float, tset: TestSet) -> tuple[int, int]:
    try:
        t_index = spec.t_grid.index(float(t))
    except ValueError:
        raise ConfigError([f"t={t} is not on the spec's t_grid"]) from None
    try:
        set_index = spec.test_sets.index(tset)
    except ValueError:
        raise ConfigError(["the test set is not in the spec"]) from None
    return t_index, set_index


def _check_levy_cutoff(spec: ExperimentSpec, tset: TestSet, t: float) -> None:
    if spec.generator not in _JUMP_GENERATORS:
        return
    b = spec.scale_at(t)
    eps = spec.levy_config.small_jump_cutoff
    if b * tset.clearance < eps:
        raise ConfigError([
            f"scaled threshold floor {b * tset.clearance:g} falls below the "
            f"small-jump cutoff {eps:g} at t={t:g}; membership would depend "
            f"on truncated jumps (lower small_jump_cutoff)"])


def estimate(spec: ExperimentSpec, t: float, tset: TestSet,
             workers: int = 1) -> EstimateRecord:
    """Monte Carlo estimate of t P[sample/b(t^(1/r)) in the test set].

    t must lie on the spec's t_grid and tset must be one of its test sets;
    the pair's grid position keys the chunk RNG streams.
    """
    t_index, set_index = _resolve(spec, t, tset)
    _check_levy_cutoff(spec, tset, t)
    (hits,) = _run_chunks(spec, (tset.family,), t, t_index, set_index, workers)
    return _finalize(spec, tset, t, hits)


def convergence_sweep(spec: ExperimentSpec,
                      workers: int = 1) -> list[EstimateRecord]:
    """One estimate per (test set, t) pair, sorted by (set_id, t)."""
    records = []
    for tset in spec.test_sets:
        for t in spec.t_grid:
            records.append(estimate(spec, t, tset, workers))
    records.sort(key=lambda r: (r.set_id, r.t))
    return records


def portmanteau_bracket(spec: ExperimentSpec, t: float, tset: TestSet,
                        delta: float, workers: int = 1
                        ) -> tuple[EstimateRecord, EstimateRecord,
                                   EstimateRecord]:
    """Estimates on the delta-deflated set, the set, and the delta-inflated set.

    All three variants are counted on the same draws, so the sandwich
    deflated <= raw <= inflated holds exactly, not just in expectation.
    """
    if delta < 0:
        raise DomainError("delta must be nonnegative")
    if delta >= tset.clearance:
        raise DomainError(
            f"delta={delta:g} must stay below the set clearance "
            f"{tset.clearance:g}")
    t_index, set_index = _resolve(spec, t, tset)
    _check_levy_cutoff(spec, tset, t)
    deflated = tset.shifted(delta)
    inflated = tset.shifted(-delta)
    variants = (deflated.family, tset.family, inflated.family)
    counts = _run_chunks(spec, variants, t, t_index, set_index, workers)
    return (_finalize(spec, deflated, t, counts[0]),
            _finalize(spec, tset, t, counts[1]),
            _finalize(spec, inflated, t, counts[2]))


# ---------------------------------------------------------------------------
# Small-jump supremum sweep


def _chunk_smalljump(alpha: float, lam: float, comp: float, threshold: float,
                     master_seed: int, t_index: int, chunk_index: int,
                     n_paths: int) -> int:
    rng = rng_for(master_seed, t_index, 0, chunk_index)
    counts = rng.poisson(lam, n_paths).astype(np.int64)
    total = int(counts.sum())
    e_flat = rng.standard_exponential(total + n_paths)
    v = rng.random(total)
    s_flat = (1.0 + lam * v) ** (-1.0 / alpha)
    return kernels.smalljump_sup_hits(counts, e_flat, s_flat, comp, threshold)


def smalljump_sup_sweep(model: TailModel, eps: float, delta: float,
                        t_grid, n_paths, master_seed: int,
                        scaling_root: int = 2, chunk_size: int = 2048,
                        workers: int = 1) -> list[EstimateRecord]:
    """t P[sup_t |compensated small-jump part| > b(t^(1/root)) delta] over a grid.

    n_paths is a single count or one count per grid point (the usual budget
    is a fixed total number of draws, so paths per t shrink as t grows).
    The target has no closed-form oracle; records carry oracle nan and exist
    for trend checks (the probability must vanish as t grows).
    """
    if model.levy_form != "canonical_levy_measure":
        raise ConfigError(["small-jump sweep requires canonical_levy_measure"])
    if not 0.0 < eps < 1.0:
        raise DomainError("eps must lie in (0, 1)")
    if delta <= 0:
        raise DomainError("delta must be positive")
    t_grid = tuple(float(t) for t in t_grid)
    if not t_grid or any(a >= b for a, b in zip(t_grid, t_grid[1:])):
        raise ConfigError(["t_grid must be nonempty and strictly increasing"])
    if isinstance(n_paths, int):
        n_per_t = (n_paths,) * len(t_grid)
    else:
        n_per_t = tuple(int(n) for n in n_paths)
        if len(n_per_t) != len(t_grid):
            raise ConfigError(["n_paths must match the t grid length"])
    if any(n < 1 for n in n_per_t):
        raise ConfigError(["n_paths entries must be positive"])
    alpha = model.alpha
    lam = eps ** -alpha - 1.0
    comp = compensator(alpha, eps)
    scale = ScalingFunction(model, scaling_root)
    records = []
    set_id = f"smalljump_sup_d{delta:g}_eps{eps:g}"
    for t_index, (t, n_t) in enumerate(zip(t_grid, n_per_t)):
        threshold = scale.at(t) * delta
        sizes = _chunk_sizes(n_t, chunk_size)
        hits = 0
        if workers <= 1:
            for ci, n in enumerate(sizes):
                hits += _chunk_smalljump(alpha, lam, comp, threshold,
                                         master_seed, t_index, ci, n)
        else:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                futures = [
                    pool.submit(_chunk_smalljump, alpha, lam, comp, threshold,
                                master_seed, t_index, ci, n)
                    for ci, n in enumerate(sizes)]
                hits = sum(f.result() for f in futures)
        p_hat = hits / n_t
        est = t * p_hat
        se = t * math.sqrt(p_hat * (1.0 - p_hat) / n_t)
        records.append(EstimateRecord("levy_path", alpha, scaling_root, set_id,
                                      t, n_t, est, se, math.nan, math.nan,
                                      False))
    return records


# ---------------------------------------------------------------------------
# CSV export

CSV_HEADER = ("generator,alpha,order_j,set_id,t,N,estimate,std_error,oracle,"
              "rel_error,unstable_flag")


def _fmt(v: float) -> str:
    return f"{v:.10g}"


def csv_lines(records) -> list[str]:
    lines = [CSV_HEADER]
    for r in records:
        lines.append(",".join([
            r.generator, _fmt(r.alpha), str(r.order_j), r.set_id, _fmt(r.t),
            str(r.n), _fmt(r.estimate), _fmt(r.std_error), _fmt(r.oracle),
            _fmt(r.rel_error), "1" if r.unstable else "0"]))
    return lines


def write_csv(records, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for line in csv_lines(records):
            fh.write(line)
            fh.write("\n")
