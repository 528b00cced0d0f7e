"""Batch front end: configure, run, and export experiments and metrics.

Configs are TOML (primary) or JSON.  Validation is total: every malformed
input produces a diagnostic listing each violation, never a traceback.
Exit codes: 0 success, 2 config error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass

try:
    import tomllib
except ImportError:  # pragma: no cover - python < 3.11
    import tomli as tomllib

from . import harness, measures, samplers, selfcheck, spaces, transforms
from .errors import (ConfigError, DomainError, NumericFailureError,
                     UnsupportedPairingError)
from .oracles import IidRect, JumpSet, OrderedRect, SumTail, TestSet

MODES = ("estimate", "sweep", "bracket", "metric", "transform-demo")
_EXPERIMENT_MODES = ("estimate", "sweep", "bracket", "transform-demo")
_DEMO_SEED_KEY = 999331


@dataclass(frozen=True)
class RunConfig:
    """Validated run request: experiment spec plus plumbing."""

    mode: str
    out: str | None
    workers: int
    spec: harness.ExperimentSpec | None = None
    t: float | None = None
    bracket_delta: float | None = None
    metric: dict | None = None


# ---------------------------------------------------------------------------
# Config loading and validation


def _load_raw(path: str) -> dict:
    try:
        with open(path, "rb") as fh:
            blob = fh.read()
    except OSError as exc:
        raise ConfigError([f"cannot read config: {exc}"]) from exc
    name = str(path).lower()
    as_json = name.endswith(".json") or (
        not name.endswith(".toml") and blob.lstrip()[:1] == b"{")
    try:
        if as_json:
            raw = json.loads(blob)
        else:
            raw = tomllib.loads(blob.decode("utf-8"))
    except Exception as exc:
        raise ConfigError([f"config parse failure: {exc}"]) from exc
    if not isinstance(raw, dict):
        raise ConfigError(["config root must be a table"])
    return raw


def _check_keys(obj: dict, path: str, allowed: tuple, violations: list) -> None:
    for key in obj:
        if key not in allowed:
            violations.append(f"{path}{key}: unknown key")


def _get(obj: dict, path: str, key: str, types, violations: list,
         required: bool = False, default=None):
    if key not in obj:
        if required:
            violations.append(f"{path}{key}: required")
        return default
    val = obj[key]
    if isinstance(val, bool) and bool not in (
            types if isinstance(types, tuple) else (types,)):
        violations.append(f"{path}{key}: wrong type")
        return default
    if not isinstance(val, types):
        violations.append(f"{path}{key}: wrong type")
        return default
    return val


_TEST_SET_KEYS = {
    "iid_rect": ("kind", "indices", "thresholds"),
    "ordered_rect": ("kind", "thresholds"),
    "sum_tail": ("kind", "p", "x"),
    "jump_set": ("kind", "thresholds", "rho"),
}


def _build_test_sets(items, violations: list) -> tuple[TestSet, ...]:
    if not isinstance(items, list):
        violations.append("test_set: expected an array of tables")
        return ()
    out = []
    for idx, item in enumerate(items):
        path = f"test_set[{idx}]."
        if not isinstance(item, dict):
            violations.append(f"test_set[{idx}]: expected a table")
            continue
        kind = _get(item, path, "kind", str, violations, required=True)
        if kind not in _TEST_SET_KEYS:
            if kind is not None:
                violations.append(
                    f"{path}kind: unknown kind {kind!r}; "
                    f"expected one of {sorted(_TEST_SET_KEYS)}")
            continue
        _check_keys(item, path, _TEST_SET_KEYS[kind], violations)
        try:
            if kind == "iid_rect":
                indices = _get(item, path, "indices", list, violations,
                               required=True, default=[])
                thresholds = _get(item, path, "thresholds", list, violations,
                                  required=True, default=[])
                fam = IidRect(tuple(indices), tuple(thresholds))
            elif kind == "ordered_rect":
                thresholds = _get(item, path, "thresholds", list, violations,
                                  required=True, default=[])
                fam = OrderedRect(tuple(thresholds))
            elif kind == "sum_tail":
                p = _get(item, path, "p", int, violations, required=True,
                         default=1)
                x = _get(item, path, "x", (int, float), violations,
                         required=True, default=1.0)
                fam = SumTail(int(p), float(x))
            else:
                thresholds = _get(item, path, "thresholds", list, violations,
                                  required=True, default=[])
                rho = _get(item, path, "rho", (int, float), violations,
                           default=0.0)
                fam = JumpSet(tuple(thresholds), float(rho))
        except (DomainError, ValueError, TypeError) as exc:
            violations.append(f"test_set[{idx}]: {exc}")
            continue
        out.append(TestSet(fam))
    return tuple(out)


_EXPERIMENT_KEYS = ("generator", "alpha", "levy_form", "order_j", "t_grid",
                    "t", "replications", "master_seed", "chunk_size",
                    "scaling_root")
_LEVY_KEYS = ("small_jump_cutoff", "include_brownian", "sigma", "drift",
              "mode")
_METRIC_KEYS = ("kind", "ground", "cone", "measure_a", "measure_b", "n_probe",
                "r_min", "r_max", "n_grid", "tol", "atom_cap")
_METRIC_KINDS = ("prohorov", "m0", "bounded_lipschitz")


def _default_levy_form(generator) -> str:
    if generator == "iid_vector":
        return "pareto_variable"
    return "canonical_levy_measure"


def _build_cone(text, path: str, violations: list):
    if not isinstance(text, str):
        violations.append(f"{path}: expected a string")
        return None
    name, _, arg = text.partition(":")
    try:
        if name == "origin" and not arg:
            return spaces.origin_cone()
        if name == "half_plane_floor" and not arg:
            return spaces.half_plane_floor()
        builders = {"axes": spaces.axes_cone,
                    "at_most_j": spaces.at_most_j_positive,
                    "seq_at_most_j": spaces.seq_at_most_j_positive,
                    "step_at_most_j": spaces.step_at_most_j_jumps}
        if name in builders and arg:
            return builders[name](int(arg))
    except (DomainError, ValueError) as exc:
        violations.append(f"{path}: {exc}")
        return None
    violations.append(
        f"{path}: unknown cone {text!r}; expected origin, half_plane_floor, "
        f"axes:<p>, at_most_j:<j>, seq_at_most_j:<j>, or step_at_most_j:<j>")
    return None


def _build_metric(table, violations: list) -> dict | None:
    if not isinstance(table, dict):
        violations.append("metric: expected a table")
        return None
    path = "metric."
    _check_keys(table, path, _METRIC_KEYS, violations)
    kind = _get(table, path, "kind", str, violations, required=True)
    if kind is not None and kind not in _METRIC_KINDS:
        violations.append(
            f"{path}kind: unknown kind {kind!r}; expected one of "
            f"{list(_METRIC_KINDS)}")
    ground = _get(table, path, "ground", str, violations, default="l1")
    if ground not in measures.GROUND_METRICS:
        violations.append(
            f"{path}ground: unknown ground metric {ground!r}; expected one "
            f"of {sorted(measures.GROUND_METRICS)}")
    out = {
        "kind": kind, "ground": ground,
        "measure_a": _get(table, path, "measure_a", str, violations,
                          required=True),
        "measure_b": _get(table, path, "measure_b", str, violations,
                          required=True),
        "n_probe": _get(table, path, "n_probe", int, violations, default=32),
        "r_min": float(_get(table, path, "r_min", (int, float), violations,
                            default=1e-3)),
        "r_max": float(_get(table, path, "r_max", (int, float), violations,
                            default=20.0)),
        "n_grid": _get(table, path, "n_grid", int, violations, default=200),
        "tol": float(_get(table, path, "tol", (int, float), violations,
                          default=1e-6)),
        "atom_cap": _get(table, path, "atom_cap", int, violations,
                         default=200),
        "cone": None,
    }
    if kind == "m0":
        cone_text = _get(table, path, "cone", str, violations, required=True)
        if cone_text is not None:
            out["cone"] = _build_cone(cone_text, path + "cone", violations)
    elif "cone" in table:
        violations.append(f"{path}cone: only the m0 kind takes a cone")
    return out


def parse_config(raw: dict, seed_override: int | None = None,
                 out_override: str | None = None,
                 workers_override: int | None = None) -> RunConfig:
    """Build a RunConfig from parsed data, collecting every violation."""
    violations: list[str] = []
    _check_keys(raw, "", ("mode", "out", "workers", "experiment", "test_set",
                          "bracket", "levy", "metric"), violations)
    mode = _get(raw, "", "mode", str, violations, required=True)
    if mode is not None and mode not in MODES:
        violations.append(f"mode: unknown mode {mode!r}; expected one of "
                          f"{list(MODES)}")
    out = out_override or _get(raw, "", "out", str, violations)
    workers = workers_override or _get(raw, "", "workers", int, violations,
                                       default=1)
    if workers < 1:
        violations.append("workers: must be at least 1")

    spec = None
    t = None
    if mode in _EXPERIMENT_MODES:
        exp = raw.get("experiment")
        if not isinstance(exp, dict):
            violations.append("experiment: required table for this mode")
            exp = {}
        path = "experiment."
        _check_keys(exp, path, _EXPERIMENT_KEYS, violations)
        generator = _get(exp, path, "generator", str, violations,
                         required=True, default="iid_vector")
        alpha = _get(exp, path, "alpha", (int, float), violations,
                     required=True, default=1.0)
        levy_form = _get(exp, path, "levy_form", str, violations,
                         default=_default_levy_form(generator))
        order_j = _get(exp, path, "order_j", int, violations, required=True,
                       default=0)
        t_grid = _get(exp, path, "t_grid", list, violations, required=True,
                      default=[])
        replications = _get(exp, path, "replications", int, violations,
                            required=True, default=1)
        master_seed = _get(exp, path, "master_seed", int, violations,
                           required=True, default=0)
        chunk_size = _get(exp, path, "chunk_size", int, violations,
                          default=1_000_000)
        if seed_override is not None:
            master_seed = seed_override
        test_sets = _build_test_sets(raw.get("test_set", []), violations)
        if not test_sets and "test_set" not in raw:
            violations.append("test_set: at least one table required")

        levy = None
        levy_table = raw.get("levy")
        if levy_table is not None or generator in ("compound_poisson",
                                                   "levy_path"):
            levy_table = levy_table if isinstance(levy_table, dict) else {}
            _check_keys(levy_table, "levy.", _LEVY_KEYS, violations)
            levy_mode = _get(levy_table, "levy.", "mode", str, violations,
                             default="full_path" if generator == "levy_path"
                             else "jump_list_only")
            try:
                levy = samplers.LevyConfig(
                    samplers.TailModel(float(alpha), levy_form),
                    small_jump_cutoff=float(_get(
                        levy_table, "levy.", "small_jump_cutoff",
                        (int, float), violations, default=1e-3)),
                    include_brownian=_get(levy_table, "levy.",
                                          "include_brownian", bool,
                                          violations, default=False),
                    sigma=float(_get(levy_table, "levy.", "sigma",
                                     (int, float), violations, default=0.0)),
                    drift=float(_get(levy_table, "levy.", "drift",
                                     (int, float), violations, default=0.0)),
                    mode=levy_mode)
            except (ConfigError, DomainError) as exc:
                violations.extend(
                    f"levy.{v}" for v in getattr(exc, "violations", [str(exc)]))

        try:
            grid = tuple(float(v) for v in t_grid)
        except (TypeError, ValueError):
            violations.append("experiment.t_grid: entries must be numbers")
            grid = ()
        try:
            spec = harness.ExperimentSpec(
                generator=generator,
                model=samplers.TailModel(float(alpha), levy_form),
                order_j=int(order_j), test_sets=test_sets, t_grid=grid,
                replications=int(replications), master_seed=int(master_seed),
                levy=levy, chunk_size=int(chunk_size))
        except (ConfigError, DomainError) as exc:
            violations.extend(
                f"experiment: {v}"
                for v in getattr(exc, "violations", None) or [str(exc)])
        if spec is not None and "scaling_root" in exp:
            stated = exp["scaling_root"]
            if stated != spec.scaling_root:
                violations.append(
                    f"experiment.scaling_root: stated {stated} but the "
                    f"generator and order imply {spec.scaling_root}")

        if mode in ("estimate", "bracket"):
            t = _get(exp, path, "t", (int, float), violations, required=True)
            if t is not None:
                t = float(t)
                if spec is not None and t not in spec.t_grid:
                    violations.append(
                        "experiment.t: must be a member of t_grid")

    bracket_delta = None
    if mode == "bracket":
        table = raw.get("bracket")
        if not isinstance(table, dict):
            violations.append("bracket: required table for this mode")
        else:
            _check_keys(table, "bracket.", ("delta",), violations)
            delta = _get(table, "bracket.", "delta", (int, float), violations,
                         required=True)
            if delta is not None:
                bracket_delta = float(delta)
                if bracket_delta < 0:
                    violations.append("bracket.delta: must be nonnegative")

    metric = None
    if mode == "metric":
        if "metric" not in raw:
            violations.append("metric: required table for this mode")
        else:
            metric = _build_metric(raw["metric"], violations)

    if violations:
        raise ConfigError(violations)
    return RunConfig(mode=mode, out=out, workers=int(workers), spec=spec,
                     t=t, bracket_delta=bracket_delta, metric=metric)


# ---------------------------------------------------------------------------
# Mode execution


def _summary_line(rec: harness.EstimateRecord) -> str:
    rel = f"{rec.rel_error:+.4f}" if math.isfinite(rec.rel_error) else "n/a"
    flag = " [unstable]" if rec.unstable else ""
    return (f"{rec.set_id}: t={rec.t:g} estimate={rec.estimate:.6g} "
            f"se={rec.std_error:.3g} oracle={rec.oracle:.6g} "
            f"rel_err={rel}{flag}")


def _emit_csv(records, out: str | None) -> None:
    if out:
        harness.write_csv(records, out)
    else:
        for line in harness.csv_lines(records):
            print(line)


def _emit_json(payload: dict, out: str | None) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True)
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _run_experiment(cfg: RunConfig) -> int:
    spec = cfg.spec
    records = []
    if cfg.mode == "sweep":
        records = harness.convergence_sweep(spec, workers=cfg.workers)
        for tset in spec.test_sets:
            sid = tset.set_id
            last = max((r for r in records if r.set_id == sid),
                       key=lambda r: r.t)
            print(_summary_line(last))
    elif cfg.mode == "estimate":
        for tset in spec.test_sets:
            rec = harness.estimate(spec, cfg.t, tset, workers=cfg.workers)
            records.append(rec)
            print(_summary_line(rec))
    else:
        for tset in spec.test_sets:
            lo, mid, hi = harness.portmanteau_bracket(
                spec, cfg.t, tset, cfg.bracket_delta, workers=cfg.workers)
            records.extend((lo, mid, hi))
            print(f"{tset.set_id}: t={cfg.t:g} bracket "
                  f"[{lo.estimate:.6g}, {mid.estimate:.6g}, "
                  f"{hi.estimate:.6g}] at delta={cfg.bracket_delta:g}")
    _emit_csv(records, cfg.out)
    return 0


def _run_metric(cfg: RunConfig) -> int:
    m = cfg.metric
    mu = measures.load_point_measure(m["measure_a"])
    nu = measures.load_point_measure(m["measure_b"])
    payload = {"kind": m["kind"], "ground": m["ground"],
               "measure_a": m["measure_a"], "measure_b": m["measure_b"]}
    if m["kind"] == "prohorov":
        payload["value"] = measures.prohorov(
            mu, nu, ground=m["ground"], tol=m["tol"], atom_cap=m["atom_cap"])
    elif m["kind"] == "bounded_lipschitz":
        payload["value"] = measures.bounded_lipschitz(
            mu, nu, ground=m["ground"], n_probe=m["n_probe"])
    else:
        res = measures.m0_distance(
            mu, nu, m["cone"], ground=m["ground"], r_min=m["r_min"],
            r_max=m["r_max"], n_grid=m["n_grid"],
            prohorov_tol=m["tol"], atom_cap=m["atom_cap"])
        payload["value"] = res.value
        payload["truncation_bound"] = res.truncation_bound
    print(f"{m['kind']}({m['ground']}) = {payload['value']:.8g}")
    _emit_json(payload, cfg.out)
    return 0


def _demo_point(spec: harness.ExperimentSpec, rng, t: float) -> dict:
    b = spec.scale_at(t)
    j = spec.order_j
    entry: dict = {}
    if spec.generator == "iid_vector":
        fam = spec.test_sets[0].family
        p = max(fam.indices) if isinstance(fam, IidRect) else fam.p
        x = samplers.sample_iid_vector(spec.model, p, rng)
        scaled = transforms.apply_scaling("standard", 1.0 / b, x)
        cone = (spaces.origin_cone() if j == 0
                else spaces.at_most_j_positive(min(j, p)))
        entry["cone_gap"] = spaces.dist_to_cone(scaled, cone)
        roundtrip = transforms.polar_inv(transforms.polar(x))
        entry["polar_residual"] = spaces.d_euclidean(x, roundtrip)
    elif spec.generator == "poisson_points":
        x = samplers.sample_poisson_points(spec.model, j + 2, rng)
        scaled = transforms.apply_scaling("standard", 1.0 / b, x)
        cone = spaces.seq_at_most_j_positive(max(j, 1))
        entry["cone_gap"] = spaces.dist_to_cone(scaled, cone)
        entry["partial_sums"] = list(
            transforms.proj(transforms.cumsum(scaled), j + 1).coords)
    else:
        x = samplers.sample_compound_poisson(spec.levy_config, rng)
        scaled = transforms.apply_scaling("standard", 1.0 / b, x)
        entry["cone_gap"] = spaces.kth_largest_jump(scaled, j + 1)
    entry["point"] = measures._point_to_obj(x)
    entry["scaled"] = measures._point_to_obj(scaled)
    return entry


def _run_demo(cfg: RunConfig) -> int:
    spec = cfg.spec
    if spec.generator == "levy_path":
        raise ConfigError(
            ["transform-demo supports jump-list generators only"])
    rng = samplers.rng_for(spec.master_seed, _DEMO_SEED_KEY)
    t = spec.t_grid[0]
    n = min(3, spec.replications)
    points = [_demo_point(spec, rng, t) for _ in range(n)]
    payload = {"generator": spec.generator, "t": t,
               "scale": spec.scale_at(t), "points": points}
    print(f"transform-demo: {n} points from {spec.generator} at t={t:g}")
    _emit_json(payload, cfg.out)
    return 0


def run(config_path: str, out: str | None = None, workers: int | None = None,
        seed: int | None = None) -> int:
    """Execute a config file; return the process exit code."""
    try:
        if seed is None:
            env = os.environ.get("HRV_SEED")
            if env is not None:
                try:
                    seed = int(env)
                except ValueError:
                    raise ConfigError(
                        [f"HRV_SEED: not an integer: {env!r}"]) from None
        raw = _load_raw(config_path)
        cfg = parse_config(raw, seed_override=seed, out_override=out,
                           workers_override=workers)
        if cfg.mode == "metric":
            return _run_metric(cfg)
        if cfg.mode == "transform-demo":
            return _run_demo(cfg)
        return _run_experiment(cfg)
    except ConfigError as exc:
        print("config error:", file=sys.stderr)
        for v in exc.violations:
            print(f"  - {v}", file=sys.stderr)
        return 2
    except (DomainError, UnsupportedPairingError, OSError) as exc:
        print(f"config error:\n  - {exc}", file=sys.stderr)
        return 2
    except NumericFailureError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="hrv",
        description="Tail limit experiments and metric computations")
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="execute a TOML or JSON config")
    p_run.add_argument("config", help="path to the config file")
    p_run.add_argument("--out", help="output path override")
    p_run.add_argument("--workers", type=int, help="worker count override")
    p_run.add_argument("--seed", type=int, help="master seed override")
    sub.add_parser("selfcheck", help="run the fast invariant battery")
    args = parser.parse_args(argv)
    if args.command == "selfcheck":
        return selfcheck.run_selfcheck()
    return run(args.config, out=args.out, workers=args.workers,
               seed=args.seed)


if __name__ == "__main__":
    raise SystemExit(main())
