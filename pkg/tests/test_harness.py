"""Monte Carlo harness: specs, estimates, brackets, sweeps, CSV output."""

import math

import pytest

from hrvkit import harness
from hrvkit.errors import ConfigError, DomainError
from hrvkit.harness import EstimateRecord, ExperimentSpec
from hrvkit.oracles import IidRect, JumpSet, OrderedRect, SumTail, TestSet
from hrvkit.samplers import LevyConfig, TailModel

PARETO = TailModel(1.0)
CANON = TailModel(1.0, "canonical_levy_measure")


def iid_spec(**kw):
    kw.setdefault("generator", "iid_vector")
    kw.setdefault("model", PARETO)
    kw.setdefault("order_j", 1)
    kw.setdefault("test_sets", (TestSet(IidRect((1, 2), (2.0, 4.0))),))
    kw.setdefault("t_grid", (100.0,))
    kw.setdefault("replications", 200_000)
    kw.setdefault("master_seed", 20260816)
    return ExperimentSpec(**kw)


# ---------------------------------------------------------------------------
# Spec validation


def test_spec_collects_every_violation():
    with pytest.raises(ConfigError) as err:
        ExperimentSpec(generator="bootstrap", model=PARETO, order_j=-1,
                       test_sets=(), t_grid=(), replications=0,
                       master_seed=1)
    text = str(err.value)
    for fragment in ("generator", "order_j", "replications", "t_grid",
                     "test_sets"):
        assert fragment in text


def test_spec_pairing_violations():
    with pytest.raises(ConfigError) as err:
        iid_spec(test_sets=(TestSet(OrderedRect((1.0,))),))
    assert "incompatible" in str(err.value)
    with pytest.raises(ConfigError) as err:
        iid_spec(order_j=2)
    assert "not bounded away" in str(err.value)
    with pytest.raises(ConfigError) as err:
        iid_spec(test_sets=(TestSet(SumTail(2, 1.0)),))
    assert "order_j = 0" in str(err.value)
    with pytest.raises(ConfigError) as err:
        ExperimentSpec(generator="poisson_points", model=CANON, order_j=2,
                       test_sets=(TestSet(OrderedRect((1.0,))),),
                       t_grid=(10.0,), replications=10, master_seed=1)
    assert "expected order_j" in str(err.value)


def test_spec_levy_form_pairing():
    with pytest.raises(ConfigError) as err:
        iid_spec(model=CANON)
    assert "pareto_variable" in str(err.value)
    with pytest.raises(ConfigError) as err:
        ExperimentSpec(generator="poisson_points", model=PARETO, order_j=1,
                       test_sets=(TestSet(OrderedRect((1.0,))),),
                       t_grid=(10.0,), replications=10, master_seed=1)
    assert "canonical_levy_measure" in str(err.value)


def test_spec_t_grid_ordering():
    with pytest.raises(ConfigError) as err:
        iid_spec(t_grid=(10.0, 10.0))
    assert "strictly increasing" in str(err.value)
    with pytest.raises(ConfigError):
        iid_spec(t_grid=(10.0, -1.0))


def test_scaling_root():
    assert iid_spec().scaling_root == 2
    assert iid_spec(order_j=0,
                    test_sets=(TestSet(SumTail(2, 1.0)),)).scaling_root == 1
    pp = ExperimentSpec(generator="poisson_points", model=CANON, order_j=2,
                        test_sets=(TestSet(OrderedRect((2.0, 1.0))),),
                        t_grid=(10.0,), replications=10, master_seed=1)
    assert pp.scaling_root == 2
    assert pp.scale_at(10000.0) == pytest.approx(100.0, rel=1e-12)


# ---------------------------------------------------------------------------
# Estimates


def test_estimate_iid_rect_matches_oracle():
    spec = iid_spec()
    rec = harness.estimate(spec, 100.0, spec.test_sets[0])
    assert rec.oracle == 0.125
    assert abs(rec.estimate - rec.oracle) <= 5.0 * rec.std_error
    assert not rec.unstable
    assert rec.n == 200_000


def test_estimate_respects_index_gaps():
    # indices (1, 3): the second sampled coordinate is irrelevant
    spec = iid_spec(test_sets=(TestSet(IidRect((1, 3), (2.0, 4.0))),))
    rec = harness.estimate(spec, 100.0, spec.test_sets[0])
    assert rec.oracle == 0.125
    assert abs(rec.estimate - rec.oracle) <= 5.0 * rec.std_error


def test_estimate_deterministic_and_worker_independent():
    spec = iid_spec(replications=30_000, chunk_size=8_192)
    a = harness.estimate(spec, 100.0, spec.test_sets[0])
    b = harness.estimate(spec, 100.0, spec.test_sets[0])
    c = harness.estimate(spec, 100.0, spec.test_sets[0], workers=2)
    assert a == b == c


def test_estimate_requires_grid_membership():
    spec = iid_spec()
    with pytest.raises(ConfigError) as err:
        harness.estimate(spec, 99.0, spec.test_sets[0])
    assert "t_grid" in str(err.value)
    with pytest.raises(ConfigError):
        harness.estimate(spec, 100.0, TestSet(IidRect((1, 2), (3.0, 3.0))))


def test_estimate_unstable_flags():
    # oracle zero: m > j+1
    spec = iid_spec(test_sets=(TestSet(IidRect((1, 2, 3), (2.0, 2.0, 2.0))),))
    rec = harness.estimate(spec, 100.0, spec.test_sets[0])
    assert rec.oracle == 0.0 and rec.unstable and math.isnan(rec.rel_error)
    # fewer than 10 expected hits
    small = iid_spec(replications=100)
    rec = harness.estimate(small, 100.0, small.test_sets[0])
    assert rec.unstable


def test_levy_cutoff_guard():
    levy = LevyConfig(CANON, small_jump_cutoff=0.5)
    spec = ExperimentSpec(generator="compound_poisson", model=CANON,
                          order_j=2,
                          test_sets=(TestSet(JumpSet((2.0, 1.0), 0.1)),),
                          t_grid=(0.01,), replications=10, master_seed=1,
                          levy=levy)
    with pytest.raises(ConfigError) as err:
        harness.estimate(spec, 0.01, spec.test_sets[0])
    assert "small-jump cutoff" in str(err.value)


def test_jump_generator_estimate():
    spec = ExperimentSpec(generator="compound_poisson", model=CANON,
                          order_j=2,
                          test_sets=(TestSet(JumpSet((2.0, 1.0), 0.0)),),
                          t_grid=(100.0,), replications=100_000,
                          master_seed=20260817)
    rec = harness.estimate(spec, 100.0, spec.test_sets[0])
    assert rec.oracle == 0.375
    assert abs(rec.estimate - rec.oracle) <= 5.0 * rec.std_error


def test_convergence_sweep_order_and_size():
    spec = iid_spec(t_grid=(10.0, 100.0), replications=2_000,
                    test_sets=(TestSet(IidRect((1, 2), (2.0, 4.0))),
                               TestSet(IidRect((1, 2), (1.0, 1.0)))))
    records = harness.convergence_sweep(spec)
    assert len(records) == 4
    keys = [(r.set_id, r.t) for r in records]
    assert keys == sorted(keys)


def test_se_scales_inverse_root_n():
    # t sqrt(p(1-p)) is n-free, so se * sqrt(n) must be flat across three
    # decades up to the sampling noise of p_hat itself
    values = []
    for n in (100_000, 1_000_000, 10_000_000):
        spec = iid_spec(replications=n)
        rec = harness.estimate(spec, 100.0, spec.test_sets[0])
        values.append(rec.std_error * math.sqrt(n))
    assert max(values) / min(values) <= 1.2


# ---------------------------------------------------------------------------
# Portmanteau bracket


def test_bracket_nesting_exact():
    spec = iid_spec(replications=50_000)
    lo, mid, hi = harness.portmanteau_bracket(spec, 100.0, spec.test_sets[0],
                                              0.25)
    assert lo.estimate <= mid.estimate <= hi.estimate
    assert lo.set_id != mid.set_id != hi.set_id
    assert lo.oracle < mid.oracle < hi.oracle


def test_bracket_delta_zero_collapses():
    spec = iid_spec(replications=5_000)
    lo, mid, hi = harness.portmanteau_bracket(spec, 100.0, spec.test_sets[0],
                                              0.0)
    assert lo.estimate == mid.estimate == hi.estimate


def test_bracket_delta_validation():
    spec = iid_spec(replications=100)
    with pytest.raises(DomainError):
        harness.portmanteau_bracket(spec, 100.0, spec.test_sets[0], -0.1)
    with pytest.raises(DomainError):
        harness.portmanteau_bracket(spec, 100.0, spec.test_sets[0], 2.0)


# ---------------------------------------------------------------------------
# Small-jump supremum sweep


def test_smalljump_sweep_shapes_and_budget():
    records = harness.smalljump_sup_sweep(
        CANON, eps=0.5, delta=0.5, t_grid=(1.0, 10.0), n_paths=(500, 300),
        master_seed=20260818)
    assert [r.n for r in records] == [500, 300]
    assert all(math.isnan(r.oracle) for r in records)
    assert all(math.isnan(r.rel_error) for r in records)
    flat = harness.smalljump_sup_sweep(
        CANON, eps=0.5, delta=0.5, t_grid=(1.0, 10.0), n_paths=400,
        master_seed=20260818)
    assert [r.n for r in flat] == [400, 400]


def test_smalljump_sweep_deterministic():
    kw = dict(eps=0.4, delta=0.3, t_grid=(1.0, 4.0), n_paths=600,
              master_seed=20260819, chunk_size=128)
    a = harness.smalljump_sup_sweep(CANON, **kw)
    b = harness.smalljump_sup_sweep(CANON, **kw)
    c = harness.smalljump_sup_sweep(CANON, workers=2, **kw)
    assert a == b == c


def test_smalljump_sweep_validation():
    with pytest.raises(ConfigError):
        harness.smalljump_sup_sweep(PARETO, 0.5, 0.5, (1.0,), 10, 1)
    with pytest.raises(DomainError):
        harness.smalljump_sup_sweep(CANON, 1.5, 0.5, (1.0,), 10, 1)
    with pytest.raises(DomainError):
        harness.smalljump_sup_sweep(CANON, 0.5, 0.0, (1.0,), 10, 1)
    with pytest.raises(ConfigError) as err:
        harness.smalljump_sup_sweep(CANON, 0.5, 0.5, (1.0, 2.0), (10,), 1)
    assert "grid length" in str(err.value)
    with pytest.raises(ConfigError):
        harness.smalljump_sup_sweep(CANON, 0.5, 0.5, (1.0,), (0,), 1)
    with pytest.raises(ConfigError):
        harness.smalljump_sup_sweep(CANON, 0.5, 0.5, (2.0, 1.0), 10, 1)


# ---------------------------------------------------------------------------
# CSV export


def test_csv_lines_golden():
    rec = EstimateRecord("iid_vector", 1.0, 1, "iidrect_i1-2_a2-4", 1000.0,
                         100_000, 0.123456789012, 0.00789, 0.125, -0.0123,
                         False)
    lines = harness.csv_lines([rec])
    assert lines[0] == harness.CSV_HEADER
    assert lines[0].startswith("generator,alpha,order_j,set_id,t,N,")
    assert lines[1] == ("iid_vector,1,1,iidrect_i1-2_a2-4,1000,100000,"
                        "0.123456789,0.00789,0.125,-0.0123,0")


def test_csv_nan_and_flag_rendering():
    rec = EstimateRecord("levy_path", 1.5, 2, "s", 10.0, 100, 0.0, 0.0,
                         math.nan, math.nan, True)
    line = harness.csv_lines([rec])[1]
    assert line.endswith(",nan,nan,1")


def test_write_csv_lf_only(tmp_path):
    rec = EstimateRecord("iid_vector", 1.0, 1, "s", 10.0, 100, 0.5, 0.1,
                         0.5, 0.0, False)
    path = tmp_path / "out.csv"
    harness.write_csv([rec], path)
    raw = path.read_bytes()
    assert b"\r" not in raw
    assert raw.decode().count("\n") == 2
    assert raw.decode().splitlines()[0] == harness.CSV_HEADER
