"""Point measures, Prohorov distance, and the restriction-integral metric."""

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hrvkit import measures, spaces
from hrvkit.errors import AtomCapError, DomainError
from hrvkit.measures import PointMeasure
from hrvkit.selfcheck import prohorov_subset_bruteforce
from hrvkit.spaces import FiniteVector

settings.register_profile("suite", derandomize=True, max_examples=60)
settings.load_profile("suite")


def delta(coords, w=1.0):
    return PointMeasure(((FiniteVector(coords), w),))


weight = st.floats(min_value=0.2, max_value=2.0)
coord = st.floats(min_value=0.0, max_value=3.0)
atom = st.tuples(st.tuples(coord, coord).map(FiniteVector), weight)
measure_st = st.lists(atom, min_size=1, max_size=3).map(
    lambda a: PointMeasure(tuple(a)))


# ---------------------------------------------------------------------------
# Construction, empirical scaling, restriction


def test_point_measure_validation():
    with pytest.raises(DomainError):
        PointMeasure(((FiniteVector((1.0,)), 0.0),))
    with pytest.raises(DomainError):
        PointMeasure(((FiniteVector((1.0,)), math.inf),))
    assert PointMeasure(()).mass == 0.0
    mu = PointMeasure(((FiniteVector((1.0,)), 0.5), (FiniteVector((2.0,)), 0.25)))
    assert mu.mass == 0.75
    assert len(mu) == 2


def test_empirical_weights():
    samples = [FiniteVector((float(k),)) for k in range(4)]
    mu = measures.empirical(samples, 10.0)
    assert all(w == 2.5 for _, w in mu.atoms)
    assert mu.mass == 10.0
    with pytest.raises(DomainError):
        measures.empirical([], 1.0)
    with pytest.raises(DomainError):
        measures.empirical(samples, 0.0)


def test_restrict_keeps_boundary_atoms():
    cone = spaces.origin_cone()
    mu = PointMeasure(((FiniteVector((2.0,)), 1.0), (FiniteVector((1.0,)), 1.0)))
    kept = measures.restrict(mu, cone, 2.0)
    assert len(kept) == 1
    assert kept.atoms[0][0].coords == (2.0,)
    with pytest.raises(DomainError):
        measures.restrict(mu, cone, 0.0)


@given(measure_st, st.floats(min_value=0.1, max_value=4.0),
       st.floats(min_value=0.1, max_value=4.0))
def test_restrict_idempotent_and_monotone(mu, r1, r2):
    cone = spaces.origin_cone()
    a = measures.restrict(mu, cone, r1)
    assert measures.restrict(a, cone, r1).atoms == a.atoms
    lo, hi = min(r1, r2), max(r1, r2)
    inner = measures.restrict(mu, cone, hi)
    outer = measures.restrict(mu, cone, lo)
    assert set(inner.atoms) <= set(outer.atoms)


# ---------------------------------------------------------------------------
# Prohorov distance


def test_prohorov_identity():
    mu = PointMeasure(((FiniteVector((1.0, 2.0)), 0.5),
                       (FiniteVector((0.0, 1.0)), 1.5)))
    assert measures.prohorov(mu, mu) <= 1e-6
    assert measures.prohorov(PointMeasure(()), PointMeasure(())) == 0.0


def test_prohorov_single_atoms_closed_form():
    # equal masses at small distance: the distance itself
    assert measures.prohorov(delta((0.0,)), delta((0.3,))) == 0.3
    # same location, mass mismatch
    assert measures.prohorov(delta((1.0,), 1.0), delta((1.0,), 1.5)) == 0.5
    # far apart: capped by the larger mass
    assert measures.prohorov(delta((0.0,), 0.7), delta((9.0,), 0.4)) == 0.7


def test_prohorov_split_atom():
    # moving half the mass a unit away costs exactly 1/2
    mu = delta((0.0,))
    nu = PointMeasure(((FiniteVector((0.0,)), 0.5), (FiniteVector((1.0,)), 0.5)))
    got = measures.prohorov(mu, nu, tol=1e-7)
    assert abs(got - 0.5) <= 1e-6


def test_prohorov_mass_only_difference():
    mu = PointMeasure(((FiniteVector((0.0,)), 1.0), (FiniteVector((5.0,)), 1.0)))
    nu = PointMeasure(((FiniteVector((0.0,)), 1.0), (FiniteVector((5.0,)), 1.25)))
    got = measures.prohorov(mu, nu)
    assert abs(got - 0.25) <= 1e-6


def test_prohorov_matches_subset_bruteforce():
    mu = PointMeasure(((FiniteVector((0.0, 0.0)), 0.6),
                       (FiniteVector((1.0, 0.5)), 0.9)))
    nu = PointMeasure(((FiniteVector((0.2, 0.0)), 0.5),
                       (FiniteVector((1.0, 1.5)), 0.7),
                       (FiniteVector((3.0, 0.0)), 0.3)))
    fast = measures.prohorov(mu, nu, tol=1e-7)
    brute = prohorov_subset_bruteforce(mu, nu, tol=1e-7)
    assert abs(fast - brute) <= 3e-6


def test_prohorov_atom_cap():
    big = PointMeasure(tuple((FiniteVector((float(k),)), 1.0) for k in range(101)))
    other = PointMeasure(tuple((FiniteVector((float(k) + 0.5,)), 1.0)
                               for k in range(100)))
    with pytest.raises(AtomCapError):
        measures.prohorov(big, other)
    with pytest.raises(AtomCapError):
        measures.prohorov(delta((0.0,)), delta((1.0,)), atom_cap=1)


def test_ground_metric_lookup():
    with pytest.raises(DomainError) as err:
        measures.prohorov(delta((0.0,)), delta((1.0,)), ground="taxicab")
    assert "known" in str(err.value)
    custom = measures.prohorov(delta((0.0,)), delta((1.0,)),
                               ground=lambda x, y: 0.0)
    assert custom == 0.0


@given(measure_st, measure_st)
def test_prohorov_symmetry(mu, nu):
    assert abs(measures.prohorov(mu, nu) - measures.prohorov(nu, mu)) <= 1e-12


@given(measure_st, measure_st, measure_st)
def test_prohorov_triangle(mu, nu, xi):
    dxz = measures.prohorov(mu, xi)
    dxy = measures.prohorov(mu, nu)
    dyz = measures.prohorov(nu, xi)
    assert dxz <= dxy + dyz + 3e-6


# ---------------------------------------------------------------------------
# Bounded-Lipschitz surrogate


def test_bounded_lipschitz_zero_iff_identical():
    mu = PointMeasure(((FiniteVector((1.0, 0.0)), 0.5),
                       (FiniteVector((0.0, 2.0)), 1.0)))
    same = PointMeasure(tuple(reversed(mu.atoms)))
    assert measures.bounded_lipschitz(mu, same) == 0.0
    moved = PointMeasure(((FiniteVector((1.0, 1e-6)), 0.5),
                          (FiniteVector((0.0, 2.0)), 1.0)))
    assert measures.bounded_lipschitz(mu, moved) > 0.0
    assert measures.bounded_lipschitz(PointMeasure(()), PointMeasure(())) == 0.0


def test_bounded_lipschitz_detects_mass_gap():
    got = measures.bounded_lipschitz(delta((2.0,), 1.0), delta((2.0,), 1.6))
    assert got == pytest.approx(0.6, abs=1e-12)


def test_bounded_lipschitz_monotone_in_probes():
    mu = delta((0.0, 0.0))
    nu = delta((1.0, 0.5), 0.8)
    vals = [measures.bounded_lipschitz(mu, nu, n_probe=n) for n in (2, 8, 32)]
    assert vals[0] <= vals[1] <= vals[2]
    with pytest.raises(DomainError):
        measures.bounded_lipschitz(mu, nu, n_probe=0)


@given(measure_st, measure_st)
def test_bounded_lipschitz_below_true_distance(mu, nu):
    # every probe is 1-Lipschitz with |f| <= 1, so the reported sup cannot
    # exceed total mass difference bounds: |mu(f) - nu(f)| <= mass sum
    got = measures.bounded_lipschitz(mu, nu, n_probe=8)
    assert 0.0 <= got <= mu.mass + nu.mass + 1e-12


# ---------------------------------------------------------------------------
# Restriction-integral metric


def test_m0_identity():
    mu = PointMeasure(((FiniteVector((2.0,)), 1.0), (FiniteVector((0.5,)), 1.0)))
    res = measures.m0_distance(mu, mu, spaces.origin_cone())
    assert res.value == 0.0
    assert 0.0 < res.truncation_bound <= 2e-3


def test_m0_two_deltas_quadrature():
    # atoms at clearance 2 and 3 from the origin: the integrand is
    # e^-r * 1/2 up to r = 3 and zero beyond, so the integral is
    # (1 - e^-3) / 2 up to quadrature and truncation error
    res = measures.m0_distance(delta((2.0,)), delta((3.0,)),
                               spaces.origin_cone())
    want = 0.5 * (1.0 - math.exp(-3.0))
    assert abs(res.value - want) <= 0.01


def test_m0_monotone_under_separation():
    base = delta((2.0,))
    near = measures.m0_distance(base, delta((2.1,)), spaces.origin_cone())
    far = measures.m0_distance(base, delta((4.0,)), spaces.origin_cone())
    assert near.value < far.value


def test_m0_bounded_lipschitz_route():
    res = measures.m0_distance(delta((2.0,)), delta((3.0,)),
                               spaces.origin_cone(),
                               use_bounded_lipschitz=True, n_probe=8)
    assert 0.0 < res.value < 1.0


def test_m0_validation():
    mu = delta((1.0,))
    with pytest.raises(DomainError):
        measures.m0_distance(mu, mu, spaces.origin_cone(), r_min=0.0)
    with pytest.raises(DomainError):
        measures.m0_distance(mu, mu, spaces.origin_cone(), r_min=2.0, r_max=1.0)
    with pytest.raises(DomainError):
        measures.m0_distance(mu, mu, spaces.origin_cone(), n_grid=1)


def test_m0_respects_atom_cap():
    mu = PointMeasure(tuple((FiniteVector((1.0 + k,)), 1.0) for k in range(150)))
    nu = PointMeasure(tuple((FiniteVector((1.5 + k,)), 1.0) for k in range(150)))
    with pytest.raises(AtomCapError):
        measures.m0_distance(mu, nu, spaces.origin_cone(), n_grid=2)


# ---------------------------------------------------------------------------
# Serialization


def test_json_roundtrip_all_point_types(tmp_path):
    mu = PointMeasure((
        (FiniteVector((1.0, 2.0)), 0.5),
        (spaces.TruncatedSequence((1.0, 0.5), 8), 1.0),
        (spaces.StepFunction(((0.25, 2.0),), base=0.5), 0.25),
    ))
    text = measures.point_measure_to_json(mu)
    back = measures.point_measure_from_json(text)
    assert back.atoms == mu.atoms
    path = tmp_path / "measure.json"
    measures.save_point_measure(mu, path)
    assert measures.load_point_measure(path).atoms == mu.atoms


def test_json_rejects_malformed_payloads():
    with pytest.raises(DomainError):
        measures.point_measure_from_json("{}")
    with pytest.raises(DomainError):
        measures.point_measure_from_json(
            '[{"location": {"type": "matrix", "coords": [1]}, "weight": 1}]')
