"""Fast invariant battery behind `hrv selfcheck`.

Every check is a named function that raises AssertionError with a readable
message on violation.  The battery covers metric axioms, the transform
continuity bounds, cone-distance brute-force agreement, the Prohorov
subset oracle, oracle constants and homogeneity, sampler distributions,
kernel backend agreement, and harness determinism.  The whole run stays
well under a minute; anything slower belongs in the pytest suite.
"""

from __future__ import annotations

import itertools
import math
import time

import numpy as np
from scipy import stats

from . import harness, kernels, measures, oracles, samplers, spaces, transforms

_TRI_TOL = 1e-12


# ---------------------------------------------------------------------------
# Draw helpers


def _rng(tag: int) -> np.random.Generator:
    return samplers.rng_for(202608, int(tag))


def _rand_vec(rng, dim: int, scale: float = 2.0) -> spaces.FiniteVector:
    return spaces.FiniteVector(tuple(float(v) for v in rng.random(dim) * scale))


def _rand_seq(rng, run: int = 8, depth: int = 16,
              scale: float = 1.5) -> spaces.TruncatedSequence:
    coords = tuple(float(v) for v in rng.random(run) * scale)
    return spaces.TruncatedSequence(coords, depth)


def _rand_step(rng, max_jumps: int = 3) -> spaces.StepFunction:
    n = int(rng.integers(0, max_jumps + 1))
    times = np.sort(rng.random(n))
    while np.unique(times).size < n:
        times = np.sort(rng.random(n))
    times = 0.05 + 0.9 * times
    sizes = rng.random(n) * 2.0 + 0.05
    return spaces.StepFunction(
        tuple((float(t), float(s)) for t, s in zip(times, sizes)), 0.0)


def _rand_measure(rng, max_atoms: int = 4) -> measures.PointMeasure:
    n = int(rng.integers(1, max_atoms + 1))
    atoms = tuple((_rand_vec(rng, 2), float(rng.random() * 1.5 + 0.1))
                  for _ in range(n))
    return measures.PointMeasure(atoms)


# ---------------------------------------------------------------------------
# Independent brute-force oracles (also imported by the pytest suite)


def prohorov_subset_bruteforce(mu: measures.PointMeasure,
                               nu: measures.PointMeasure,
                               ground="l1", tol: float = 1e-6) -> float:
    """Exhaustive-subset Prohorov distance for tiny measures.

    Same bisection skeleton as the production routine, but feasibility is
    checked by enumerating every atom subset instead of running a max-flow.
    """
    if not mu.atoms and not nu.atoms:
        return 0.0
    dist = measures.ground_metric(ground)
    dmat = [[dist(x, y) for y, _ in nu.atoms] for x, _ in mu.atoms]

    def one_sided(src_w, dst_w, rows, eps):
        n = len(src_w)
        for r in range(1, n + 1):
            for subset in itertools.combinations(range(n), r):
                mass = math.fsum(src_w[i] for i in subset)
                expanded = math.fsum(
                    w for l, w in enumerate(dst_w)
                    if any(rows[i][l] <= eps + 1e-12 for i in subset))
                if mass > expanded + eps + 1e-12:
                    return False
        return True

    w = [a for _, a in mu.atoms]
    v = [a for _, a in nu.atoms]
    dmat_t = [[dmat[i][l] for i in range(len(w))] for l in range(len(v))]

    def feasible(eps):
        return (one_sided(w, v, dmat, eps)
                and one_sided(v, w, dmat_t, eps))

    diam = max((d for row in dmat for d in row), default=0.0)
    lo, hi = 0.0, max(1.0, abs(math.fsum(w) - math.fsum(v)) + diam)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if feasible(mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def seq_cone_dist_bruteforce(x: spaces.TruncatedSequence, j: int) -> float:
    """Enumerates every size-j kept-index subset of the prefix."""
    terms = [(min(c, 1.0)) * 2.0 ** -(i + 1) for i, c in enumerate(x.coords)]
    total = math.fsum(terms)
    best = math.inf
    for keep in itertools.combinations(range(len(terms)), min(j, len(terms))):
        cand = total - math.fsum(terms[i] for i in keep)
        if cand < best:
            best = cand
    return best


def finite_cone_dist_bruteforce(x: spaces.FiniteVector, j: int) -> float:
    best = math.inf
    idx = range(x.dim)
    for keep in itertools.combinations(idx, min(j, x.dim)):
        cand = math.fsum(c for i, c in enumerate(x.coords) if i not in keep)
        if cand < best:
            best = cand
    return best


# ---------------------------------------------------------------------------
# Checks: metrics and cones


def check_metric_axioms_finite():
    rng = _rng(1)
    for metric in (spaces.d_p, spaces.d_euclidean):
        for _ in range(200):
            x, y, z = (_rand_vec(rng, 3) for _ in range(3))
            assert metric(x, x) == 0.0, "identity failed"
            assert metric(x, y) == metric(y, x), "symmetry failed"
            assert metric(x, y) >= 0.0, "nonnegativity failed"
            assert metric(x, z) <= metric(x, y) + metric(y, z) + _TRI_TOL, \
                f"triangle failed: {x} {y} {z}"


def check_metric_axioms_sequence():
    rng = _rng(2)
    for metric in (spaces.d_inf, spaces.d_inf_prime):
        for _ in range(200):
            x, y, z = (_rand_seq(rng) for _ in range(3))
            assert metric(x, x) == 0.0, "identity failed"
            assert metric(x, y) == metric(y, x), "symmetry failed"
            assert metric(x, z) <= metric(x, y) + metric(y, z) + _TRI_TOL, \
                "triangle failed"


def check_sandwich():
    rng = _rng(3)
    for _ in range(1000):
        x, y = _rand_seq(rng), _rand_seq(rng)
        lo = spaces.d_inf(x, y)
        mid = spaces.d_inf_prime(x, y)
        assert lo <= mid + _TRI_TOL, f"d_inf > d_inf_prime: {lo} {mid}"
        assert mid <= 2.0 * lo + _TRI_TOL, f"d_inf_prime > 2 d_inf: {mid} {lo}"


def check_cumsum_lipschitz():
    rng = _rng(4)
    for _ in range(1000):
        x, y = _rand_seq(rng), _rand_seq(rng)
        lhs = spaces.d_inf(transforms.cumsum(x), transforms.cumsum(y))
        rhs = 2.0 * spaces.d_inf(x, y)
        assert lhs <= rhs + _TRI_TOL, f"running-sum map broke Lipschitz-2: {lhs} > {rhs}"


def check_proj_continuity_witness():
    rng = _rng(5)
    for _ in range(300):
        x = _rand_seq(rng)
        bump = rng.random(len(x.coords)) * 0.05
        y = spaces.TruncatedSequence(
            tuple(c + float(b) for c, b in zip(x.coords, bump)), x.depth)
        for p in (1, 2, 3):
            d = spaces.d_inf(x, y)
            eps = 2.0 ** p * d * (1.0 + 1e-9)
            if eps > 1.0 or eps == 0.0:
                continue
            lhs = spaces.d_p(transforms.proj(x, p), transforms.proj(y, p))
            assert lhs <= eps, f"projection modulus broken: {lhs} > {eps}"


def check_dist_to_cone_bruteforce():
    rng = _rng(6)
    for trial in range(1000):
        depth = int(rng.integers(4, 13))
        j = int(rng.integers(1, 5))
        x = _rand_seq(rng, run=depth, depth=depth, scale=2.0)
        got = spaces.dist_to_cone(x, spaces.seq_at_most_j_positive(j))
        want = seq_cone_dist_bruteforce(x, j)
        assert got == want, f"greedy != brute force on trial {trial}: {got} {want}"
        v = _rand_vec(rng, int(rng.integers(2, 6)), 3.0)
        jv = int(rng.integers(1, v.dim + 1))
        got_v = spaces.dist_to_cone(v, spaces.at_most_j_positive(jv))
        want_v = finite_cone_dist_bruteforce(v, jv)
        assert got_v == want_v, f"finite-cone greedy != brute force: {got_v} {want_v}"


def check_cone_zero_iff_member():
    rng = _rng(7)
    for _ in range(100):
        x = _rand_seq(rng, run=6, depth=8)
        j = int(rng.integers(1, 4))
        d = spaces.dist_to_cone(x, spaces.seq_at_most_j_positive(j))
        positives = sum(1 for c in x.coords if c > 0)
        assert (d == 0.0) == (positives <= j), "zero-distance mismatch"


def check_a3_strictness():
    rng = _rng(8)
    origin = spaces.origin_cone()
    for _ in range(200):
        # coordinates in (0,1): the capped metric is strictly scale-sensitive here
        coords = tuple(float(v) for v in rng.random(6) * 0.98 + 0.01)
        x = spaces.TruncatedSequence(coords, 8)
        seq_cone = spaces.seq_at_most_j_positive(2)
        for cone in (origin, seq_cone):
            base = spaces.dist_to_cone(x, cone)
            for lam in (1.5, 2.0, 10.0):
                scaled = spaces.dist_to_cone(cone.scale(lam, x), cone)
                assert scaled > base, \
                    f"scaling axiom broke: {scaled} <= {base} at lam={lam}"


def check_scaling_group_law():
    rng = _rng(9)
    actions = [
        (transforms.ScalarAction("standard"), lambda: _rand_vec(rng, 3)),
        (transforms.ScalarAction("standard"), lambda: _rand_seq(rng)),
        (transforms.ScalarAction("power_weights", (1.0, 2.0, 4.0)),
         lambda: _rand_vec(rng, 3)),
        (transforms.ScalarAction("second_coord_only"), lambda: _rand_vec(rng, 2)),
    ]
    for action, draw in actions:
        for _ in range(50):
            x = draw()
            l1 = float(rng.random() * 3 + 0.1)
            l2 = float(rng.random() * 3 + 0.1)
            a = transforms.apply_scaling(action, l1,
                                         transforms.apply_scaling(action, l2, x))
            b = transforms.apply_scaling(action, l1 * l2, x)
            ca, cb = np.asarray(a.coords), np.asarray(b.coords)
            assert np.allclose(ca, cb, rtol=1e-12, atol=1e-12), "group law failed"
            ident = transforms.apply_scaling(action, 1.0, x)
            assert np.allclose(np.asarray(ident.coords), np.asarray(x.coords),
                               rtol=0, atol=0), "unit scaling must be exact"


def check_polar_roundtrip():
    rng = _rng(10)
    got = transforms.polar(spaces.FiniteVector((3.0, 4.0)))
    assert abs(got.radius - 5.0) < 1e-12 and \
        np.allclose(got.angle.coords, (0.6, 0.8), atol=1e-12), "3-4-5 case failed"
    for _ in range(200):
        x = _rand_vec(rng, 3, 5.0)
        if all(c == 0 for c in x.coords):
            continue
        pp = transforms.polar(x)
        back = transforms.polar_inv(pp)
        assert spaces.d_euclidean(x, back) < 1e-9, "polar roundtrip failed"
        norm = math.sqrt(math.fsum(c * c for c in pp.angle.coords))
        assert abs(norm - 1.0) < 1e-9, "angle off the unit sphere"


def check_gpolar_roundtrip():
    rng = _rng(11)
    pp = transforms.gpolar(spaces.FiniteVector((2.0, 6.0)), spaces.axes_cone(2))
    assert abs(pp.radius - 2.0) < 1e-12, "axes-cone radius wrong"
    assert np.allclose(pp.angle.coords, (1.0, 3.0), atol=1e-12), "axes angle wrong"
    cones = [
        (spaces.axes_cone(2), 2), (spaces.at_most_j_positive(2), 4),
        (spaces.origin_cone(), 3), (spaces.half_plane_floor(), 2),
    ]
    for cone, dim in cones:
        done = 0
        while done < 100:
            x = _rand_vec(rng, dim, 3.0)
            coords = tuple(c + 0.05 for c in x.coords)
            x = spaces.FiniteVector(coords)
            if spaces.dist_to_cone(x, cone) <= 1e-6:
                continue
            pp = transforms.gpolar(x, cone)
            assert abs(spaces.dist_to_cone(pp.angle, cone) - 1.0) < 1e-9, \
                "angle clearance off unity"
            back = transforms.gpolar_inv(pp, cone)
            assert spaces.d_euclidean(x, back) < 1e-9, "gpolar roundtrip failed"
            done += 1
    try:
        transforms.gpolar(spaces.FiniteVector((1.0, 1.0)),
                          spaces.seq_at_most_j_positive(1))
    except Exception as exc:
        assert "homogeneous" in str(exc), "wrong rejection message"
    else:
        raise AssertionError("sequence cone must be rejected")


def check_d_sk_upper_vs_brute():
    rng = _rng(12)
    assert spaces.d_sk_step(_rand_step(rng), _rand_step(rng)) >= 0.0
    x0 = spaces.StepFunction(((0.5, 1.0),), 0.0)
    y0 = spaces.StepFunction(((0.6, 1.0),), 0.0)
    got = spaces.d_sk_step(x0, y0, "brute_force")
    assert abs(got - 0.1) <= 2e-3, f"time-shift case off: {got}"
    z = spaces.StepFunction(((0.5, 2.0),), 0.0)
    got = spaces.d_sk_step(z, spaces.StepFunction((), 0.0), "brute_force")
    assert abs(got - 2.0) <= 2e-3, f"jump-removal case off: {got}"
    for _ in range(30):
        x, y = _rand_step(rng), _rand_step(rng)
        up = spaces.d_sk_step(x, y, "upper_bound")
        bf = spaces.d_sk_step(x, y, "brute_force")
        assert up >= bf - 1.1e-3, f"upper bound below brute force: {up} < {bf}"


def check_t_m_properties():
    sizes = spaces.TruncatedSequence((2.0, 1.0, 0.0), 8)
    out = transforms.t_m(sizes, (0.5, 0.25), 2)
    assert out.jumps == ((0.25, 1.0), (0.5, 2.0)), "pairing or sort wrong"
    zero = transforms.t_m(spaces.TruncatedSequence((0.0, 0.0), 4), (0.1, 0.9), 2)
    assert zero.jumps == () and zero.value(0.7) == 0.0, "zero sizes must drop"
    try:
        transforms.t_m(spaces.TruncatedSequence((1.0, 1.0), 4), (0.3, 0.3), 2)
    except Exception:
        pass
    else:
        raise AssertionError("duplicate times must be rejected")


# ---------------------------------------------------------------------------
# Checks: measures


def check_prohorov_atom_pair():
    rng = _rng(13)
    for _ in range(50):
        x, y = _rand_vec(rng, 2), _rand_vec(rng, 2)
        w, v = float(rng.random() + 0.1), float(rng.random() + 0.1)
        mu = measures.PointMeasure(((x, w),))
        nu = measures.PointMeasure(((y, v),))
        d = spaces.d_p(x, y)
        want = min(max(d, abs(w - v)), max(w, v))
        got = measures.prohorov(mu, nu)
        assert abs(got - want) <= 1e-6, f"single-atom case: {got} vs {want}"
        brute = prohorov_subset_bruteforce(mu, nu)
        assert abs(got - brute) <= 3e-6, \
            f"single-atom closed form vs subset oracle: {got} vs {brute}"


def check_prohorov_vs_subset_oracle():
    rng = _rng(14)
    for trial in range(50):
        mu, nu = _rand_measure(rng), _rand_measure(rng)
        fast = measures.prohorov(mu, nu)
        slow = prohorov_subset_bruteforce(mu, nu)
        assert abs(fast - slow) <= 3e-6, \
            f"flow vs subset oracle on trial {trial}: {fast} vs {slow}"


def check_prohorov_metric_axioms():
    rng = _rng(15)
    for _ in range(12):
        mu, nu, pi = (_rand_measure(rng, 3) for _ in range(3))
        assert measures.prohorov(mu, mu) <= 1e-6, "identity failed"
        ab = measures.prohorov(mu, nu)
        ba = measures.prohorov(nu, mu)
        assert abs(ab - ba) <= 2e-6, "symmetry failed"
        ac = measures.prohorov(mu, pi)
        cb = measures.prohorov(pi, nu)
        assert ab <= ac + cb + 3e-6, "triangle failed"


def check_bounded_lipschitz():
    rng = _rng(16)
    mu = _rand_measure(rng)
    assert measures.bounded_lipschitz(mu, mu) == 0.0, "identity failed"
    nu = measures.PointMeasure(mu.atoms + ((_rand_vec(rng, 2), 0.5),))
    d = measures.bounded_lipschitz(mu, nu)
    assert d > 0.0, "distinct measures must separate"
    d_more = measures.bounded_lipschitz(mu, nu, n_probe=64)
    assert d_more >= d, "probe stream must be monotone"


def check_m0_identity_and_monotone():
    cone = spaces.origin_cone()
    one = measures.PointMeasure(((spaces.FiniteVector((1.0,)), 1.0),))
    assert measures.m0_distance(one, one, cone).value == 0.0, "identity failed"
    prev = math.inf
    for n in (1, 2, 4, 8, 16):
        shifted = measures.PointMeasure(
            ((spaces.FiniteVector((1.0 + 1.0 / n,)), 1.0),))
        val = measures.m0_distance(shifted, one, cone).value
        assert val < prev, f"restriction metric not decreasing at n={n}"
        prev = val


def check_m0_quadrature_agreement():
    rng = _rng(17)
    mu, nu = _rand_measure(rng, 3), _rand_measure(rng, 3)
    cone = spaces.origin_cone()
    coarse = measures.m0_distance(mu, nu, cone)
    fine = measures.m0_distance(mu, nu, cone, n_grid=1000)
    tol = 0.01 + 0.05 * max(coarse.value, fine.value)
    assert abs(coarse.value - fine.value) <= tol, \
        f"grid refinement moved the value too much: {coarse.value} vs {fine.value}"
    assert fine.truncation_bound < coarse.truncation_bound + 1e-9


def check_restrict_and_empirical():
    rng = _rng(18)
    cone = spaces.origin_cone()
    mu = _rand_measure(rng)
    r = 0.5
    once = measures.restrict(mu, cone, r)
    twice = measures.restrict(once, cone, r)
    assert once.atoms == twice.atoms, "restriction must be idempotent"
    assert measures.restrict(mu, cone, 0.1).mass >= measures.restrict(
        mu, cone, 1.0).mass, "restriction mass must be monotone"
    emp = measures.empirical([_rand_vec(rng, 2) for _ in range(7)], t=3.0)
    assert abs(emp.mass - 3.0) < 1e-12, "empirical mass must equal t"


# ---------------------------------------------------------------------------
# Checks: oracles


def check_oracle_constants():
    assert oracles.nu_alpha_tail(1.0, 2.0) == 0.5, "tail constant wrong"
    assert oracles.mu_sum_tail(3, 2.0, 2.0) == 0.75, "sum-tail constant wrong"
    rect = oracles.IidRect((1, 2), (2.0, 4.0))
    assert oracles.mu_iid_rect(1, 1.0, rect) == 0.125, "rectangle constant wrong"
    got = oracles.mu_poisson_ordered(2, 1.0, (2.0, 1.0))
    assert abs(got - 0.375) < 1e-14, f"ordered constant wrong: {got}"
    got = oracles.mu_poisson_ordered(2, 1.0, (1.0, 2.0))
    assert abs(got - 0.125) < 1e-14, f"swapped ordered constant wrong: {got}"
    js = oracles.JumpSet((2.0, 1.0), 0.1)
    got = oracles.mu_levy_jumpset(2, 1.0, js)
    assert abs(got - 0.30375) < 1e-14, f"jump-set constant wrong: {got}"


def check_homogeneity_check():
    rng = _rng(19)
    fams = [
        (1, oracles.IidRect((1, 2), (2.0, 4.0))),
        (0, oracles.SumTail(3, 2.0)),
        (2, oracles.OrderedRect((2.0, 1.0))),
        (2, oracles.JumpSet((2.0, 1.0), 0.1)),
        (3, oracles.OrderedRect((3.0, 2.0, 1.0))),
    ]
    for j, fam in fams:
        for lam in (0.5, 2.0, 10.0):
            for alpha in (1.0, 1.5):
                lhs, rhs = oracles.homogeneity_check(j, alpha, fam, lam)
                scale = max(abs(lhs), abs(rhs), 1e-30)
                assert abs(lhs - rhs) / scale <= 1e-10, (
                    f"homogeneity broke for {fam} lam={lam} alpha={alpha}: "
                    f"{lhs} vs {rhs}")
    del rng


def check_ordered_quad_vs_closed():
    for alpha in (1.0, 2.0):
        for thr in ((2.0, 1.0), (1.0, 2.0), (3.0, 0.5), (1.0, 1.0)):
            a = oracles._ordered_envelope(list(thr))
            closed = oracles._ordered_tail_closed(alpha, a)
            viaquad = oracles._ordered_tail_quad(alpha, a)
            assert abs(closed - viaquad) <= 1e-7, \
                f"quadrature disagrees with closed form at {thr}: " \
                f"{viaquad} vs {closed}"


def check_threshold_monotonicity():
    base = oracles.mu_poisson_ordered(2, 1.0, (2.0, 1.0))
    higher = oracles.mu_poisson_ordered(2, 1.0, (2.5, 1.0))
    assert higher <= base, "raising a threshold must not raise the value"
    r0 = oracles.mu_iid_rect(1, 1.0, oracles.IidRect((1, 2), (2.0, 4.0)))
    r1 = oracles.mu_iid_rect(1, 1.0, oracles.IidRect((1, 2), (2.0, 5.0)))
    assert r1 <= r0, "rectangle value must be threshold-monotone"


def check_jumpset_rho_zero():
    js = oracles.JumpSet((2.0, 1.0), 0.0)
    assert oracles.mu_levy_jumpset(2, 1.0, js) == \
        oracles.mu_poisson_ordered(2, 1.0, (2.0, 1.0)), \
        "rho=0 must reduce to the ordered value"


def check_spacing_mc():
    got = oracles.spacing_probability_mc(2, 0.1, 200_000, seed=99173)
    want = oracles.spacing_factor(2, 0.1)
    # 4 sigma at this sample size
    assert abs(got - want) <= 4.0 * math.sqrt(want * (1 - want) / 200_000), \
        f"spacing Monte Carlo off: {got} vs {want}"


# ---------------------------------------------------------------------------
# Checks: samplers


def check_pareto_pullback():
    assert samplers.pareto_quantile(1.0, 0.25) == 4.0, "inverse CDF wrong"
    assert abs(samplers.pareto_quantile(2.0, 0.04) - 5.0) < 1e-12, \
        "inverse CDF wrong at alpha=2"
    pts = samplers.poisson_points_from_gammas((1.0, 2.0, 3.0), 1.0, 8)
    assert pts.coords[:3] == (1.0, 0.5, 1.0 / 3.0), "gamma pullback wrong"


def check_pareto_ks():
    model = samplers.TailModel(1.7)
    draws = samplers.sample_pareto(model, _rng(20), 10_000)
    stat = stats.kstest(draws, lambda x: 1.0 - x ** -1.7).statistic
    crit = 1.6276 / math.sqrt(10_000)
    assert stat < crit, f"KS statistic {stat:.5f} above the 1% critical value"


def check_poisson_points_ordering():
    rng = _rng(21)
    model = samplers.TailModel(1.0, "canonical_levy_measure")
    for _ in range(200):
        pts = samplers.sample_poisson_points(model, 6, rng, depth=8)
        run = pts.coords[:6]
        assert all(run[k] >= run[k + 1] for k in range(5)), "ordering broke"


def check_cp_mean_jump_count():
    rng = _rng(22)
    config = samplers.LevyConfig(
        samplers.TailModel(1.0, "canonical_levy_measure"), small_jump_cutoff=1.0)
    n = 20_000
    total = 0
    for _ in range(n):
        total += len(samplers.sample_compound_poisson(config, rng).jumps)
    mean = total / n
    assert abs(mean - 1.0) <= 4.0 / math.sqrt(n), \
        f"jump-count mean {mean} away from 1"


def check_compensated_small_mean():
    rng = _rng(23)
    config = samplers.LevyConfig(
        samplers.TailModel(1.5, "canonical_levy_measure"),
        small_jump_cutoff=0.1, mode="full_path")
    n = 2000
    acc = 0.0
    for _ in range(n):
        acc += samplers.sample_levy_path(config, 4, rng).small_terminal
    mean = acc / n
    var = 1.5 * (1.0 - 0.1 ** 0.5) / 0.5
    assert abs(mean) <= 4.0 * math.sqrt(var / n), \
        f"compensated small-jump mean {mean} not near 0"


# ---------------------------------------------------------------------------
# Checks: kernels and harness


def _kernel_fixtures(rng):
    n = 4096
    x = (1.0 - rng.random((n, 3))) ** -1.0
    e = rng.standard_exponential((n, 2))
    u = rng.random((n, 2))
    counts = rng.poisson(3.0, 512).astype(np.int64)
    total = int(counts.sum())
    e_flat = rng.standard_exponential(total + 512)
    s_flat = (1.0 + 5.0 * rng.random(total)) ** (-1.0 / 1.5)
    return x, e, u, counts, e_flat, s_flat


def check_backend_agreement():
    rng = _rng(24)
    x, e, u, counts, e_flat, s_flat = _kernel_fixtures(rng)
    results = {}
    for name, impl in kernels.available_backends().items():
        results[name] = (
            impl.rect_hits(x, np.array([2.0, 1.0, 0.5])),
            impl.sum_tail_hits(x, 8.0),
            impl.ordered_rect_hits(e, np.array([0.25, 1.0])),
            impl.jumpset_hits(e, u, np.array([0.25, 1.0]), 0.1),
            impl.smalljump_sup_hits(counts, e_flat, s_flat, 4.0, 5.0),
        )
    vals = list(results.values())
    for other in vals[1:]:
        assert other == vals[0], f"backends disagree: {results}"


def check_smalljump_kernel_vs_reference():
    rng = _rng(25)
    counts = rng.poisson(2.5, 256).astype(np.int64)
    total = int(counts.sum())
    e_flat = rng.standard_exponential(total + 256)
    v = rng.random(total)
    lam, alpha, comp = 5.0, 1.5, 4.0
    s_flat = (1.0 + lam * v) ** (-1.0 / alpha)
    sups = []
    epos = spos = 0
    for n in counts:
        n = int(n)
        e = e_flat[epos:epos + n + 1]
        vv = v[spos:spos + n]
        sup, _ = samplers.smalljump_sup_from_arrays(n, e, vv, lam, alpha, comp)
        sups.append(sup)
        epos += n + 1
        spos += n
    for threshold in (0.5, 2.0, 4.0, 8.0):
        want = sum(1 for s in sups if s > threshold)
        got = kernels.smalljump_sup_hits(counts, e_flat, s_flat, comp, threshold)
        assert got == want, f"kernel count {got} != reference {want} " \
            f"at threshold {threshold}"


def check_jumpset_kernel_vs_object():
    rng = _rng(26)
    alpha, eps, b = 1.0, 0.5, 2.0
    tset = oracles.TestSet(oracles.JumpSet((2.0, 1.0), 0.1))
    fam = tset.family
    bounds = (b * np.asarray(fam.thresholds)) ** -alpha
    gmax = eps ** -alpha
    n = 20_000
    obj_hits = 0
    e_rows = np.empty((n, 2))
    u_rows = np.empty((n, 2))
    for i in range(n):
        gammas = samplers._draw_gammas_below(rng, gmax)
        times = samplers._distinct_uniforms(rng, len(gammas))
        path = samplers.compound_poisson_from_arrays(gammas, times, alpha)
        scaled = transforms.apply_scaling("standard", 1.0 / b, path)
        if tset.contains(scaled):
            obj_hits += 1
        g = list(gammas[:2])
        t = list(times[:2])
        while len(g) < 2:
            g.append(gmax + 1e9)
            t.append(0.5)
        e_rows[i] = (g[0], g[1] - g[0])
        u_rows[i] = t
    kern_hits = kernels.jumpset_hits(e_rows, u_rows, bounds, fam.rho)
    assert kern_hits == obj_hits, \
        f"kernel route {kern_hits} != jump-list route {obj_hits}"


def _mini_spec(n=200_000, chunk=50_000):
    model = samplers.TailModel(1.0)
    tset = oracles.TestSet(oracles.IidRect((1,), (2.0,)))
    return harness.ExperimentSpec(
        generator="iid_vector", model=model, order_j=0, test_sets=(tset,),
        t_grid=(100.0,), replications=n, master_seed=4242, chunk_size=chunk)


def check_harness_determinism():
    spec = _mini_spec()
    tset = spec.test_sets[0]
    a = harness.estimate(spec, 100.0, tset)
    b = harness.estimate(spec, 100.0, tset)
    assert a == b, "same spec must reproduce the same record"
    c = harness.estimate(spec, 100.0, tset, workers=2)
    assert a == c, "worker count must not change the estimate"


def check_harness_zero_bias_shape():
    spec = _mini_spec()
    rec = harness.estimate(spec, 100.0, spec.test_sets[0])
    se = max(rec.std_error, 1e-9)
    assert abs(rec.estimate - 0.5) <= 5.0 * se, \
        f"baseline estimate {rec.estimate} too far from 0.5"
    assert rec.oracle == 0.5 and not rec.unstable


def check_bracket_nesting():
    spec = _mini_spec(50_000)
    lo, mid, hi = harness.portmanteau_bracket(
        spec, 100.0, spec.test_sets[0], 0.25)
    assert lo.estimate <= mid.estimate <= hi.estimate, "bracket must nest"
    assert lo.oracle <= mid.oracle <= hi.oracle, "oracle bracket must nest"
    z = harness.portmanteau_bracket(spec, 100.0, spec.test_sets[0], 0.0)
    assert z[0].estimate == z[1].estimate == z[2].estimate, \
        "zero delta must collapse the bracket"


# ---------------------------------------------------------------------------
# Registry and runner

CHECKS = [
    ("metric_axioms_finite", check_metric_axioms_finite),
    ("metric_axioms_sequence", check_metric_axioms_sequence),
    ("sandwich", check_sandwich),
    ("cumsum_lipschitz", check_cumsum_lipschitz),
    ("proj_continuity_witness", check_proj_continuity_witness),
    ("dist_to_cone_bruteforce", check_dist_to_cone_bruteforce),
    ("cone_zero_iff_member", check_cone_zero_iff_member),
    ("a3_strictness", check_a3_strictness),
    ("scaling_group_law", check_scaling_group_law),
    ("polar_roundtrip", check_polar_roundtrip),
    ("gpolar_roundtrip", check_gpolar_roundtrip),
    ("d_sk_upper_vs_brute", check_d_sk_upper_vs_brute),
    ("t_m_properties", check_t_m_properties),
    ("prohorov_atom_pair", check_prohorov_atom_pair),
    ("prohorov_vs_subset_oracle", check_prohorov_vs_subset_oracle),
    ("prohorov_metric_axioms", check_prohorov_metric_axioms),
    ("bounded_lipschitz", check_bounded_lipschitz),
    ("m0_identity_and_monotone", check_m0_identity_and_monotone),
    ("m0_quadrature_agreement", check_m0_quadrature_agreement),
    ("restrict_and_empirical", check_restrict_and_empirical),
    ("oracle_constants", check_oracle_constants),
    ("homogeneity_check", check_homogeneity_check),
    ("ordered_quad_vs_closed", check_ordered_quad_vs_closed),
    ("threshold_monotonicity", check_threshold_monotonicity),
    ("jumpset_rho_zero", check_jumpset_rho_zero),
    ("spacing_mc", check_spacing_mc),
    ("pareto_pullback", check_pareto_pullback),
    ("pareto_ks", check_pareto_ks),
    ("poisson_points_ordering", check_poisson_points_ordering),
    ("cp_mean_jump_count", check_cp_mean_jump_count),
    ("compensated_small_mean", check_compensated_small_mean),
    ("backend_agreement", check_backend_agreement),
    ("smalljump_kernel_vs_reference", check_smalljump_kernel_vs_reference),
    ("jumpset_kernel_vs_object", check_jumpset_kernel_vs_object),
    ("harness_determinism", check_harness_determinism),
    ("harness_zero_bias_shape", check_harness_zero_bias_shape),
    ("bracket_nesting", check_bracket_nesting),
]


def run_selfcheck(verbose: bool = True) -> int:
    """Run the battery; return 0 when clean, 3 when anything failed."""
    failures = []
    t_start = time.perf_counter()
    for name, fn in CHECKS:
        t0 = time.perf_counter()
        try:
            fn()
        except Exception as exc:
            failures.append(name)
            if verbose:
                print(f"FAIL {name}: {exc}")
        else:
            if verbose:
                print(f"ok   {name} ({time.perf_counter() - t0:.2f}s)")
    elapsed = time.perf_counter() - t_start
    if verbose:
        n = len(CHECKS)
        if failures:
            print(f"selfcheck: {n - len(failures)}/{n} passed in "
                  f"{elapsed:.1f}s; FAILED: {', '.join(failures)}")
        else:
            print(f"selfcheck: {n}/{n} passed in {elapsed:.1f}s")
    return 3 if failures else 0
