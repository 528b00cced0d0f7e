"""Closed-form limit-measure values on the supported test-set families.

Each Monte Carlo experiment in the harness estimates the mass that a scaled
sample distribution puts on a test set; the functions here return the exact
limit value for that set, so the harness can report relative errors against
something trustworthy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .errors import DomainError, UnsupportedPairingError
from .spaces import FiniteVector, StepFunction, TruncatedSequence
from .transforms import cumsum, proj

# ---------------------------------------------------------------------------
# Test-set families


def _positive_tuple(values, what) -> tuple[float, ...]:
    out = tuple(float(v) for v in values)
    if not out:
        raise DomainError(f"{what} must be nonempty")
    if any(v <= 0 or math.isnan(v) for v in out):
        raise DomainError(f"{what} must be positive")
    return out


@dataclass(frozen=True)
class IidRect:
    """Rectangle set: coordinate i_k exceeds a_k for every k.

    Indices are 1-based and strictly increasing.
    """

    indices: tuple[int, ...]
    thresholds: tuple[float, ...]

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        thr = _positive_tuple(self.thresholds, "thresholds")
        if len(idx) != len(thr):
            raise DomainError("need one threshold per index")
        if any(i < 1 for i in idx):
            raise DomainError("indices are 1-based")
        if any(idx[k] >= idx[k + 1] for k in range(len(idx) - 1)):
            raise DomainError("indices must be strictly increasing")
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "thresholds", thr)

    @property
    def m(self) -> int:
        return len(self.indices)

    def contains(self, x: FiniteVector | TruncatedSequence) -> bool:
        coords = x.coords
        if self.indices[-1] > len(coords):
            raise DomainError("sample has fewer coordinates than the set indexes")
        return all(coords[i - 1] > a for i, a in zip(self.indices, self.thresholds))


@dataclass(frozen=True)
class OrderedRect:
    """Rectangle for nonincreasing points: k-th largest exceeds a_k.

    Thresholds need not themselves be ordered; on nonincreasing points the
    set is unchanged by replacing a_k with max(a_k, ..., a_j).
    """

    thresholds: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(
            self, "thresholds", _positive_tuple(self.thresholds, "thresholds"))

    @property
    def j(self) -> int:
        return len(self.thresholds)

    def contains(self, x: TruncatedSequence) -> bool:
        coords = x.coords
        if self.j > len(coords):
            raise DomainError("sample has fewer coordinates than thresholds")
        return all(coords[k] > a for k, a in enumerate(self.thresholds))


@dataclass(frozen=True)
class SumTail:
    """Half-space for partial sums: x_1 + ... + x_p exceeds x."""

    p: int
    x: float

    def __post_init__(self):
        if int(self.p) < 1:
            raise DomainError("p must be a positive integer")
        if self.x <= 0:
            raise DomainError("threshold must be positive")
        object.__setattr__(self, "p", int(self.p))
        object.__setattr__(self, "x", float(self.x))

    def contains(self, x: TruncatedSequence) -> bool:
        # Deliberately routed through the running-sum and projection maps:
        # this is the reference implementation the fast kernels must match.
        return proj(cumsum(x), self.p).coords[self.p - 1] > self.x


@dataclass(frozen=True)
class JumpSet:
    """Jump functional set for step functions.

    Membership: the k-th largest jump exceeds a_k for each k, and the jump
    times of the j largest jumps are pairwise at least rho apart.  Thresholds
    must be nonincreasing; rho lies in [0, 1/max(1, j-1)).
    """

    thresholds: tuple[float, ...]
    rho: float = 0.0

    def __post_init__(self):
        thr = _positive_tuple(self.thresholds, "thresholds")
        if any(thr[k] < thr[k + 1] for k in range(len(thr) - 1)):
            raise DomainError("thresholds must be nonincreasing")
        rho = float(self.rho)
        if not 0.0 <= rho < 1.0 / max(1, len(thr) - 1):
            raise DomainError(
                f"rho must lie in [0, {1.0 / max(1, len(thr) - 1):g})")
        object.__setattr__(self, "thresholds", thr)
        object.__setattr__(self, "rho", rho)

    @property
    def j(self) -> int:
        return len(self.thresholds)

    def contains(self, x: StepFunction) -> bool:
        j = self.j
        if len(x.jumps) < j:
            return False
        order = sorted(x.jumps, key=lambda ts: ts[1], reverse=True)[:j]
        if any(order[k][1] <= a for k, a in enumerate(self.thresholds)):
            return False
        times = sorted(t for t, _ in order)
        return all(times[k + 1] - times[k] >= self.rho for k in range(j - 1))


Family = IidRect | OrderedRect | SumTail | JumpSet


@dataclass(frozen=True)
class TestSet:
    """A test set: membership family plus its cone clearance.

    The clearance is the largest threshold deflation that keeps the set
    bounded away from the removed cone: the smallest threshold of the family.
    """

    family: Family

    @property
    def clearance(self) -> float:
        fam = self.family
        if isinstance(fam, SumTail):
            return fam.x
        return min(fam.thresholds)

    @property
    def set_id(self) -> str:
        fam = self.family
        if isinstance(fam, IidRect):
            idx = "-".join(str(i) for i in fam.indices)
            thr = "-".join(f"{a:g}" for a in fam.thresholds)
            return f"iidrect_i{idx}_a{thr}"
        if isinstance(fam, OrderedRect):
            thr = "-".join(f"{a:g}" for a in fam.thresholds)
            return f"ordrect_a{thr}"
        if isinstance(fam, SumTail):
            return f"sumtail_p{fam.p}_x{fam.x:g}"
        thr = "-".join(f"{a:g}" for a in fam.thresholds)
        return f"jumpset_a{thr}_rho{fam.rho:g}"

    def contains(self, point) -> bool:
        return self.family.contains(point)

    def shifted(self, delta: float) -> "TestSet":
        """Raise every threshold by delta (deflate) or lower it (inflate)."""
        fam = self.family
        if isinstance(fam, IidRect):
            return TestSet(IidRect(
                fam.indices, tuple(a + delta for a in fam.thresholds)))
        if isinstance(fam, OrderedRect):
            return TestSet(OrderedRect(tuple(a + delta for a in fam.thresholds)))
        if isinstance(fam, SumTail):
            return TestSet(SumTail(fam.p, fam.x + delta))
        return TestSet(JumpSet(
            tuple(a + delta for a in fam.thresholds), fam.rho))

    def scaled(self, lam: float) -> "TestSet":
        """The set lam * A: every threshold multiplied by lam."""
        fam = self.family
        if isinstance(fam, IidRect):
            return TestSet(IidRect(
                fam.indices, tuple(lam * a for a in fam.thresholds)))
        if isinstance(fam, OrderedRect):
            return TestSet(OrderedRect(tuple(lam * a for a in fam.thresholds)))
        if isinstance(fam, SumTail):
            return TestSet(SumTail(fam.p, lam * fam.x))
        return TestSet(JumpSet(
            tuple(lam * a for a in fam.thresholds), fam.rho))


# ---------------------------------------------------------------------------
# Limit-measure values


def nu_alpha_tail(alpha: float, x: float) -> float:
    """Tail of the power-law limit measure on (0, infinity)."""
    if x <= 0:
        raise DomainError("tail argument must be positive")
    if alpha <= 0:
        raise DomainError("tail index must be positive")
    return x ** -alpha


def mu_iid_rect(j: int, alpha: float, rect: IidRect) -> float:
    """Order-j limit of the iid model on a rectangle with m components.

    m = j+1 gives the product of coordinate tails; m > j+1 gives 0; a
    rectangle with m < j+1 components is not bounded away from the removed
    cone at this order, and the returned infinity marks it as rejected.
    """
    if j < 0:
        raise DomainError("order must be a nonnegative integer")
    m = rect.m
    if m == j + 1:
        return math.prod(a ** -alpha for a in rect.thresholds)
    if m > j + 1:
        return 0.0
    return math.inf


def mu_sum_tail(p: int, alpha: float, x: float) -> float:
    """Single-big-jump limit for a p-fold partial sum."""
    if p < 1:
        raise DomainError("p must be a positive integer")
    return p * nu_alpha_tail(alpha, x)


def _ordered_envelope(thresholds: tuple[float, ...]) -> list[float]:
    # On nonincreasing points, threshold k may be raised to the max of the
    # later ones without changing the set.
    out = list(thresholds)
    for k in range(len(out) - 2, -1, -1):
        out[k] = max(out[k], out[k + 1])
    return out


def _ordered_tail_closed(alpha: float, a: list[float]) -> float:
    b = [t ** -alpha for t in a]
    if len(b) == 1:
        return b[0]
    # two ordered coordinates; b is nondecreasing after the envelope
    return b[0] * b[1] - 0.5 * b[0] ** 2


_QUAD_ABS_TOL = 1e-8


def _ordered_tail_quad(alpha: float, a: list[float]) -> float:
    """Recursive one-dimensional quadrature over the ordered region.

    In s = x**-alpha coordinates the measure is Lebesgue on
    0 < s_1 <= ... <= s_j with s_k < a_k**-alpha.
    """
    b = [t ** -alpha for t in a]
    j = len(b)

    def level(k: int, s: float) -> float:
        if k == j:
            return 1.0
        if s >= b[k]:
            return 0.0
        val, _ = quad(lambda sig: level(k + 1, sig), s, b[k],
                      epsabs=_QUAD_ABS_TOL / (10 * j), epsrel=1e-10, limit=200)
        return val

    return level(0, 0.0)


def mu_poisson_ordered(j: int, alpha: float, thresholds) -> float:
    """Order-j limit of the ordered-points model on a rectangle.

    The limit is the j-fold product of power-law tails restricted to the
    nonincreasing region.  Orders 1 and 2 use closed forms; higher orders
    fall back to recursive quadrature with absolute tolerance 1e-8.
    """
    if j < 1:
        raise DomainError("order must be a positive integer")
    thr = _positive_tuple(thresholds, "thresholds")
    if len(thr) != j:
        raise DomainError("need exactly j thresholds")
    a = _ordered_envelope(thr)
    if j <= 2:
        return _ordered_tail_closed(alpha, a)
    return _ordered_tail_quad(alpha, a)


def spacing_factor(j: int, rho: float) -> float:
    """Probability that j iid uniform(0,1) points are pairwise rho apart."""
    if j < 1:
        raise DomainError("j must be a positive integer")
    if not 0.0 <= rho < 1.0 / max(1, j - 1):
        raise DomainError("rho out of range")
    return (1.0 - (j - 1) * rho) ** j


def mu_levy_jumpset(j: int, alpha: float, jump_set: JumpSet) -> float:
    """Order-j limit of the jump model: ordered size factor times time factor."""
    if j != jump_set.j:
        raise DomainError("order must match the number of thresholds")
    size = mu_poisson_ordered(j, alpha, jump_set.thresholds)
    return size * spacing_factor(j, jump_set.rho)


def spacing_probability_mc(j: int, rho: float, n_samples: int, seed: int) -> float:
    """Monte Carlo estimate of the uniform minimum-spacing probability.

    Independent of spacing_factor on purpose: this is the validation oracle
    for the closed-form time factor.
    """
    if j < 1 or n_samples < 1:
        raise DomainError("need j >= 1 and at least one sample")
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    hits = 0
    remaining = int(n_samples)
    chunk = 1_000_000
    while remaining > 0:
        n = min(chunk, remaining)
        u = rng.random((n, j))
        u.sort(axis=1)
        if j == 1:
            ok = np.ones(n, dtype=bool)
        else:
            ok = (np.diff(u, axis=1) >= rho).all(axis=1)
        hits += int(ok.sum())
        remaining -= n
    return hits / n_samples


# ---------------------------------------------------------------------------
# Dispatch and homogeneity


@dataclass(frozen=True)
class LimitMeasureId:
    """Names one of the three limit-measure families at a given order."""

    kind: str  # mu_iid | mu_poisson_ordered | mu_levy
    j: int
    alpha: float

    _KINDS = ("mu_iid", "mu_poisson_ordered", "mu_levy")

    def __post_init__(self):
        if self.kind not in self._KINDS:
            raise DomainError(f"unknown limit measure {self.kind!r}")
        if self.kind == "mu_iid":
            if self.j < 0:
                raise DomainError("mu_iid order must be >= 0")
        elif self.j < 1:
            raise DomainError(f"{self.kind} order must be >= 1")

    @property
    def product_order(self) -> int:
        """Number of tail factors: governs the scaling exponent."""
        return self.j + 1 if self.kind == "mu_iid" else self.j

    def evaluate(self, family: Family) -> float:
        if self.kind == "mu_iid":
            if not isinstance(family, IidRect):
                raise UnsupportedPairingError("mu_iid evaluates IidRect sets")
            return mu_iid_rect(self.j, self.alpha, family)
        if self.kind == "mu_poisson_ordered":
            if not isinstance(family, OrderedRect):
                raise UnsupportedPairingError(
                    "mu_poisson_ordered evaluates OrderedRect sets")
            return mu_poisson_ordered(self.j, self.alpha, family.thresholds)
        if not isinstance(family, JumpSet):
            raise UnsupportedPairingError("mu_levy evaluates JumpSet sets")
        return mu_levy_jumpset(self.j, self.alpha, family)


def oracle_value(j: int, alpha: float, family: Family) -> float:
    """Limit value for a family at order j, dispatched on the family type."""
    if isinstance(family, IidRect):
        return mu_iid_rect(j, alpha, family)
    if isinstance(family, SumTail):
        if j != 0:
            raise UnsupportedPairingError(
                "partial-sum tails only have an order-0 limit")
        return mu_sum_tail(family.p, alpha, family.x)
    if isinstance(family, OrderedRect):
        return mu_poisson_ordered(j, alpha, family.thresholds)
    if isinstance(family, JumpSet):
        return mu_levy_jumpset(j, alpha, family)
    raise UnsupportedPairingError(f"no oracle for {type(family).__name__}")


def homogeneity_check(j: int, alpha: float, family: Family, lam: float):
    """Both sides of the scaling identity for a limit measure.

    Returns (value on the lam-scaled set, lam**(-m alpha) times the value on
    the set), where m is the number of tail factors: j+1 for the iid family,
    1 for partial-sum tails, j otherwise.  The caller asserts equality.
    """
    if lam <= 0:
        raise DomainError("lam must be positive")
    if isinstance(family, IidRect):
        m = j + 1
    elif isinstance(family, SumTail):
        m = 1
    else:
        m = j
    scaled_family = TestSet(family).scaled(lam).family
    return (oracle_value(j, alpha, scaled_family),
            lam ** (-m * alpha) * oracle_value(j, alpha, family))
