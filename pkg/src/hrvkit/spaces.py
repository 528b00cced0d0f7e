"""Sample spaces and their metrics.

Three point types cover the spaces used by the experiments: nonnegative
finite-dimensional vectors, truncated nonnegative sequences (a stored prefix
with an implicit zero tail), and nondecreasing cadlag step functions on [0,1]
given by a jump list.  Cones are the removed closed sets; each cone knows its
distance function and the scalar action it is compatible with.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

from .errors import DimensionMismatchError, DomainError, UnsupportedPairingError

DEFAULT_TRUNCATION_DEPTH = 64


@dataclass(frozen=True)
class FiniteVector:
    """A point of R_+^p."""

    coords: tuple[float, ...]

    def __post_init__(self):
        coords = tuple(float(c) for c in self.coords)
        if len(coords) < 1:
            raise DomainError("FiniteVector needs at least one coordinate")
        if any(c < 0 or math.isnan(c) for c in coords):
            raise DomainError("coordinates must be nonnegative")
        object.__setattr__(self, "coords", coords)

    @property
    def dim(self) -> int:
        return len(self.coords)


@dataclass(frozen=True)
class TruncatedSequence:
    """A point of the nonnegative sequence space, stored as a prefix.

    Components beyond the truncation depth are implicitly zero, so every
    metric below is exact for the represented sequence; the truncation itself
    perturbs any genuinely infinite sequence by at most 2**-depth.
    """

    coords: tuple[float, ...]
    depth: int = DEFAULT_TRUNCATION_DEPTH

    def __post_init__(self):
        depth = int(self.depth)
        if depth < 1:
            raise DomainError("truncation depth must be a positive integer")
        coords = tuple(float(c) for c in self.coords)
        if len(coords) > depth:
            raise DomainError("prefix longer than the truncation depth")
        if any(c < 0 or math.isnan(c) for c in coords):
            raise DomainError("coordinates must be nonnegative")
        coords = coords + (0.0,) * (depth - len(coords))
        object.__setattr__(self, "coords", coords)
        object.__setattr__(self, "depth", depth)


@dataclass(frozen=True)
class StepFunction:
    """A nondecreasing step function x(t) = base + sum of sizes with time <= t.

    Jump times are strictly increasing and lie in (0,1); sizes are positive.
    """

    jumps: tuple[tuple[float, float], ...]
    base: float = 0.0

    def __post_init__(self):
        jumps = tuple((float(t), float(s)) for t, s in self.jumps)
        prev = 0.0
        for t, s in jumps:
            if not 0.0 < t < 1.0:
                raise DomainError("jump times must lie in (0,1)")
            if t <= prev:
                raise DomainError("jump times must be strictly increasing")
            if s <= 0.0:
                raise DomainError("jump sizes must be positive")
            prev = t
        object.__setattr__(self, "jumps", jumps)
        object.__setattr__(self, "base", float(self.base))

    @property
    def jump_times(self) -> tuple[float, ...]:
        return tuple(t for t, _ in self.jumps)

    @property
    def jump_sizes(self) -> tuple[float, ...]:
        return tuple(s for _, s in self.jumps)

    def value(self, t: float) -> float:
        v = self.base
        for time, size in self.jumps:
            if time <= t:
                v += size
            else:
                break
        return v

    def levels(self) -> tuple[float, ...]:
        """Cumulative levels (base, base + s_1, base + s_1 + s_2, ...)."""
        out = [self.base]
        for _, s in self.jumps:
            out.append(out[-1] + s)
        return tuple(out)

    def sup_abs(self) -> float:
        # Nondecreasing, so the sup of |x| sits at an endpoint level.
        lv = self.levels()
        return max(abs(lv[0]), abs(lv[-1]))


Point = FiniteVector | TruncatedSequence | StepFunction


# ---------------------------------------------------------------------------
# Cones


@dataclass(frozen=True)
class ConeSpec:
    """A removed cone: identity, distance function, and scalar action.

    kind is one of origin, axes, at_most_j_positive, seq_at_most_j_positive,
    step_at_most_j_jumps, half_plane_floor; param carries the j (or p for
    axes) where applicable.  The scale action names the compatible action id
    understood by transforms.apply_scaling.
    """

    kind: str
    param: int = 0
    scale_action: str = "standard"

    _KINDS = (
        "origin",
        "axes",
        "at_most_j_positive",
        "seq_at_most_j_positive",
        "step_at_most_j_jumps",
        "half_plane_floor",
    )

    def __post_init__(self):
        if self.kind not in self._KINDS:
            raise DomainError(f"unknown cone kind {self.kind!r}")
        if self.kind in ("axes", "at_most_j_positive", "seq_at_most_j_positive",
                         "step_at_most_j_jumps") and self.param < 1:
            raise DomainError(f"cone {self.kind} needs a positive parameter")

    def distance(self, x: Point) -> float:
        return dist_to_cone(x, self)

    def scale(self, lam: float, x: Point) -> Point:
        from .transforms import apply_scaling

        return apply_scaling(self.scale_action, lam, x)


def origin_cone() -> ConeSpec:
    return ConeSpec("origin")


def axes_cone(p: int) -> ConeSpec:
    return ConeSpec("axes", param=int(p))


def at_most_j_positive(j: int) -> ConeSpec:
    return ConeSpec("at_most_j_positive", param=int(j))


def seq_at_most_j_positive(j: int) -> ConeSpec:
    return ConeSpec("seq_at_most_j_positive", param=int(j))


def step_at_most_j_jumps(j: int) -> ConeSpec:
    return ConeSpec("step_at_most_j_jumps", param=int(j))


def half_plane_floor() -> ConeSpec:
    return ConeSpec("half_plane_floor", scale_action="second_coord_only")


# ---------------------------------------------------------------------------
# Metrics


def d_p(x: FiniteVector, y: FiniteVector) -> float:
    """L1 metric on R_+^p."""
    if x.dim != y.dim:
        raise DimensionMismatchError(f"dimension mismatch: {x.dim} vs {y.dim}")
    return math.fsum(abs(a - b) for a, b in zip(x.coords, y.coords))


def d_euclidean(x: FiniteVector, y: FiniteVector) -> float:
    if x.dim != y.dim:
        raise DimensionMismatchError(f"dimension mismatch: {x.dim} vs {y.dim}")
    return math.sqrt(math.fsum((a - b) ** 2 for a, b in zip(x.coords, y.coords)))


def _paired_coords(x: TruncatedSequence, y: TruncatedSequence):
    k = max(x.depth, y.depth)
    xc = x.coords + (0.0,) * (k - x.depth)
    yc = y.coords + (0.0,) * (k - y.depth)
    return xc, yc, k


def d_inf(x: TruncatedSequence, y: TruncatedSequence) -> float:
    """Sequence-space metric: sum over i of (|x_i - y_i| and 1) / 2^i.

    Exact for truncated sequences because both tails are zero.
    """
    xc, yc, k = _paired_coords(x, y)
    return math.fsum(min(abs(xc[i] - yc[i]), 1.0) * 2.0 ** -(i + 1) for i in range(k))


def d_inf_prime(x: TruncatedSequence, y: TruncatedSequence) -> float:
    """Equivalent sequence metric built from capped partial L1 sums.

    The partial sums are constant beyond the stored prefix, so the infinite
    tail of the defining series is the closed-form remainder
    (capped final sum) * 2^-depth.
    """
    xc, yc, k = _paired_coords(x, y)
    terms = []
    partial = 0.0
    for i in range(k):
        partial += abs(xc[i] - yc[i])
        terms.append(min(partial, 1.0) * 2.0 ** -(i + 1))
    terms.append(min(partial, 1.0) * 2.0 ** -k)
    return math.fsum(terms)


# ---------------------------------------------------------------------------
# Distance to cones


def _seq_cone_terms(x: TruncatedSequence) -> list[float]:
    return [min(c, 1.0) * 2.0 ** -(i + 1) for i, c in enumerate(x.coords)]


def dist_to_cone(x: Point, cone: ConeSpec) -> float:
    """Distance from a point to a removed cone in the space's own metric."""
    kind = cone.kind
    if kind == "origin":
        if isinstance(x, FiniteVector):
            return math.fsum(x.coords)
        if isinstance(x, TruncatedSequence):
            return math.fsum(_seq_cone_terms(x))
        if isinstance(x, StepFunction):
            return x.sup_abs()
        raise UnsupportedPairingError(f"origin cone does not handle {type(x).__name__}")
    if kind in ("axes", "at_most_j_positive"):
        if not isinstance(x, FiniteVector):
            raise UnsupportedPairingError(f"cone {kind} needs a FiniteVector")
        j = 1 if kind == "axes" else cone.param
        if kind == "axes" and x.dim != cone.param:
            raise DimensionMismatchError(
                f"axes cone of R_+^{cone.param} got a {x.dim}-vector")
        ordered = sorted(x.coords, reverse=True)
        return math.fsum(ordered[j:])
    if kind == "seq_at_most_j_positive":
        if not isinstance(x, TruncatedSequence):
            raise UnsupportedPairingError("sequence cone needs a TruncatedSequence")
        terms = _seq_cone_terms(x)
        # The objective separates over indices, so keeping the j largest
        # weighted terms is exactly optimal.
        keep = sorted(terms, reverse=True)[: cone.param]
        return math.fsum(terms) - math.fsum(keep)
    if kind == "half_plane_floor":
        if not isinstance(x, FiniteVector) or x.dim != 2:
            raise UnsupportedPairingError("half-plane floor cone lives in R_+^2")
        return x.coords[1]
    if kind == "step_at_most_j_jumps":
        raise UnsupportedPairingError(
            "no exact path-space distance to the few-jumps cone is offered; "
            "use kth_largest_jump for a bounded-away certificate")
    raise UnsupportedPairingError(f"unknown cone kind {kind!r}")


def kth_largest_jump(x: StepFunction, k: int) -> float:
    """Size of the k-th largest jump, 0 when there are fewer than k jumps."""
    if k < 1:
        raise DomainError("k must be a positive integer")
    sizes = sorted((s for _, s in x.jumps), reverse=True)
    return sizes[k - 1] if k <= len(sizes) else 0.0


# ---------------------------------------------------------------------------
# Skorohod-type distance for step functions

_BRUTE_FORCE_MAX_JUMPS = 3
_BRUTE_FORCE_TOL = 1e-3


def d_sk_step(x: StepFunction, y: StepFunction, mode: str = "upper_bound") -> float:
    """Distance between nondecreasing step functions under time distortion.

    The value optimized is (sup |lambda - identity|) max (sup |x(lambda) - y|)
    over strictly increasing time changes lambda of [0,1].

    upper_bound pairs jump times in order through a piecewise-linear time
    change (padding the shorter jump list with zero-size jumps), which is an
    admissible choice and hence a true upper bound.  brute_force searches the
    interleavings of x's perturbed jump times against y's timeline and
    bisects on the value; it needs at most 3 jumps per function and certifies
    the result within 1e-3.
    """
    if mode == "upper_bound":
        return _d_sk_upper(x, y)
    if mode == "brute_force":
        if len(x.jumps) > _BRUTE_FORCE_MAX_JUMPS or len(y.jumps) > _BRUTE_FORCE_MAX_JUMPS:
            raise UnsupportedPairingError(
                "brute-force distance supports at most "
                f"{_BRUTE_FORCE_MAX_JUMPS} jumps per function")
        return _d_sk_brute(x, y)
    raise DomainError(f"unknown mode {mode!r}; use 'upper_bound' or 'brute_force'")


def _d_sk_upper(x: StepFunction, y: StepFunction) -> float:
    sx, sy = x.jump_times, y.jump_times
    m, n = len(sx), len(sy)
    time_part = max((abs(sx[k] - sy[k]) for k in range(min(m, n))), default=0.0)
    cx, cy = x.levels(), y.levels()
    level_part = max(
        abs(cx[min(k, m)] - cy[min(k, n)]) for k in range(max(m, n) + 1))
    return max(time_part, level_part)


def _d_sk_brute(x: StepFunction, y: StepFunction) -> float:
    hi = _d_sk_upper(x, y)
    if _sk_feasible(x, y, 0.0):
        return 0.0
    lo = 0.0
    # hi is achievable, so the value lies in [lo, hi]; certify within 1e-3.
    while hi - lo > _BRUTE_FORCE_TOL / 2.0:
        mid = 0.5 * (lo + hi)
        if _sk_feasible(x, y, mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def _sk_feasible(x: StepFunction, y: StepFunction, c: float) -> bool:
    """Can some admissible time change bring both parts at or below c?

    Each x jump either lands strictly between two consecutive y times (an
    open slot, coded 2l for the gap after y's l-th time) or exactly on one
    (coded 2l-1).  Slot codes must be nondecreasing along x's jumps and an
    exact-match slot cannot repeat.  For every interleaving we check the
    level gap on each nonempty elementary interval and greedily place the
    perturbed times within [s_k - c, s_k + c].
    """
    eps = 1e-12
    sx, sy = x.jump_times, y.jump_times
    m, n = len(sx), len(sy)
    cx, cy = x.levels(), y.levels()
    bounds = (0.0,) + sy + (1.0,)

    if m == 0:
        return all(abs(cx[0] - cy[l]) <= c + eps for l in range(n + 1))

    codes = range(2 * n + 1)  # even 2l: open slot l; odd 2l-1: exactly on y time l
    for pattern in itertools.product(codes, repeat=m):
        if any(pattern[k] > pattern[k + 1] for k in range(m - 1)):
            continue
        if any(pattern[k] == pattern[k + 1] and pattern[k] % 2 == 1
               for k in range(m - 1)):
            continue
        if _sk_levels_ok(pattern, cx, cy, n, c, eps) and \
                _sk_times_ok(pattern, sx, bounds, c, eps):
            return True
    return False


def _sk_levels_ok(pattern, cx, cy, n, c, eps) -> bool:
    m = len(pattern)
    if abs(cx[0] - cy[0]) > c + eps:
        return False
    i = 0
    ptr = 0
    for l in range(1, n + 1):
        while ptr < m and pattern[ptr] == 2 * (l - 1):
            i += 1
            ptr += 1
            if abs(cx[i] - cy[l - 1]) > c + eps:
                return False
        if ptr < m and pattern[ptr] == 2 * l - 1:
            i += 1
            ptr += 1
        if abs(cx[i] - cy[l]) > c + eps:
            return False
    while ptr < m:
        # remaining jumps sit in the last open slot
        i += 1
        ptr += 1
        if abs(cx[i] - cy[n]) > c + eps:
            return False
    return True


def _sk_times_ok(pattern, sx, bounds, c, eps) -> bool:
    prev = 0.0
    for k, code in enumerate(pattern):
        if code % 2 == 1:
            l = (code + 1) // 2
            lo = hi = bounds[l]
        else:
            l = code // 2
            lo, hi = bounds[l], bounds[l + 1]
        lo = max(lo, sx[k] - c, prev)
        hi = min(hi, sx[k] + c)
        if lo > hi + eps:
            return False
        prev = lo
    return True
