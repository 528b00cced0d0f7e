"""Continuous maps between the sample spaces and pluggable scalar actions.

The maps here are the plumbing that carries limit statements from one space
to another: running sums and finite projections on sequences, ordinary and
generalized polar coordinates on vectors, and the assembly of ordered jump
sizes plus jump times into a step function.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DimensionMismatchError, DomainError, UnsupportedPairingError
from .spaces import (
    ConeSpec,
    FiniteVector,
    Point,
    StepFunction,
    TruncatedSequence,
    dist_to_cone,
)

_ANGLE_TOL = 1e-9


@dataclass(frozen=True)
class ScalarAction:
    """A scalar multiplication (lambda, x) -> lambda . x on a sample space.

    kind is one of standard, power_weights, second_coord_only, radius_only;
    power_weights carries one positive exponent per coordinate and scales
    coordinate i by lambda**(1/gamma_i).
    """

    kind: str
    gammas: tuple[float, ...] = ()

    _KINDS = ("standard", "power_weights", "second_coord_only", "radius_only")

    def __post_init__(self):
        if self.kind not in self._KINDS:
            raise DomainError(f"unknown scalar action {self.kind!r}")
        gammas = tuple(float(g) for g in self.gammas)
        if self.kind == "power_weights":
            if not gammas or any(g <= 0 for g in gammas):
                raise DomainError("power_weights needs positive exponents")
        object.__setattr__(self, "gammas", gammas)


@dataclass(frozen=True)
class PolarPair:
    """A (radius, angle) pair; the angle sits on the relevant unit sphere."""

    radius: float
    angle: FiniteVector

    def __post_init__(self):
        if self.radius <= 0:
            raise DomainError("radius must be positive")


def apply_scaling(action: ScalarAction | str, lam: float, x) -> object:
    """Apply a scalar action.  Accepts the action or its kind string."""
    if lam <= 0:
        raise DomainError("scaling factor must be positive")
    if isinstance(action, str):
        action = ScalarAction(action)
    kind = action.kind
    if kind == "standard":
        if isinstance(x, FiniteVector):
            return FiniteVector(tuple(lam * c for c in x.coords))
        if isinstance(x, TruncatedSequence):
            return TruncatedSequence(tuple(lam * c for c in x.coords), x.depth)
        if isinstance(x, StepFunction):
            return StepFunction(
                tuple((t, lam * s) for t, s in x.jumps), lam * x.base)
        raise UnsupportedPairingError(
            f"standard action does not handle {type(x).__name__}")
    if kind == "power_weights":
        if not isinstance(x, FiniteVector):
            raise UnsupportedPairingError("power_weights acts on FiniteVector")
        if x.dim != len(action.gammas):
            raise DimensionMismatchError(
                f"{len(action.gammas)} exponents for a {x.dim}-vector")
        return FiniteVector(tuple(
            lam ** (1.0 / g) * c for g, c in zip(action.gammas, x.coords)))
    if kind == "second_coord_only":
        if not isinstance(x, FiniteVector) or x.dim != 2:
            raise UnsupportedPairingError("second_coord_only acts on R_+^2")
        return FiniteVector((x.coords[0], lam * x.coords[1]))
    if kind == "radius_only":
        if not isinstance(x, PolarPair):
            raise UnsupportedPairingError("radius_only acts on PolarPair")
        return PolarPair(lam * x.radius, x.angle)
    raise DomainError(f"unknown scalar action {kind!r}")


def cumsum(x: TruncatedSequence) -> TruncatedSequence:
    """Running sums of the prefix; nondecreasing by construction.

    The result represents the true running-sum sequence up to the truncation
    depth (beyond it the true values stay at the final prefix sum).
    """
    out = []
    acc = 0.0
    for c in x.coords:
        acc += c
        out.append(acc)
    return TruncatedSequence(tuple(out), x.depth)


def proj(x: TruncatedSequence, p: int) -> FiniteVector:
    """First p coordinates, zero-padded beyond the stored prefix."""
    if p < 1:
        raise DomainError("projection dimension must be positive")
    coords = x.coords[:p] + (0.0,) * max(0, p - x.depth)
    return FiniteVector(coords)


def polar(x: FiniteVector) -> PolarPair:
    """Euclidean polar coordinates (norm, direction)."""
    r = math.sqrt(math.fsum(c * c for c in x.coords))
    if r == 0.0:
        raise DomainError("polar coordinates are undefined at the origin")
    return PolarPair(r, FiniteVector(tuple(c / r for c in x.coords)))


def polar_inv(pp: PolarPair) -> FiniteVector:
    return FiniteVector(tuple(pp.radius * c for c in pp.angle.coords))


_GPOLAR_CONES = ("origin", "axes", "at_most_j_positive", "half_plane_floor")


def gpolar(x: FiniteVector, cone: ConeSpec) -> PolarPair:
    """Generalized polar coordinates (distance to cone, rescaled point).

    Offered only for vector-space cones whose distance is positively
    homogeneous under coordinatewise scaling; the capped sequence-space
    metric is not, so sequence cones are rejected outright.
    """
    if cone.kind not in _GPOLAR_CONES:
        raise UnsupportedPairingError(
            f"generalized polar coordinates need a positively homogeneous "
            f"ground metric; cone {cone.kind!r} does not qualify")
    if not isinstance(x, FiniteVector):
        raise UnsupportedPairingError("generalized polar coordinates act on FiniteVector")
    r = dist_to_cone(x, cone)
    if r == 0.0:
        raise DomainError("point lies on the cone")
    angle = FiniteVector(tuple(c / r for c in x.coords))
    drift = abs(dist_to_cone(angle, cone) - 1.0)
    if drift > _ANGLE_TOL:
        raise DomainError(f"angle clearance off unity by {drift:.3e}")
    return PolarPair(r, angle)


def gpolar_inv(pp: PolarPair, cone: ConeSpec) -> FiniteVector:
    if cone.kind not in _GPOLAR_CONES:
        raise UnsupportedPairingError(
            f"generalized polar coordinates need a positively homogeneous "
            f"ground metric; cone {cone.kind!r} does not qualify")
    return FiniteVector(tuple(pp.radius * c for c in pp.angle.coords))


def t_m(sizes: TruncatedSequence, times, m: int) -> StepFunction:
    """Assemble the first m (size, time) pairs into a step function.

    Sizes must be nonincreasing; the first m times must be pairwise distinct
    points of (0,1).  Zero sizes are dropped, so the output has exactly as
    many jumps as there are positive sizes among the first m.
    """
    if m < 1:
        raise DomainError("m must be a positive integer")
    if m > sizes.depth or m > len(times):
        raise DomainError("need at least m sizes and m times")
    svals = sizes.coords[:m]
    if any(svals[i] < svals[i + 1] - 1e-12 for i in range(m - 1)):
        raise DomainError("sizes must be nonincreasing")
    tvals = [float(t) for t in times[:m]]
    if any(not 0.0 < t < 1.0 for t in tvals):
        raise DomainError("jump times must lie in (0,1)")
    if len(set(tvals)) < m:
        raise DomainError("jump times must be pairwise distinct")
    jumps = sorted((t, s) for t, s in zip(tvals, svals) if s > 0.0)
    return StepFunction(tuple(jumps), 0.0)
