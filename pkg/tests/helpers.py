"""Independent reference computations used to freeze expected test values.

Everything here is deliberately written from first principles (hand
integration, exhaustive enumeration) so test expectations do not share code
with the implementations they check.
"""

import itertools
import math


def ordered_volume_j2(b1: float, b2: float) -> float:
    """Volume of {0 < s1 <= s2, s1 < b1, s2 < b2} for b1 <= b2.

    Integrating s2 from s1 to b2 and s1 from 0 to b1 by hand gives
    b1 b2 - b1^2/2.
    """
    return b1 * b2 - 0.5 * b1 * b1


def ordered_volume_j3(b1: float, b2: float, b3: float) -> float:
    """Volume of {0 < s1 <= s2 <= s3, s_k < b_k} for b1 <= b2 <= b3.

    Iterated integration by hand:
      inner s3 over (s2, b3): b3 - s2
      then s2 over (s1, b2):  b3 b2 - b2^2/2 - b3 s1 + s1^2/2
      then s1 over (0, b1):   b1 b2 b3 - b1 b2^2/2 - b3 b1^2/2 + b1^3/6
    """
    return (b1 * b2 * b3 - 0.5 * b1 * b2 * b2 - 0.5 * b3 * b1 * b1
            + b1 ** 3 / 6.0)


def ordered_tail_by_hand(alpha: float, thresholds) -> float:
    """Ordered-region tail value from the hand-derived polynomials (j <= 3)."""
    a = list(thresholds)
    for k in range(len(a) - 2, -1, -1):
        a[k] = max(a[k], a[k + 1])
    b = [t ** -alpha for t in a]
    if len(b) == 1:
        return b[0]
    if len(b) == 2:
        return ordered_volume_j2(b[0], b[1])
    if len(b) == 3:
        return ordered_volume_j3(b[0], b[1], b[2])
    raise ValueError("hand-derived polynomials stop at j=3")


def seq_cone_dist_by_enumeration(coords, depth: int, j: int) -> float:
    """Capped-metric distance to at-most-j-positive by subset enumeration."""
    terms = [min(c, 1.0) * 2.0 ** -(i + 1) for i, c in enumerate(coords)]
    total = math.fsum(terms)
    best = math.inf
    for keep in itertools.combinations(range(len(terms)), min(j, len(terms))):
        cand = total - math.fsum(terms[i] for i in keep)
        best = min(best, cand)
    return best


def pareto_cdf(alpha: float):
    return lambda x: 1.0 - x ** -alpha


def binomial_se(t: float, p: float, n: int) -> float:
    return t * math.sqrt(p * (1.0 - p) / n)
