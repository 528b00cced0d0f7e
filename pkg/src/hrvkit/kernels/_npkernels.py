"""Numpy fallback for the hot counting kernels.

Arithmetic here must match the compiled backend bit for bit.  The rules that
make that work: all transcendental evaluation (powers, logs) happens in the
driver, never here; every reduction is a strict left fold (column-by-column
accumulation, or a flat global running sum minus a per-path offset); and
comparisons, min/max, add, subtract, multiply, divide are the only floating
operations.  Change any of this only together with the compiled twin.
"""

from __future__ import annotations

import numpy as np


def _rows(x, name: str) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2:
        raise ValueError(f"{name} must be a 2d array")
    return x


def rect_hits(x, thresholds) -> int:
    """Rows of x exceeding every threshold coordinatewise (strictly)."""
    x = _rows(x, "x")
    thr = np.asarray(thresholds, dtype=np.float64)
    if thr.shape != (x.shape[1],):
        raise ValueError("thresholds must match the column count")
    ok = np.ones(x.shape[0], dtype=bool)
    for k in range(x.shape[1]):
        ok &= x[:, k] > thr[k]
    return int(np.count_nonzero(ok))


def sum_tail_hits(x, cutoff: float) -> int:
    """Rows whose coordinate sum (left fold) strictly exceeds cutoff."""
    x = _rows(x, "x")
    if x.shape[1] == 0:
        raise ValueError("need at least one column")
    s = x[:, 0].copy()
    for k in range(1, x.shape[1]):
        s = s + x[:, k]
    return int(np.count_nonzero(s > float(cutoff)))


def ordered_rect_hits(e, gamma_bounds) -> int:
    """Rows whose running exponential sums stay below the bounds.

    Row i counts when e[i,0]+...+e[i,k] < gamma_bounds[k] for every k; the
    running sum is the arrival-point representation of ordered points, so
    this is joint threshold exceedance of the k-th largest points.
    """
    e = _rows(e, "e")
    g = np.asarray(gamma_bounds, dtype=np.float64)
    if g.shape != (e.shape[1],):
        raise ValueError("gamma_bounds must match the column count")
    run = np.zeros(e.shape[0], dtype=np.float64)
    ok = np.ones(e.shape[0], dtype=bool)
    for k in range(e.shape[1]):
        run = run + e[:, k]
        ok &= run < g[k]
    return int(np.count_nonzero(ok))


def jumpset_hits(e, u, gamma_bounds, rho: float) -> int:
    """ordered_rect_hits plus a minimum spacing of the paired uniform times."""
    e = _rows(e, "e")
    u = _rows(u, "u")
    if u.shape != e.shape:
        raise ValueError("e and u must have equal shapes")
    g = np.asarray(gamma_bounds, dtype=np.float64)
    if g.shape != (e.shape[1],):
        raise ValueError("gamma_bounds must match the column count")
    run = np.zeros(e.shape[0], dtype=np.float64)
    ok = np.ones(e.shape[0], dtype=bool)
    for k in range(e.shape[1]):
        run = run + e[:, k]
        ok &= run < g[k]
    if e.shape[1] >= 2 and float(rho) > 0.0:
        us = np.sort(u, axis=1)
        gaps_ok = np.ones(e.shape[0], dtype=bool)
        for k in range(e.shape[1] - 1):
            gaps_ok &= us[:, k + 1] - us[:, k] >= float(rho)
        ok &= gaps_ok
    return int(np.count_nonzero(ok))


def smalljump_sup_hits(counts, e_flat, s_flat, comp: float,
                       threshold: float) -> int:
    """Paths whose compensated-jump running supremum strictly exceeds threshold.

    Path i owns counts[i] jumps; e_flat holds counts[i]+1 exponentials per
    path (the extra one closes the divisor for time normalization), s_flat
    holds the jump sizes.  Per path, with T_k = Gamma_k / Gamma_{n+1} and
    S_k the size prefix sum, the supremum of |S(t) - comp t| over [0,1] is
    max(max(0, max_k S_k - comp T_k),
        -min(0, min_k S_{k-1} - comp T_k, S_n - comp)).
    All prefix sums are global running sums minus the path offset, exactly
    as in the compiled twin.
    """
    counts = np.asarray(counts, dtype=np.int64)
    if counts.ndim != 1:
        raise ValueError("counts must be 1d")
    if np.any(counts < 0):
        raise ValueError("counts must be nonnegative")
    e_flat = np.asarray(e_flat, dtype=np.float64)
    s_flat = np.asarray(s_flat, dtype=np.float64)
    npaths = counts.shape[0]
    total = int(counts.sum())
    if e_flat.shape != (total + npaths,):
        raise ValueError("e_flat must hold counts[i] + 1 entries per path")
    if s_flat.shape != (total,):
        raise ValueError("s_flat must hold counts[i] entries per path")
    comp = float(comp)
    threshold = float(threshold)

    hits = 0
    empty = counts == 0
    n_empty = int(np.count_nonzero(empty))
    if n_empty and comp > threshold:
        # no jumps: the path is -comp*t, so the sup is exactly comp
        hits += n_empty
    if total == 0:
        return hits

    ecum = np.concatenate([[0.0], np.cumsum(e_flat)])
    scum = np.concatenate([[0.0], np.cumsum(s_flat)])
    e_start = np.concatenate([[0], np.cumsum(counts + 1)])[:-1]
    s_start = np.concatenate([[0], np.cumsum(counts)])[:-1]
    s_end = s_start + counts

    path_of = np.repeat(np.arange(npaths), counts)
    jump_pos = np.arange(total)
    # the k-th jump of path i sits at e index jump_pos + i (one divisor
    # element per earlier path), and ecum/scum are zero-prepended
    e_off = ecum[e_start]
    s_off = scum[s_start]
    gam = ecum[jump_pos + path_of + 1] - e_off[path_of]
    div = (ecum[e_start + counts + 1] - e_off)[path_of]
    t = gam / div
    s_cur = scum[jump_pos + 1] - s_off[path_of]
    s_prev = scum[jump_pos] - s_off[path_of]
    a = s_cur - comp * t
    b = s_prev - comp * t

    nonempty = np.flatnonzero(~empty)
    seg = s_start[nonempty]
    amax = np.maximum.reduceat(a, seg)
    bmin = np.minimum.reduceat(b, seg)
    terminal = (scum[s_end[nonempty]] - s_off[nonempty]) - comp
    bmin = np.minimum(bmin, terminal)
    hi = np.maximum(amax, 0.0)
    lo = np.minimum(bmin, 0.0)
    sup = np.maximum(hi, -lo)
    hits += int(np.count_nonzero(sup > threshold))
    return hits
