"""Counting circles and orbit points below a curvature threshold.

Three counting modes:

``augmented``
    Points of the augmented orbit other than the base configuration, i.e.
    nodes of the non-backtracking generator tree.  Each node creates exactly
    one new circle, so this is the number of non-seed circles.
``vector``
    Distinct curvature vectors in the orbit of the root, the base vector
    included.  Vectors fixed by a generator collapse geometrically distinct
    circles, so this undercounts on symmetric roots.
``geometric``
    Circles of the packing with curvature below T, from the exact generator
    in :mod:`apollo.packing`.

Thresholds are strict everywhere.  The tree engines compare integer norms
against exact integer bounds (``ceil(T)`` for the max norm, ``ceil(T**2)``
for the squared Euclidean norm), so results do not depend on float rounding.
"""
from __future__ import annotations

import math
from bisect import bisect_right
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .descartes import Quadruple, apply_generator
from .errors import BudgetExceededError, DomainError, DuplicateThresholdError, InsufficientDataError
from .packing import STRIP, generate, packing_spec, seed_count_below

__all__ = [
    "AUGMENTED",
    "VECTOR",
    "GEOMETRIC",
    "MAX",
    "EUCLIDEAN",
    "CountTable",
    "FitResult",
    "geometric_grid",
    "count_orbit",
    "count_table",
    "fit_exponent",
    "fit_power_law",
    "error_exponent_main",
    "vector_stabilizer",
]

AUGMENTED = "augmented"
VECTOR = "vector"
GEOMETRIC = "geometric"
MAX = "max"
EUCLIDEAN = "euclidean"

# int64 fast path is exact while squared norms of children stay below 2**63
_FAST_LIMIT = 2**28


@dataclass
class CountTable:
    rows: list
    mode: str
    norm: str
    root: Quadruple
    meta: dict = field(default_factory=dict)

    @property
    def T(self) -> np.ndarray:
        return np.array([r[0] for r in self.rows], dtype=float)

    @property
    def N(self) -> np.ndarray:
        return np.array([r[1] for r in self.rows], dtype=np.int64)


@dataclass
class FitResult:
    c: float
    alpha: float
    residual: float
    window: tuple


def geometric_grid(tmin: float, tmax: float, per_decade: int = 24) -> list:
    """Thresholds ``tmin * 10**(j / per_decade)`` up to and including ``tmax``."""
    if not 0 < tmin <= tmax:
        raise DomainError(f"need 0 < tmin <= tmax, got {tmin}, {tmax}")
    lo = math.log10(tmin)
    steps = int(math.floor((math.log10(tmax) - lo) * per_decade + 1e-9))
    grid = [10 ** (lo + j / per_decade) for j in range(steps + 1)]
    grid[0] = float(tmin)
    if abs(grid[-1] - tmax) <= 1e-9 * tmax:
        grid[-1] = float(tmax)
    return grid


def _check_grid(grid: Sequence) -> list:
    grid = list(grid)
    for a, b in zip(grid, grid[1:]):
        if not b > a:
            raise DuplicateThresholdError(f"thresholds must be strictly increasing ({a} then {b})")
    if grid and not grid[0] > 0:
        raise DomainError("thresholds must be positive")
    return grid


def _int_bounds(grid, norm) -> list:
    """Integer ``B`` with ``x < T  <=>  x < B`` for integer norm values x."""
    out = []
    for T in grid:
        q = Fraction(T)
        if norm == EUCLIDEAN:
            q = q * q
        out.append(math.ceil(q))
    return out


def _norm_int(v, norm) -> int:
    if norm == EUCLIDEAN:
        return sum(x * x for x in v)
    return max(abs(x) for x in v)


# -- augmented: numpy level BFS --------------------------------------------


def _np_norm(q: np.ndarray, norm: str) -> np.ndarray:
    if norm == EUCLIDEAN:
        return (q * q).sum(axis=1)
    return np.abs(q).max(axis=1)


def _bfs_hist(q, last, bounds, norm, budget):
    """Histogram of node norms below the frontier ``q``; nodes in ``q`` excluded."""
    bounds_arr = np.asarray(bounds, dtype=np.int64)
    cap = bounds_arr[-1]
    hist = np.zeros(len(bounds) + 1, dtype=np.int64)
    nodes = 0
    while len(q):
        s = q.sum(axis=1)
        parts, lasts = [], []
        for i in range(4):
            sel = last != i
            qi = q[sel]
            v = 2 * (s[sel] - qi[:, i]) - qi[:, i]
            qi = qi.copy()
            qi[:, i] = v
            nv = _np_norm(qi, norm)
            keep = nv < cap
            if keep.any():
                parts.append(qi[keep])
                lasts.append(np.full(int(keep.sum()), i, dtype=np.int8))
                hist += np.bincount(np.searchsorted(bounds_arr, nv[keep], side="right"), minlength=len(bounds) + 1)
        if not parts:
            break
        q = np.concatenate(parts)
        last = np.concatenate(lasts)
        nodes += len(q)
        if budget is not None and nodes > budget:
            raise BudgetExceededError(f"node budget {budget} exceeded")
    return hist


def _bfs_task(args):
    return _bfs_hist(*args)


def _root_children(spec):
    """First tree level as (vectors, replaced index); strips only replace lines."""
    root = tuple(spec.root)
    moves = [i for i in range(4) if root[i] == 0] if spec.kind == STRIP else range(4)
    kids = [(tuple(apply_generator(root, i + 1)), i) for i in moves]
    return kids


def _augmented_hist_fast(spec, bounds, norm, budget, workers):
    kids = _root_children(spec)
    cap = bounds[-1]
    hist = np.zeros(len(bounds) + 1, dtype=np.int64)
    vecs, lasts = [], []
    for v, i in kids:
        nv = _norm_int(v, norm)
        if nv < cap:
            hist[bisect_right(bounds, nv)] += 1
            vecs.append(v)
            lasts.append(i)
    if not vecs:
        return hist
    q = np.array(vecs, dtype=np.int64)
    last = np.array(lasts, dtype=np.int8)
    if workers <= 1:
        return hist + _bfs_hist(q, last, bounds, norm, budget)
    # expand a few levels so there is enough to share, counting as we go
    bounds_arr = np.asarray(bounds, dtype=np.int64)
    while 0 < len(q) < 64 * workers:
        s = q.sum(axis=1)
        parts, ls = [], []
        for i in range(4):
            sel = last != i
            qi = q[sel].copy()
            qi[:, i] = 2 * (s[sel] - qi[:, i]) - qi[:, i]
            nv = _np_norm(qi, norm)
            keep = nv < cap
            parts.append(qi[keep])
            ls.append(np.full(int(keep.sum()), i, dtype=np.int8))
            hist += np.bincount(np.searchsorted(bounds_arr, nv[keep], side="right"), minlength=len(bounds) + 1)
        q, last = np.concatenate(parts), np.concatenate(ls)
    if not len(q):
        return hist
    chunks = [(q[j::workers], last[j::workers], bounds, norm, budget) for j in range(workers)]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        for h in ex.map(_bfs_task, chunks):
            hist += h
    return hist


def _augmented_hist_exact(spec, bounds, norm, budget):
    """Same histogram with Python integers; no overflow limit."""
    cap = bounds[-1]
    hist = [0] * (len(bounds) + 1)
    stack = []
    for v, i in _root_children(spec):
        nv = _norm_int(v, norm)
        if nv < cap:
            hist[bisect_right(bounds, nv)] += 1
            stack.append((v, i))
    nodes = len(stack)
    while stack:
        v, last = stack.pop()
        s = sum(v)
        for i in range(4):
            if i == last:
                continue
            w = v[:i] + (2 * (s - v[i]) - v[i],) + v[i + 1 :]
            nv = _norm_int(w, norm)
            if nv < cap:
                hist[bisect_right(bounds, nv)] += 1
                stack.append((w, i))
                nodes += 1
                if budget is not None and nodes > budget:
                    raise BudgetExceededError(f"node budget {budget} exceeded")
    return np.array(hist, dtype=np.int64)


def _vector_hist(root, bounds, norm, budget):
    cap = bounds[-1]
    root = tuple(root)
    hist = [0] * (len(bounds) + 1)
    if _norm_int(root, norm) >= cap:
        return np.array(hist, dtype=np.int64)
    seen = {root}
    stack = [root]
    hist[bisect_right(bounds, _norm_int(root, norm))] += 1
    while stack:
        v = stack.pop()
        s = sum(v)
        for i in range(4):
            w = v[:i] + (2 * (s - v[i]) - v[i],) + v[i + 1 :]
            if w in seen:
                continue
            nv = _norm_int(w, norm)
            if nv >= cap:
                continue
            seen.add(w)
            hist[bisect_right(bounds, nv)] += 1
            stack.append(w)
            if budget is not None and len(seen) > budget:
                raise BudgetExceededError(f"vector budget {budget} exceeded")
    return np.array(hist, dtype=np.int64)


def vector_stabilizer(root: Sequence[int]) -> list:
    """Generators that fix the root as a vector (1-based)."""
    root = tuple(root)
    return [i for i in range(1, 5) if tuple(apply_generator(root, i)) == root]


def count_table(
    root: Sequence[int],
    T_grid: Sequence[float],
    mode: str = AUGMENTED,
    norm: str = MAX,
    workers: int = 1,
    budget: int | None = None,
    engine: str = "auto",
) -> CountTable:
    """Counts for every threshold in ``T_grid`` from one traversal.

    Parameters
    ----------
    root : sequence of 4 ints
        Root quadruple of the packing.
    T_grid : increasing sequence of positive reals
    mode : {"augmented", "vector", "geometric"}
    norm : {"max", "euclidean"}
        Applied to curvature vectors; geometric mode counts by curvature.
    workers : int
        Process count for the augmented fast path.  Results are identical
        for every value.
    engine : {"auto", "numpy", "exact"}
        Augmented mode only: force the int64 or the arbitrary-precision
        traversal.
    """
    spec = packing_spec(root)
    grid = _check_grid(T_grid)
    meta = {"kind": spec.kind}
    stab = vector_stabilizer(spec.root)
    if stab:
        meta["vector_stabilizer"] = stab
    if spec.kind == STRIP:
        meta["window"] = f"center x in [0, {spec.period}) plus both boundary lines"
    if not grid:
        return CountTable([], mode, norm, spec.root, meta)

    if mode == GEOMETRIC:
        circles = generate(spec, Fraction(grid[-1]), budget=budget, workers=workers, record_tangencies=False)
        curv = sorted(c.curvature for c in circles)
        counts = [_count_below(curv, Fraction(T)) for T in grid]
    else:
        if norm not in (MAX, EUCLIDEAN):
            raise ValueError(f"unknown norm {norm!r}")
        bounds = _int_bounds(grid, norm)
        if mode == AUGMENTED:
            fast = engine == "numpy" or (engine == "auto" and grid[-1] < _FAST_LIMIT)
            if engine == "numpy" and grid[-1] >= _FAST_LIMIT:
                raise DomainError("int64 engine would overflow at this threshold")
            if fast:
                hist = _augmented_hist_fast(spec, bounds, norm, budget, workers)
            else:
                hist = _augmented_hist_exact(spec, bounds, norm, budget)
        elif mode == VECTOR:
            hist = _vector_hist(spec.root, bounds, norm, budget)
            if stab:
                meta["warning"] = (
                    f"root is fixed by generator(s) {stab}; distinct vectors undercount "
                    "geometrically distinct circles"
                )
        else:
            raise ValueError(f"unknown mode {mode!r}")
        counts = np.cumsum(hist)[: len(grid)].tolist()
    rows = [(float(T), int(n)) for T, n in zip(grid, counts)]
    return CountTable(rows, mode, norm, spec.root, meta)


def _count_below(sorted_vals, T) -> int:
    lo, hi = 0, len(sorted_vals)
    while lo < hi:
        mid = (lo + hi) // 2
        if sorted_vals[mid] < T:
            lo = mid + 1
        else:
            hi = mid
    return lo


def count_orbit(root, T, mode: str = AUGMENTED, norm: str = MAX, **kw) -> int:
    """Count for a single threshold; see :func:`count_table`."""
    return count_table(root, [T], mode, norm, **kw).rows[0][1]


def seed_offset(root, T) -> int:
    """Seed circles counted geometrically but not as augmented orbit points."""
    return seed_count_below(packing_spec(root), T)


def fit_power_law(x, y) -> tuple:
    """Ordinary least squares of log y on log x; returns (c, alpha, rms residual)."""
    lx, ly = np.log(np.asarray(x, float)), np.log(np.asarray(y, float))
    A = np.vstack([lx, np.ones_like(lx)]).T
    (alpha, b), *_ = np.linalg.lstsq(A, ly, rcond=None)
    res = ly - (alpha * lx + b)
    return float(np.exp(b)), float(alpha), float(np.sqrt(np.mean(res**2)))


def fit_exponent(table: CountTable, window: tuple | None = None) -> FitResult:
    """Fit ``N ~ c T**alpha`` on rows with T inside ``window`` (inclusive).

    The default window is the top two decades of the table.
    """
    if not table.rows:
        raise InsufficientDataError("empty table")
    if window is None:
        tmax = table.rows[-1][0]
        window = (tmax / 100.0, tmax)
    lo, hi = window
    tol = 1e-12
    rows = [(T, n) for T, n in table.rows if lo * (1 - tol) <= T <= hi * (1 + tol)]
    if len(rows) < 3:
        raise InsufficientDataError(f"{len(rows)} rows in window {window}; need at least 3")
    if any(n <= 0 for _, n in rows):
        raise InsufficientDataError("counts must be positive inside the fit window")
    c, alpha, resid = fit_power_law([r[0] for r in rows], [r[1] for r in rows])
    return FitResult(c, alpha, resid, (float(lo), float(hi)))


def error_exponent_main(alpha: float, s1: float) -> float:
    """Exponent of the circle-count error term, ``alpha - 2 (alpha - s1) / 63``.

    ``s1`` is the bottom of the spectrum above the base eigenvalue; the
    value is an input here, nothing in this package computes it.
    """
    if not (1 < s1 <= alpha < 2):
        raise DomainError(f"need 1 < s1 <= alpha < 2, got alpha={alpha}, s1={s1}")
    return alpha - 2 * (alpha - s1) / 63
