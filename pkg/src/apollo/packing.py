"""Exact geometric generation of Apollonian packings.

Circles are produced by a non-backtracking depth-first walk over augmented
quadruples.  Curvature-times-center rows are kept as integers scaled by a
common denominator ``D`` fixed by the seed, so every step is integer
arithmetic and centers are recovered as exact Fractions.
"""
from __future__ import annotations

import math
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Sequence

from .descartes import AugmentedQuadruple, Quadruple, eval_form, is_root
from .errors import BudgetExceededError, InvalidRootError

__all__ = [
    "Circle",
    "PackingSpec",
    "Packing",
    "TangencyReport",
    "packing_spec",
    "seed_configuration",
    "seed_count_below",
    "generate",
    "generate_bruteforce",
    "tangency_check",
    "BOUNDED",
    "STRIP",
]

BOUNDED = "bounded"
STRIP = "strip"


@dataclass(frozen=True)
class Circle:
    """One circle of a packing, or one of the two boundary lines of a strip.

    For a line ``curvature`` is 0, ``(center_x, center_y)`` is the foot of the
    perpendicular from the origin, and ``normal`` (when known) is the unit
    normal pointing away from the packing.
    """

    curvature: Fraction
    center_x: Fraction
    center_y: Fraction
    depth: int = 0
    is_line: bool = False
    normal: tuple | None = field(default=None, compare=False)

    @property
    def radius(self):
        if self.curvature == 0:
            return math.inf
        return 1 / abs(self.curvature)

    @property
    def key(self) -> tuple:
        return (self.curvature, self.center_x, self.center_y)


@dataclass(frozen=True)
class PackingSpec:
    root: Quadruple
    kind: str = BOUNDED
    period: Fraction | None = None


@dataclass(frozen=True)
class Packing(Sequence):
    """Sorted circles plus the tangent pairs recorded while generating them."""

    circles: tuple
    tangencies: tuple = ()
    spec: PackingSpec | None = None

    def __len__(self):
        return len(self.circles)

    def __getitem__(self, i):
        return self.circles[i]

    def __iter__(self):
        return iter(self.circles)


@dataclass
class TangencyReport:
    checked: int
    failures: list

    @property
    def ok(self) -> bool:
        return not self.failures


def packing_spec(root: Sequence[int]) -> PackingSpec:
    """Validate a root quadruple and infer bounded or strip type."""
    root = Quadruple(*(int(x) for x in root))
    if eval_form(root) != 0:
        raise InvalidRootError(f"root {tuple(root)} fails the Descartes form (Q = {eval_form(root)})")
    neg = sum(1 for x in root if x < 0)
    zero = sum(1 for x in root if x == 0)
    if neg == 1 and zero == 0:
        kind, period = BOUNDED, None
    elif neg == 0 and zero == 2:
        pos = [x for x in root if x > 0]
        if pos[0] != pos[1]:
            raise InvalidRootError(f"strip root must be (0, 0, c, c) up to order, got {tuple(root)}")
        kind, period = STRIP, Fraction(2, pos[0])
    else:
        raise InvalidRootError(
            f"root {tuple(root)} needs one negative curvature (bounded) or two zeros (strip)"
        )
    if not is_root(root):
        raise InvalidRootError(f"{tuple(root)} is not reduced; some generator lowers the sum")
    return PackingSpec(root, kind, period)


def _exact_sqrt(q: Fraction) -> Fraction:
    n, d = q.numerator, q.denominator
    rn, rd = math.isqrt(n), math.isqrt(d)
    if rn * rn != n or rd * rd != d:
        raise InvalidRootError(f"placement needs sqrt({q}), which is irrational")
    return Fraction(rn, rd)


def _bounded_centers(root: Quadruple) -> list:
    r = [Fraction(1, k) for k in root]
    a = next(i for i, k in enumerate(root) if k < 0)
    b, c, d = [i for i in range(4) if i != a]

    def dist2(i, j):
        return (r[i] + r[j]) ** 2

    z = [None] * 4
    z[a] = (Fraction(0), Fraction(0))
    dab = abs(r[a] + r[b])
    z[b] = (dab, Fraction(0))

    def third(i):
        x = (dist2(a, i) - dist2(b, i) + dab * dab) / (2 * dab)
        return x, _exact_sqrt(dist2(a, i) - x * x)

    z[c] = third(c)
    xd, yd = third(d)
    ok = [
        (xd, y)
        for y in (yd, -yd)
        if (xd - z[c][0]) ** 2 + (y - z[c][1]) ** 2 == dist2(c, d)
    ]
    if not ok:
        raise InvalidRootError(f"could not place the fourth circle of {tuple(root)}")
    z[d] = max(ok, key=lambda p: p[1])
    return z


def seed_configuration(spec: PackingSpec) -> tuple[list, AugmentedQuadruple]:
    """Four mutually tangent seed circles in canonical position.

    A bounded root puts the bounding circle at the origin and the first
    positive circle on the positive x-axis.  A strip root ``(0, 0, c, c)``
    uses the lines ``y = 0`` and ``y = 2/c`` with circles of radius ``1/c``
    centered at ``(0, 1/c)`` and ``(2/c, 1/c)``.
    """
    root = spec.root
    circles, bx, by, kb = [None] * 4, [None] * 4, [None] * 4, [None] * 4
    if spec.kind == BOUNDED:
        for i, (x, y) in enumerate(_bounded_centers(root)):
            k = Fraction(root[i])
            circles[i] = Circle(k, x, y, 0)
            bx[i], by[i] = k * x, k * y
            kb[i] = k * (x * x + y * y) - 1 / k
    else:
        zeros = [i for i in range(4) if root[i] == 0]
        pos = [i for i in range(4) if root[i] != 0]
        c = Fraction(root[pos[0]])
        top = 2 / c
        for idx, (y, ny) in zip(zeros, ((Fraction(0), -1), (top, 1))):
            circles[idx] = Circle(Fraction(0), Fraction(0), y, 0, True, (Fraction(0), Fraction(ny)))
            bx[idx], by[idx] = Fraction(0), Fraction(ny)
            kb[idx] = 2 * y * ny
        for idx, x in zip(pos, (Fraction(0), 2 / c)):
            y = 1 / c
            circles[idx] = Circle(c, x, y, 0)
            bx[idx], by[idx] = c * x, c * y
            kb[idx] = c * (x * x + y * y) - 1 / c
    aug = AugmentedQuadruple(root, tuple(bx), tuple(by), tuple(kb))
    return circles, aug


def seed_count_below(spec: PackingSpec, T) -> int:
    """Seed circles with curvature < T that belong to the counted region.

    For a strip this is the two lines plus the seed circle at x = 0.
    """
    if spec.kind == STRIP:
        c = max(spec.root)
        return 2 * (0 < T) + (c < T)
    return sum(1 for k in spec.root if k < T)


# -- integer engine ---------------------------------------------------------


def _scaled_seed(spec: PackingSpec):
    circles, aug = seed_configuration(spec)
    D = 1
    for q in aug.bx + aug.by:
        D = math.lcm(D, Fraction(q).denominator)
    X = tuple(int(q * D) for q in aug.bx)
    Y = tuple(int(q * D) for q in aug.by)
    return circles, tuple(int(k) for k in aug.curvatures), X, Y, D


def _root_moves(spec: PackingSpec) -> tuple:
    if spec.kind == STRIP:
        # replacing a line stays inside the window; replacing a circle walks the chain
        return tuple(i for i in range(4) if spec.root[i] == 0)
    return (0, 1, 2, 3)


def _walk(task):
    """Depth-first walk below one start node.

    Records are integer triples ``(k, X, Y)`` plus depth; conversion to
    Fractions happens once, after merging.
    """
    k, X, Y, last, depth, T, budget, record = task
    out, pairs = [], []
    stack = [(k, X, Y, last, depth)]
    nodes = 0
    while stack:
        k, X, Y, last, depth = stack.pop()
        sk, sX, sY = sum(k), sum(X), sum(Y)
        for j in range(4):
            if j == last:
                continue
            kj = 2 * (sk - k[j]) - k[j]
            if kj >= T:
                continue
            nodes += 1
            if budget is not None and nodes > budget:
                raise BudgetExceededError(f"node budget {budget} exceeded")
            Xj = 2 * (sX - X[j]) - X[j]
            Yj = 2 * (sY - Y[j]) - Y[j]
            out.append((kj, Xj, Yj, depth + 1))
            if record:
                new = (kj, Xj, Yj)
                for t in range(4):
                    if t != j:
                        pairs.append((new, (k[t], X[t], Y[t])))
            stack.append((k[:j] + (kj,) + k[j + 1 :], X[:j] + (Xj,) + X[j + 1 :], Y[:j] + (Yj,) + Y[j + 1 :], j, depth + 1))
    return out, pairs


def _split(spec, k, X, Y, T, levels):
    """Expand the first ``levels`` of the tree; returns records, pairs and frontier."""
    emitted, pairs = [], []
    frontier = [(k, X, Y, -1, 0)]
    for _ in range(levels):
        nxt = []
        for k, X, Y, last, depth in frontier:
            sk, sX, sY = sum(k), sum(X), sum(Y)
            moves = _root_moves(spec) if depth == 0 else range(4)
            for j in moves:
                if j == last:
                    continue
                kj = 2 * (sk - k[j]) - k[j]
                if kj >= T:
                    continue
                Xj = 2 * (sX - X[j]) - X[j]
                Yj = 2 * (sY - Y[j]) - Y[j]
                emitted.append((kj, Xj, Yj, depth + 1))
                for t in range(4):
                    if t != j:
                        pairs.append(((kj, Xj, Yj), (k[t], X[t], Y[t])))
                nxt.append((k[:j] + (kj,) + k[j + 1 :], X[:j] + (Xj,) + X[j + 1 :], Y[:j] + (Yj,) + Y[j + 1 :], j, depth + 1))
        frontier = nxt
    return emitted, pairs, frontier


def generate(
    spec: PackingSpec,
    max_curv,
    budget: int | None = None,
    workers: int = 1,
    record_tangencies: bool = True,
) -> Packing:
    """All circles with curvature < ``max_curv``, exactly, sorted.

    Strip packings are restricted to the period window: circles with center
    x in ``[0, period)`` plus the two boundary lines.

    Parameters
    ----------
    spec : PackingSpec
    max_curv : int, Fraction or float
        Strict cutoff.
    budget : int, optional
        Cap on traversal nodes; exceeding it raises BudgetExceededError.
    workers : int
        Processes used for the subtrees below depth 2.  Output does not
        depend on this value.
    """
    T = Fraction(max_curv)
    seeds, k, X, Y, D = _scaled_seed(spec)
    keep = [i for i, c in enumerate(seeds) if c.curvature < T]
    if spec.kind == STRIP:
        keep = [i for i in keep if seeds[i].is_line or 0 <= seeds[i].center_x < spec.period]
    records = [(k[i], X[i], Y[i], 0) for i in keep]
    pairs = []
    if record_tangencies:
        pairs += [((k[a], X[a], Y[a]), (k[b], X[b], Y[b])) for a in range(4) for b in range(a + 1, 4)]

    levels = 2 if workers > 1 else 1
    emitted, p, frontier = _split(spec, k, X, Y, T, levels)
    records += emitted
    if record_tangencies:
        pairs += p
    tasks = [(fk, fX, fY, last, depth, T, budget, record_tangencies) for fk, fX, fY, last, depth in frontier]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(_walk, tasks))
    else:
        results = [_walk(t) for t in tasks]
    for out, pr in results:
        records += out
        pairs += pr
        if budget is not None and len(records) > budget:
            raise BudgetExceededError(f"node budget {budget} exceeded")

    lines = {(k[i], X[i], Y[i]): seeds[i] for i in range(4) if seeds[i].is_line}

    def to_circle(r):
        if r[0] == 0:
            c = lines[r[:3]]
            return Circle(c.curvature, c.center_x, c.center_y, r[3], True, c.normal)
        kk = r[0]
        return Circle(Fraction(kk), Fraction(r[1], D * kk), Fraction(r[2], D * kk), r[3])

    order = sorted(((to_circle(r), r[:3]) for r in records), key=lambda cr: cr[0].key)
    circles = [c for c, _ in order]
    tangencies = ()
    if record_tangencies:
        index = {r: i for i, (_, r) in enumerate(order)}
        found = set()
        for a, b in pairs:
            i, j = index.get(a), index.get(b)
            if i is not None and j is not None:
                found.add((min(i, j), max(i, j)))
        tangencies = tuple(sorted(found))
    return Packing(tuple(circles), tangencies, spec)


def generate_bruteforce(spec: PackingSpec, max_curv, slack: int = 2) -> list:
    """Independent oracle: breadth-first search over all four generators.

    Every augmented state reached with all curvatures below ``slack *
    max_curv`` is visited once (hash-set dedup); distinct circles below the
    cutoff are collected.  No use is made of the tree structure or of
    monotonicity along paths.
    """
    T = Fraction(max_curv)
    cap = slack * T
    seeds, k, X, Y, D = _scaled_seed(spec)
    lines = {(X[i], Y[i]): c for i, c in enumerate(seeds) if c.is_line}
    period = spec.period
    start = (k, X, Y)
    seen = {start}
    queue = deque([(start, 0)])
    found: dict = {}

    def note(kj, Xj, Yj, depth):
        if kj == 0:
            c = lines[(Xj, Yj)]
            found.setdefault(c.key, c)
            return
        cx, cy = Fraction(Xj, D * kj), Fraction(Yj, D * kj)
        key = (Fraction(kj), cx, cy)
        if key not in found or found[key].depth > depth:
            found[key] = Circle(key[0], cx, cy, depth)

    for i in range(4):
        note(k[i], X[i], Y[i], 0)
    while queue:
        (k, X, Y), depth = queue.popleft()
        for j in range(4):
            kj = 2 * (sum(k) - k[j]) - k[j]
            if kj >= cap:
                continue
            Xj = 2 * (sum(X) - X[j]) - X[j]
            Yj = 2 * (sum(Y) - Y[j]) - Y[j]
            if period is not None and kj != 0:
                cx = Fraction(Xj, D * kj)
                if cx < -2 * period or cx > 3 * period:
                    continue
            state = (k[:j] + (kj,) + k[j + 1 :], X[:j] + (Xj,) + X[j + 1 :], Y[:j] + (Yj,) + Y[j + 1 :])
            if state in seen:
                continue
            seen.add(state)
            note(kj, Xj, Yj, depth + 1)
            queue.append((state, depth + 1))

    out = [c for c in found.values() if c.curvature < T]
    if period is not None:
        out = [c for c in out if c.is_line or 0 <= c.center_x < period]
    return sorted(out, key=lambda c: c.key)


def _pair_residual(a: Circle, b: Circle) -> Fraction:
    if a.is_line and b.is_line:
        na = a.normal or (Fraction(0), Fraction(1))
        nb = b.normal or (Fraction(0), Fraction(1))
        return na[0] * nb[1] - na[1] * nb[0]
    if a.is_line or b.is_line:
        line, circ = (a, b) if a.is_line else (b, a)
        n = line.normal or (Fraction(0), Fraction(1))
        dist = n[0] * (circ.center_x - line.center_x) + n[1] * (circ.center_y - line.center_y)
        return circ.curvature ** 2 * dist ** 2 - 1
    dx = a.center_x - b.center_x
    dy = a.center_y - b.center_y
    ka, kb = a.curvature, b.curvature
    return ka * ka * kb * kb * (dx * dx + dy * dy) - (ka + kb) ** 2


def tangency_check(circles, pairs=None) -> TangencyReport:
    """Check the cleared-denominator tangency identity on recorded pairs.

    For circles ``k1^2 k2^2 |c1 - c2|^2 = (k1 + k2)^2`` with signed
    curvatures; line/circle pairs use the distance to the line.  ``pairs``
    defaults to ``circles.tangencies`` for a :class:`Packing`.
    """
    if pairs is None:
        pairs = getattr(circles, "tangencies", ())
    failures = []
    for i, j in pairs:
        res = _pair_residual(circles[i], circles[j])
        if res != 0:
            failures.append((i, j, res))
    return TangencyReport(len(pairs), failures)


def iter_translated(circles: Sequence[Circle], dx: Fraction) -> Iterator[Circle]:
    for c in circles:
        if c.is_line:
            yield c
        else:
            yield Circle(c.curvature, c.center_x + dx, c.center_y, c.depth)
