"""Almost-prime census on packing curvatures.

Each circle is witnessed by the quadruple that creates it in the generator
tree: the node whose new coordinate is the circle's curvature.  Seed circles
are witnessed by the root.  Witness coordinates are ordered with the circle's
own curvature first and the other three in their original order, so
``coords=(1,)`` tests the curvature itself and ``coords=(1, 2)`` a product of
two tangent curvatures.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

from .errors import DomainError, ZeroCoordinateError
from .packing import STRIP, packing_spec

__all__ = [
    "is_probable_prime",
    "factorize",
    "omega",
    "SieveReport",
    "almost_prime_census",
    "witness_quadruples",
]

_TRIAL_LIMIT = 10**6
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)
# the first 13 prime bases decide primality below this bound
_MR_DETERMINISTIC = 3_317_044_064_679_887_385_961_981


def _primes_upto(n: int) -> np.ndarray:
    sieve = np.ones(n + 1, dtype=bool)
    sieve[:2] = False
    for p in range(2, math.isqrt(n) + 1):
        if sieve[p]:
            sieve[p * p :: p] = False
    return np.flatnonzero(sieve)


_PRIMES = _primes_upto(_TRIAL_LIMIT)
_SMALL = [int(p) for p in _PRIMES[:200]]
_PRIMES_U64 = _PRIMES.astype(np.uint64)
# products of consecutive trial primes, for gcd screening of huge inputs
_BLOCKS = [
    (lo, math.prod(_PRIMES[lo : lo + 512].tolist()))
    for lo in range(len(_SMALL), len(_PRIMES), 512)
]


def is_probable_prime(n: int, rng: random.Random | None = None) -> bool:
    """Miller-Rabin; deterministic below 3.3e24, 20 extra random bases above."""
    if n < 2:
        return False
    for p in _SMALL[:13]:
        if n % p == 0:
            return n == p
    d, r = n - 1, 0
    while d % 2 == 0:
        d //= 2
        r += 1
    bases = list(_MR_BASES)
    if n >= _MR_DETERMINISTIC:
        rng = rng or random.Random(n)
        bases += [rng.randrange(2, n - 1) for _ in range(20)]
    for a in bases:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _brent(n: int, rng: random.Random) -> int:
    """A nontrivial factor of the odd composite ``n`` (Pollard rho, Brent's cycle)."""
    while True:
        y, c, m = rng.randrange(1, n), rng.randrange(1, n), 128
        g = r = q = 1
        while g == 1:
            x = y
            for _ in range(r):
                y = (y * y + c) % n
            k = 0
            while k < r and g == 1:
                ys = y
                for _ in range(min(m, r - k)):
                    y = (y * y + c) % n
                    q = q * (x - y) % n
                g = math.gcd(q, n)
                k += m
            r *= 2
        if g == n:
            g = 1
            while g == 1:
                ys = (ys * ys + c) % n
                g = math.gcd((x - ys) % n, n)
        if g != n:
            return g


def _trial(n: int) -> tuple[list, int]:
    out = []
    for p in _SMALL:
        if p * p > n:
            break
        while n % p == 0:
            out.append(p)
            n //= p
    if n > 1 and _SMALL[-1] ** 2 < n:
        bound = min(_TRIAL_LIMIT, math.isqrt(n))
        stop = int(np.searchsorted(_PRIMES, bound, side="right"))
        if n < 2**64:
            cand = _PRIMES_U64[len(_SMALL) : stop]
            hits = cand[np.uint64(n) % cand == 0].tolist()
        else:
            hits = []
            for lo, prod in _BLOCKS:
                if lo >= stop:
                    break
                if math.gcd(n, prod) > 1:
                    hits += [p for p in _PRIMES[lo : min(lo + 512, stop)].tolist() if n % p == 0]
        if hits:
            for p in (int(h) for h in hits):
                while n % p == 0:
                    out.append(p)
                    n //= p
    return out, n


@lru_cache(maxsize=1 << 20)
def _factor_tuple(n: int, seed: int) -> tuple:
    if n < 1:
        raise DomainError(f"factorize needs n >= 1, got {n}")
    found, rest = _trial(n)
    rng = random.Random(seed)
    stack = [rest] if rest > 1 else []
    while stack:
        m = stack.pop()
        if m < _TRIAL_LIMIT**2 or is_probable_prime(m, rng):
            # everything below 10**12 left over after trial division is prime
            found.append(m)
            continue
        d = _brent(m, rng)
        stack += [d, m // d]
    return tuple(sorted(found))


def factorize(n: int, seed: int = 0) -> list:
    """Prime factors of ``n`` with multiplicity, ascending."""
    return list(_factor_tuple(int(n), seed))


def omega(n: int) -> int:
    """Number of prime factors of ``n`` counted with multiplicity."""
    return len(_factor_tuple(int(n), 0))


@dataclass
class SieveReport:
    rows: list  # (T, R, i, count, normalized)
    alpha_ref: float
    meta: dict = field(default_factory=dict)


def witness_quadruples(root, max_curv):
    """Yield ``(curvature, witness)`` for every circle with curvature < max_curv.

    ``witness`` is the creating quadruple reordered with the circle's own
    curvature first.  Strip packings yield one period window, as in
    :func:`apollo.packing.generate`.
    """
    spec = packing_spec(root)
    v0 = tuple(spec.root)

    def reorder(v, i):
        return (v[i],) + v[:i] + v[i + 1 :]

    seeds = range(4)
    if spec.kind == STRIP:
        # the second seed circle sits on the window edge and is not counted
        seeds = [i for i in range(4) if v0[i] == 0] + [next(i for i in range(4) if v0[i] != 0)]
    for i in seeds:
        if v0[i] < max_curv:
            yield v0[i], reorder(v0, i)
    moves = [i for i in range(4) if v0[i] == 0] if spec.kind == STRIP else range(4)
    stack = []
    for i in moves:
        w = v0[:i] + (2 * (sum(v0) - v0[i]) - v0[i],) + v0[i + 1 :]
        if w[i] < max_curv:
            stack.append((w, i))
    while stack:
        v, i = stack.pop()
        yield v[i], reorder(v, i)
        s = sum(v)
        for j in range(4):
            if j == i:
                continue
            new = 2 * (s - v[j]) - v[j]
            if new < max_curv:
                stack.append((v[:j] + (new,) + v[j + 1 :], j))


def almost_prime_census(
    root: Sequence[int],
    T_grid: Sequence[float],
    coords: Sequence[int] = (1,),
    R: int | None | Sequence = None,
    alpha_ref: float = 1.30568,
    include_bounding: bool = False,
) -> SieveReport:
    """Count circles whose selected witness coordinates multiply to an almost prime.

    Parameters
    ----------
    coords : 1-based positions in the witness (1 = the circle's own curvature).
    R : int, None, or a sequence of these
        Maximum number of prime factors of the product; None accepts all.
    include_bounding : bool
        Keep the negative bounding curvature in the census.

    Rows are ``(T, R, i, count, count * log(T)**i / T**alpha_ref)`` with
    ``i = len(coords)``; R=None is reported as ``inf``.
    """
    coords = tuple(coords)
    if not coords or any(c not in (1, 2, 3, 4) for c in coords) or len(set(coords)) != len(coords):
        raise DomainError(f"coords must be distinct positions in 1..4, got {coords}")
    Rs = list(R) if isinstance(R, (list, tuple)) else [R]
    for r in Rs:
        if r is not None and r < 1:
            raise DomainError(f"R must be >= 1, got {r}")
    grid = sorted(T_grid)
    if list(T_grid) != grid or len(set(grid)) != len(grid):
        raise DomainError("T_grid must be strictly increasing")
    if not grid:
        return SieveReport([], alpha_ref)

    need_omega = any(r is not None for r in Rs)
    curv, om = [], []
    for k, w in witness_quadruples(root, grid[-1]):
        if k < 0 and not include_bounding:
            continue
        sel = [w[c - 1] for c in coords]
        if any(x == 0 for x in sel):
            raise ZeroCoordinateError(f"selected coordinate is zero in witness {w}")
        curv.append(k)
        om.append(sum(omega(abs(x)) for x in sel) if need_omega else 0)
    curv = np.array(curv, dtype=object if grid[-1] > 2**62 else np.int64)
    om = np.array(om, dtype=np.int64)
    i = len(coords)
    rows = []
    for T in grid:
        below = curv < T
        for r in Rs:
            ok = below if r is None else below & (om <= r)
            n = int(ok.sum())
            norm = n * math.log(T) ** i / T**alpha_ref if T > 1 else float("nan")
            rows.append((float(T), math.inf if r is None else int(r), i, n, norm))
    return SieveReport(rows, alpha_ref, {"coords": coords, "include_bounding": include_bounding})
