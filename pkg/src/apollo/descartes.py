"""Exact arithmetic on Descartes quadruples.

Curvature vectors are row vectors acted on from the right by the four
Apollonian generators; ``S_i`` replaces coordinate ``i`` by twice the sum of
the other three minus itself.  Everything here is integer or
:class:`fractions.Fraction` arithmetic.

Coordinates are 1-based in the public API (generator index ``i`` in 1..4) to
match the usual naming of the generators; tuples are indexed from 0 internally.
"""
from __future__ import annotations

from fractions import Fraction
from math import isqrt
from typing import NamedTuple, Sequence

from .errors import NoRealSolutionError, NonDescartesError, NonTerminatingError

__all__ = [
    "Quadruple",
    "AugmentedQuadruple",
    "Partners",
    "eval_form",
    "bilinear_form",
    "apply_generator",
    "apply_generator_augmented",
    "augmented_residuals",
    "is_valid_augmented",
    "reduce_to_root",
    "apply_word",
    "is_root",
    "descartes_partner",
    "GENERATOR_MATRICES",
]


class Quadruple(NamedTuple):
    """Four signed integer curvatures."""

    k1: int
    k2: int
    k3: int
    k4: int


class AugmentedQuadruple(NamedTuple):
    """Curvatures plus the linear data that pins down the four circles.

    ``bx``/``by`` hold curvature times center for circles.  For a line
    (curvature 0) they hold the unit normal pointing away from the packing,
    and ``cocurv`` holds twice the signed offset ``n . p`` of the line; for a
    circle ``cocurv`` is ``k |z|^2 - 1/k``.  All four rows transform by the
    same generator matrix.
    """

    curvatures: Quadruple
    bx: tuple
    by: tuple
    cocurv: tuple


class Partners(NamedTuple):
    """The two Descartes solutions for a fourth curvature.

    ``exact`` is True when the radicand is a rational square, in which case
    ``plus`` and ``minus`` are Fractions; otherwise they are floats.
    """

    plus: object
    minus: object
    exact: bool


def _matrix(i: int) -> tuple:
    rows = [[int(r == c) for c in range(4)] for r in range(4)]
    for r in range(4):
        rows[r][i] = 2
    rows[i][i] = -1
    return tuple(tuple(r) for r in rows)


#: ``GENERATOR_MATRICES[i - 1]`` is S_i; a row vector ``v`` maps to ``v @ S_i``.
GENERATOR_MATRICES = tuple(_matrix(i) for i in range(4))


def eval_form(v: Sequence) -> int:
    """Q(v) = 2 * sum(v_i^2) - (sum v_i)^2, exactly."""
    s = sum(v)
    return 2 * sum(x * x for x in v) - s * s


def bilinear_form(u: Sequence, v: Sequence):
    """Polarization B(u, v) of Q, normalized so that B(v, v) = Q(v)."""
    return 2 * sum(a * b for a, b in zip(u, v)) - sum(u) * sum(v)


def _check_index(i: int) -> int:
    if i not in (1, 2, 3, 4):
        raise ValueError(f"generator index must be in 1..4, got {i!r}")
    return i - 1


def _swap_row(row: Sequence, j: int) -> tuple:
    new = 2 * (sum(row) - row[j]) - row[j]
    return tuple(new if t == j else x for t, x in enumerate(row))


def apply_generator(v: Sequence, i: int) -> Quadruple:
    """Right-multiply ``v`` by S_i."""
    return Quadruple(*_swap_row(tuple(v), _check_index(i)))


def apply_generator_augmented(w: AugmentedQuadruple, i: int) -> AugmentedQuadruple:
    """Apply S_i to all four rows of an augmented quadruple."""
    j = _check_index(i)
    return AugmentedQuadruple(
        Quadruple(*_swap_row(w.curvatures, j)),
        _swap_row(w.bx, j),
        _swap_row(w.by, j),
        _swap_row(w.cocurv, j),
    )


def apply_word(v, word: Sequence[int]):
    """Apply generators left to right; works for plain and augmented quadruples."""
    step = apply_generator_augmented if isinstance(v, AugmentedQuadruple) else apply_generator
    for i in word:
        v = step(v, i)
    return v


def augmented_residuals(w: AugmentedQuadruple) -> dict:
    """Residuals of every quadratic identity an oriented configuration obeys.

    All entries are zero for a geometrically valid configuration.  The
    complex condition ``Q(k_j z_j) = 0`` shows up as ``Q(bx) - Q(by)`` and
    ``B(bx, by)``.
    """
    k, bx, by, kb = w.curvatures, w.bx, w.by, w.cocurv
    return {
        "Q(k)": eval_form(k),
        "Q(kbar)": eval_form(kb),
        "B(kbar,k)+8": bilinear_form(kb, k) + 8,
        "Q(bx)-Q(by)": eval_form(bx) - eval_form(by),
        "B(bx,by)": bilinear_form(bx, by),
        "Q(bx)-4": eval_form(bx) - 4,
        "B(k,bx)": bilinear_form(k, bx),
        "B(k,by)": bilinear_form(k, by),
        "B(kbar,bx)": bilinear_form(kb, bx),
        "B(kbar,by)": bilinear_form(kb, by),
    }


def is_valid_augmented(w: AugmentedQuadruple) -> bool:
    return not any(augmented_residuals(w).values())


def is_root(v: Sequence) -> bool:
    """True when no single generator strictly lowers the coordinate sum."""
    s = sum(v)
    return all(4 * x - 2 * s <= 0 for x in v)


def reduce_to_root(v: Sequence, max_steps: int = 1_000_000) -> tuple[Quadruple, list[int]]:
    """Reduce a Descartes quadruple to its root.

    Repeatedly applies the generator at the largest coordinate while that
    strictly lowers the coordinate sum.  Returns ``(root, word)`` where
    ``word`` lists the generators in the order applied, so that
    ``apply_word(root, reversed(word)) == v``.

    Raises
    ------
    NonDescartesError
        If ``Q(v) != 0``.
    NonTerminatingError
        If the coordinate sum is not positive (no packing has such a
        quadruple) or ``max_steps`` is exhausted.
    """
    v = Quadruple(*v)
    if eval_form(v) != 0:
        raise NonDescartesError(f"{tuple(v)} fails the Descartes form: Q = {eval_form(v)}")
    word: list[int] = []
    for _ in range(max_steps):
        s = sum(v)
        if s <= 0:
            raise NonTerminatingError(f"coordinate sum {s} is not positive; not a packing quadruple")
        j = max(range(4), key=lambda t: (v[t], -t))
        if 4 * v[j] - 2 * s <= 0:
            return v, word
        v = Quadruple(*_swap_row(v, j))
        word.append(j + 1)
    raise NonTerminatingError(f"no root reached within {max_steps} steps")


def _rational_sqrt(q: Fraction):
    """Exact square root of a nonnegative Fraction, or None if irrational."""
    n, d = q.numerator, q.denominator
    rn, rd = isqrt(n), isqrt(d)
    if rn * rn == n and rd * rd == d:
        return Fraction(rn, rd)
    return None


def descartes_partner(k1, k2, k3) -> Partners:
    """Both curvatures of circles tangent to three mutually tangent circles.

    ``k4 = k1 + k2 + k3 +/- 2 sqrt(k1 k2 + k2 k3 + k3 k1)``.  The two
    solutions always sum to ``2 (k1 + k2 + k3)``.
    """
    k1, k2, k3 = Fraction(k1), Fraction(k2), Fraction(k3)
    rad = k1 * k2 + k2 * k3 + k3 * k1
    if rad < 0:
        raise NoRealSolutionError(f"radicand {rad} < 0 for curvatures {k1}, {k2}, {k3}")
    s = k1 + k2 + k3
    root = _rational_sqrt(rad)
    if root is not None:
        return Partners(s + 2 * root, s - 2 * root, True)
    r = float(rad) ** 0.5
    return Partners(float(s) + 2 * r, float(s) - 2 * r, False)
