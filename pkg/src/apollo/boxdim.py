"""Box-counting estimate of the residual-set dimension.

The residual set is approximated by the bounding region minus the open
interiors of the generated disks.  A grid box of side eps is counted when it
meets the bounding region and is not contained in a single open disk.
Containment is decided exactly on the four corners and the center of the box
(corners suffice for a convex disk; the center is a cheap extra guard).

Coordinates are Fractions, so the test reduces to integer inequalities after
clearing denominators one disk at a time.
"""
from __future__ import annotations

import math
import warnings
from fractions import Fraction
from typing import Sequence

import numpy as np

from .census import FitResult, fit_power_law
from .errors import EmptyInputError, InsufficientDataError, ResolutionWarning
from .packing import Circle

__all__ = ["box_counts", "box_dimension", "box_count_points", "Frame"]

_INT64_SAFE = 2**62


class Frame:
    """Square ``[x0, x0 + side] x [y0, y0 + side]`` plus the region to cover.

    ``disk`` is ``(cx, cy, r)`` for a bounded region, or None when the whole
    square is the region (strip packings).
    """

    def __init__(self, x0, y0, side, disk=None):
        self.x0, self.y0, self.side = Fraction(x0), Fraction(y0), Fraction(side)
        self.disk = disk

    @classmethod
    def for_circles(cls, circles: Sequence[Circle]) -> "Frame":
        round_ = [c for c in circles if not c.is_line]
        if not round_:
            raise EmptyInputError("no circles to frame")
        lines = [c for c in circles if c.is_line]
        if lines:
            # strip: one period square between the two lines
            width = max(c.center_y for c in lines) - min(c.center_y for c in lines)
            return cls(0, min(c.center_y for c in lines), width)
        neg = [c for c in round_ if c.curvature < 0]
        outer = neg[0] if neg else min(round_, key=lambda c: (c.curvature, c.key))
        r = outer.radius
        return cls(outer.center_x - r, outer.center_y - r, 2 * r, (outer.center_x, outer.center_y, r))


def _lcm(*ints):
    out = 1
    for v in ints:
        out = out * v // math.gcd(out, v)
    return out


def _strictly_inside(frame, eps, n, disk):
    """Open-disk membership on the half-eps lattice near the disk.

    Returns ``(i0, j0, inside)`` where even rows/columns of ``inside`` are box
    corners and odd ones are box centers, starting at box ``(i0, j0)``; None
    when the disk misses the frame.
    """
    cx, cy, r = disk
    lo_i = max(0, math.floor((cx - r - frame.x0) / eps))
    hi_i = min(n, math.ceil((cx + r - frame.x0) / eps))
    lo_j = max(0, math.floor((cy - r - frame.y0) / eps))
    hi_j = min(n, math.ceil((cy + r - frame.y0) / eps))
    if hi_i - lo_i < 1 or hi_j - lo_j < 1:
        return None
    # half-eps steps so corners and centers share one integer lattice
    h = eps / 2
    L = _lcm(frame.x0.denominator, frame.y0.denominator, h.denominator, cx.denominator, cy.denominator, r.denominator)
    H = int(h * L)
    A = int((frame.x0 + 2 * lo_i * h - cx) * L)
    B = int((frame.y0 + 2 * lo_j * h - cy) * L)
    RL = int(r * L)
    ni, nj = 2 * (hi_i - lo_i) + 1, 2 * (hi_j - lo_j) + 1
    span = max(abs(A), abs(A + (ni - 1) * H), abs(B), abs(B + (nj - 1) * H))
    dtype = np.int64 if 2 * span * span + RL * RL < _INT64_SAFE else object
    dx = A + H * np.arange(ni).astype(dtype)
    dy = B + H * np.arange(nj).astype(dtype)
    d2 = dx[:, None] * dx[:, None] + dy[None, :] * dy[None, :]
    inside = d2 < RL * RL
    return lo_i, lo_j, inside


def box_counts(circles: Sequence[Circle], epsilons: Sequence, frame: Frame | None = None) -> list:
    """Number of counted boxes for each box side in ``epsilons``."""
    circles = list(circles)
    if not circles:
        raise EmptyInputError("box counting needs at least one circle")
    frame = frame or Frame.for_circles(circles)
    holes = [c for c in circles if not c.is_line and c.curvature > 0]
    if frame.disk is None:
        # strip frame: neighbours one period away also cover the window
        p = frame.side
        holes = holes + [
            Circle(c.curvature, c.center_x + s, c.center_y, c.depth) for c in holes for s in (-p, p)
        ]
    out = []
    for eps in epsilons:
        eps = Fraction(eps)
        n = math.ceil(frame.side / eps)
        counted = _meets_region(frame, eps, n)
        covered = np.zeros((n, n), dtype=bool)
        for c in holes:
            r = c.radius
            if 2 * r * r < eps * eps:  # too small to hold a box
                continue
            got = _strictly_inside(frame, eps, n, (c.center_x, c.center_y, r))
            if got is None:
                continue
            i0, j0, ins = got
            corners = ins[0::2, 0::2]
            centers = ins[1::2, 1::2]
            box_in = corners[:-1, :-1] & corners[1:, :-1] & corners[:-1, 1:] & corners[1:, 1:] & centers
            ni, nj = box_in.shape
            covered[i0 : i0 + ni, j0 : j0 + nj] |= box_in
        out.append(int((counted & ~covered).sum()))
    return out


def _meets_region(frame, eps, n) -> np.ndarray:
    if frame.disk is None:
        return np.ones((n, n), dtype=bool)
    cx, cy, r = frame.disk
    L = _lcm(frame.x0.denominator, frame.y0.denominator, eps.denominator, cx.denominator, cy.denominator, r.denominator)
    E = int(eps * L)
    ax = int((frame.x0 - cx) * L)
    ay = int((frame.y0 - cy) * L)
    RL = int(r * L)
    span = abs(ax) + (n + 1) * E
    dtype = np.int64 if 2 * span * span < _INT64_SAFE else object
    lo_x = ax + E * np.arange(n).astype(dtype)
    lo_y = ay + E * np.arange(n).astype(dtype)
    # distance from the center to the box, axis by axis (0 when the box spans it)
    gx = np.maximum(np.maximum(lo_x, -(lo_x + E)), 0)
    gy = np.maximum(np.maximum(lo_y, -(lo_y + E)), 0)
    return gx[:, None] * gx[:, None] + gy[None, :] * gy[None, :] <= RL * RL


def box_dimension(
    circles: Sequence[Circle],
    epsilons: Sequence,
    cutoff=None,
    frame: Frame | None = None,
) -> FitResult:
    """Slope of log(box count) against log(1/eps).

    ``cutoff`` is the curvature the circles were generated to; when given and
    smaller than ``4 / min(epsilons)`` a :class:`ResolutionWarning` is issued
    because boxes inside missing disks are then counted.
    """
    eps = [Fraction(e) for e in epsilons]
    if len(eps) < 3:
        raise InsufficientDataError("need at least 3 box sizes")
    if cutoff is not None and Fraction(cutoff) < 4 / min(eps):
        warnings.warn(
            f"cutoff {cutoff} is below 4/min(eps) = {float(4 / min(eps)):g}; counts are biased upward",
            ResolutionWarning,
            stacklevel=2,
        )
    counts = box_counts(circles, eps, frame)
    if min(counts) <= 0:
        raise InsufficientDataError("a box size produced no counted boxes")
    c, alpha, resid = fit_power_law([1 / float(e) for e in eps], counts)
    return FitResult(c, alpha, resid, (float(min(eps)), float(max(eps))))


def box_count_points(points: np.ndarray, x0: float, y0: float, eps: float) -> int:
    """Occupied boxes of side ``eps`` for a point cloud; a plain occupancy counter."""
    pts = np.asarray(points, dtype=float)
    ij = np.floor((pts - np.array([x0, y0])) / eps).astype(np.int64)
    return int(len(np.unique(ij, axis=0)))
