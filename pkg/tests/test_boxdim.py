import math
import warnings
from fractions import Fraction as F

import numpy as np
import pytest

from apollo.boxdim import Frame, box_count_points, box_counts, box_dimension
from apollo.errors import EmptyInputError, InsufficientDataError, ResolutionWarning
from apollo.packing import Circle, generate, packing_spec


def _unit_circle():
    # the open unit disk fills the bounding disk, leaving only its boundary
    return [Circle(F(-1), F(0), F(0)), Circle(F(1), F(0), F(0))]


def test_single_circle_dimension_one():
    eps = [F(1, 2**k) for k in range(4, 10)]
    res = box_dimension(_unit_circle(), eps)
    assert abs(res.alpha - 1) < 0.05


def test_filled_square_dimension_two():
    rng = np.random.default_rng(0)
    eps = [2.0**-k for k in range(3, 8)]
    pts = rng.random((400_000, 2))
    counts = [box_count_points(pts, 0.0, 0.0, e) for e in eps]
    slope = np.polyfit(np.log([1 / e for e in eps]), np.log(counts), 1)[0]
    assert abs(slope - 2) < 0.02


def test_point_counter_exact():
    pts = np.array([[0.1, 0.1], [0.15, 0.12], [0.6, 0.9], [0.99, 0.01]])
    assert box_count_points(pts, 0, 0, 0.5) == 3
    assert box_count_points(pts, 0, 0, 1.0) == 1


def _box_counts_oracle(circles, eps):
    """Box-by-box check with rational arithmetic; convexity means a box lies
    in an open disk exactly when its four corners do."""
    fr = Frame.for_circles(circles)
    cx, cy, r = fr.disk
    holes = [c for c in circles if c.curvature > 0]
    n = math.ceil(fr.side / eps)
    total = 0
    for i in range(n):
        for j in range(n):
            x0, y0 = fr.x0 + i * eps, fr.y0 + j * eps
            nx = min(max(cx, x0), x0 + eps)
            ny = min(max(cy, y0), y0 + eps)
            if (nx - cx) ** 2 + (ny - cy) ** 2 > r * r:
                continue
            corners = [(x0, y0), (x0 + eps, y0), (x0, y0 + eps), (x0 + eps, y0 + eps)]
            if any(
                all((px - h.center_x) ** 2 + (py - h.center_y) ** 2 < h.radius**2 for px, py in corners)
                for h in holes
            ):
                continue
            total += 1
    return total


@pytest.mark.parametrize("root", [(-1, 2, 2, 3), (-2, 3, 6, 7)])
def test_counts_match_rational_oracle(root):
    circles = generate(packing_spec(root), 60).circles
    for eps in (F(1, 4), F(1, 8), F(1, 16)):
        assert box_counts(circles, [eps]) == [_box_counts_oracle(circles, eps)]


def test_counts_decrease_with_more_circles():
    spec = packing_spec((-1, 2, 2, 3))
    eps = [F(1, 32)]
    a = box_counts(generate(spec, 50).circles, eps)[0]
    b = box_counts(generate(spec, 500).circles, eps)[0]
    assert b <= a


def test_resolution_warning():
    circles = generate(packing_spec((-1, 2, 2, 3)), 100).circles
    with pytest.warns(ResolutionWarning):
        box_dimension(circles, [F(1, 8), F(1, 16), F(1, 64)], cutoff=100)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        box_dimension(circles, [F(1, 4), F(1, 8), F(1, 16)], cutoff=100)


def test_errors():
    with pytest.raises(EmptyInputError):
        box_counts([], [F(1, 4)])
    with pytest.raises(EmptyInputError):
        box_dimension([], [F(1, 2), F(1, 4), F(1, 8)])
    with pytest.raises(InsufficientDataError):
        box_dimension(_unit_circle(), [F(1, 2), F(1, 4)])


def test_strip_frame_is_period_square():
    circles = generate(packing_spec((0, 0, 1, 1)), 50).circles
    fr = Frame.for_circles(circles)
    assert (fr.x0, fr.y0, fr.side, fr.disk) == (0, 0, 2, None)
    res = box_dimension(circles, [F(1, 2**k) for k in range(2, 6)])
    assert 1.2 < res.alpha < 1.5
