"""CSV, JSON and SVG formats.

Rationals are written as ``p/q`` (or plain integers) so circle files
round-trip exactly.  Floats use 17 significant digits.
"""
from __future__ import annotations

import csv
import io
import json
import math
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import EmptyInputError
from .packing import Circle

__all__ = [
    "fmt_float",
    "fmt_rational",
    "circles_to_csv",
    "read_circles_csv",
    "counts_to_csv",
    "read_counts_csv",
    "sieve_to_csv",
    "dump_json",
    "render_svg",
]

CIRCLE_HEADER = ["curvature", "center_x", "center_y", "radius", "depth"]


def fmt_float(x) -> str:
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if math.isnan(x):
        return "nan"
    return f"{x:.17g}"


def fmt_rational(q) -> str:
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def circles_to_csv(circles: Iterable[Circle]) -> str:
    rows = [
        [fmt_rational(c.curvature), fmt_rational(c.center_x), fmt_rational(c.center_y), fmt_float(c.radius), c.depth]
        for c in circles
    ]
    return _csv_text(CIRCLE_HEADER, rows)


def read_circles_csv(text: str) -> list:
    """Inverse of :func:`circles_to_csv`; curvature 0 rows come back as lines."""
    rd = csv.DictReader(io.StringIO(text))
    if rd.fieldnames != CIRCLE_HEADER:
        raise ValueError(f"expected header {','.join(CIRCLE_HEADER)}, got {rd.fieldnames}")
    out = []
    for row in rd:
        k = Fraction(row["curvature"])
        out.append(Circle(k, Fraction(row["center_x"]), Fraction(row["center_y"]), int(row["depth"]), k == 0))
    return out


def counts_to_csv(rows: Sequence) -> str:
    return _csv_text(["T", "N"], [[fmt_float(T), int(n)] for T, n in rows])


def read_counts_csv(text: str) -> list:
    rd = csv.reader(io.StringIO(text))
    header = next(rd, None)
    if header != ["T", "N"]:
        raise ValueError(f"expected header T,N, got {header}")
    return [(float(T), int(n)) for T, n in rd]


def sieve_to_csv(rows: Sequence) -> str:
    body = [[fmt_float(T), "inf" if R == math.inf else int(R), i, n, fmt_float(v)] for T, R, i, n, v in rows]
    return _csv_text(["T", "R", "i", "count", "normalized"], body)


def _emit(x, indent: int) -> str:
    pad, inner = "  " * indent, "  " * (indent + 1)
    if isinstance(x, bool) or x is None:
        return json.dumps(x)
    if hasattr(x, "item") and not isinstance(x, (list, tuple, dict)):  # numpy scalar
        x = x.item()
    if isinstance(x, float):
        return fmt_float(x) if math.isfinite(x) else json.dumps(fmt_float(x))
    if isinstance(x, int):
        return str(x)
    if isinstance(x, Fraction):
        return json.dumps(fmt_rational(x))
    if isinstance(x, str):
        return json.dumps(x)
    if isinstance(x, dict):
        if not x:
            return "{}"
        items = [f"{inner}{json.dumps(str(k))}: {_emit(v, indent + 1)}" for k, v in sorted(x.items(), key=lambda kv: str(kv[0]))]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(x, (list, tuple)):
        if not x:
            return "[]"
        return "[" + ", ".join(_emit(v, indent + 1) for v in x) + "]"
    return json.dumps(str(x))


def dump_json(obj) -> str:
    """Deterministic JSON: sorted keys, floats at 17 significant digits.

    Non-finite floats become the strings "inf", "-inf", "nan".
    """
    return _emit(obj, 0) + "\n"


def _svg_num(x) -> str:
    return f"{float(x):.10g}"


def render_svg(circles: Sequence[Circle], style: dict | None = None) -> str:
    """SVG with one element per circle, in input order.

    The view box is the bounding circle's square for bounded packings and
    one period window between the lines for strips.
    """
    circles = list(circles)
    if not circles:
        raise EmptyInputError("nothing to render")
    style = {"stroke": "black", "fill": "none", "width": 0.002, **(style or {})}
    lines = [c for c in circles if c.is_line]
    round_ = [c for c in circles if not c.is_line]
    if lines:
        y0 = min(c.center_y for c in lines)
        side = max(c.center_y for c in lines) - y0
        x0 = Fraction(0)
    else:
        neg = [c for c in round_ if c.curvature < 0]
        outer = neg[0] if neg else min(round_, key=lambda c: c.curvature)
        r = outer.radius
        x0, y0, side = outer.center_x - r, outer.center_y - r, 2 * r
    # flip y so the picture has the usual orientation
    pad = side * Fraction(1, 50)
    vb = [x0 - pad, -(y0 + side) - pad, side + 2 * pad, side + 2 * pad]
    width = style["width"] * float(side)
    sw = _svg_num(width)
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        '<svg xmlns="http://www.w3.org/2000/svg" viewBox="{}">'.format(" ".join(_svg_num(v) for v in vb)),
        f'<clipPath id="window"><rect x="{_svg_num(x0)}" y="{_svg_num(-(y0 + side))}" '
        f'width="{_svg_num(side)}" height="{_svg_num(side)}"/></clipPath>',
        f'<g fill="{style["fill"]}" stroke="{style["stroke"]}" stroke-width="{sw}" clip-path="url(#window)">',
    ]
    for c in circles:
        if c.is_line:
            out.append(
                f'<rect x="{_svg_num(x0)}" y="{_svg_num(-c.center_y - width / 2)}" width="{_svg_num(side)}" '
                f'height="{sw}" fill="{style["stroke"]}" stroke="none" data-curvature="0"/>'
            )
        else:
            out.append(
                f'<circle cx="{_svg_num(c.center_x)}" cy="{_svg_num(-c.center_y)}" r="{_svg_num(c.radius)}" '
                f'data-curvature="{fmt_rational(c.curvature)}"/>'
            )
    out += ["</g>", "</svg>", ""]
    return "\n".join(out)
