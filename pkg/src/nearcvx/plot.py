"""SVG pictures of planar instances.

Exact vertices are converted to floats only for drawing.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Sequence

from .errors import EmptySetError, UnsupportedShape
from .exact import box
from .sets import CarvedPolyhedron, Polyhedron, as_carved, vertices

SIZE = 480
PAD = 30


def _clip(rows, view) -> list:
    try:
        P = Polyhedron(2, list(rows) + box(view))
    except EmptySetError:
        return []
    pts = vertices(P)
    if len(pts) > 2:
        cx = sum(p[0] for p in pts) / len(pts)
        cy = sum(p[1] for p in pts) / len(pts)
        pts.sort(key=lambda p: math.atan2(p[1] - cy, p[0] - cx))
    return pts


def default_view(omega) -> list[tuple[Fraction, Fraction]]:
    """Bounding box of the hull with a margin; ``[-5, 5]^2`` clips unbounded hulls."""
    pts = _clip(as_carved(omega).hull.constraints, [(-5, 5), (-5, 5)])
    if not pts:
        return [(Fraction(-5), Fraction(5))] * 2
    out = []
    for d in range(2):
        lo, hi = min(p[d] for p in pts), max(p[d] for p in pts)
        m = max((hi - lo) / 8, Fraction(1, 4))
        out.append((lo - m, hi + m))
    return out


class _Canvas:
    def __init__(self, view):
        self.view = view
        (x0, x1), (y0, y1) = view
        self.sx = (SIZE - 2 * PAD) / float(x1 - x0)
        self.sy = (SIZE - 2 * PAD) / float(y1 - y0)
        self.items = []

    def xy(self, p):
        (x0, _), (_, y1) = self.view
        return PAD + float(p[0] - x0) * self.sx, PAD + float(y1 - p[1]) * self.sy

    def shape(self, pts, fill, stroke, dashed=False, label=""):
        dash = ' stroke-dasharray="5,3"' if dashed else ""
        title = f"<title>{label}</title>" if label else ""
        if len(pts) == 1:
            x, y = self.xy(pts[0])
            self.items.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="4" fill="white" stroke="{stroke}" stroke-width="2">{title}</circle>')
        elif len(pts) == 2:
            (ax, ay), (bx, by) = self.xy(pts[0]), self.xy(pts[1])
            self.items.append(
                f'<line x1="{ax:.2f}" y1="{ay:.2f}" x2="{bx:.2f}" y2="{by:.2f}" stroke="{stroke}" stroke-width="3"{dash}>{title}</line>'
            )
        elif pts:
            coords = " ".join("{:.2f},{:.2f}".format(*self.xy(p)) for p in pts)
            self.items.append(f'<polygon points="{coords}" fill="{fill}" stroke="{stroke}" stroke-width="1.5"{dash}>{title}</polygon>')

    def dot(self, p, color, label=""):
        x, y = self.xy(p)
        self.items.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="3.5" fill="{color}"><title>{label}</title></circle>')

    def svg(self, caption=""):
        (x0, x1), (y0, y1) = self.view
        head = f'<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE + 20}" viewBox="0 0 {SIZE} {SIZE + 20}">'
        frame = f'<rect x="{PAD}" y="{PAD}" width="{SIZE - 2 * PAD}" height="{SIZE - 2 * PAD}" fill="none" stroke="#999"/>'
        axes = (
            f'<text x="{PAD}" y="{SIZE - PAD + 15}" font-size="11">x1 in [{x0}, {x1}], x2 in [{y0}, {y1}]</text>'
            f'<text x="{PAD}" y="{SIZE + 12}" font-size="11">{caption}</text>'
        )
        return "\n".join([head, frame, *self.items, axes, "</svg>"]) + "\n"


def render(omega: CarvedPolyhedron, solutions: Polyhedron | None = None, points: Sequence = (), view=None, caption="") -> str:
    """SVG with the hull (grey), removed cells (red, dashed), ``S1`` (green) and points (black)."""
    omega = as_carved(omega)
    if omega.dim != 2:
        raise UnsupportedShape(f"unsupported-dimension: plots need n = 2, got {omega.dim}")
    view = view or default_view(omega)
    c = _Canvas(view)
    c.shape(_clip(omega.hull.constraints, view), "#e6e6e6", "#555", label="closure")
    if solutions is not None:
        c.shape(_clip(solutions.constraints, view), "#9fd89f", "#2a7a2a", label="S1")
    for cell in omega.removed:
        c.shape(_clip(cell.closure_rows(), view), "#f4b6b6", "#c0392b", dashed=True, label=str(cell))
    for p in points:
        c.dot(p, "black", ",".join(str(t) for t in p))
    return c.svg(caption)


__all__ = ["default_view", "render"]
