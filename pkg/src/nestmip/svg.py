"""SVG 1.1 rendering of a placement on the strip."""
from __future__ import annotations

from xml.sax.saxutils import escape

_PALETTE = ("#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f",
            "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac")


def _fmt(v):
    return f"{v:.6g}"


def render_svg(instance, placement, title=None) -> str:
    """Board as an unfilled rectangle, pieces as half-transparent filled polygons.

    The drawing uses instance units; y is flipped so the strip bottom is at
    the bottom of the image.
    """
    L, H = placement.L, instance.H
    pad = 0.02 * max(L, H)
    font = 0.05 * min(L, H) if min(L, H) > 0 else 1.0
    out = [
        '<?xml version="1.0" encoding="UTF-8" standalone="no"?>',
        '<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'viewBox="{_fmt(-pad)} {_fmt(-pad)} {_fmt(L + 2 * pad)} {_fmt(H + 2 * pad)}">',
        f"<title>{escape(title or instance.name)}</title>",
        f'<rect x="0" y="0" width="{_fmt(L)}" height="{_fmt(H)}" fill="none" stroke="black" '
        'stroke-width="1" vector-effect="non-scaling-stroke"/>',
    ]
    for i, (x, y) in enumerate(placement.positions, start=1):
        t = instance.piece_type(i)
        rx, ry = t.ref_point
        pts = [(px - rx + x, H - (py - ry + y)) for px, py in t.polygon.vertices]
        colour = _PALETTE[t.type_id % len(_PALETTE)]
        path = " ".join(f"{_fmt(a)},{_fmt(b)}" for a, b in pts)
        out.append(f'<polygon points="{path}" fill="{colour}" fill-opacity="0.5" stroke="black" '
                   'stroke-width="0.5" vector-effect="non-scaling-stroke"/>')
        cx = sum(p[0] for p in pts) / len(pts)
        cy = sum(p[1] for p in pts) / len(pts)
        out.append(f'<text x="{_fmt(cx)}" y="{_fmt(cy)}" font-size="{_fmt(font)}" '
                   f'text-anchor="middle" dominant-baseline="middle">{i}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_svg(path, instance, placement, title=None) -> None:
    with open(path, "w") as fh:
        fh.write(render_svg(instance, placement, title))
