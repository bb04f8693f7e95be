"""Minimal static SVG line charts."""

from __future__ import annotations

from xml.sax.saxutils import escape

WIDTH, HEIGHT = 640, 400
MARGIN = 60


def _ticks(lo: float, hi: float, count: int = 5) -> list[float]:
    if hi == lo:
        return [lo]
    return [lo + (hi - lo) * i / (count - 1) for i in range(count)]


def line_chart(xs, ys, *, title: str = "", x_label: str = "", y_label: str = "") -> str:
    """Render one polyline with axes and five ticks per axis."""
    xs, ys = [float(x) for x in xs], [float(y) for y in ys]
    if len(xs) != len(ys) or not xs:
        raise ValueError("need equally long, non-empty x and y")
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    pad = 0.05 * (y1 - y0) if y1 > y0 else 1.0
    y0, y1 = y0 - pad, y1 + pad
    if x1 == x0:
        x0, x1 = x0 - 1.0, x1 + 1.0
    pw, ph = WIDTH - 2 * MARGIN, HEIGHT - 2 * MARGIN

    def sx(x):
        return MARGIN + (x - x0) / (x1 - x0) * pw

    def sy(y):
        return HEIGHT - MARGIN - (y - y0) / (y1 - y0) * ph

    pts = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in zip(xs, ys))
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" '
        f'height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<line x1="{MARGIN}" y1="{HEIGHT - MARGIN}" x2="{WIDTH - MARGIN}" '
        f'y2="{HEIGHT - MARGIN}" stroke="black"/>',
        f'<line x1="{MARGIN}" y1="{MARGIN}" x2="{MARGIN}" y2="{HEIGHT - MARGIN}" stroke="black"/>',
    ]
    for t in _ticks(x0, x1):
        out.append(f'<text x="{sx(t):.2f}" y="{HEIGHT - MARGIN + 18}" font-size="11" '
                   f'text-anchor="middle">{t:.4g}</text>')
    for t in _ticks(y0, y1):
        out.append(f'<text x="{MARGIN - 6}" y="{sy(t) + 4:.2f}" font-size="11" '
                   f'text-anchor="end">{t:.6g}</text>')
    out.append(f'<polyline fill="none" stroke="steelblue" stroke-width="1.5" points="{pts}"/>')
    if title:
        out.append(f'<text x="{WIDTH / 2:.0f}" y="{MARGIN / 2:.0f}" font-size="14" '
                   f'text-anchor="middle">{escape(title)}</text>')
    if x_label:
        out.append(f'<text x="{WIDTH / 2:.0f}" y="{HEIGHT - 15}" font-size="12" '
                   f'text-anchor="middle">{escape(x_label)}</text>')
    if y_label:
        out.append(f'<text x="15" y="{HEIGHT / 2:.0f}" font-size="12" text-anchor="middle" '
                   f'transform="rotate(-90 15 {HEIGHT / 2:.0f})">{escape(y_label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
