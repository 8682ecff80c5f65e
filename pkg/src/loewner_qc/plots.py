"""Dependency-free SVG output: grid-line images and |mu| heatmaps."""
from __future__ import annotations

import math

import numpy as np

PALETTE = ("#f7fbff", "#deebf7", "#c6dbef", "#9ecae1", "#6baed6", "#4292c6", "#2171b5", "#084594")

_W = 480


def _frame(bounds, pad=0.05):
    x0, x1, y0, y1 = bounds
    dx, dy = (x1 - x0) or 1.0, (y1 - y0) or 1.0
    x0, x1 = x0 - pad * dx, x1 + pad * dx
    y0, y1 = y0 - pad * dy, y1 + pad * dy
    return x0, x1, y0, y1


def _header(bounds):
    x0, x1, y0, y1 = bounds
    h = _W * (y1 - y0) / (x1 - x0)
    # flip y so that Im grows upwards
    return (f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{h:.0f}" '
            f'viewBox="{x0:.6g} {-y1:.6g} {x1 - x0:.6g} {y1 - y0:.6g}" preserveAspectRatio="none">\n')


def _finite_bounds(w):
    w = np.asarray(w, dtype=complex).ravel()
    w = w[np.isfinite(w)]
    if w.size == 0:
        return (-1.0, 1.0, -1.0, 1.0)
    return (float(w.real.min()), float(w.real.max()), float(w.imag.min()), float(w.imag.max()))


def _polyline(pts, stroke, width):
    segs, cur = [], []
    for p in pts:
        if np.isfinite(p):
            cur.append(f"{p.real:.6g},{-p.imag:.6g}")
        elif cur:
            segs.append(cur)
            cur = []
    if cur:
        segs.append(cur)
    return "".join(f'<polyline fill="none" stroke="{stroke}" stroke-width="{width:.4g}" '
                   f'points="{" ".join(s)}"/>\n' for s in segs if len(s) > 1)


def grid_image_svg(F, grid, path=None, samples: int = 64, bounds=None) -> str:
    """Images of the horizontal and vertical grid lines under F."""
    xs, ys = grid.xs(), grid.ys()
    fx = np.linspace(xs[0], xs[-1], samples)
    fy = np.linspace(ys[0], ys[-1], samples)
    rows = [F(fx + 1j * y) for y in ys]
    cols = [F(x + 1j * fy) for x in xs]
    b = _frame(bounds or _finite_bounds(np.concatenate([np.ravel(r) for r in rows + cols])))
    width = 0.002 * (b[1] - b[0])
    body = "".join(_polyline(np.asarray(r).ravel(), PALETTE[6], width) for r in rows)
    body += "".join(_polyline(np.asarray(c).ravel(), PALETTE[4], width) for c in cols)
    svg = _header(b) + body + "</svg>\n"
    if path is not None:
        with open(path, "w") as fh:
            fh.write(svg)
    return svg


def heatmap_svg(grid, values, path=None, vmax: float | None = None) -> str:
    """|mu| (or any non-negative field) on a grid, one rect per cell."""
    xs, ys = np.asarray(grid.xs()), np.asarray(grid.ys())
    v = np.asarray(values, dtype=float).reshape(len(ys), len(xs))
    top = vmax if vmax is not None else (np.nanmax(v) if np.any(np.isfinite(v)) else 1.0)
    top = top if top > 0 else 1.0
    b = (float(xs[0]), float(xs[-1]), float(ys[0]), float(ys[-1]))
    ex = np.concatenate([[xs[0]], (xs[1:] + xs[:-1]) / 2, [xs[-1]]])
    ey = np.concatenate([[ys[0]], (ys[1:] + ys[:-1]) / 2, [ys[-1]]])
    out = [_header(b)]
    n = len(PALETTE)
    for j in range(len(ys)):
        for i in range(len(xs)):
            val = v[j, i]
            colour = "#bbbbbb" if not math.isfinite(val) else PALETTE[min(n - 1, int(n * val / top))]
            out.append(f'<rect x="{ex[i]:.6g}" y="{-ey[j + 1]:.6g}" width="{ex[i + 1] - ex[i]:.6g}" '
                       f'height="{ey[j + 1] - ey[j]:.6g}" fill="{colour}"/>\n')
    out.append("</svg>\n")
    svg = "".join(out)
    if path is not None:
        with open(path, "w") as fh:
            fh.write(svg)
    return svg


def curves_svg(curves, path=None) -> str:
    """Complex-valued polylines, one colour per curve from the palette's dark end."""
    curves = [np.asarray(c, dtype=complex).ravel() for c in curves]
    b = _frame(_finite_bounds(np.concatenate(curves) if curves else np.zeros(1)))
    width = 0.004 * (b[1] - b[0])
    body = "".join(_polyline(c, PALETTE[7 - (i % 4)], width) for i, c in enumerate(curves))
    svg = _header(b) + body + "</svg>\n"
    if path is not None:
        with open(path, "w") as fh:
            fh.write(svg)
    return svg


def viewbox(svg: str) -> str:
    start = svg.index('viewBox="') + len('viewBox="')
    return svg[start:svg.index('"', start)]
