"""Self-contained SVG scatter plots of 2-D embeddings.

Output is plain SVG 1.1 text built with fixed-precision formatting, so the
same input always produces byte-identical files (handy for diffing runs).
Points are <circle> elements and nothing else is, so a file contains exactly
one circle per sample; legend swatches are <rect>.
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionError

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd",
           "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f")

_WIDTH, _HEIGHT = 640, 480
_MARGIN_L, _MARGIN_R, _MARGIN_T, _MARGIN_B = 64, 24, 24, 52


def _axis_range(values: np.ndarray) -> tuple[float, float]:
    lo, hi = float(np.min(values)), float(np.max(values))
    if hi == lo:
        return lo - 1.0, hi + 1.0
    pad = 0.05 * (hi - lo)
    return lo - pad, hi + pad


def _px(v: float) -> str:
    return f"{v:.2f}"


def render_scatter(coordinates: np.ndarray, labels=None) -> str:
    """Render the first two embedding columns as an SVG scatter plot.

    Labels, when given, pick point colors from a fixed palette and produce a
    legend with one entry per class.
    """
    coords = np.asarray(coordinates, dtype=np.float64)
    if coords.ndim != 2 or coords.shape[1] < 2:
        raise DimensionError("plotting needs at least two embedding columns")
    x, y = coords[:, 0], coords[:, 1]
    x_lo, x_hi = _axis_range(x)
    y_lo, y_hi = _axis_range(y)
    plot_w = _WIDTH - _MARGIN_L - _MARGIN_R
    plot_h = _HEIGHT - _MARGIN_T - _MARGIN_B

    def sx(v):
        return _MARGIN_L + (v - x_lo) / (x_hi - x_lo) * plot_w

    def sy(v):
        return _MARGIN_T + (y_hi - v) / (y_hi - y_lo) * plot_h

    classes = []
    color_of = {}
    if labels is not None:
        classes = [int(c) for c in np.unique(np.asarray(labels))]
        color_of = {c: PALETTE[i % len(PALETTE)] for i, c in enumerate(classes)}

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{_WIDTH}" height="{_HEIGHT}" viewBox="0 0 {_WIDTH} {_HEIGHT}">',
        f'<rect x="0" y="0" width="{_WIDTH}" height="{_HEIGHT}" fill="white"/>',
        f'<rect x="{_MARGIN_L}" y="{_MARGIN_T}" width="{plot_w}" height="{plot_h}" '
        f'fill="none" stroke="#333333" stroke-width="1"/>',
    ]

    n_ticks = 5
    for i in range(n_ticks):
        frac = i / (n_ticks - 1)
        xv = x_lo + frac * (x_hi - x_lo)
        xp = sx(xv)
        parts.append(f'<line x1="{_px(xp)}" y1="{_MARGIN_T + plot_h}" '
                     f'x2="{_px(xp)}" y2="{_MARGIN_T + plot_h + 5}" stroke="#333333"/>')
        parts.append(f'<text x="{_px(xp)}" y="{_MARGIN_T + plot_h + 18}" '
                     f'font-family="sans-serif" font-size="11" text-anchor="middle">{xv:.3g}</text>')
        yv = y_lo + frac * (y_hi - y_lo)
        yp = sy(yv)
        parts.append(f'<line x1="{_MARGIN_L - 5}" y1="{_px(yp)}" '
                     f'x2="{_MARGIN_L}" y2="{_px(yp)}" stroke="#333333"/>')
        parts.append(f'<text x="{_MARGIN_L - 8}" y="{_px(yp + 4)}" '
                     f'font-family="sans-serif" font-size="11" text-anchor="end">{yv:.3g}</text>')

    parts.append(f'<text x="{_MARGIN_L + plot_w / 2:.2f}" y="{_HEIGHT - 14}" '
                 f'font-family="sans-serif" font-size="13" text-anchor="middle">component 1</text>')
    parts.append(f'<text x="18" y="{_MARGIN_T + plot_h / 2:.2f}" font-family="sans-serif" '
                 f'font-size="13" text-anchor="middle" '
                 f'transform="rotate(-90 18 {_MARGIN_T + plot_h / 2:.2f})">component 2</text>')

    label_arr = None if labels is None else np.asarray(labels)
    for i in range(coords.shape[0]):
        fill = PALETTE[0] if label_arr is None else color_of[int(label_arr[i])]
        parts.append(f'<circle cx="{_px(sx(x[i]))}" cy="{_px(sy(y[i]))}" r="3" '
                     f'fill="{fill}" fill-opacity="0.75"/>')

    if classes:
        lx = _MARGIN_L + plot_w - 84
        ly = _MARGIN_T + 10
        for i, c in enumerate(classes):
            yy = ly + 18 * i
            parts.append(f'<rect x="{lx}" y="{yy}" width="12" height="12" '
                         f'fill="{color_of[c]}"/>')
            parts.append(f'<text x="{lx + 17}" y="{yy + 10}" font-family="sans-serif" '
                         f'font-size="12">label {c}</text>')

    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def write_scatter(path, coordinates: np.ndarray, labels=None) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(render_scatter(coordinates, labels))
