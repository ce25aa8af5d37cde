"""CSV and minimal SVG writers."""
from __future__ import annotations

from pathlib import Path
from typing import Sequence

import numpy as np

SVG_W, SVG_H = 800, 500
_MARGIN = 50
_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd")


def write_csv(path, header: Sequence[str], *columns: np.ndarray) -> Path:
    """Comma-separated, 12 significant digits, LF line endings."""
    path = Path(path)
    cols = [np.asarray(c, dtype=float) for c in columns]
    lines = [",".join(header)]
    for row in zip(*cols):
        lines.append(",".join(f"{v:.12g}" for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")
    return path


def read_csv(path) -> tuple[list[str], np.ndarray]:
    text = Path(path).read_text(encoding="utf-8").splitlines()
    header = text[0].split(",")
    data = np.array([[float(v) for v in line.split(",")] for line in text[1:] if line])
    return header, data


def write_svg(path, series: Sequence[tuple[str, np.ndarray, np.ndarray]], max_points: int = 2000, title: str = "") -> Path:
    """One polyline per ``(label, t, x)`` series in a fixed 800x500 viewport."""
    path = Path(path)
    ts = np.concatenate([np.asarray(s[1], dtype=float) for s in series])
    xs = np.concatenate([np.asarray(s[2], dtype=float) for s in series])
    t_lo, t_hi = float(ts.min()), float(ts.max())
    x_lo, x_hi = float(xs.min()), float(xs.max())
    if x_hi == x_lo:
        x_hi = x_lo + 1.0
    if t_hi == t_lo:
        t_hi = t_lo + 1.0
    pw, ph = SVG_W - 2 * _MARGIN, SVG_H - 2 * _MARGIN

    def px(t):
        return _MARGIN + (t - t_lo) / (t_hi - t_lo) * pw

    def py(x):
        return SVG_H - _MARGIN - (x - x_lo) / (x_hi - x_lo) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{SVG_W}" height="{SVG_H}" viewBox="0 0 {SVG_W} {SVG_H}">',
        f'<rect x="{_MARGIN}" y="{_MARGIN}" width="{pw}" height="{ph}" fill="none" stroke="#888"/>',
        f'<text x="{_MARGIN}" y="{SVG_H - 15}" font-size="12">t: {t_lo:.4g} .. {t_hi:.4g}</text>',
        f'<text x="5" y="{_MARGIN - 10}" font-size="12">x: {x_lo:.4g} .. {x_hi:.4g}</text>',
    ]
    if title:
        out.append(f'<text x="{SVG_W // 2}" y="25" font-size="14" text-anchor="middle">{title}</text>')
    for i, (label, t, x) in enumerate(series):
        t = np.asarray(t, dtype=float)
        x = np.asarray(x, dtype=float)
        stride = max(1, int(np.ceil(t.size / max_points)))
        idx = np.unique(np.append(np.arange(0, t.size, stride), t.size - 1))
        pts = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(t[idx], x[idx]))
        color = _COLORS[i % len(_COLORS)]
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"><title>{label}</title></polyline>')
        out.append(f'<text x="{SVG_W - _MARGIN - 120}" y="{_MARGIN + 18 * (i + 1)}" font-size="12" fill="{color}">{label}</text>')
    out.append("</svg>")
    path.write_text("\n".join(out) + "\n", encoding="utf-8", newline="\n")
    return path
