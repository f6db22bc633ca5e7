"""Minimal self-contained SVG histograms with reference curves."""

from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e")


def _ticks(lo, hi, n=5):
    if not np.isfinite(hi) or hi <= lo:
        hi = lo + 1
    step = 10 ** np.floor(np.log10((hi - lo) / n))
    for m in (1, 2, 5, 10):
        if (hi - lo) / (step * m) <= n:
            step *= m
            break
    start = np.ceil(lo / step) * step
    return np.arange(start, hi + step * 1e-9, step)


def histogram_svg(values, bins, title="", xlabel="", curves=None, density=True, width=480, height=320) -> str:
    """Histogram of ``values`` over bin edges ``bins`` plus optional
    ``curves`` = [(label, callable)] evaluated on the bin range."""
    values = np.asarray(values, dtype=float)
    edges = np.asarray(bins, dtype=float)
    values = values[np.isfinite(values)]
    if values.size:
        counts, _ = np.histogram(values, bins=edges, density=density)
    else:
        counts = np.zeros(len(edges) - 1)
    x0, x1 = float(edges[0]), float(edges[-1])
    xs = np.linspace(x0, x1, 200)
    ys = [(lbl, np.asarray(f(xs), dtype=float)) for lbl, f in (curves or [])]
    ymax = max([counts.max(initial=0.0)] + [y.max(initial=0.0) for _, y in ys] + [1e-12]) * 1.1

    ml, mr, mt, mb = 56, 16, 32, 44
    pw, ph = width - ml - mr, height - mt - mb
    sx = lambda x: ml + (x - x0) / (x1 - x0) * pw
    sy = lambda y: mt + ph - y / ymax * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2:.1f}" y="18" text-anchor="middle" font-size="13">{escape(title)}</text>',
    ]
    for c, a, b in zip(counts, edges[:-1], edges[1:]):
        if c <= 0:
            continue
        out.append(
            f'<rect x="{sx(a):.2f}" y="{sy(c):.2f}" width="{max(sx(b) - sx(a) - 0.5, 0.5):.2f}" '
            f'height="{sy(0) - sy(c):.2f}" fill="#9ecae1" stroke="#6baed6" stroke-width="0.5"/>'
        )
    for i, (lbl, y) in enumerate(ys):
        pts = " ".join(f"{sx(x):.2f},{sy(min(v, ymax)):.2f}" for x, v in zip(xs, y))
        col = PALETTE[(i + 1) % len(PALETTE)]
        out.append(f'<polyline points="{pts}" fill="none" stroke="{col}" stroke-width="1.5"/>')
        out.append(f'<line x1="{width - mr - 110}" x2="{width - mr - 92}" y1="{mt + 12 + 14 * i}" '
                   f'y2="{mt + 12 + 14 * i}" stroke="{col}" stroke-width="2"/>')
        out.append(f'<text x="{width - mr - 88}" y="{mt + 16 + 14 * i}">{escape(lbl)}</text>')
    # axes
    out.append(f'<line x1="{ml}" y1="{mt + ph}" x2="{ml + pw}" y2="{mt + ph}" stroke="black"/>')
    out.append(f'<line x1="{ml}" y1="{mt}" x2="{ml}" y2="{mt + ph}" stroke="black"/>')
    for t in _ticks(x0, x1):
        out.append(f'<line x1="{sx(t):.2f}" x2="{sx(t):.2f}" y1="{mt + ph}" y2="{mt + ph + 4}" stroke="black"/>')
        out.append(f'<text x="{sx(t):.2f}" y="{mt + ph + 16}" text-anchor="middle">{t:g}</text>')
    for t in _ticks(0, ymax / 1.1):
        out.append(f'<line x1="{ml - 4}" x2="{ml}" y1="{sy(t):.2f}" y2="{sy(t):.2f}" stroke="black"/>')
        out.append(f'<text x="{ml - 6}" y="{sy(t) + 4:.2f}" text-anchor="end">{t:g}</text>')
    out.append(f'<text x="{ml + pw / 2:.1f}" y="{height - 8}" text-anchor="middle">{escape(xlabel)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
