"""Minimal deterministic SVG emitter for PE-vs-MD curves.

Hand-rolled on purpose: no library timestamps or generated ids, so fixed
inputs give byte-identical files.
"""

from __future__ import annotations

WIDTH, HEIGHT = 640, 440
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 70, 20, 40, 55
COLORS = {"ssnet": "#000000", "ss": "#1f77b4", "tl": "#d62728"}


def _f(v):
    return f"{v:.2f}"


def _ticks(lo, hi, k=5):
    if hi <= lo:
        hi = lo + 1.0
    step = (hi - lo) / (k - 1)
    return [lo + i * step for i in range(k)]


def pe_md_svg(aggregates, marker_ck=2.5, title=""):
    """One polyline of (mean MD, mean PE) per method, points ordered by c_k,
    with a vertical marker at the model chosen at ``marker_ck``."""
    methods = sorted({a["method"] for a in aggregates})
    xs = [a["mean_md"] for a in aggregates]
    ys = [a["mean_pe"] for a in aggregates]
    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = min(ys), max(ys)
    if x_hi - x_lo < 1e-12:
        x_hi = x_lo + 1.0
    if y_hi - y_lo < 1e-12:
        y_hi = y_lo + 1.0

    def sx(v):
        return MARGIN_L + (v - x_lo) / (x_hi - x_lo) * (WIDTH - MARGIN_L - MARGIN_R)

    def sy(v):
        return HEIGHT - MARGIN_B - (v - y_lo) / (y_hi - y_lo) * (HEIGHT - MARGIN_T - MARGIN_B)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="#ffffff"/>',
        f'<text x="{WIDTH // 2}" y="22" font-family="monospace" font-size="14" '
        f'text-anchor="middle">{title}</text>',
        f'<line x1="{MARGIN_L}" y1="{HEIGHT - MARGIN_B}" x2="{WIDTH - MARGIN_R}" '
        f'y2="{HEIGHT - MARGIN_B}" stroke="#000000"/>',
        f'<line x1="{MARGIN_L}" y1="{MARGIN_T}" x2="{MARGIN_L}" '
        f'y2="{HEIGHT - MARGIN_B}" stroke="#000000"/>',
        f'<text x="{(MARGIN_L + WIDTH - MARGIN_R) // 2}" y="{HEIGHT - 14}" '
        f'font-family="monospace" font-size="12" text-anchor="middle">mean MD</text>',
        f'<text x="16" y="{(MARGIN_T + HEIGHT - MARGIN_B) // 2}" font-family="monospace" '
        f'font-size="12" text-anchor="middle" transform="rotate(-90 16 '
        f'{(MARGIN_T + HEIGHT - MARGIN_B) // 2})">mean PE</text>',
    ]
    for tv in _ticks(x_lo, x_hi):
        x = sx(tv)
        parts.append(f'<line x1="{_f(x)}" y1="{HEIGHT - MARGIN_B}" x2="{_f(x)}" '
                     f'y2="{HEIGHT - MARGIN_B + 5}" stroke="#000000"/>')
        parts.append(f'<text x="{_f(x)}" y="{HEIGHT - MARGIN_B + 18}" '
                     f'font-family="monospace" font-size="10" text-anchor="middle">'
                     f'{tv:.3g}</text>')
    for tv in _ticks(y_lo, y_hi):
        y = sy(tv)
        parts.append(f'<line x1="{MARGIN_L - 5}" y1="{_f(y)}" x2="{MARGIN_L}" '
                     f'y2="{_f(y)}" stroke="#000000"/>')
        parts.append(f'<text x="{MARGIN_L - 8}" y="{_f(y + 3)}" '
                     f'font-family="monospace" font-size="10" text-anchor="end">'
                     f'{tv:.3g}</text>')
    for mi, method in enumerate(methods):
        pts = sorted((a for a in aggregates if a["method"] == method),
                     key=lambda a: a["c_k"])
        color = COLORS.get(method, "#2ca02c")
        poly = " ".join(f"{_f(sx(a['mean_md']))},{_f(sy(a['mean_pe']))}" for a in pts)
        parts.append(f'<polyline points="{poly}" fill="none" stroke="{color}" '
                     f'stroke-width="1.5"/>')
        for a in pts:
            parts.append(f'<circle cx="{_f(sx(a["mean_md"]))}" '
                         f'cy="{_f(sy(a["mean_pe"]))}" r="2" fill="{color}"/>')
        marked = [a for a in pts if abs(a["c_k"] - marker_ck) < 1e-9]
        if marked:
            x = sx(marked[0]["mean_md"])
            parts.append(f'<line x1="{_f(x)}" y1="{MARGIN_T}" x2="{_f(x)}" '
                         f'y2="{HEIGHT - MARGIN_B}" stroke="{color}" '
                         f'stroke-dasharray="4 3"/>')
        parts.append(f'<text x="{WIDTH - MARGIN_R - 8}" y="{MARGIN_T + 14 + 14 * mi}" '
                     f'font-family="monospace" font-size="11" text-anchor="end" '
                     f'fill="{color}">{method}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
