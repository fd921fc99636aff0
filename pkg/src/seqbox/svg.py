"""Static SVG rendering of an EventBox payload.

Marks: container area, quartile lines with alternating band shading (light
grey beyond the fences when outliers are present), data points colored by
the breakdown value, and the two histograms as (stacked) bars. Geometry is
affine: x = value * drawn_width / container_width. All coordinates are
written with two decimals so output is byte-stable.
"""

from __future__ import annotations

#: Event-type and breakdown palettes, assigned by first appearance.
TYPE_PALETTE = (
    "#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#76b7b2",
    "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac",
)
STACK_PALETTE = (
    "#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e",
    "#e6ab02", "#a6761d", "#666666", "#80b1d3", "#fb8072",
    "#b3de69", "#fccde5",
)
BAND_FILLS = ("#ffffff", "#c6dbef", "#9ecae1", "#c6dbef", "#ffffff")
OUTLIER_FILL = "#d9d9d9"

PLOT_W = 600.0
MAX_PLOT_H = 320.0
HIST_H = 90.0
HIST_V_W = 90.0
MARGIN = 40.0
GAP = 12.0


def _f(x: float) -> str:
    return f"{x:.2f}"


def render_eventbox_svg(payload: dict) -> str:
    """Render one EventBox JSON payload (the ``eventbox`` object) to SVG text."""
    summary = payload["summary"]
    fences = payload["fences"]
    show_outliers = payload["config"]["show_outliers"]
    width_value = payload["container"]["width"]
    if not show_outliers:
        width_value = min(width_value, max(fences["upper"], summary["q3"]))
    width_value = max(width_value, 1e-9)

    plot_h = min(payload["container"]["height"], MAX_PLOT_H)
    plot_h = max(plot_h, 24.0)
    x0 = MARGIN + HIST_V_W + GAP
    y0 = MARGIN + HIST_H + GAP
    total_w = x0 + PLOT_W + MARGIN
    total_h = y0 + plot_h + MARGIN + 20

    def sx(value: float) -> float:
        return x0 + min(max(value, 0.0), width_value) / width_value * PLOT_W

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_f(total_w)}" '
        f'height="{_f(total_h)}" viewBox="0 0 {_f(total_w)} {_f(total_h)}">',
        f'<rect x="0" y="0" width="{_f(total_w)}" height="{_f(total_h)}" fill="#ffffff"/>',
    ]

    # container
    type_color = TYPE_PALETTE[_stable_index(payload["event_type"], len(TYPE_PALETTE))]
    parts.append(
        f'<rect x="{_f(x0)}" y="{_f(y0)}" width="{_f(PLOT_W)}" height="{_f(plot_h)}" '
        f'fill="none" stroke="{type_color}" stroke-width="2"/>'
    )
    parts.append(
        f'<text x="{_f(x0)}" y="{_f(MARGIN - 14)}" font-family="sans-serif" '
        f'font-size="14" fill="#333333">{_esc(payload["event_type"])} '
        f'(n={payload["n"]})</text>'
    )

    # quartile bands: [min,q1,q2,q3,max] alternate; beyond fences light grey
    qs = [summary["min"], summary["q1"], summary["q2"], summary["q3"], summary["max"]]
    has_outliers = bool(payload["outlier_ids"])
    lo_f, hi_f = fences["lower"], fences["upper"]
    for i in range(4):
        a = max(qs[i], lo_f) if has_outliers else qs[i]
        b = min(qs[i + 1], hi_f) if has_outliers else qs[i + 1]
        if b > a:
            parts.append(
                f'<rect x="{_f(sx(a))}" y="{_f(y0)}" width="{_f(sx(b) - sx(a))}" '
                f'height="{_f(plot_h)}" fill="{BAND_FILLS[i + 1]}" stroke="none"/>'
            )
    if has_outliers and show_outliers:
        if summary["min"] < lo_f:
            parts.append(_grey_band(sx(summary["min"]), sx(min(lo_f, summary["max"])), y0, plot_h))
        if summary["max"] > hi_f:
            parts.append(_grey_band(sx(max(hi_f, summary["min"])), sx(summary["max"]), y0, plot_h))
    for q in qs:
        x = sx(q)
        if show_outliers or (lo_f <= q <= hi_f):
            parts.append(
                f'<line x1="{_f(x)}" y1="{_f(y0)}" x2="{_f(x)}" y2="{_f(y0 + plot_h)}" '
                f'stroke="#555555" stroke-width="1.5"/>'
            )

    # points
    outlier_ids = set(payload["outlier_ids"])
    ys = [p[2] for p in payload["points"] if not isinstance(p[2], str)]
    y_lo = min(ys) if ys else 0.0
    y_hi = max(ys) if ys else 1.0
    categories = _category_rows(payload["points"])
    b_colors = _stack_colors(sorted({p[3] for p in payload["points"] if p[3] is not None}))
    for oid, x, y, b_val in payload["points"]:
        if oid in outlier_ids and not show_outliers:
            continue
        if isinstance(y, str):
            frac = (categories.index(y) + 0.5) / len(categories)
        elif y_hi > y_lo:
            frac = (y - y_lo) / (y_hi - y_lo)
        else:
            frac = 0.5
        cy = y0 + frac * plot_h  # vertical axis runs top to bottom
        color = b_colors.get(b_val, "#444444")
        parts.append(
            f'<circle cx="{_f(sx(x))}" cy="{_f(cy)}" r="2.5" fill="{color}" '
            f'fill-opacity="0.7"/>'
        )

    parts.extend(_hist_h_marks(payload["hist_h"], x0, y0 - GAP, PLOT_W, HIST_H, width_value))
    if payload.get("hist_v"):
        parts.extend(
            _hist_v_marks(payload["hist_v"], x0 - GAP, y0, HIST_V_W, plot_h)
        )

    parts.append("</svg>")
    return "\n".join(parts)


def _grey_band(xa: float, xb: float, y0: float, h: float) -> str:
    if xb <= xa:
        return ""
    return (
        f'<rect x="{_f(xa)}" y="{_f(y0)}" width="{_f(xb - xa)}" height="{_f(h)}" '
        f'fill="{OUTLIER_FILL}" stroke="none"/>'
    )


def _category_rows(points) -> list[str]:
    cats: dict[str, None] = {}
    for p in points:
        if isinstance(p[2], str):
            cats.setdefault(p[2], None)
    return list(cats)


def _stable_index(name: str, modulo: int) -> int:
    return sum(name.encode()) % modulo


def _stack_colors(keys) -> dict:
    return {k: STACK_PALETTE[i % len(STACK_PALETTE)] for i, k in enumerate(keys)}


def _hist_h_marks(hist: dict, x0: float, y_base: float, w: float, h: float, width_value: float):
    bars = hist["bars"]
    if not bars:
        return []
    peak = max(b["total"] for b in bars) or 1
    marks = []
    n = len(bars)
    stack_keys = sorted({s[0] for b in bars for s in b["stacks"]})
    colors = _stack_colors(stack_keys)
    for i, bar in enumerate(bars):
        if hist["kind"] == "numeric" and len(hist["edges"]) == n + 1:
            xa = x0 + min(hist["edges"][i], width_value) / width_value * w
            xb = x0 + min(hist["edges"][i + 1], width_value) / width_value * w
        else:
            xa = x0 + i / n * w
            xb = x0 + (i + 1) / n * w
        if xb <= xa:
            continue
        total_h = bar["total"] / peak * h
        if bar["stacks"]:
            y = y_base
            for key, count in bar["stacks"]:
                seg = count / peak * h
                marks.append(
                    f'<rect x="{_f(xa + 1)}" y="{_f(y - seg)}" width="{_f(xb - xa - 2)}" '
                    f'height="{_f(seg)}" fill="{colors[key]}"/>'
                )
                y -= seg
        elif bar["total"]:
            marks.append(
                f'<rect x="{_f(xa + 1)}" y="{_f(y_base - total_h)}" '
                f'width="{_f(xb - xa - 2)}" height="{_f(total_h)}" fill="#888888"/>'
            )
    return marks


def _hist_v_marks(hist: dict, x_base: float, y0: float, w: float, h: float):
    bars = hist["bars"]
    if not bars:
        return []
    peak = max(b["total"] for b in bars) or 1
    marks = []
    n = len(bars)
    stack_keys = sorted({s[0] for b in bars for s in b["stacks"]})
    colors = _stack_colors(stack_keys)
    for i, bar in enumerate(bars):
        ya = y0 + i / n * h
        yb = y0 + (i + 1) / n * h
        total_w = bar["total"] / peak * w
        if bar["stacks"]:
            x = x_base
            for key, count in bar["stacks"]:
                seg = count / peak * w
                marks.append(
                    f'<rect x="{_f(x - seg)}" y="{_f(ya + 1)}" width="{_f(seg)}" '
                    f'height="{_f(yb - ya - 2)}" fill="{colors[key]}"/>'
                )
                x -= seg
        elif bar["total"]:
            marks.append(
                f'<rect x="{_f(x_base - total_w)}" y="{_f(ya + 1)}" width="{_f(total_w)}" '
                f'height="{_f(yb - ya - 2)}" fill="#888888"/>'
            )
    return marks


def _esc(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
