"""Self-contained SVG box plots and heatmaps, no plotting dependency."""

from __future__ import annotations

FONT = "font-family=\"Helvetica, Arial, sans-serif\""

# diverging-free two-color ramp: pale yellow -> deep orange-red
_RAMP_LO = (255, 245, 204)
_RAMP_HI = (190, 54, 27)
_MISSING_FILL = "#e8e8e8"
_BOX_FILL = "#9ecae1"
_BOX_EDGE = "#2b5d8a"


def _ramp(t: float) -> str:
    t = min(max(t, 0.0), 1.0)
    r, g, b = (
        round(_RAMP_LO[i] + t * (_RAMP_HI[i] - _RAMP_LO[i])) for i in range(3)
    )
    return f"#{r:02x}{g:02x}{b:02x}"


def _text(x: float, y: float, s: str, size: int = 12, anchor: str = "middle",
          extra: str = "") -> str:
    return (
        f'<text x="{x:.1f}" y="{y:.1f}" {FONT} font-size="{size}" '
        f'text-anchor="{anchor}" {extra}>{s}</text>'
    )


def heatmap_svg(matrix, decimals: int = 3) -> str:
    """Render one HeatmapMatrix; missing matrix cells show as gray n/a."""
    cell_w, cell_h = 86, 44
    left, top = 70, 56
    width = left + cell_w * len(matrix.cols) + 20
    height = top + cell_h * len(matrix.rows) + 24

    values = [c for row in matrix.cells for c in row if c is not None]
    vmin = min(values) if values else 0.0
    vmax = max(values) if values else 0.0
    span = vmax - vmin

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        _text(left + cell_w * len(matrix.cols) / 2, 24, matrix.metric, size=15,
              extra='font-weight="bold"'),
    ]
    for j, col in enumerate(matrix.cols):
        parts.append(_text(left + cell_w * (j + 0.5), top - 10, col))
    for i, row in enumerate(matrix.rows):
        parts.append(_text(left - 12, top + cell_h * (i + 0.65), row, anchor="end"))
        for j, _ in enumerate(matrix.cols):
            x, y = left + cell_w * j, top + cell_h * i
            value = matrix.cells[i][j]
            if value is None:
                parts.append(
                    f'<rect x="{x}" y="{y}" width="{cell_w}" height="{cell_h}" '
                    f'fill="{_MISSING_FILL}" stroke="white" stroke-width="2"/>'
                )
                parts.append(_text(x + cell_w / 2, y + cell_h / 2 + 4, "n/a",
                                   size=11, extra='fill="#888888"'))
                continue
            t = 0.5 if span == 0 else (value - vmin) / span
            parts.append(
                f'<rect x="{x}" y="{y}" width="{cell_w}" height="{cell_h}" '
                f'fill="{_ramp(t)}" stroke="white" stroke-width="2"/>'
            )
            fill = "#ffffff" if t > 0.62 else "#222222"
            parts.append(_text(x + cell_w / 2, y + cell_h / 2 + 4,
                               f"{value:.{decimals}f}", size=12,
                               extra=f'fill="{fill}"'))
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _boxplot_panel(pools: dict, metric: str, ox: float, oy: float,
                   panel_w: float, panel_h: float) -> list[str]:
    experiments = sorted(pools)
    entries = [(e, pools[e][metric]) for e in experiments if metric in pools[e]]
    parts = [_text(ox + panel_w / 2, oy - 8, metric, size=13,
                   extra='font-weight="bold"')]
    if not entries:
        return parts

    lo = min(min(e["values"]) for _, e in entries)
    hi = max(max(e["values"]) for _, e in entries)
    if hi == lo:
        hi = lo + 1.0
    pad = 0.06 * (hi - lo)
    lo, hi = lo - pad, hi + pad

    def sy(v: float) -> float:
        return oy + panel_h - (v - lo) / (hi - lo) * panel_h

    parts.append(
        f'<rect x="{ox}" y="{oy}" width="{panel_w}" height="{panel_h}" '
        f'fill="none" stroke="#cccccc"/>'
    )
    for tick in (lo + pad, (lo + hi) / 2, hi - pad):
        parts.append(_text(ox - 6, sy(tick) + 4, f"{tick:.2f}", size=10, anchor="end"))

    slot = panel_w / max(len(entries), 1)
    box_w = slot * 0.46
    for k, (experiment_id, e) in enumerate(entries):
        cx = ox + slot * (k + 0.5)
        parts.append(_text(cx, oy + panel_h + 16, experiment_id, size=11))
        x0 = cx - box_w / 2
        # whiskers
        parts.append(f'<line x1="{cx:.1f}" y1="{sy(e["whisker_lo"]):.1f}" '
                     f'x2="{cx:.1f}" y2="{sy(e["q1"]):.1f}" stroke="{_BOX_EDGE}"/>')
        parts.append(f'<line x1="{cx:.1f}" y1="{sy(e["q3"]):.1f}" '
                     f'x2="{cx:.1f}" y2="{sy(e["whisker_hi"]):.1f}" stroke="{_BOX_EDGE}"/>')
        for w in ("whisker_lo", "whisker_hi"):
            parts.append(f'<line x1="{cx - box_w / 3:.1f}" y1="{sy(e[w]):.1f}" '
                         f'x2="{cx + box_w / 3:.1f}" y2="{sy(e[w]):.1f}" '
                         f'stroke="{_BOX_EDGE}"/>')
        # box and median
        y_q3, y_q1 = sy(e["q3"]), sy(e["q1"])
        parts.append(f'<rect x="{x0:.1f}" y="{y_q3:.1f}" width="{box_w:.1f}" '
                     f'height="{max(y_q1 - y_q3, 0.5):.1f}" fill="{_BOX_FILL}" '
                     f'stroke="{_BOX_EDGE}"/>')
        parts.append(f'<line x1="{x0:.1f}" y1="{sy(e["median"]):.1f}" '
                     f'x2="{x0 + box_w:.1f}" y2="{sy(e["median"]):.1f}" '
                     f'stroke="{_BOX_EDGE}" stroke-width="2"/>')
        # outliers beyond the whiskers
        for v in e["values"]:
            if v < e["whisker_lo"] or v > e["whisker_hi"]:
                parts.append(f'<circle cx="{cx:.1f}" cy="{sy(v):.1f}" r="2.2" '
                             f'fill="none" stroke="{_BOX_EDGE}"/>')
    return parts


def boxplot_grid_svg(pools: dict, metrics) -> str:
    """One panel per metric, experiments on the x axis, prompts pooled."""
    panel_w, panel_h = 330, 180
    margin_x, margin_y = 70, 48
    gap_x, gap_y = 64, 58
    cols = 2
    rows = (len(metrics) + cols - 1) // cols
    width = margin_x + cols * panel_w + (cols - 1) * gap_x + 20
    height = margin_y + rows * panel_h + (rows - 1) * gap_y + 40

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
    ]
    for idx, metric in enumerate(metrics):
        ox = margin_x + (idx % cols) * (panel_w + gap_x)
        oy = margin_y + (idx // cols) * (panel_h + gap_y)
        parts.extend(_boxplot_panel(pools, metric, ox, oy, panel_w, panel_h))
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
