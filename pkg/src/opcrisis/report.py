"""Monitor report rendering: CSV tables and standalone SVG line charts.

Output is deliberately boring: no timestamps, no library-version strings, no
randomized ids — the same report must render to byte-identical files on every
run. Charts are plain hand-assembled SVG so there is no display dependency.
"""

from __future__ import annotations

import csv
from pathlib import Path

from .errors import ConfigError, FileUnreadable, MissingData, OutputUnwritable, SchemaViolation
from .pipeline import MonitorReport

_PALETTE = ("#c0392b", "#2980b9", "#27ae60", "#8e44ad", "#f39c12", "#16a085")

_FIXED_COLUMNS_LEFT = ("bucket", "start", "end")
_FIXED_COLUMNS_RIGHT = (
    "pos", "neg", "neu",
    "gamma1", "gamma2", "gamma3", "gamma4",
    "level", "label",
)


def monitor_csv_lines(report: MonitorReport) -> list[str]:
    """Header plus one line per rated bucket; missing indicator cells empty."""
    header = [*_FIXED_COLUMNS_LEFT, *report.catalog_codes, *_FIXED_COLUMNS_RIGHT]
    lines = [",".join(header)]
    for row in report.rows:
        cells = [str(row.bucket_index), str(row.start), str(row.end)]
        for code in report.catalog_codes:
            cells.append(repr(row.values[code]) if code in row.values else "")
        cells.extend(str(n) for n in row.sentiment)
        cells.extend(repr(g) for g in row.gamma)
        cells.append(str(row.level))
        cells.append(row.label)
        lines.append(",".join(cells))
    return lines


def read_monitor_csv(path) -> tuple[tuple[str, ...], list[dict[str, str]]]:
    """Parse a monitor CSV back into header + row dicts (cells kept as text)."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as err:
        raise FileUnreadable(f"cannot read {path}: {err}") from None
    rows = list(csv.reader(text.splitlines()))
    if not rows or rows[0][: len(_FIXED_COLUMNS_LEFT)] != list(_FIXED_COLUMNS_LEFT):
        raise SchemaViolation(1, "header", "not a monitor CSV (bucket,start,end,... expected)")
    header = tuple(rows[0])
    for required in ("end", "level", "pos", "neg", "neu"):
        if required not in header:
            raise SchemaViolation(1, required, "column missing from monitor CSV")
    out = []
    for line_no, cells in enumerate(rows[1:], start=2):
        if len(cells) != len(header):
            raise SchemaViolation(line_no, "row", f"expected {len(header)} cells, got {len(cells)}")
        out.append(dict(zip(header, cells)))
    return header, out


def _fmt(value: float) -> str:
    return f"{value:.2f}"


def _ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if hi <= lo:
        hi = lo + 1.0
    step = (hi - lo) / (n - 1)
    return [lo + k * step for k in range(n)]


def svg_line_chart(
    title: str,
    x_label: str,
    y_label: str,
    series: list[tuple[str, list[tuple[float, float]]]],
    y_ticks: list[float] | None = None,
) -> str:
    """Minimal fixed-size line chart; all geometry printed to two decimals."""
    if not series or all(not pts for _, pts in series):
        raise MissingData("chart needs at least one data point")
    width, height = 800.0, 420.0
    left, right, top, bottom = 64.0, 170.0, 40.0, 48.0
    plot_w, plot_h = width - left - right, height - top - bottom

    xs = [x for _, pts in series for x, _ in pts]
    ys = [y for _, pts in series for _, y in pts]
    x_lo, x_hi = min(xs), max(xs)
    if y_ticks is not None:
        y_lo, y_hi = min(y_ticks), max(y_ticks)
    else:
        y_lo, y_hi = min(min(ys), 0.0), max(ys)
        if y_hi <= y_lo:
            y_hi = y_lo + 1.0
    if x_hi <= x_lo:
        x_hi = x_lo + 1.0

    def px(x: float) -> float:
        return left + (x - x_lo) / (x_hi - x_lo) * plot_w

    def py(y: float) -> float:
        return top + plot_h - (y - y_lo) / (y_hi - y_lo) * plot_h

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0f}" height="{height:.0f}" '
        f'viewBox="0 0 {width:.0f} {height:.0f}" font-family="sans-serif" font-size="12">',
        f'<rect width="{width:.0f}" height="{height:.0f}" fill="white"/>',
        f'<text x="{left}" y="22" font-size="15" font-weight="bold">{title}</text>',
        # axes
        f'<line x1="{left}" y1="{top}" x2="{left}" y2="{top + plot_h}" stroke="#333"/>',
        f'<line x1="{left}" y1="{top + plot_h}" x2="{left + plot_w}" y2="{top + plot_h}" stroke="#333"/>',
        f'<text x="{left + plot_w / 2:.2f}" y="{height - 10}" text-anchor="middle">{x_label}</text>',
        f'<text x="16" y="{top + plot_h / 2:.2f}" text-anchor="middle" '
        f'transform="rotate(-90 16 {top + plot_h / 2:.2f})">{y_label}</text>',
    ]
    for tick in _ticks(x_lo, x_hi):
        x = px(tick)
        parts.append(
            f'<line x1="{_fmt(x)}" y1="{top + plot_h}" x2="{_fmt(x)}" y2="{top + plot_h + 4}" stroke="#333"/>'
        )
        parts.append(
            f'<text x="{_fmt(x)}" y="{top + plot_h + 18}" text-anchor="middle">{tick:g}</text>'
        )
    for tick in (y_ticks if y_ticks is not None else _ticks(y_lo, y_hi)):
        y = py(tick)
        parts.append(f'<line x1="{left - 4}" y1="{_fmt(y)}" x2="{left}" y2="{_fmt(y)}" stroke="#333"/>')
        parts.append(
            f'<text x="{left - 8}" y="{_fmt(y + 4)}" text-anchor="end">{tick:g}</text>'
        )
        parts.append(
            f'<line x1="{left}" y1="{_fmt(y)}" x2="{left + plot_w}" y2="{_fmt(y)}" '
            f'stroke="#ddd" stroke-dasharray="3,3"/>'
        )
    for k, (label, pts) in enumerate(series):
        color = _PALETTE[k % len(_PALETTE)]
        coords = " ".join(f"{_fmt(px(x))},{_fmt(py(y))}" for x, y in pts)
        parts.append(
            f'<polyline points="{coords}" fill="none" stroke="{color}" stroke-width="1.8"/>'
        )
        legend_y = top + 6 + 18 * k
        parts.append(
            f'<rect x="{left + plot_w + 14:.2f}" y="{legend_y - 9:.2f}" width="10" height="10" fill="{color}"/>'
        )
        parts.append(
            f'<text x="{left + plot_w + 30:.2f}" y="{legend_y:.2f}">{label}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _hours(row: "object", origin: int) -> float:
    return (row.end - origin) / 3600.0


def sentiment_chart(report: MonitorReport) -> str:
    origin = report.rows[0].start
    series = []
    for k, name in enumerate(("positive", "negative", "neutral")):
        pts = [(_hours(r, origin), float(r.sentiment[k])) for r in report.rows]
        series.append((name, pts))
    return svg_line_chart(
        "Sentiment class counts over time", "hours", "texts", series
    )


def levels_chart(report: MonitorReport) -> str:
    origin = report.rows[0].start
    label = f"{len(report.rating_codes)} indexes"
    pts = [(_hours(r, origin), float(r.level)) for r in report.rows]
    return svg_line_chart(
        "Crisis level over time", "hours", "level", [(label, pts)],
        y_ticks=[1.0, 2.0, 3.0, 4.0],
    )


def render_report(report: MonitorReport, formats, output_dir, basename: str = "monitor"):
    """Write the requested formats; returns the created paths in fixed order."""
    wanted = set(formats)
    unknown = wanted - {"csv", "svg"}
    if unknown:
        raise ConfigError(f"unknown output format(s): {', '.join(sorted(unknown))}")
    if not report.rows:
        raise MissingData("report has no rated buckets to render")
    out = Path(output_dir)
    written: list[Path] = []
    try:
        out.mkdir(parents=True, exist_ok=True)
        if "csv" in wanted:
            path = out / f"{basename}.csv"
            path.write_text("\n".join(monitor_csv_lines(report)) + "\n", encoding="utf-8")
            written.append(path)
        if "svg" in wanted:
            path = out / f"{basename}_sentiment.svg"
            path.write_text(sentiment_chart(report), encoding="utf-8")
            written.append(path)
            path = out / f"{basename}_levels.svg"
            path.write_text(levels_chart(report), encoding="utf-8")
            written.append(path)
    except OSError as err:
        raise OutputUnwritable(f"cannot write into {out}: {err}") from None
    return written


def overlay_levels_chart(named_csvs: list[tuple[str, list[dict[str, str]]]]) -> str:
    """Figure-style comparison: one crisis-level series per monitor CSV."""
    series = []
    for label, rows in named_csvs:
        if not rows:
            raise MissingData(f"monitor CSV {label!r} has no data rows")
        origin = float(rows[0]["start"])
        pts = [((float(r["end"]) - origin) / 3600.0, float(r["level"])) for r in rows]
        series.append((label, pts))
    return svg_line_chart(
        "Crisis level over time", "hours", "level", series,
        y_ticks=[1.0, 2.0, 3.0, 4.0],
    )


def sentiment_chart_from_csv(rows: list[dict[str, str]]) -> str:
    if not rows:
        raise MissingData("monitor CSV has no data rows")
    origin = float(rows[0]["start"])
    series = []
    for name, col in (("positive", "pos"), ("negative", "neg"), ("neutral", "neu")):
        pts = [((float(r["end"]) - origin) / 3600.0, float(r[col])) for r in rows]
        series.append((name, pts))
    return svg_line_chart("Sentiment class counts over time", "hours", "texts", series)
