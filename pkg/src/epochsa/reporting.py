"""Result tables and static SVG plots.

CSV is the single machine-readable output of an experiment run: one row per
(algorithm, budget), fixed column order, floats at 17 significant digits so
parsing gives back the exact doubles that were written. Plots are hand-built
SVG, which keeps the package free of graphics dependencies and lets tests
inspect the output by string matching.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

CSV_HEADER = "algorithm,T,trials,mean_excess,std_error,theoretical_rhs,satisfied,k_dagger,gradients_consumed"


@dataclass(frozen=True)
class ResultRow:
    """One aggregated line of an experiment: empirical versus theoretical."""

    algorithm: str
    T: int
    trials: int
    mean_excess: float
    std_error: float
    theoretical_rhs: float
    satisfied: bool
    k_dagger: int
    gradients_consumed: int


def _fmt(value: float) -> str:
    return format(float(value), ".17g")


def rows_to_csv(rows) -> str:
    """Serialize rows; numeric fields round-trip exactly through :func:`csv_to_rows`."""
    lines = [CSV_HEADER]
    for r in rows:
        lines.append(
            ",".join(
                [
                    r.algorithm,
                    str(int(r.T)),
                    str(int(r.trials)),
                    _fmt(r.mean_excess),
                    _fmt(r.std_error),
                    _fmt(r.theoretical_rhs),
                    "true" if r.satisfied else "false",
                    str(int(r.k_dagger)),
                    str(int(r.gradients_consumed)),
                ]
            )
        )
    return "\n".join(lines) + "\n"


def csv_to_rows(text: str) -> list:
    lines = [ln for ln in text.split("\n") if ln]
    if not lines or lines[0] != CSV_HEADER:
        raise ValueError("missing or malformed CSV header")
    rows = []
    for ln in lines[1:]:
        parts = ln.split(",")
        if len(parts) != 9:
            raise ValueError(f"expected 9 fields, got {len(parts)}: {ln!r}")
        if parts[6] not in ("true", "false"):
            raise ValueError(f"satisfied must be true or false, got {parts[6]!r}")
        rows.append(
            ResultRow(
                algorithm=parts[0],
                T=int(parts[1]),
                trials=int(parts[2]),
                mean_excess=float(parts[3]),
                std_error=float(parts[4]),
                theoretical_rhs=float(parts[5]),
                satisfied=parts[6] == "true",
                k_dagger=int(parts[7]),
                gradients_consumed=int(parts[8]),
            )
        )
    return rows


# -- SVG ----------------------------------------------------------------------

_W, _H = 640, 480
_MARGIN_L, _MARGIN_R, _MARGIN_T, _MARGIN_B = 70, 20, 30, 50
_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def _transform(values, log_scale, lo, hi, out_lo, out_hi):
    def t(v):
        x = math.log10(v) if log_scale else v
        if hi == lo:
            return 0.5 * (out_lo + out_hi)
        return out_lo + (x - lo) / (hi - lo) * (out_hi - out_lo)

    return [t(v) for v in values]


def _axis_range(all_values, log_scale):
    vals = [math.log10(v) if log_scale else v for v in all_values]
    lo, hi = min(vals), max(vals)
    if hi == lo:
        lo, hi = lo - 0.5, hi + 0.5
    pad = 0.05 * (hi - lo)
    return lo - pad, hi + pad


def _ticks(lo, hi, log_scale):
    if log_scale:
        return [k for k in range(math.ceil(lo), math.floor(hi) + 1)]
    if hi <= lo:
        return [lo]
    step = 10.0 ** math.floor(math.log10(hi - lo))
    if (hi - lo) / step < 3:
        step /= 2.0
    first = math.ceil(lo / step) * step
    ticks = []
    v = first
    while v <= hi + 1e-12 * step:
        ticks.append(v)
        v += step
    return ticks


def render_line_plot(series, xlabel: str, ylabel: str, log_x: bool = True, log_y: bool = True, title: str = "") -> str:
    """Polyline plot of ``(label, xs, ys)`` series; one polyline per series.

    Points that cannot live on a log axis (nonpositive coordinates) are
    dropped from the polyline rather than failing the render.
    """
    cleaned = []
    for label, xs, ys in series:
        pts = [
            (x, y)
            for x, y in zip(xs, ys)
            if (not log_x or x > 0) and (not log_y or y > 0)
        ]
        cleaned.append((label, pts))
    all_x = [x for _, pts in cleaned for x, _ in pts]
    all_y = [y for _, pts in cleaned for _, y in pts]
    if not all_x:
        raise ValueError("nothing to plot: every point was dropped")

    x_lo, x_hi = _axis_range(all_x, log_x)
    y_lo, y_hi = _axis_range(all_y, log_y)
    px_lo, px_hi = _MARGIN_L, _W - _MARGIN_R
    py_lo, py_hi = _H - _MARGIN_B, _MARGIN_T

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" viewBox="0 0 {_W} {_H}">',
        f'<rect x="0" y="0" width="{_W}" height="{_H}" fill="white"/>',
        f'<line x1="{px_lo}" y1="{py_lo}" x2="{px_hi}" y2="{py_lo}" stroke="black"/>',
        f'<line x1="{px_lo}" y1="{py_lo}" x2="{px_lo}" y2="{py_hi}" stroke="black"/>',
    ]
    if title:
        out.append(f'<text x="{_W // 2}" y="20" text-anchor="middle" font-size="14">{title}</text>')
    out.append(
        f'<text x="{(px_lo + px_hi) // 2}" y="{_H - 12}" text-anchor="middle" font-size="12">{xlabel}</text>'
    )
    out.append(
        f'<text x="16" y="{(py_lo + py_hi) // 2}" text-anchor="middle" font-size="12" '
        f'transform="rotate(-90 16 {(py_lo + py_hi) // 2})">{ylabel}</text>'
    )

    for tick in _ticks(x_lo, x_hi, log_x):
        (px,) = _transform([10.0**tick if log_x else tick], log_x, x_lo, x_hi, px_lo, px_hi)
        label = f"1e{tick}" if log_x else f"{tick:g}"
        out.append(f'<line x1="{px:.1f}" y1="{py_lo}" x2="{px:.1f}" y2="{py_lo + 5}" stroke="black"/>')
        out.append(f'<text x="{px:.1f}" y="{py_lo + 18}" text-anchor="middle" font-size="10">{label}</text>')
    for tick in _ticks(y_lo, y_hi, log_y):
        (py,) = _transform([10.0**tick if log_y else tick], log_y, y_lo, y_hi, py_lo, py_hi)
        label = f"1e{tick}" if log_y else f"{tick:g}"
        out.append(f'<line x1="{px_lo - 5}" y1="{py:.1f}" x2="{px_lo}" y2="{py:.1f}" stroke="black"/>')
        out.append(f'<text x="{px_lo - 8}" y="{py:.1f}" text-anchor="end" font-size="10">{label}</text>')

    for i, (label, pts) in enumerate(cleaned):
        if not pts:
            continue
        color = _COLORS[i % len(_COLORS)]
        xs_px = _transform([p[0] for p in pts], log_x, x_lo, x_hi, px_lo, px_hi)
        ys_px = _transform([p[1] for p in pts], log_y, y_lo, y_hi, py_lo, py_hi)
        coords = " ".join(f"{x:.2f},{y:.2f}" for x, y in zip(xs_px, ys_px))
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{coords}"/>')
        out.append(
            f'<text x="{px_hi - 5}" y="{_MARGIN_T + 14 * (i + 1)}" text-anchor="end" '
            f'font-size="11" fill="{color}">{label}</text>'
        )

    out.append("</svg>")
    return "\n".join(out) + "\n"


def plot_excess_vs_budget(rows) -> str:
    """Log-log mean excess versus budget, one polyline per algorithm."""
    by_algo: dict[str, list] = {}
    for r in rows:
        by_algo.setdefault(r.algorithm, []).append(r)
    series = []
    for algo, algo_rows in by_algo.items():
        algo_rows.sort(key=lambda r: r.T)
        series.append((algo, [r.T for r in algo_rows], [r.mean_excess for r in algo_rows]))
    return render_line_plot(series, xlabel="budget T", ylabel="mean excess risk", log_x=True, log_y=True)


def plot_excess_vs_epoch(series) -> str:
    """Semi-log mean excess versus epoch index; series as ``(label, ks, excesses)``."""
    return render_line_plot(series, xlabel="epoch k", ylabel="mean excess risk", log_x=False, log_y=True)
