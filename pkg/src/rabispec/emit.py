"""CSV, JSON and SVG writers.

Data files contain no timestamps so identical inputs give identical bytes.
Every file is written to a temporary sibling and renamed into place.
"""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from pathlib import Path

SPECTRUM_HEADER = ("g", "parity", "index", "energy")
ZHANG_HEADER = ("g", "subspectrum", "n", "branch", "energy")
SUMMARY_HEADER = ("g", "max_distance")

PANEL_W, PANEL_H = 800, 600
MARGIN = dict(left=90, right=30, top=50, bottom=70)

PARITY_COLORS = {1: "#d62728", -1: "#1f77b4"}
# JC (subspectrum II) red, AJC (subspectrum I) blue
SUBSPECTRUM_COLORS = {"II": "#d62728", "I": "#1f77b4"}


def fmt(x: float) -> str:
    return "%.12g" % x


def write_atomic(path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def spectrum_rows(g: float, spectrum):
    """Rows (g, parity, index, energy), +1 sector first, by index."""
    for parity in (1, -1):
        for lv in spectrum.levels:
            if int(lv.parity) == parity:
                yield g, parity, lv.index, lv.energy


def parse_spectrum_csv(text: str) -> list[tuple[float, int, int, float]]:
    reader = csv.reader(io.StringIO(text))
    header = tuple(next(reader))
    if header != SPECTRUM_HEADER:
        raise ValueError(f"unexpected header {header}")
    return [(float(g), int(p), int(i), float(e)) for g, p, i, e in reader]


def json_text(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False) + "\n"


class _Axes:
    def __init__(self, x0, y0, xlim, ylim):
        self.x0, self.y0 = x0, y0
        self.xlim, self.ylim = xlim, ylim
        self.w = PANEL_W - MARGIN["left"] - MARGIN["right"]
        self.h = PANEL_H - MARGIN["top"] - MARGIN["bottom"]

    def px(self, x):
        a, b = self.xlim
        return self.x0 + MARGIN["left"] + (x - a) / ((b - a) or 1.0) * self.w

    def py(self, y):
        a, b = self.ylim
        return self.y0 + MARGIN["top"] + (1 - (y - a) / ((b - a) or 1.0)) * self.h


def _ticks(lo, hi, n=5):
    if hi <= lo:
        return [lo]
    return [lo + (hi - lo) * i / n for i in range(n + 1)]


def _panel(letter, title, x0, y0, xlim, ylim, series) -> list[str]:
    """One panel group; ``series`` is a list of (color, [(x, y), ...]) polylines."""
    ax = _Axes(x0, y0, xlim, ylim)
    left, right = ax.px(xlim[0]), ax.px(xlim[1])
    top, bottom = ax.py(ylim[1]), ax.py(ylim[0])
    out = [f'<g class="panel" id="panel-{letter}">']
    out.append(f'<rect x="{left:.2f}" y="{top:.2f}" width="{right - left:.2f}" '
               f'height="{bottom - top:.2f}" fill="none" stroke="black"/>')
    for t in _ticks(*xlim):
        x = ax.px(t)
        out.append(f'<line x1="{x:.2f}" y1="{bottom:.2f}" x2="{x:.2f}" y2="{bottom + 6:.2f}" stroke="black"/>')
        out.append(f'<text x="{x:.2f}" y="{bottom + 22:.2f}" text-anchor="middle" font-size="14">{t:.2f}</text>')
    for t in _ticks(*ylim):
        y = ax.py(t)
        out.append(f'<line x1="{left - 6:.2f}" y1="{y:.2f}" x2="{left:.2f}" y2="{y:.2f}" stroke="black"/>')
        out.append(f'<text x="{left - 10:.2f}" y="{y + 5:.2f}" text-anchor="end" font-size="14">{t:.2f}</text>')
    cx = (left + right) / 2
    out.append(f'<text class="xlabel" x="{cx:.2f}" y="{bottom + 50:.2f}" text-anchor="middle" font-size="18">g/ω</text>')
    cy = (top + bottom) / 2
    out.append(f'<text class="ylabel" x="{x0 + 25:.2f}" y="{cy:.2f}" text-anchor="middle" font-size="18" '
               f'transform="rotate(-90 {x0 + 25:.2f} {cy:.2f})">E/ω</text>')
    out.append(f'<text x="{cx:.2f}" y="{y0 + 30:.2f}" text-anchor="middle" font-size="18">({letter}) {title}</text>')
    out.append(f'<clipPath id="clip-{letter}"><rect x="{left:.2f}" y="{top:.2f}" '
               f'width="{right - left:.2f}" height="{bottom - top:.2f}"/></clipPath>')
    out.append(f'<g clip-path="url(#clip-{letter})">')
    for color, pts in series:
        if len(pts) == 1:
            x, y = pts[0]
            out.append(f'<circle cx="{ax.px(x):.2f}" cy="{ax.py(y):.2f}" r="1.5" fill="{color}"/>')
            continue
        d = " ".join(f"{ax.px(x):.2f},{ax.py(y):.2f}" for x, y in pts)
        out.append(f'<polyline points="{d}" fill="none" stroke="{color}" stroke-width="1.5"/>')
    out.append("</g>")
    out.append("</g>")
    return out


def _segments(points):
    """Split (g_index, g, y) triples into runs of consecutive grid indices."""
    runs, cur, last = [], [], None
    for i, x, y in points:
        if last is not None and i != last + 1:
            runs.append(cur)
            cur = []
        cur.append((x, y))
        last = i
    if cur:
        runs.append(cur)
    return runs


def figure_svg(columns) -> str:
    """Grid of panels: true spectra on the top row, ladders on the bottom row.

    ``columns`` is a list of dicts with keys ``lam``, ``grid`` (g values),
    ``true`` (per g: list of (parity, index, energy)) and ``zhang`` (per g:
    list of AnalyticLevel).
    """
    ncol = len(columns)
    width, height = PANEL_W * ncol, PANEL_H * 2
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
    ]
    letters = "abcdefghijklmnopqrstuvwxyz"
    for c, col in enumerate(columns):
        grid = col["grid"]
        xlim = (grid[0], grid[-1]) if grid[-1] > grid[0] else (grid[0] - 0.5, grid[0] + 0.5)
        energies = [e for rows in col["true"] for _, _, e in rows]
        ylim = (min(energies) - 0.1, max(energies) + 0.1)

        true_tracks = {}
        for i, (g, rows) in enumerate(zip(grid, col["true"])):
            for parity, index, e in rows:
                true_tracks.setdefault((parity, index), []).append((i, g, e))
        true_series = [(PARITY_COLORS[key[0]], run)
                       for key in sorted(true_tracks, key=lambda k: (-k[0], k[1]))
                       for run in _segments(true_tracks[key])]

        z_tracks = {}
        for i, (g, levels) in enumerate(zip(grid, col["zhang"])):
            for lv in levels:
                z_tracks.setdefault((lv.subspectrum, lv.n, lv.branch), []).append((i, g, lv.energy))
        z_series = [(SUBSPECTRUM_COLORS[key[0]], run)
                    for key in sorted(z_tracks)
                    for run in _segments(z_tracks[key])]

        lam = "%g" % col["lam"]
        parts += _panel(letters[c], f"QRM, λ/ω = {lam}", PANEL_W * c, 0, xlim, ylim, true_series)
        parts += _panel(letters[ncol + c], f"JC (red) / AJC (blue), λ/ω = {lam}",
                        PANEL_W * c, PANEL_H, xlim, ylim, z_series)
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
