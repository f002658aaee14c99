"""CSV ingestion/emission and the deterministic SVG histogram."""

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

from .posterior import KASS_RAFTERY_THRESHOLDS


class InputError(ValueError):
    """Malformed user input (maps to CLI exit code 2)."""


@dataclass(frozen=True)
class Table:
    columns: tuple
    data: np.ndarray

    def column(self, name):
        try:
            return self.data[:, self.columns.index(name)]
        except ValueError:
            raise InputError(f"column {name!r} not found; available: {', '.join(self.columns)}") from None

    def select(self, names):
        names = [names] if isinstance(names, str) else list(names)
        return np.column_stack([self.column(n) for n in names])

    @property
    def n(self):
        return self.data.shape[0]


def load_dataset(path):
    """Read a UTF-8 CSV with a header row and an all-numeric body."""
    path = Path(path)
    try:
        with path.open(newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except FileNotFoundError:
        raise InputError(f"{path}: file not found") from None
    except (OSError, UnicodeDecodeError, csv.Error) as exc:
        raise InputError(f"{path}: cannot read CSV ({exc})") from None
    rows = [r for r in rows if r]
    if not rows:
        raise InputError(f"{path}: empty file")
    header = tuple(h.strip() for h in rows[0])
    if any(not h for h in header) or len(set(header)) != len(header):
        raise InputError(f"{path}: header must contain unique, non-empty names")
    body = rows[1:]
    if not body:
        raise InputError(f"{path}: no data rows after the header")
    data = np.empty((len(body), len(header)))
    for i, row in enumerate(body):
        line = i + 2
        if len(row) != len(header):
            raise InputError(f"{path}: row {line} has {len(row)} fields, header has {len(header)}")
        for j, cell in enumerate(row):
            try:
                value = float(cell)
            except ValueError:
                raise InputError(
                    f"{path}: row {line}, column {header[j]!r}: not a number ({cell!r})"
                ) from None
            if not math.isfinite(value):
                raise InputError(f"{path}: row {line}, column {header[j]!r}: non-finite value")
            data[i, j] = value
    return Table(header, data)


def fmt(x):
    """17 significant digits: lossless for float64."""
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def write_csv(path, header, rows):
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) for v in row])
    return path


def read_csv(path):
    """Header and rows of a CSV written by :func:`write_csv` (strings, unconverted)."""
    with Path(path).open(newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


# band fills from negative (second model) through positive (first model) evidence
_BAND_COLOURS = ("#b2182b", "#ef8a62", "#fddbc7", "#f7f7f7", "#f7f7f7", "#d1e5f0", "#67a9cf", "#2166ac")


def band_edges(lo, hi, thresholds=KASS_RAFTERY_THRESHOLDS):
    """Edges on the log BF axis of the Kass-Raftery regions covering ``[lo, hi]``."""
    half = sorted({t / 2.0 for t in thresholds})
    cuts = [-h for h in reversed(half)] + [0.0] + half
    return [lo] + [c for c in cuts if lo < c < hi] + [hi], cuts


def _axis_range(values, observed, thresholds):
    outer = max(thresholds) / 2.0 + 1.0
    lo = min(float(np.min(values)), observed, -outer)
    hi = max(float(np.max(values)), observed, outer)
    pad = 0.02 * (hi - lo)
    return lo - pad, hi + pad


def _histogram(values):
    if np.ptp(values) == 0:
        v = float(values[0])
        return np.array([len(values)]), np.array([v - 0.5, v + 0.5])
    edges = np.histogram_bin_edges(values, bins="auto")
    if len(edges) > 201:
        edges = np.histogram_bin_edges(values, bins=200)
    counts, edges = np.histogram(values, bins=edges)
    return counts, edges


def emit_svg_histogram(values, observed, path=None, thresholds=KASS_RAFTERY_THRESHOLDS, title="Bootstrap log Bayes factor"):
    """Standalone SVG histogram of log BF values over shaded Kass-Raftery bands.

    The x axis is the natural-log Bayes factor; band boundaries sit at
    ``2 ln BF`` equal to 0 and to plus/minus each threshold.  The observed
    full-data value is drawn as a dot.  Output bytes depend only on the inputs.
    """
    values = np.asarray(values, dtype=float).ravel()
    if values.size == 0:
        raise ValueError("no values to plot")
    if not np.all(np.isfinite(values)) or not math.isfinite(observed):
        raise ValueError("values must be finite")
    title = escape(str(title))
    width, height = 640, 400
    left, right, top, bottom = 60, 20, 40, 50
    pw, ph = width - left - right, height - top - bottom
    lo, hi = _axis_range(values, observed, thresholds)
    counts, edges = _histogram(values)
    ymax = max(int(counts.max()), 1)

    def sx(x):
        return left + (x - lo) / (hi - lo) * pw

    def sy(c):
        return top + ph - c / ymax * ph

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<title>{title}</title>',
        f'<g id="bands" data-lo="{lo:.6f}" data-hi="{hi:.6f}">',
    ]
    bands, cuts = band_edges(lo, hi, thresholds)
    for a, b in zip(bands[:-1], bands[1:]):
        mid = 0.5 * (a + b)
        colour = _BAND_COLOURS[int(np.searchsorted(cuts, mid))]
        out.append(
            f'<rect class="band" data-lo="{a:.6f}" data-hi="{b:.6f}" x="{sx(a):.3f}" y="{top}" '
            f'width="{sx(b) - sx(a):.3f}" height="{ph}" fill="{colour}"/>'
        )
    out.append("</g>")
    out.append('<g id="bars" fill="#444444" fill-opacity="0.8">')
    for c, a, b in zip(counts, edges[:-1], edges[1:]):
        if c == 0:
            continue
        out.append(
            f'<rect class="bar" data-lo="{a:.6f}" data-hi="{b:.6f}" data-count="{int(c)}" '
            f'x="{sx(a):.3f}" y="{sy(c):.3f}" width="{sx(b) - sx(a):.3f}" height="{sy(0) - sy(c):.3f}"/>'
        )
    out.append("</g>")
    out.append(
        f'<circle id="observed" data-value="{observed:.6f}" cx="{sx(observed):.3f}" cy="{sy(0):.3f}" '
        'r="6" fill="#e7298a" stroke="#000000"/>'
    )
    out.append(
        f'<line x1="{left}" y1="{top + ph}" x2="{left + pw}" y2="{top + ph}" stroke="#000000"/>'
    )
    for c in cuts:
        if lo < c < hi:
            out.append(
                f'<text x="{sx(c):.3f}" y="{top + ph + 16}" font-size="11" text-anchor="middle">{c:g}</text>'
            )
    out.append(
        f'<text x="{left + pw / 2:.1f}" y="{height - 10}" font-size="13" text-anchor="middle">'
        "log Bayes factor (natural log)</text>"
    )
    out.append(
        f'<text x="{left + pw / 2:.1f}" y="{top - 14}" font-size="14" text-anchor="middle">{title}</text>'
    )
    out.append(f'<text x="{left - 8}" y="{top + 4}" font-size="11" text-anchor="end">{ymax}</text>')
    out.append("</svg>")
    text = "\n".join(out) + "\n"
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text
