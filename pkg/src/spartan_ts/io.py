"""CSV series files.

A series file has one ``time,value`` row per grid point, optionally preceded
by a header line.  A missing value is an empty field or the token ``NaN``
(any case).  Times must form an arithmetic progression; extra columns are
ignored on input.  Generated numbers are written with 17 significant digits
so that they parse back to the same float.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import SeriesFormatError
from .inference import GappySeries

STEP_RTOL = 1e-9
MISSING_TOKENS = ("", "nan")


def fmt(v: float) -> str:
    return "%.17g" % v


def _parse_float(tok: str, line: int, what: str) -> float:
    try:
        v = float(tok)
    except ValueError:
        raise SeriesFormatError(f"cannot parse {what} {tok!r}", line) from None
    return v


@dataclass
class SeriesFile:
    times: np.ndarray
    values: np.ndarray
    time_tokens: list
    value_tokens: list
    header: Optional[list]

    @property
    def alpha(self) -> float:
        return float((self.times[-1] - self.times[0]) / (len(self.times) - 1))

    def to_series(self) -> GappySeries:
        return GappySeries.from_values(self.values, self.alpha)


def parse_series(lines: Sequence[str]) -> SeriesFile:
    rows = []
    for lineno, row in enumerate(csv.reader(lines), start=1):
        if not row or all(not c.strip() for c in row):
            continue
        rows.append((lineno, [c.strip() for c in row]))
    if not rows:
        raise SeriesFormatError("file contains no rows")
    header = None
    first = rows[0][1]
    try:
        float(first[0])
    except ValueError:
        header = first
        rows = rows[1:]
    times, values, ttok, vtok = [], [], [], []
    for lineno, row in rows:
        if len(row) < 2:
            raise SeriesFormatError("expected at least two fields (time,value)", lineno)
        t = _parse_float(row[0], lineno, "time")
        if not math.isfinite(t):
            raise SeriesFormatError(f"time must be finite (got {row[0]!r})", lineno)
        tok = row[1]
        if tok.lower() in MISSING_TOKENS:
            v = math.nan
        else:
            v = _parse_float(tok, lineno, "value")
            if not math.isfinite(v):
                raise SeriesFormatError(f"value must be finite or NaN (got {tok!r})", lineno)
        times.append(t)
        values.append(v)
        ttok.append(row[0])
        vtok.append(tok)
    if len(times) < 3:
        raise SeriesFormatError(f"need at least 3 rows (got {len(times)})")
    times = np.array(times)
    d = np.diff(times)
    lines_of = [ln for ln, _ in rows]
    for k, dk in enumerate(d):
        if dk == 0:
            raise SeriesFormatError(f"duplicate time {ttok[k + 1]}", lines_of[k + 1])
    step = (times[-1] - times[0]) / (len(times) - 1)
    if step <= 0:
        raise SeriesFormatError("times must increase")
    bad = np.flatnonzero(np.abs(d - step) > STEP_RTOL * abs(step))
    if bad.size:
        k = int(bad[0]) + 1
        raise SeriesFormatError(
            f"irregular sampling: step {float(d[k - 1])!r} differs from inferred step {float(step)!r}",
            lines_of[k],
        )
    return SeriesFile(times, np.array(values), ttok, vtok, header)


def read_series_file(path) -> SeriesFile:
    with open(path, newline="") as fh:
        return parse_series(fh.read().splitlines())


def read_series(path) -> GappySeries:
    return read_series_file(path).to_series()


def series_lines(times, values, source=None, header=True, time_tokens=None, value_tokens=None):
    """Render rows; explicit tokens, where given and not None, are written verbatim."""
    out = []
    if header:
        out.append("time,value" + (",source" if source is not None else ""))
    for i, (t, v) in enumerate(zip(times, values)):
        ts = time_tokens[i] if time_tokens is not None else fmt(t)
        vt = value_tokens[i] if value_tokens is not None and value_tokens[i] is not None else None
        if vt is None:
            vt = "NaN" if math.isnan(v) else fmt(v)
        row = f"{ts},{vt}"
        if source is not None:
            row += f",{source[i]}"
        out.append(row)
    return "\n".join(out) + "\n"


def write_text(path, text: str):
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(text)


def write_series(path, times, values, source=None, **kw):
    write_text(path, series_lines(times, values, source, **kw))
