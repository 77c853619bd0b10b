"""Reading lifetime data files and the bundled aircraft dataset."""

from __future__ import annotations

import csv
import io
import re
from importlib import resources
from pathlib import Path

import numpy as np

from .inference import CensoredSample

__all__ = ["DataFileError", "load_aircraft", "parse_csv", "parse_raw", "read_data"]


class DataFileError(ValueError):
    """Malformed data file; the message carries the offending line number."""


def parse_csv(text: str) -> CensoredSample:
    """Parse CSV with header ``time,status`` (status 1 = event, 0 = censored)."""
    reader = csv.reader(io.StringIO(text))
    rows = [(i, r) for i, r in enumerate(reader, 1) if any(cell.strip() for cell in r)]
    if not rows:
        raise DataFileError("line 1: empty file, expected header 'time,status'")
    lineno, header = rows[0]
    header = [h.strip().lower() for h in header]
    try:
        ti, si = header.index("time"), header.index("status")
    except ValueError:
        raise DataFileError(f"line {lineno}: header must contain 'time' and 'status'") from None
    times, status = [], []
    for lineno, row in rows[1:]:
        try:
            t = float(row[ti])
            s = row[si].strip()
        except (IndexError, ValueError):
            raise DataFileError(f"line {lineno}: cannot parse {','.join(row)!r}") from None
        if s not in ("0", "1"):
            raise DataFileError(f"line {lineno}: status must be 0 or 1, got {s!r}")
        if not (np.isfinite(t) and t >= 0):
            raise DataFileError(f"line {lineno}: time must be finite and >= 0, got {t}")
        times.append(t)
        status.append(s == "1")
    return CensoredSample(np.array(times, dtype=float), np.array(status, dtype=bool))


_SEPARATORS = re.compile(r"[\s,;&]+")
# a LaTeX command with any brace or bracket arguments, e.g. \begin{tabular}{c c}
_LATEX_CMD = re.compile(r"\\[A-Za-z]+(?:\s*(?:\{[^{}]*\}|\[[^\]]*\]))*")
_LATEX_OPT = re.compile(r"^\[.*\]$")
_RAW_TOKEN = re.compile(r"^([0-9]*\.?[0-9]+(?:[eE][+-]?[0-9]+)?)(\+?)$")


def parse_raw(text: str) -> CensoredSample:
    """Parse free-form values where a trailing ``+`` marks a censored time.

    Tokens may be separated by whitespace, commas, semicolons or ``&``.
    ``%`` comments and LaTeX table markup (row breaks, ``\\hline``-style
    commands, ``[0ex]`` spacing options) are skipped, so a pasted tabular
    body parses directly.
    """
    times, status = [], []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("%", 1)[0].replace("\\\\", " ")
        line = _LATEX_CMD.sub(" ", line).replace("{", " ").replace("}", " ")
        for tok in _SEPARATORS.split(line):
            if not tok or tok.startswith("\\") or _LATEX_OPT.match(tok):
                continue
            m = _RAW_TOKEN.match(tok)
            if m is None:
                raise DataFileError(f"line {lineno}: cannot parse token {tok!r}")
            times.append(float(m.group(1)))
            status.append(m.group(2) != "+")
    return CensoredSample(np.array(times, dtype=float), np.array(status, dtype=bool))


def read_data(path, raw: bool = False) -> CensoredSample:
    text = Path(path).read_text(encoding="utf-8")
    return parse_raw(text) if raw else parse_csv(text)


def aircraft_path(raw: bool = False):
    """Path-like handle to the bundled 131-device failure dataset (days)."""
    return resources.files("epfamily") / "data" / ("aircraft.txt" if raw else "aircraft.csv")


def load_aircraft(raw: bool = False) -> CensoredSample:
    text = aircraft_path(raw).read_text(encoding="utf-8")
    return parse_raw(text) if raw else parse_csv(text)
