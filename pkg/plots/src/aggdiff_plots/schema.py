"""Strict readers for the solver's CSV/JSON artifacts.

The diagnostics and rates schemas are a contract: any header deviation is an
error naming the offending column, never silently reinterpreted.
"""

import csv
import json
import re
from pathlib import Path

DIAGNOSTICS_FIXED = ["tau", "t", "mass", "linf", "l1_to_ground", "H", "I", "H_rel"]
_EXTRA_COL = re.compile(r"^(E_k_|lp_)[0-9.eE+-]+$")
RATES_HEADER = ["d", "m", "gamma", "M", "predicted", "fitted", "residual", "verdict"]


class SchemaError(Exception):
    pass


def _check_diagnostics_header(header):
    for i, name in enumerate(DIAGNOSTICS_FIXED):
        if i >= len(header) or header[i] != name:
            got = header[i] if i < len(header) else "<missing>"
            raise SchemaError(
                f"diagnostics column {i + 1} must be {name!r}, got {got!r}"
            )
    for name in header[len(DIAGNOSTICS_FIXED):]:
        if not _EXTRA_COL.match(name):
            raise SchemaError(f"unexpected diagnostics column {name!r}")


def read_diagnostics(path):
    """-> dict of column name -> list of floats."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty diagnostics file") from None
        _check_diagnostics_header(header)
        cols = {name: [] for name in header}
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise SchemaError(
                    f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}"
                )
            for name, cell in zip(header, row):
                try:
                    cols[name].append(float(cell))
                except ValueError:
                    raise SchemaError(
                        f"{path}:{lineno}: non-numeric value {cell!r} in column {name!r}"
                    ) from None
    if not cols["tau"]:
        raise SchemaError(f"{path}: no data rows")
    return cols


def read_rates(path):
    """-> list of row dicts; numeric fields parsed, blanks kept as None."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty rates file") from None
        if header != RATES_HEADER:
            for i, name in enumerate(RATES_HEADER):
                got = header[i] if i < len(header) else "<missing>"
                if got != name:
                    raise SchemaError(f"rates column {i + 1} must be {name!r}, got {got!r}")
            raise SchemaError(f"rates header has {len(header)} columns, expected 8")
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise SchemaError(
                    f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}"
                )
            rec = dict(zip(header, row))
            for key in ("d", "m", "gamma", "M", "predicted", "fitted", "residual"):
                rec[key] = float(rec[key]) if rec[key] != "" else None
            rows.append(rec)
    return rows


def read_summary(path):
    with open(path) as fh:
        summary = json.load(fh)
    if "rate_reports" not in summary:
        raise SchemaError(f"{path}: summary has no rate_reports")
    return summary


def summary_exponent(summary, name):
    """Predicted/fitted exponents for a named rate report, verbatim from summary."""
    for rep in summary["rate_reports"]:
        if rep.get("name") == name:
            return rep
    raise SchemaError(f"summary has no rate report named {name!r}")


def find_summary(csv_path):
    """summary.json next to a diagnostics.csv, if present."""
    cand = Path(csv_path).parent / "summary.json"
    return cand if cand.exists() else None
