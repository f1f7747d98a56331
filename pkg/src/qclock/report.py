"""Report serialization: the fixed CSV schema and JSON wrapping.

All floats are written with 12 significant digits and a '.' decimal
separator regardless of locale, so identical runs produce identical bytes.
"""

from __future__ import annotations

import csv
import io
import json

CSV_COLUMNS = [
    "experiment",
    "probe",
    "d",
    "n",
    "N",
    "omega",
    "theta_true",
    "shots",
    "trials",
    "qfi",
    "crb",
    "empirical_dev",
    "mt_bound",
    "ren2012",
    "ratio",
]


def format_cell(value) -> str:
    """Render one CSV cell: empty for None, 12 significant digits for floats."""
    if value is None:
        return ""
    if isinstance(value, bool):
        raise TypeError("booleans have no place in the report schema")
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def rows_to_csv(rows: list[dict]) -> str:
    """CSV text for a list of row dicts keyed by CSV_COLUMNS (missing -> empty)."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in rows:
        unknown = set(row) - set(CSV_COLUMNS)
        if unknown:
            raise KeyError(f"unknown report columns: {sorted(unknown)}")
        writer.writerow([format_cell(row.get(col)) for col in CSV_COLUMNS])
    return buf.getvalue()


def to_json(payload: dict) -> str:
    """Deterministic JSON text (2-space indent, insertion order preserved)."""
    return json.dumps(payload, indent=2) + "\n"
