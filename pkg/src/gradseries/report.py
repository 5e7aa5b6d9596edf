"""Machine-readable experiment reports.

A report is a flat list of rows plus metadata (config echo, version, wall
time).  Rows are ordered by (coordinate, sigma, n, method), so repeated runs
serialize identically except for the wall-time field.  JSON is the primary
format; CSV carries the fixed column set

    coordinate, sigma, n, method, value, standard_error, series_value,
    remainder_bound, discrepancy, within_bound

with empty cells for inapplicable fields.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass

CSV_COLUMNS = (
    "coordinate",
    "sigma",
    "n",
    "method",
    "value",
    "standard_error",
    "series_value",
    "remainder_bound",
    "discrepancy",
    "within_bound",
)


@dataclass(frozen=True)
class ReportRow:
    coordinate: str
    sigma: float
    n: int
    method: str
    value: float
    standard_error: float | None = None
    series_value: float | None = None
    remainder_bound: float | None = None
    discrepancy: float | None = None
    within_bound: bool | None = None


@dataclass(frozen=True)
class Report:
    config: dict
    version: str
    wall_time_s: float
    rows: tuple[ReportRow, ...]

    @property
    def passed(self) -> bool:
        """True when no row's within_bound flag is False."""
        return all(row.within_bound is not False for row in self.rows)

    def to_json(self) -> str:
        doc = {
            "metadata": {
                "config": self.config,
                "version": self.version,
                "wall_time_s": self.wall_time_s,
            },
            "rows": [asdict(row) for row in self.rows],
        }
        return json.dumps(doc, indent=2) + "\n"

    def to_csv(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for row in self.rows:
            record = asdict(row)
            writer.writerow([_cell(record[col]) for col in CSV_COLUMNS])
        return buffer.getvalue()

    def render(self, fmt: str) -> str:
        if fmt == "json":
            return self.to_json()
        if fmt == "csv":
            return self.to_csv()
        raise ValueError(f"unknown report format {fmt!r}")


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)
