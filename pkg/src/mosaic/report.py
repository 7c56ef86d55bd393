"""Figure-ready data tables with deterministic byte output.

Every bundle carries the config and seeds needed to regenerate its rows;
floats are rendered at 6 significant digits so repeated emission is
byte-identical.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

from . import __version__

KIND_COLUMNS = {
    "scan": [
        "target_id",
        "distance",
        "raw_count",
        "cumulative",
        "extrapolated",
    ],
    "dedup": ["policy_n", "distance", "surviving_raw", "surviving_cumulative"],
    "rho_curve": ["x", "rho"],
    "distance_rho": ["mean_distance", "rho"],
    "overlap_table": ["source", "n", "mean_overlap", "std_overlap"],
}


@dataclass
class ReportBundle:
    kind: str
    rows: list  # list of dicts matching KIND_COLUMNS[kind]
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KIND_COLUMNS:
            raise ValueError(f"unknown report kind {self.kind!r}")
        cols = set(KIND_COLUMNS[self.kind])
        for row in self.rows:
            if set(row) != cols:
                raise ValueError(
                    f"row schema {sorted(row)} does not match kind {self.kind!r}"
                )
        self.metadata = dict(self.metadata)
        self.metadata.setdefault("toolkit_version", __version__)


def _fmt(value):
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        if value == int(value) and abs(value) < 1e15:
            return str(int(value))
        return format(value, ".6g")
    return str(value)


def render(bundle: ReportBundle, format: str) -> str:
    """Render the bundle to a CSV or JSON string (deterministic bytes)."""
    cols = KIND_COLUMNS[bundle.kind]
    if format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(cols)
        for row in bundle.rows:
            writer.writerow([_fmt(row[c]) for c in cols])
        return buf.getvalue()
    if format == "json":
        payload = {
            "kind": bundle.kind,
            "metadata": {k: bundle.metadata[k] for k in sorted(bundle.metadata)},
            "rows": [
                {c: (float(_fmt(row[c])) if isinstance(row[c], float) else row[c]) for c in cols}
                for row in bundle.rows
            ],
        }
        return json.dumps(payload, indent=2, sort_keys=False) + "\n"
    raise ValueError(f"unknown format {format!r}")


def emit(bundle: ReportBundle, format: str, path) -> None:
    """Write the bundle to a file; identical bundles yield identical bytes."""
    text = render(bundle, format)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def load_bundle(path) -> ReportBundle:
    with open(path, "r", encoding="utf-8") as fh:
        obj = json.load(fh)
    return ReportBundle(kind=obj["kind"], rows=obj["rows"], metadata=obj.get("metadata", {}))
