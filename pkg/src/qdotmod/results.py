"""Tabular results and their CSV/JSON serialization."""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path


def format_number(x: float) -> str:
    """Locale-independent decimal text that round-trips the float exactly."""
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


@dataclass
class SweepResult:
    columns: list[str]
    rows: list[dict]
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        for i, row in enumerate(self.rows):
            if list(row) != list(self.columns):
                raise ValueError(f"row {i} has columns {list(row)}, expected {self.columns}")

    def column(self, name: str) -> list[float]:
        return [row[name] for row in self.rows]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow([format_number(row[c]) for c in self.columns])
        return buf.getvalue()

    def to_json(self) -> str:
        payload = {
            "metadata": self.metadata,
            "columns": self.columns,
            "rows": [[_json_number(row[c]) for c in self.columns] for row in self.rows],
        }
        return json.dumps(payload, indent=2, sort_keys=False)


def _json_number(x):
    x = float(x)
    return x if math.isfinite(x) else format_number(x)


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_result(result: SweepResult, path: str | Path, fmt: str = "csv") -> list[Path]:
    """Write atomically; CSV output gets its metadata in a ``.meta.json`` sidecar."""
    path = Path(path)
    if fmt == "json":
        _atomic_write(path, result.to_json())
        return [path]
    if fmt != "csv":
        raise ValueError(f"unknown format {fmt!r}")
    meta_path = path.with_name(path.name + ".meta.json")
    _atomic_write(meta_path, json.dumps(result.metadata, indent=2))
    _atomic_write(path, result.to_csv())
    return [path, meta_path]


def read_result(path: str | Path) -> SweepResult:
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if text.lstrip().startswith("{"):
        payload = json.loads(text)
        cols = payload["columns"]
        rows = [dict(zip(cols, map(float, r))) for r in payload["rows"]]
        return SweepResult(cols, rows, payload["metadata"])
    reader = csv.reader(io.StringIO(text))
    cols = next(reader)
    rows = [dict(zip(cols, map(float, r))) for r in reader]
    meta_path = path.with_name(path.name + ".meta.json")
    meta = json.loads(meta_path.read_text(encoding="utf-8")) if meta_path.exists() else {}
    return SweepResult(cols, rows, meta)
