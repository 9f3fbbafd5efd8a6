from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import IO, Iterable

from deep_polar.models import PointResult, SimResult

CSV_HEADER = ["param", "trials", "block_errors", "bler", "ci95", "bit_errors", "ber", "seconds"]


class CheckpointStore:
    """Finished sweep points per run key, kept in one JSON file."""

    def __init__(self, path: Path) -> None:
        self.path = path

    def _read(self) -> dict[str, dict]:
        if not self.path.exists():
            return {}
        return json.loads(self.path.read_text(encoding="utf-8"))

    def load(self, key: str) -> SimResult | None:
        data = self._read().get(key)
        return SimResult.from_dict(data) if data else None

    def save(self, key: str, result: SimResult) -> None:
        runs = self._read()
        runs[key] = result.to_dict()
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self.path.write_text(json.dumps(runs, ensure_ascii=True, indent=2), encoding="utf-8")

    def clear(self, key: str) -> None:
        runs = self._read()
        if runs.pop(key, None) is not None:
            self.path.write_text(json.dumps(runs, ensure_ascii=True, indent=2), encoding="utf-8")


def write_csv(points: Iterable[PointResult], handle: IO[str]) -> None:
    writer = csv.writer(handle)
    writer.writerow(CSV_HEADER)
    for point in points:
        writer.writerow(point.csv_row())


def save_csv(points: Iterable[PointResult], path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as handle:
        write_csv(points, handle)
