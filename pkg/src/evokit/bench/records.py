"""Per-generation log records, CSV output and the stdout status logger."""

from __future__ import annotations

import csv
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, TextIO

import numpy as np

BASE_COLUMNS = ("generation", "best_eval", "mean_eval", "median_eval", "best_ever")
TIMING_COLUMNS = ("elapsed_seconds", "generation_seconds")


def fmt(value) -> str:
    """Shortest round-trip text for a number."""
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


@dataclass
class LogRecord:
    generation: int
    best_eval: float
    mean_eval: float
    median_eval: float
    best_ever: float
    elapsed_seconds: float = 0.0
    generation_seconds: float = 0.0
    extra: dict = field(default_factory=dict)

    def row(self) -> dict:
        out = {name: getattr(self, name) for name in BASE_COLUMNS}
        out.update(self.extra)
        out["elapsed_seconds"] = self.elapsed_seconds
        out["generation_seconds"] = self.generation_seconds
        return out


class RunLog:
    """Collects records and writes them as `run.csv`."""

    def __init__(self):
        self.records: list[LogRecord] = []

    def append(self, record: LogRecord) -> None:
        if self.records and record.generation <= self.records[-1].generation:
            raise ValueError("generation numbers must increase")
        self.records.append(record)

    @property
    def columns(self) -> list[str]:
        extra = list(self.records[0].extra) if self.records else []
        return [*BASE_COLUMNS, *extra, *TIMING_COLUMNS]

    def write(self, path: Path) -> None:
        write_csv(path, self.columns, [r.row() for r in self.records])


def write_csv(path: Path, columns: Iterable[str], rows: Iterable[dict]) -> None:
    columns = list(columns)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([fmt(row[c]) for c in columns])


def write_population(path: Path, values: np.ndarray, evals: np.ndarray) -> None:
    values = np.asarray(values)
    evals = np.asarray(evals, dtype=np.float64).reshape(values.shape[0], -1)
    columns = [f"x{j}" for j in range(values.shape[1])] + [f"f{j}" for j in range(evals.shape[1])]
    rows = []
    for v, e in zip(values, evals):
        rows.append(dict(zip(columns, [*v.tolist(), *e.tolist()])))
    write_csv(path, columns, rows)


def read_csv(path: Path) -> tuple[list[str], list[dict]]:
    with Path(path).open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header:
            raise ValueError(f"{path}: missing header")
        rows = []
        for lineno, line in enumerate(reader, start=2):
            if not line:
                continue
            if len(line) != len(header):
                raise ValueError(f"{path}:{lineno}: expected {len(header)} fields, got {len(line)}")
            rows.append(dict(zip(header, line)))
    return header, rows


def strip_timing(text: str) -> str:
    """CSV text with the timing columns removed, for reproducibility comparisons."""
    lines = text.splitlines()
    header = lines[0].split(",")
    keep = [i for i, name in enumerate(header) if name not in TIMING_COLUMNS]
    return "\n".join(",".join(line.split(",")[i] for i in keep) for line in lines)


class StdoutLogger:
    """Prints `gen=<g> best=<v> mean=<v> median=<v>` every `interval` generations."""

    def __init__(self, interval: int = 1, stream: Optional[TextIO] = None):
        if interval < 1:
            raise ValueError("interval must be at least 1")
        self.interval = interval
        self.stream = stream
        self._last: Optional[LogRecord] = None
        self._last_printed = None

    def _emit(self, record: LogRecord) -> None:
        out = self.stream if self.stream is not None else sys.stdout
        print(
            f"gen={record.generation} best={fmt(record.best_eval)} "
            f"mean={fmt(record.mean_eval)} median={fmt(record.median_eval)}",
            file=out,
        )
        self._last_printed = record.generation

    def __call__(self, record: LogRecord) -> None:
        self._last = record
        if record.generation % self.interval == 0:
            self._emit(record)

    def close(self) -> None:
        """Flush the final generation if the interval skipped it."""
        if self._last is not None and self._last_printed != self._last.generation:
            self._emit(self._last)
