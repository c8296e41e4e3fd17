"""Data ingestion and atomic output helpers."""

from __future__ import annotations

import csv
import os
import tempfile
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .errors import ConfigError, IngestionError


def fmt_number(x) -> str:
    """17 significant digits, enough to round-trip a double."""
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return format(float(x), ".17g")


def read_column(path: Union[str, Path], header: bool = False, column: Optional[str] = None) -> np.ndarray:
    """Read one numeric column from a CSV file.

    ``column`` is a header name when ``header`` is set, else a 0-based index.
    Non-numeric cells are reported with their line numbers.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise IngestionError(f"cannot read {path}: {e.strerror}") from None
    rows = [(i + 1, r) for i, r in enumerate(csv.reader(text.splitlines())) if r and any(c.strip() for c in r)]
    if header:
        if not rows:
            raise IngestionError(f"{path}: empty file")
        names = [c.strip() for c in rows[0][1]]
        rows = rows[1:]
        if column is None:
            idx = 0
        elif column in names:
            idx = names.index(column)
        else:
            raise IngestionError(f"{path}: no column named {column!r} (have {names})")
    else:
        try:
            idx = int(column) if column is not None else 0
        except ValueError:
            raise ConfigError("without a header, --column must be a 0-based index") from None
    if not rows:
        raise IngestionError(f"{path}: no data rows")
    values, bad = [], []
    for line, r in rows:
        try:
            v = float(r[idx])
        except (IndexError, ValueError):
            bad.append(line)
            continue
        if not np.isfinite(v):
            bad.append(line)
            continue
        values.append(v)
    if bad:
        shown = ", ".join(map(str, bad[:20])) + (" ..." if len(bad) > 20 else "")
        raise IngestionError(f"{path}: non-numeric values on line(s) {shown}")
    if len(values) < 2:
        raise IngestionError(f"{path}: need at least 2 observations, got {len(values)}")
    return np.asarray(values)


def atomic_write_text(path: Union[str, Path], text: str) -> None:
    """Write to a temporary file in the target directory, then rename over the target."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def check_writable(path: Union[str, Path]) -> None:
    parent = Path(path).parent
    probe = parent
    while not probe.exists():
        probe = probe.parent
    if not os.access(probe, os.W_OK):
        raise ConfigError(f"output location {parent} is not writable")
