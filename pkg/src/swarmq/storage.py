"""Persistence: Q-table files, reward CSVs, manifests, atomic run dirs.

Q-tables are JSON with a header (S, M, behavior ids, discretization id)
and a row-major value matrix; floats survive the round trip bit-exactly.
CSVs are RFC-4180 (header row, CRLF, '.' decimals) with floats printed
via ``repr`` so nothing is lost to formatting.
"""

from __future__ import annotations

import csv
import json
import os
import shutil
from contextlib import contextmanager
from pathlib import Path

import numpy as np

from .learning import QTable

QTABLE_FORMAT = "swarmq-qtable-v1"


class StorageError(ValueError):
    """Malformed or mismatched persisted data."""


def save_qtable(q: QTable, path: str | Path) -> None:
    """Write the table as JSON; the value matrix round-trips bit-exactly."""
    doc = {
        "format": QTABLE_FORMAT,
        "S": q.n_states,
        "M": q.n_behaviors,
        "behavior_ids": list(q.behavior_ids),
        "discretization_id": q.discretization_id,
        "values": [[float(v) for v in row] for row in q.values],
    }
    path = Path(path)
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(json.dumps(doc, indent=1))
    os.replace(tmp, path)


def load_qtable(path: str | Path) -> QTable:
    """Read a Q-table file, rejecting anything malformed or inconsistent."""
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as exc:
        raise StorageError(f"cannot read Q-table {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise StorageError(f"Q-table {path} is not valid JSON: {exc}") from None
    for key in ("format", "S", "M", "behavior_ids", "discretization_id", "values"):
        if key not in doc:
            raise StorageError(f"Q-table {path} is missing key {key!r}")
    if doc["format"] != QTABLE_FORMAT:
        raise StorageError(f"unsupported Q-table format {doc['format']!r}")
    values = np.array(doc["values"], dtype=np.float64)
    if values.ndim != 2 or values.shape != (doc["S"], doc["M"]):
        raise StorageError(
            f"Q-table {path}: values shape {values.shape} does not match "
            f"header S={doc['S']}, M={doc['M']}")
    if len(doc["behavior_ids"]) != doc["M"]:
        raise StorageError(
            f"Q-table {path}: {len(doc['behavior_ids'])} behavior ids for M={doc['M']}")
    try:
        return QTable(values, tuple(doc["behavior_ids"]), str(doc["discretization_id"]))
    except ValueError as exc:
        raise StorageError(f"Q-table {path}: {exc}") from None


def check_qtable_matches(q: QTable, n_states: int, behavior_ids,
                         discretization_id: str) -> None:
    """Refuse to reuse a table trained against a different discretization."""
    if q.n_states != n_states:
        raise StorageError(f"Q-table has S={q.n_states}, config expects {n_states}")
    if tuple(q.behavior_ids) != tuple(behavior_ids):
        raise StorageError(f"Q-table behaviors {q.behavior_ids} do not match "
                           f"the configured library {tuple(behavior_ids)}")
    if q.discretization_id != discretization_id:
        raise StorageError(f"Q-table discretization {q.discretization_id!r} does not "
                           f"match the configured environment {discretization_id!r}")


def _fmt(value) -> str:
    return repr(float(value)) if isinstance(value, (float, np.floating)) else str(value)


def write_csv(path: str | Path, header: list[str], rows) -> None:
    """RFC-4180 CSV with floats printed at full round-trip precision."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\r\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def write_manifest(path: str | Path, manifest: dict) -> None:
    Path(path).write_text(json.dumps(manifest, indent=1, sort_keys=True))


@contextmanager
def staged_run_dir(out_dir: str | Path):
    """Create the run directory atomically: all files or nothing.

    Yields a staging directory; on clean exit it is renamed to ``out_dir``
    (which must not already exist), on error it is removed.
    """
    out = Path(out_dir)
    if out.exists():
        raise StorageError(f"output directory {out} already exists")
    out.parent.mkdir(parents=True, exist_ok=True)
    stage = out.parent / (out.name + f".partial-{os.getpid()}")
    stage.mkdir()
    try:
        yield stage
    except BaseException:
        shutil.rmtree(stage, ignore_errors=True)
        raise
    os.replace(stage, out)
