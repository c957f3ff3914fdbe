"""CSV ingestion with a column-role mapping, and dataset archives."""
from __future__ import annotations

import csv
import json

import numpy as np

from .base import Dataset

MISSING = {"", "na", "nan", "null", "none", "?"}
INTEGER_ROLES = {"group", "grade", "partition"}


class DataError(ValueError):
    pass


def read_csv_dataset(path, roles, meta=None):
    """Read a header-named CSV into a Dataset.

    ``roles`` maps a role (response, covariates, group, treatment, ...) to a
    column name or a list of names; multi-column roles become 2-d arrays.
    Any missing cell in a mapped column raises DataError.
    """
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        rows = list(reader)
    arrays = {}
    for role, cols in roles.items():
        names = [cols] if isinstance(cols, str) else list(cols)
        missing_cols = [c for c in names if c not in header]
        if missing_cols:
            raise DataError(f"columns {missing_cols} for role {role!r} not in {path}")
        block = np.empty((len(rows), len(names)))
        for i, row in enumerate(rows):
            for j, c in enumerate(names):
                cell = (row.get(c) or "").strip()
                if cell.lower() in MISSING:
                    raise DataError(f"missing value in column {c!r}, data row {i + 1}")
                try:
                    block[i, j] = float(cell)
                except ValueError as exc:
                    raise DataError(f"non-numeric value {cell!r} in column {c!r}, data row {i + 1}") from exc
        arr = block[:, 0] if isinstance(cols, str) else block
        if role in INTEGER_ROLES:
            if not np.all(arr == np.round(arr)):
                raise DataError(f"role {role!r} needs integer codes")
            arr = arr.astype(np.int64)
        arrays[role] = arr
    return Dataset(arrays, meta=dict(meta or {}, source=str(path), roles=roles))


def _jsonable(v):
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


def save_dataset(data, path):
    """Write arrays to ``path`` (.npz) with metadata alongside as JSON in the archive."""
    np.savez(path, __meta__=np.array(json.dumps(_jsonable(data.meta))), **data.arrays)


def load_dataset(path):
    with np.load(path, allow_pickle=False) as z:
        meta = json.loads(str(z["__meta__"]))
        arrays = {k: z[k] for k in z.files if k != "__meta__"}
    return Dataset(arrays, meta)
