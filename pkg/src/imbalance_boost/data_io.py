"""CSV ingestion and report formatting."""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from .booster import Dataset
from .exceptions import InvalidInputError, SchemaError


@dataclass(frozen=True)
class CsvSchema:
    """Column roles of a headed, comma-separated file.

    When ``feature_columns`` is None every column other than the label and
    group columns is a feature, in header order.
    """

    label_column: str
    group_column: Optional[str] = None
    feature_columns: Optional[Sequence[str]] = None


def _parse_float(cell: str, row: int, column: str) -> float:
    text = cell.strip()
    if not text:
        raise InvalidInputError(f"blank cell at row {row}, column {column!r}")
    try:
        v = float(text)
    except ValueError:
        raise InvalidInputError(f"cannot parse {cell!r} as a number at row {row}, column {column!r}") from None
    if not math.isfinite(v):
        raise InvalidInputError(f"non-finite value {cell!r} at row {row}, column {column!r}")
    return v


def _read_columns(path, label_column, group_column, feature_columns, ignore=()):
    """Parse the file; returns (feature names, features, labels or None, groups or None)."""
    with open(path, newline="") as f:
        reader = csv.reader(f, delimiter=",")
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise SchemaError(f"{path}: empty file, a header row is required") from None
        if len(set(header)) != len(header):
            raise SchemaError(f"{path}: duplicate column names in header")
        if label_column is not None and label_column not in header:
            raise SchemaError(f"{path}: label column {label_column!r} not in header")
        if group_column is not None and group_column not in header:
            raise SchemaError(f"{path}: group column {group_column!r} not in header")
        reserved = {label_column, group_column, *ignore}
        if feature_columns is None:
            feature_cols = [h for h in header if h not in reserved]
        else:
            missing = [c for c in feature_columns if c not in header]
            if missing:
                raise SchemaError(f"{path}: feature columns {missing} not in header")
            feature_cols = list(feature_columns)
        if not feature_cols:
            raise SchemaError(f"{path}: no feature columns")

        pos = {h: i for i, h in enumerate(header)}
        label_pos = pos.get(label_column)
        group_pos = pos.get(group_column)
        feat_pos = [pos[c] for c in feature_cols]

        rows: List[List[float]] = []
        labels: List[float] = []
        groups: List[str] = []
        for line_no, record in enumerate(reader, start=2):
            if not record:
                continue
            if len(record) != len(header):
                raise InvalidInputError(
                    f"row {line_no} has {len(record)} cells, header has {len(header)}"
                )
            if label_pos is not None:
                y = _parse_float(record[label_pos], line_no, label_column)
                if y not in (0.0, 1.0):
                    raise InvalidInputError(
                        f"label {record[label_pos]!r} at row {line_no} is not 0 or 1"
                    )
                labels.append(y)
            rows.append([_parse_float(record[p], line_no, header[p]) for p in feat_pos])
            if group_pos is not None:
                groups.append(record[group_pos].strip())

    features = np.array(rows, dtype=np.float64).reshape(len(rows), len(feature_cols))
    return (
        feature_cols,
        features,
        np.array(labels) if label_pos is not None else None,
        np.array(groups, dtype=object) if group_pos is not None else None,
    )


def load_csv(path, schema: CsvSchema) -> Dataset:
    """Read a Dataset; row numbers in errors count the header as row 1."""
    _, X, y, groups = _read_columns(
        path, schema.label_column, schema.group_column, schema.feature_columns
    )
    return Dataset(X, y, groups)


def load_features(path, ignore: Sequence[str] = (), feature_columns=None) -> np.ndarray:
    """Feature matrix only; columns named in ``ignore`` are skipped when present."""
    _, X, _, _ = _read_columns(path, None, None, feature_columns, ignore=tuple(ignore))
    return X


def dumps_report(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True, allow_nan=False) + "\n"


def format_table(scores: dict, counts: dict) -> str:
    lines = ["metric      value"]
    for name in ("accuracy", "precision", "recall", "f1", "mcc"):
        lines.append(f"{name:<10}  {scores[name]:.4f}")
    lines.append("  ".join(f"{k}={counts[k]}" for k in ("tp", "fp", "tn", "fn")))
    return "\n".join(lines)
