"""Tabular dataset core: ingestion, schema inference, edits, snapshots.

A :class:`Dataset` is the single mutable object in the engine. Mutations
(edit / duplicate / delete / derived-feature append) are serialized through
one writer lock and each produces a new monotonically increasing version.
Analyses never touch the Dataset directly: they run against an immutable
:class:`Snapshot`, which also carries lazily built columnar numpy caches for
the hot kernels.
"""

from __future__ import annotations

import io
import json
import math
import threading
from dataclasses import dataclass
from enum import Enum
from typing import Iterable

import numpy as np

from .errors import IngestError, TypeMismatchError, UnknownFeatureError, UnknownPointError

Value = float | str | None

MISSING_BIN = "(missing)"


class FeatureKind(Enum):
    NUMERIC = "numeric"
    CATEGORICAL = "categorical"


class Origin(Enum):
    LOADED = "loaded"
    DUPLICATED = "duplicated"
    EDITED = "edited"


@dataclass
class FeatureSchema:
    """One feature's name, kind and bookkeeping counts.

    Counts are refreshed whenever statistics are recomputed; kind is fixed
    at ingestion.
    """

    name: str
    kind: FeatureKind
    distinct_count: int = 0
    missing_count: int = 0
    zero_count: int = 0


@dataclass(frozen=True)
class DataPoint:
    id: int
    values: tuple[Value, ...]
    origin: Origin = Origin.LOADED
    duplicated_from: int | None = None


def parse_number(raw: str) -> float | None:
    """Parse a string as a finite decimal number, or return None.

    Underscored literals ("1_0") and inf/nan spellings are rejected: a CSV
    cell holding them is categorical data, not a number.
    """
    s = raw.strip()
    if not s or "_" in s:
        return None
    try:
        v = float(s)
    except ValueError:
        return None
    return v if math.isfinite(v) else None


def _normalize(raw, kind: FeatureKind) -> Value:
    if raw is None:
        return None
    if kind is FeatureKind.NUMERIC:
        return float(raw)
    return raw if isinstance(raw, str) else str(raw)


def coerce_value(name: str, kind: FeatureKind, raw) -> Value:
    """Validate one externally supplied value against a feature kind."""
    if raw is None:
        return None
    if kind is FeatureKind.NUMERIC:
        if isinstance(raw, bool) or not isinstance(raw, (int, float)):
            raise TypeMismatchError(f"feature {name!r} is numeric, got {type(raw).__name__}")
        if not math.isfinite(raw):
            raise TypeMismatchError(f"feature {name!r} must be finite")
        return float(raw)
    if not isinstance(raw, str):
        raise TypeMismatchError(f"feature {name!r} is categorical, got {type(raw).__name__}")
    return raw


class Snapshot:
    """Immutable view of a dataset state, the unit all analyses consume."""

    def __init__(
        self,
        version: int,
        schema: list[FeatureSchema],
        points: tuple[DataPoint, ...],
        derived: tuple[tuple[str, dict[int, float]], ...],
    ):
        self.version = version
        self.schema = schema
        self.points = points
        self.derived = derived
        self._index: dict[int, int] = {p.id: i for i, p in enumerate(points)}
        self._columns: dict[str, np.ndarray] = {}
        self._codes: dict[str, tuple[np.ndarray, list[str]]] = {}
        self._stats = None
        self._lock = threading.Lock()

    # -- lookup ---------------------------------------------------------

    @property
    def n_points(self) -> int:
        return len(self.points)

    @property
    def feature_names(self) -> list[str]:
        return [f.name for f in self.schema]

    def schema_for(self, name: str) -> FeatureSchema:
        for f in self.schema:
            if f.name == name:
                return f
        raise UnknownFeatureError(f"unknown feature: {name!r}")

    def has_feature(self, name: str) -> bool:
        return any(f.name == name for f in self.schema)

    def derived_names(self) -> list[str]:
        return [name for name, _ in self.derived]

    def point(self, point_id: int) -> DataPoint:
        return self.points[self.point_index(point_id)]

    def point_index(self, point_id: int) -> int:
        idx = self._index.get(point_id)
        if idx is None:
            raise UnknownPointError(f"unknown datapoint id: {point_id}")
        return idx

    def feature_index(self, name: str) -> int:
        for i, f in enumerate(self.schema):
            if f.name == name:
                return i
        raise UnknownFeatureError(f"unknown feature: {name!r}")

    # -- columnar caches --------------------------------------------------

    def numeric_column(self, name: str) -> np.ndarray:
        """Feature values as float64 with NaN for missing, in point order.

        Derived features resolve here too (absent per-point entries are NaN).
        """
        with self._lock:
            cached = self._columns.get(name)
            if cached is not None:
                return cached
            for dname, dvals in self.derived:
                if dname == name:
                    col = np.array(
                        [dvals.get(p.id, np.nan) for p in self.points], dtype=np.float64
                    )
                    self._columns[name] = col
                    return col
            idx = self.feature_index(name)
            if self.schema[idx].kind is not FeatureKind.NUMERIC:
                raise TypeMismatchError(f"feature {name!r} is not numeric")
            col = np.array(
                [p.values[idx] if p.values[idx] is not None else np.nan for p in self.points],
                dtype=np.float64,
            )
            self._columns[name] = col
            return col

    def categorical_codes(self, name: str) -> tuple[np.ndarray, list[str]]:
        """Integer codes (missing = -1) plus the code -> value table."""
        with self._lock:
            cached = self._codes.get(name)
            if cached is not None:
                return cached
            idx = self.feature_index(name)
            if self.schema[idx].kind is not FeatureKind.CATEGORICAL:
                raise TypeMismatchError(f"feature {name!r} is not categorical")
            table: dict[str, int] = {}
            codes = np.empty(len(self.points), dtype=np.int64)
            for i, p in enumerate(self.points):
                v = p.values[idx]
                if v is None:
                    codes[i] = -1
                else:
                    codes[i] = table.setdefault(v, len(table))
            values = list(table.keys())
            self._codes[name] = (codes, values)
            return codes, values


class Dataset:
    """Mutable dataset with single-writer edit semantics."""

    def __init__(self, schema: list[FeatureSchema], points: list[DataPoint]):
        self.schema = schema
        self._points: list[DataPoint] = points
        self._derived: list[tuple[str, dict[int, float]]] = []
        self._next_id = (max((p.id for p in points), default=-1)) + 1
        self._version = 0
        self._write_lock = threading.RLock()
        self._snapshot: Snapshot | None = None

    # -- snapshots --------------------------------------------------------

    @property
    def version(self) -> int:
        return self._version

    def snapshot(self) -> Snapshot:
        with self._write_lock:
            if self._snapshot is None:
                self._snapshot = Snapshot(
                    self._version,
                    self.schema,
                    tuple(self._points),
                    tuple((n, dict(v)) for n, v in self._derived),
                )
            return self._snapshot

    def _bump(self) -> None:
        self._version += 1
        self._snapshot = None

    # -- mutations --------------------------------------------------------

    def _locate(self, point_id: int) -> int:
        for i, p in enumerate(self._points):
            if p.id == point_id:
                return i
        raise UnknownPointError(f"unknown datapoint id: {point_id}")

    def edit_point(self, point_id: int, changes: dict[str, Value]) -> DataPoint:
        """Replace feature values on one point; origin becomes EDITED."""
        with self._write_lock:
            i = self._locate(point_id)
            names = [f.name for f in self.schema]
            values = list(self._points[i].values)
            for name, raw in changes.items():
                if name not in names:
                    raise UnknownFeatureError(f"unknown feature: {name!r}")
                j = names.index(name)
                values[j] = coerce_value(name, self.schema[j].kind, raw)
            updated = DataPoint(point_id, tuple(values), Origin.EDITED)
            points = list(self._points)
            points[i] = updated
            self._points = points
            self._bump()
            return updated

    def duplicate_point(self, point_id: int) -> DataPoint:
        with self._write_lock:
            i = self._locate(point_id)
            src = self._points[i]
            copy = DataPoint(self._next_id, src.values, Origin.DUPLICATED, src.id)
            self._next_id += 1
            self._points = self._points + [copy]
            self._bump()
            return copy

    def delete_point(self, point_id: int) -> None:
        with self._write_lock:
            i = self._locate(point_id)
            points = list(self._points)
            del points[i]
            self._points = points
            self._derived = [
                (n, {pid: v for pid, v in vals.items() if pid != point_id})
                for n, vals in self._derived
            ]
            self._bump()

    def add_derived_feature(self, name: str, values: dict[int, float]) -> str:
        """Append a read-only derived feature; collisions get a numeric suffix."""
        with self._write_lock:
            taken = {f.name for f in self.schema} | {n for n, _ in self._derived}
            final = name
            k = 2
            while final in taken:
                final = f"{name}_{k}"
                k += 1
            self._derived = self._derived + [(final, dict(values))]
            self._bump()
            return final


# ---------------------------------------------------------------------------
# ingestion
# ---------------------------------------------------------------------------

def _infer_kind(raw_values: Iterable) -> FeatureKind:
    for v in raw_values:
        if v is None:
            continue
        if isinstance(v, bool):
            return FeatureKind.CATEGORICAL
        if isinstance(v, (int, float)):
            if not math.isfinite(v):
                return FeatureKind.CATEGORICAL
            continue
        if parse_number(v) is None:
            return FeatureKind.CATEGORICAL
    return FeatureKind.NUMERIC


def _coerce_column(raw_values: list, kind: FeatureKind, name: str) -> list[Value]:
    out: list[Value] = []
    if kind is FeatureKind.NUMERIC:
        for row, v in enumerate(raw_values):
            if v is None:
                out.append(None)
                continue
            if type(v) is float:  # fast path: JSONL numbers arrive as floats
                if math.isfinite(v):
                    out.append(v)
                    continue
                num = None
            elif isinstance(v, (int, float)) and not isinstance(v, bool):
                num = float(v)
                if not math.isfinite(num):
                    num = None
            else:
                num = parse_number(v)
            if num is None:
                raise IngestError(
                    f"row {row}, column {name!r}: {v!r} is not a finite number"
                )
            out.append(num)
        return out
    for v in raw_values:
        out.append(_normalize(v, kind))
    return out


def _rows_from_csv(text: str) -> tuple[list[str], list[list]]:
    import csv

    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise IngestError("empty file: no header row") from None
    if len(set(header)) != len(header):
        raise IngestError("duplicate column names in header")
    rows: list[list] = []
    for i, row in enumerate(reader):
        if not row:  # blank line: a record of all-missing cells
            rows.append([None] * len(header))
            continue
        if len(row) != len(header):
            raise IngestError(
                f"row {i}: expected {len(header)} columns, got {len(row)}"
            )
        rows.append([cell if cell.strip() != "" else None for cell in row])
    return header, rows


def _rows_from_jsonl(text: str) -> tuple[list[str], list[dict]]:
    lines = [line for line in text.splitlines() if line.strip()]
    if not lines:
        raise IngestError("empty file: no records")
    try:
        # one C-level parse of the whole stream; fall back per line on errors
        # or when joining changed the segmentation (e.g. a line holding two values)
        raw_rows = json.loads("[" + ",".join(lines) + "]")
        if len(raw_rows) != len(lines):
            raise json.JSONDecodeError("row segmentation mismatch", "", 0)
    except json.JSONDecodeError:
        raw_rows = []
        for i, line in enumerate(lines):
            try:
                raw_rows.append(json.loads(line))
            except json.JSONDecodeError as e:
                raise IngestError(f"row {i}: invalid JSON ({e.msg})") from None
    names: list[str] = []
    seen: set[str] = set()
    for i, obj in enumerate(raw_rows):
        if not isinstance(obj, dict):
            raise IngestError(f"row {i}: expected a JSON object")
        if obj.keys() - seen:
            for k in obj:
                if k not in seen:
                    seen.add(k)
                    names.append(k)
    if not names:
        raise IngestError("records carry no fields")
    return names, raw_rows


def ingest(
    source: bytes | str,
    format: str = "csv",
    declared_schema: list[tuple[str, FeatureKind]] | None = None,
) -> Dataset:
    """Load a CSV or JSONL byte stream into a Dataset.

    Schema inference: a column is numeric iff every non-missing value parses
    as a finite decimal number, categorical otherwise. Empty CSV cells,
    absent JSONL keys and JSON nulls are missing. Point ids are 0..n-1 in
    file order.
    """
    text = source.decode("utf-8") if isinstance(source, bytes) else source
    fmt = format.lower()
    if fmt == "csv":
        names, rows = _rows_from_csv(text)
        raw_columns = (
            [list(col) for col in zip(*rows)] if rows else [[] for _ in names]
        )
    elif fmt == "jsonl":
        names, records = _rows_from_jsonl(text)
        raw_columns = [[rec.get(name) for rec in records] for name in names]
    else:
        raise IngestError(f"unsupported format: {format!r}")

    if declared_schema is not None:
        declared = dict(declared_schema)
        unknown = [n for n in names if n not in declared]
        if unknown:
            raise IngestError(f"declared schema missing columns: {unknown}")
        kinds = [declared[n] for n in names]
    else:
        kinds = [_infer_kind(col) for col in raw_columns]

    columns = [
        _coerce_column(col, kind, name)
        for col, kind, name in zip(raw_columns, kinds, names)
    ]
    schema = [FeatureSchema(name=n, kind=k) for n, k in zip(names, kinds)]
    points = [
        DataPoint(i, values, Origin.LOADED) for i, values in enumerate(zip(*columns))
    ]
    ds = Dataset(schema, points)
    refresh_schema_counts(ds.snapshot(), schema)
    return ds


def refresh_schema_counts(snap: Snapshot, schema: list[FeatureSchema]) -> None:
    """Recompute distinct/missing/zero counts from a snapshot, in place."""
    for feat in schema:
        if feat.kind is FeatureKind.NUMERIC:
            col = snap.numeric_column(feat.name)
            present = col[~np.isnan(col)]
            feat.distinct_count = int(np.unique(present).shape[0])
            feat.missing_count = int(col.shape[0] - present.shape[0])
            feat.zero_count = int((present == 0.0).sum())
        else:
            codes, values = snap.categorical_codes(feat.name)
            feat.distinct_count = len(values)
            feat.missing_count = int((codes == -1).sum())
            feat.zero_count = 0


def as_snapshot(data: "Dataset | Snapshot") -> Snapshot:
    return data.snapshot() if isinstance(data, Dataset) else data
