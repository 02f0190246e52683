"""Feature schemas, data points, and datasets with robust per-feature statistics.

A data point is a plain ``numpy.ndarray`` of ``float64`` in the schema's
canonical feature order; categorical values are stored as category indices.
The Schema owns all validation, coding (label <-> index), and projection of
raw vectors onto the feasible set.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import SchemaViolation, SpecError

FEATURE_KINDS = ("continuous", "count", "categorical")


@dataclass(frozen=True)
class FeatureSpec:
    """One feature: its kind, optional bounds, and categories when categorical."""

    name: str
    kind: str = "continuous"
    lower: float | None = None
    upper: float | None = None
    categories: tuple[str, ...] | None = None

    def __post_init__(self):
        if not self.name or not isinstance(self.name, str):
            raise SpecError("feature name must be a non-empty string", locus="schema")
        if self.kind not in FEATURE_KINDS:
            raise SpecError(
                f"unknown feature kind {self.kind!r} (expected one of {FEATURE_KINDS})",
                locus=f"schema.{self.name}.kind",
            )
        if self.kind == "categorical":
            if not self.categories or len(self.categories) < 2:
                raise SpecError(
                    "categorical feature needs at least 2 categories",
                    locus=f"schema.{self.name}.categories",
                )
            if len(set(self.categories)) != len(self.categories):
                raise SpecError(
                    "categories must be distinct", locus=f"schema.{self.name}.categories"
                )
            object.__setattr__(self, "categories", tuple(self.categories))
        elif self.categories:
            raise SpecError(
                f"{self.kind} feature cannot declare categories",
                locus=f"schema.{self.name}.categories",
            )
        lo, hi = self.effective_bounds()
        if lo > hi:
            raise SpecError(
                f"lower bound {lo} exceeds upper bound {hi}",
                locus=f"schema.{self.name}",
            )

    def effective_bounds(self) -> tuple[float, float]:
        """Numeric bounds used for validation and projection.

        Categorical features are bounded by their index range regardless of
        any declared lower/upper.
        """
        if self.kind == "categorical":
            return 0.0, float(len(self.categories) - 1)
        lo = -math.inf if self.lower is None else float(self.lower)
        hi = math.inf if self.upper is None else float(self.upper)
        return lo, hi

    def validate_value(self, v: float) -> None:
        if not math.isfinite(v):
            raise SchemaViolation(f"{self.name}: value {v!r} is not finite", feature=self.name)
        lo, hi = self.effective_bounds()
        if v < lo or v > hi:
            raise SchemaViolation(
                f"{self.name}: value {v} outside bounds [{lo}, {hi}]", feature=self.name
            )
        if self.kind in ("count", "categorical") and abs(v - round(v)) > 1e-9:
            raise SchemaViolation(
                f"{self.name}: {self.kind} value must be an integer, got {v}",
                feature=self.name,
            )

    def code_value(self, raw) -> float:
        """Convert an external value (number, or category label) to a float."""
        if self.kind == "categorical" and isinstance(raw, str):
            try:
                return float(self.categories.index(raw))
            except ValueError:
                raise SchemaViolation(
                    f"{self.name}: unknown category {raw!r}", feature=self.name
                ) from None
        try:
            return float(raw)
        except (TypeError, ValueError):
            raise SchemaViolation(
                f"{self.name}: cannot interpret value {raw!r}", feature=self.name
            ) from None

    def display_value(self, v: float):
        """Inverse of code_value for reports: labels for categoricals, ints for counts."""
        if self.kind == "categorical":
            return self.categories[int(round(v))]
        if self.kind == "count":
            return int(round(v))
        return float(v)


@dataclass(frozen=True)
class Schema:
    """Ordered feature list; the order is the canonical vector order."""

    features: tuple[FeatureSpec, ...]

    def __post_init__(self):
        feats = tuple(self.features)
        object.__setattr__(self, "features", feats)
        if len(feats) < 1:
            raise SpecError("schema needs at least one feature", locus="schema")
        names = [f.name for f in feats]
        if len(set(names)) != len(names):
            dup = sorted({n for n in names if names.count(n) > 1})
            raise SpecError(f"duplicate feature names: {dup}", locus="schema")

    @property
    def dimension(self) -> int:
        return len(self.features)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(f.name for f in self.features)

    def index_of(self, name: str) -> int:
        for i, f in enumerate(self.features):
            if f.name == name:
                return i
        raise SchemaViolation(f"unknown feature {name!r}", feature=name)

    def point(self, obj) -> np.ndarray:
        """Build a validated point from a vector or a name->value mapping."""
        if isinstance(obj, Mapping):
            missing = [f.name for f in self.features if f.name not in obj]
            if missing:
                raise SchemaViolation(f"missing features: {missing}", feature=missing[0])
            extra = [k for k in obj if k not in self.names]
            if extra:
                raise SchemaViolation(f"unknown features: {extra}", feature=extra[0])
            values = [f.code_value(obj[f.name]) for f in self.features]
        else:
            values = [
                f.code_value(v) for f, v in zip(self.features, self._as_sequence(obj))
            ]
        return self.validate_point(values)

    def _as_sequence(self, obj) -> Sequence:
        seq = list(np.asarray(obj, dtype=object).ravel()) if not isinstance(obj, (list, tuple)) else list(obj)
        if len(seq) != self.dimension:
            raise SchemaViolation(
                f"point has {len(seq)} values, schema has {self.dimension} features"
            )
        return seq

    def validate_point(self, values) -> np.ndarray:
        x = np.asarray(values, dtype=np.float64)
        if x.shape != (self.dimension,):
            raise SchemaViolation(
                f"point shape {x.shape} does not match dimension {self.dimension}"
            )
        for f, v in zip(self.features, x):
            f.validate_value(float(v))
        return x.copy()

    def contains(self, values) -> bool:
        try:
            self.validate_point(values)
            return True
        except SchemaViolation:
            return False

    def project(self, values) -> np.ndarray:
        """Clip to bounds and round count/categorical coordinates to integers."""
        x = np.asarray(values, dtype=np.float64).copy()
        for i, f in enumerate(self.features):
            lo, hi = f.effective_bounds()
            v = min(max(x[i], lo), hi)
            if f.kind in ("count", "categorical"):
                v = min(max(float(round(v)), lo), hi)
            x[i] = v
        return x

    def to_named(self, values) -> dict:
        """Render a vector as {name: display value} with category labels."""
        x = np.asarray(values, dtype=np.float64)
        return {f.name: f.display_value(v) for f, v in zip(self.features, x)}

    def bounds_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        los = np.array([f.effective_bounds()[0] for f in self.features])
        his = np.array([f.effective_bounds()[1] for f in self.features])
        return los, his


@dataclass(frozen=True)
class FeatureStats:
    """Per-feature robust statistics over a dataset."""

    median: np.ndarray
    mad: np.ndarray
    mean: np.ndarray

    def effective_scale(self) -> np.ndarray:
        """MAD with zero entries substituted by max(1e-6, 1e-3 * |median|).

        Keeps distance weights finite while leaving constant features nearly
        immutable.
        """
        scale = self.mad.copy()
        zero = scale <= 0.0
        scale[zero] = np.maximum(1e-6, 1e-3 * np.abs(self.median[zero]))
        return scale


def _compute_stats(rows: np.ndarray) -> FeatureStats:
    median = np.median(rows, axis=0)
    mad = np.median(np.abs(rows - median), axis=0)
    mean = rows.mean(axis=0)
    return FeatureStats(median=median, mad=mad, mean=mean)


@dataclass(frozen=True)
class Dataset:
    """Immutable row collection with stats computed at construction."""

    schema: Schema
    rows: np.ndarray
    stats: FeatureStats = field(init=False)

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=np.float64)
        if rows.ndim != 2 or rows.shape[1] != self.schema.dimension:
            raise SchemaViolation(
                f"rows shape {rows.shape} does not match dimension {self.schema.dimension}"
            )
        if rows.shape[0] < 1:
            raise SchemaViolation("dataset needs at least one row")
        for r in range(rows.shape[0]):
            try:
                self.schema.validate_point(rows[r])
            except SchemaViolation as exc:
                raise SchemaViolation(f"row {r}: {exc}", feature=exc.feature) from None
        rows.setflags(write=False)
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "stats", _compute_stats(rows))

    @property
    def n_rows(self) -> int:
        return int(self.rows.shape[0])

    def effective_scale(self) -> np.ndarray:
        return self.stats.effective_scale()

    @classmethod
    def from_rows(cls, schema: Schema, rows: Iterable) -> "Dataset":
        coded = [schema.point(r) for r in rows]
        if not coded:
            raise SchemaViolation("dataset needs at least one row")
        return cls(schema=schema, rows=np.vstack(coded))

    @classmethod
    def from_csv(cls, schema: Schema, text: str) -> "Dataset":
        """Parse an RFC-4180 CSV whose header matches the schema order exactly."""
        reader = csv.reader(io.StringIO(text))
        try:
            header = next(reader)
        except StopIteration:
            raise SpecError("empty CSV", locus="csv:header") from None
        if tuple(h.strip() for h in header) != schema.names:
            raise SpecError(
                f"CSV header {header} does not match schema order {list(schema.names)}",
                locus="csv:header",
            )
        rows = []
        for lineno, rec in enumerate(reader, start=2):
            if not rec:
                continue
            if len(rec) != schema.dimension:
                raise SpecError(
                    f"expected {schema.dimension} fields, got {len(rec)}",
                    locus=f"csv:line {lineno}",
                )
            try:
                rows.append([f.code_value(v) for f, v in zip(schema.features, rec)])
            except SchemaViolation as exc:
                raise SpecError(str(exc), locus=f"csv:line {lineno}") from None
        if not rows:
            raise SpecError("CSV has a header but no rows", locus="csv")
        return cls(schema=schema, rows=np.asarray(rows, dtype=np.float64))

    def to_csv(self) -> str:
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(self.schema.names)
        for row in self.rows:
            writer.writerow([_csv_cell(f, v) for f, v in zip(self.schema.features, row)])
        return out.getvalue()


def _csv_cell(f: FeatureSpec, v: float):
    shown = f.display_value(v)
    return shown if isinstance(shown, (str, int)) else repr(shown)


def compute_stats(dataset: Dataset) -> FeatureStats:
    """Recompute {median, mad, mean} from the dataset's rows.

    mad = median(|v - median(v)|); it is 0 exactly when the spread around the
    median is zero (notably for constant columns).
    """
    return _compute_stats(dataset.rows)


def schema_from_documents(entries: list) -> Schema:
    """Build a Schema from the ``schema`` section of a model-spec document."""
    if not isinstance(entries, list) or not entries:
        raise SpecError("schema must be a non-empty list", locus="schema")
    feats = []
    for i, entry in enumerate(entries):
        if not isinstance(entry, Mapping):
            raise SpecError("schema entry must be an object", locus=f"schema[{i}]")
        unknown = set(entry) - {"name", "kind", "lower", "upper", "categories"}
        if unknown:
            raise SpecError(
                f"unknown schema fields {sorted(unknown)}", locus=f"schema[{i}]"
            )
        cats = entry.get("categories")
        feats.append(
            FeatureSpec(
                name=entry.get("name", ""),
                kind=entry.get("kind", "continuous"),
                lower=entry.get("lower"),
                upper=entry.get("upper"),
                categories=tuple(cats) if cats else None,
            )
        )
    return Schema(features=tuple(feats))


def schema_to_documents(schema: Schema) -> list:
    out = []
    for f in schema.features:
        entry: dict = {"name": f.name, "kind": f.kind}
        if f.lower is not None:
            entry["lower"] = f.lower
        if f.upper is not None:
            entry["upper"] = f.upper
        if f.categories:
            entry["categories"] = list(f.categories)
        out.append(entry)
    return out
