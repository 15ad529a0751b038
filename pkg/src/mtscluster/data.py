"""EMA panel data: loading, validation, missing-value repair, normalization.

A cohort is stored as one :class:`EmaSeries` per individual. Missing cells
are ``NaN``. Objects are immutable after construction: arrays are copied
and marked read-only, and every transform returns a new dataset.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import InputError

EPS_STD = 1e-8

MISSING_POLICIES = ("linear-interpolate", "drop-row")


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class VariableSchema:
    """Ordered variable names with optional response-scale bounds."""

    names: tuple[str, ...]
    scale_min: float | None = None
    scale_max: float | None = None

    def __post_init__(self):
        names = tuple(str(n) for n in self.names)
        object.__setattr__(self, "names", names)
        if not names:
            raise InputError("schema needs at least one variable")
        if any(not n.strip() for n in names):
            raise InputError("variable names must be non-empty")
        if len(set(names)) != len(names):
            raise InputError(f"duplicate variable names in schema: {names}")
        if (
            self.scale_min is not None
            and self.scale_max is not None
            and not self.scale_min < self.scale_max
        ):
            raise InputError("scale_min must be below scale_max")

    def __len__(self) -> int:
        return len(self.names)


@dataclass(frozen=True, eq=False)
class EmaSeries:
    """One individual's ``T x V`` observation matrix.

    Rows are sampling occasions ordered by ``timestamps``; ``NaN`` marks a
    missing cell. A row with every cell missing is rejected.
    """

    individual_id: str
    timestamps: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        ts = _frozen(np.ravel(self.timestamps))
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim == 1:
            vals = vals[:, None]
        vals = _frozen(vals)
        object.__setattr__(self, "individual_id", str(self.individual_id))
        object.__setattr__(self, "timestamps", ts)
        object.__setattr__(self, "values", vals)
        if vals.ndim != 2:
            raise InputError("values must be a T x V matrix")
        if vals.shape[0] == 0:
            raise InputError(f"series {self.individual_id!r} is empty")
        if ts.shape[0] != vals.shape[0]:
            raise InputError(
                f"series {self.individual_id!r}: {ts.shape[0]} timestamps "
                f"for {vals.shape[0]} rows"
            )
        if not np.all(np.isfinite(ts)):
            raise InputError(f"series {self.individual_id!r}: non-finite timestamp")
        if np.any(np.diff(ts) <= 0):
            raise InputError(
                f"series {self.individual_id!r}: timestamps must be strictly increasing"
            )
        if np.any(np.isinf(vals)):
            raise InputError(f"series {self.individual_id!r}: infinite value")
        if np.any(np.all(np.isnan(vals), axis=1)):
            raise InputError(
                f"series {self.individual_id!r}: a row has no observed cell"
            )

    @property
    def length(self) -> int:
        return self.values.shape[0]

    @property
    def n_vars(self) -> int:
        return self.values.shape[1]

    @property
    def has_missing(self) -> bool:
        return bool(np.isnan(self.values).any())

    def __eq__(self, other):
        if not isinstance(other, EmaSeries):
            return NotImplemented
        return (
            self.individual_id == other.individual_id
            and np.array_equal(self.timestamps, other.timestamps)
            and np.array_equal(self.values, other.values, equal_nan=True)
        )

    __hash__ = None


@dataclass(frozen=True, eq=False)
class EmaDataset:
    """A cohort of series sharing one variable schema.

    ``normalized`` is ``None`` for raw data, otherwise the name of the
    normalization applied (currently only ``"per-individual"``).
    """

    schema: VariableSchema
    series: tuple[EmaSeries, ...]
    normalized: str | None = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        series = tuple(self.series)
        object.__setattr__(self, "series", series)
        if len(series) < 2:
            raise InputError(f"need at least 2 individuals, got {len(series)}")
        v = len(self.schema)
        for s in series:
            if s.n_vars != v:
                raise InputError(
                    f"series {s.individual_id!r} has {s.n_vars} variables, schema has {v}"
                )
        ids = [s.individual_id for s in series]
        if len(set(ids)) != len(ids):
            raise InputError("individual ids must be unique")

    def __len__(self) -> int:
        return len(self.series)

    def __iter__(self):
        return iter(self.series)

    def __getitem__(self, i) -> EmaSeries:
        return self.series[i]

    def __eq__(self, other):
        if not isinstance(other, EmaDataset):
            return NotImplemented
        return (
            self.schema == other.schema
            and self.normalized == other.normalized
            and self.series == other.series
        )

    __hash__ = None

    @property
    def n(self) -> int:
        return len(self.series)

    @property
    def ids(self) -> list[str]:
        return [s.individual_id for s in self.series]

    @property
    def lengths(self) -> list[int]:
        return [s.length for s in self.series]

    @property
    def has_missing(self) -> bool:
        return any(s.has_missing for s in self.series)

    def arrays(self) -> list[np.ndarray]:
        """Value matrices in cohort order (read-only views)."""
        return [s.values for s in self.series]

    def require_complete(self) -> None:
        if self.has_missing:
            raise InputError("dataset has missing cells; run repair_missing first")

    def irregularity(self) -> dict[str, float]:
        """Coefficient of variation of sampling intervals per individual."""
        out = {}
        for s in self.series:
            gaps = np.diff(s.timestamps)
            out[s.individual_id] = (
                float(gaps.std() / gaps.mean()) if gaps.size else 0.0
            )
        return out


def make_dataset(
    schema: VariableSchema,
    series: Iterable[EmaSeries],
    normalized: str | None = None,
) -> EmaDataset:
    """Build a dataset with series sorted by individual id."""
    ordered = sorted(series, key=lambda s: s.individual_id)
    return EmaDataset(schema=schema, series=tuple(ordered), normalized=normalized)


def _parse_float(text: str, what: str, lineno: int) -> float:
    try:
        x = float(text)
    except ValueError:
        raise InputError(f"line {lineno}: non-numeric {what} {text!r}") from None
    if not math.isfinite(x):
        raise InputError(f"line {lineno}: non-finite {what} {text!r}")
    return x


def read_csv(stream, schema: VariableSchema | None = None) -> EmaDataset:
    """Parse long-format CSV text from an open text stream.

    Without a schema, variable names are taken from the header.
    """
    reader = csv.reader(stream)
    try:
        header = next(reader)
    except StopIteration:
        raise InputError("empty CSV input") from None
    header = [h.strip() for h in header]
    if header[:2] != ["individual_id", "timestamp"]:
        raise InputError("header must start with individual_id,timestamp")
    if schema is None:
        schema = VariableSchema(tuple(header[2:]))
    elif tuple(header[2:]) != schema.names:
        raise InputError(
            f"header variables {header[2:]} do not match schema {list(schema.names)}"
        )
    ncol = 2 + len(schema)

    rows: dict[str, dict[float, list[float]]] = {}
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != ncol:
            raise InputError(f"line {lineno}: expected {ncol} columns, got {len(row)}")
        pid = row[0].strip()
        if not pid:
            raise InputError(f"line {lineno}: empty individual_id")
        t = _parse_float(row[1].strip(), "timestamp", lineno)
        cells = []
        for name, text in zip(schema.names, row[2:]):
            text = text.strip()
            cells.append(math.nan if text == "" else _parse_float(text, name, lineno))
        per = rows.setdefault(pid, {})
        if t in per:
            raise InputError(f"line {lineno}: duplicate row for ({pid!r}, {row[1]!r})")
        per[t] = cells

    series = []
    for pid, per in rows.items():
        ts = sorted(per)
        vals = np.array([per[t] for t in ts], dtype=float).reshape(len(ts), len(schema))
        keep = ~np.all(np.isnan(vals), axis=1)
        if not keep.any():
            raise InputError(f"individual {pid!r} has no observed values")
        series.append(EmaSeries(pid, np.asarray(ts)[keep], vals[keep]))
    return make_dataset(schema, series)


def load_csv(path: str | Path, schema: VariableSchema | None = None) -> EmaDataset:
    """Load a long-format EMA file (``individual_id,timestamp,<vars...>``).

    Empty cells are missing. Rows with every variable missing are dropped.
    Series are returned sorted by individual id, rows sorted by timestamp.
    """
    path = Path(path)
    if not path.is_file():
        raise InputError(f"no such file: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        return read_csv(fh, schema)


def _fmt(x: float) -> str:
    return "" if math.isnan(x) else repr(float(x))


def to_csv_text(ds: EmaDataset) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["individual_id", "timestamp", *ds.schema.names])
    for s in ds.series:
        for t, row in zip(s.timestamps, s.values):
            w.writerow([s.individual_id, _fmt(t), *(_fmt(x) for x in row)])
    return buf.getvalue()


def export_csv(ds: EmaDataset, path: str | Path) -> None:
    """Write the dataset back in the long format read by :func:`load_csv`."""
    Path(path).write_text(to_csv_text(ds), encoding="utf-8")


def _interpolate(s: EmaSeries) -> EmaSeries:
    vals = np.array(s.values)
    for v in range(vals.shape[1]):
        col = vals[:, v]
        miss = np.isnan(col)
        if not miss.any():
            continue
        if miss.all():
            raise InputError(
                f"variable {v} is entirely missing for {s.individual_id!r}; "
                "cannot interpolate"
            )
        # np.interp holds the nearest observed value past either end
        col[miss] = np.interp(s.timestamps[miss], s.timestamps[~miss], col[~miss])
    return EmaSeries(s.individual_id, s.timestamps, vals)


def _drop_rows(s: EmaSeries) -> EmaSeries:
    keep = ~np.isnan(s.values).any(axis=1)
    if not keep.any():
        raise InputError(f"drop-row removes every row of {s.individual_id!r}")
    return EmaSeries(s.individual_id, s.timestamps[keep], s.values[keep])


def repair_missing(ds: EmaDataset, policy: str = "linear-interpolate") -> EmaDataset:
    """Return a copy of ``ds`` with no missing cells.

    ``linear-interpolate`` fills each gap linearly in time from the nearest
    observed values of the same variable (ends copy the nearest value).
    ``drop-row`` removes every row that has a missing cell.
    """
    if policy not in MISSING_POLICIES:
        raise InputError(f"unknown missing policy {policy!r}; use one of {MISSING_POLICIES}")
    fix = _interpolate if policy == "linear-interpolate" else _drop_rows
    series = tuple(fix(s) if s.has_missing else s for s in ds.series)
    return replace(ds, series=series)


def znormalize(ds: EmaDataset) -> EmaDataset:
    """Per-individual, per-variable z-scoring with population std.

    Variables whose std is below ``EPS_STD`` are only centered.
    """
    ds.require_complete()
    out = []
    for s in ds.series:
        mu = s.values.mean(axis=0)
        sd = s.values.std(axis=0)
        scale = np.where(sd < EPS_STD, 1.0, sd)
        out.append(EmaSeries(s.individual_id, s.timestamps, (s.values - mu) / scale))
    return replace(ds, series=tuple(out), normalized="per-individual")


def from_arrays(
    arrays: Sequence[np.ndarray],
    names: Sequence[str] | None = None,
    ids: Sequence[str] | None = None,
) -> EmaDataset:
    """Wrap raw ``T x V`` arrays (unit-spaced timestamps) as a dataset.

    Input order is preserved, unlike :func:`load_csv`.
    """
    arrays = [np.atleast_2d(np.asarray(a, dtype=float).T).T for a in arrays]
    v = arrays[0].shape[1]
    if names is None:
        names = [f"v{j}" for j in range(v)]
    if ids is None:
        width = len(str(len(arrays) - 1))
        ids = [f"i{j:0{width}d}" for j in range(len(arrays))]
    series = tuple(
        EmaSeries(pid, np.arange(a.shape[0], dtype=float), a) for pid, a in zip(ids, arrays)
    )
    return EmaDataset(VariableSchema(tuple(names)), series)
