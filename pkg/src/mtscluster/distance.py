"""Multivariate DTW, soft-DTW, and pairwise distance matrices.

DTW here is the dependent variant: one warping path is shared by every
variable, and the local cost between two rows is their squared Euclidean
distance (or plain Euclidean via :class:`DtwConfig`). The reported value is
the raw accumulated cost, with no square root and no path-length scaling.
"""

from __future__ import annotations

import csv
import io
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import combinations
from typing import Callable, Sequence

import numpy as np

from . import _backend
from .data import EmaDataset, EmaSeries
from .errors import InputError

LOCAL_COSTS = ("squared-euclidean", "euclidean")
METRIC_TAGS = ("dtw", "softdtw", "kernel-induced")


@dataclass(frozen=True)
class DtwConfig:
    """Warping constraints.

    ``band_radius`` is the Sakoe-Chiba half-width in samples; ``None``
    leaves the warping unconstrained.
    """

    band_radius: int | None = None
    local_cost: str = "squared-euclidean"

    def __post_init__(self):
        if self.band_radius is not None:
            if int(self.band_radius) != self.band_radius or self.band_radius < 0:
                raise InputError("band_radius must be a non-negative integer")
            object.__setattr__(self, "band_radius", int(self.band_radius))
        if self.local_cost not in LOCAL_COSTS:
            raise InputError(f"local_cost must be one of {LOCAL_COSTS}")

    @property
    def squared(self) -> bool:
        return self.local_cost == "squared-euclidean"


DEFAULT_DTW = DtwConfig()


def as_matrix(x) -> np.ndarray:
    """Return a C-contiguous float64 ``T x V`` view of a series or array."""
    if isinstance(x, EmaSeries):
        a = x.values
    else:
        a = np.asarray(x, dtype=float)
        if a.ndim == 1:
            a = a[:, None]
    if a.ndim != 2:
        raise InputError("a series must be a T x V matrix")
    if a.shape[0] == 0:
        raise InputError("empty series")
    if np.isnan(a).any():
        raise InputError("series has missing cells; repair before computing distances")
    return np.ascontiguousarray(a, dtype=np.float64)


def check_pair(x, y, band_radius: int | None) -> tuple[np.ndarray, np.ndarray, int]:
    x, y = as_matrix(x), as_matrix(y)
    if x.shape[1] != y.shape[1]:
        raise InputError(f"variable count mismatch: {x.shape[1]} vs {y.shape[1]}")
    if band_radius is None:
        return x, y, -1
    if band_radius < abs(x.shape[0] - y.shape[0]):
        raise InputError(
            f"band_radius {band_radius} too narrow for lengths "
            f"{x.shape[0]} and {y.shape[0]}"
        )
    return x, y, int(band_radius)


def dtw(x, y, cfg: DtwConfig = DEFAULT_DTW, return_path: bool = False):
    """Dynamic time warping cost between two multivariate series.

    Parameters
    ----------
    x, y : EmaSeries or array_like, shape (T, V)
        Missing-free series with the same number of variables. Lengths may
        differ.
    cfg : DtwConfig
        Band constraint and local cost.
    return_path : bool
        Also return the optimal alignment as an ``(L, 2)`` array of index
        pairs. Ties prefer the diagonal, then vertical, then horizontal
        predecessor, so the path is deterministic.

    Returns
    -------
    float or (float, ndarray)
    """
    x, y, band = check_pair(x, y, cfg.band_radius)
    k = _backend.kernels
    if return_path:
        cost, path = k.dtw_path(x, y, band, cfg.squared)
        return float(cost), path
    return float(k.dtw_distance(x, y, band, cfg.squared))


def softdtw(x, y, gamma: float = 1.0, cfg: DtwConfig = DEFAULT_DTW) -> float:
    """Soft-DTW value with smoothing ``gamma`` (log-sum-exp soft minimum).

    Tends to :func:`dtw` as ``gamma`` goes to zero and never exceeds it.
    """
    if not gamma > 0:
        raise InputError("gamma must be positive")
    x, y, band = check_pair(x, y, cfg.band_radius)
    return float(_backend.kernels.softdtw(x, y, float(gamma), band, cfg.squared))


@dataclass(frozen=True, eq=False)
class DistanceMatrix:
    """Symmetric pairwise distances with a zero diagonal.

    Entries are non-negative except for ``metric_tag == "softdtw"``, where
    off-diagonal soft-DTW values may be negative.
    """

    ids: tuple[str, ...]
    d: np.ndarray
    metric_tag: str = "dtw"
    meta: dict | None = None

    def __post_init__(self):
        d = np.array(self.d, dtype=float, copy=True)
        d.setflags(write=False)
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "ids", tuple(str(i) for i in self.ids))
        if self.metric_tag not in METRIC_TAGS:
            raise InputError(f"unknown metric tag {self.metric_tag!r}")
        n = len(self.ids)
        if d.shape != (n, n):
            raise InputError(f"distance matrix shape {d.shape} does not match {n} ids")
        if not np.all(np.isfinite(d)):
            raise InputError("distance matrix has non-finite entries")
        if not np.array_equal(d, d.T):
            raise InputError("distance matrix is not symmetric")
        if np.any(np.diag(d) != 0):
            raise InputError("distance matrix diagonal must be zero")
        if self.metric_tag != "softdtw" and np.any(d < 0):
            raise InputError("distance matrix has negative entries")

    @property
    def n(self) -> int:
        return len(self.ids)

    def scaled(self, factor: float) -> "DistanceMatrix":
        return DistanceMatrix(self.ids, self.d * factor, self.metric_tag, self.meta)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.ids)
        for row in self.d:
            w.writerow([repr(float(v)) for v in row])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, metric_tag: str = "dtw") -> "DistanceMatrix":
        rows = list(csv.reader(io.StringIO(text)))
        ids, body = rows[0], rows[1:]
        return cls(tuple(ids), np.array(body, dtype=float), metric_tag)

    def to_dict(self) -> dict:
        return {
            "metric_tag": self.metric_tag,
            "n": self.n,
            "ids": list(self.ids),
            "d": self.d.tolist(),
            "meta": self.meta or {},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "DistanceMatrix":
        obj = json.loads(text)
        return cls(tuple(obj["ids"]), np.array(obj["d"], dtype=float),
                   obj["metric_tag"], obj.get("meta") or None)


def pairwise(
    items: Sequence[np.ndarray],
    fn: Callable[[np.ndarray, np.ndarray], float],
    n_jobs: int = 1,
    diagonal: bool = False,
) -> np.ndarray:
    """Fill a symmetric matrix ``out[i, j] = fn(items[i], items[j])``.

    Pairs are independent, so they are spread over threads (the compiled
    kernels release the GIL). Output does not depend on ``n_jobs``.
    """
    n = len(items)
    pairs = list(combinations(range(n), 2))
    if diagonal:
        pairs = [(i, i) for i in range(n)] + pairs
    if n_jobs is None or n_jobs < 1:
        import os

        n_jobs = os.cpu_count() or 1
    if n_jobs == 1:
        vals = [fn(items[i], items[j]) for i, j in pairs]
    else:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            vals = list(pool.map(lambda p: fn(items[p[0]], items[p[1]]), pairs))
    out = np.zeros((n, n))
    for (i, j), v in zip(pairs, vals):
        out[i, j] = out[j, i] = v
    return out


def distance_matrix(
    ds: EmaDataset,
    cfg: DtwConfig = DEFAULT_DTW,
    metric: str = "dtw",
    gamma: float = 1.0,
    n_jobs: int = 1,
) -> DistanceMatrix:
    """All pairwise DTW (or soft-DTW) values of a missing-free cohort.

    For ``metric="softdtw"`` the diagonal is set to zero by convention
    rather than to ``softdtw(x, x)``.
    """
    ds.require_complete()
    arrays = [as_matrix(s) for s in ds.series]
    if cfg.band_radius is not None:
        spread = max(a.shape[0] for a in arrays) - min(a.shape[0] for a in arrays)
        if cfg.band_radius < spread:
            raise InputError(
                f"band_radius {cfg.band_radius} below the cohort length spread {spread}"
            )
    if metric == "dtw":
        fn = lambda a, b: dtw(a, b, cfg)  # noqa: E731
    elif metric == "softdtw":
        fn = lambda a, b: softdtw(a, b, gamma, cfg)  # noqa: E731
    else:
        raise InputError(f"unknown metric {metric!r}")
    d = pairwise(arrays, fn, n_jobs=n_jobs)
    meta = {"band_radius": cfg.band_radius, "local_cost": cfg.local_cost}
    if metric == "softdtw":
        meta["gamma"] = gamma
    return DistanceMatrix(tuple(ds.ids), d, metric, meta)
