"""Hard and fuzzy clustering engines.

Six engines share one configuration object and return either a
:class:`HardPartition` or a :class:`FuzzyPartition`:

* :func:`kmeans_dtw` - Lloyd iterations with DBA barycenters
* :func:`kernel_kmeans` - k-means in the feature space of a Gram matrix
* :func:`hierarchical` - agglomerative clustering on a distance matrix
* :func:`fuzzy_cmeans_dtw` - fuzzy c-means with weighted DBA barycenters
* :func:`fuzzy_kmedoids` - fuzzy c-means restricted to medoids

Every iterative engine records its objective after each iteration and
checks that the trace never increases.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .data import EmaDataset
from .dba import DBA_ITERATIONS, dba, resample
from .distance import DEFAULT_DTW, DistanceMatrix, DtwConfig, as_matrix, distance_matrix, dtw
from .errors import InputError, NumericalError
from .kernel import KernelMatrix

LINKAGES = ("average", "complete", "single")
INITS = ("random-partition", "kmeans++")
MONOTONE_SLACK = 1e-9


@dataclass(frozen=True)
class ClusterConfig:
    k: int
    max_iter: int = 100
    tol: float = 1e-6
    seed: int = 0
    m: float = 2.0
    linkage: str = "average"
    init: str = "random-partition"

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 1:
            raise InputError("k must be a positive integer")
        if not self.m > 1:
            raise InputError("fuzzifier m must exceed 1")
        if not self.tol > 0:
            raise InputError("tol must be positive")
        if self.max_iter < 1:
            raise InputError("max_iter must be at least 1")
        if self.linkage not in LINKAGES:
            raise InputError(f"linkage must be one of {LINKAGES}")
        if self.init not in INITS:
            raise InputError(f"init must be one of {INITS}")

    def with_seed(self, seed: int) -> "ClusterConfig":
        return ClusterConfig(self.k, self.max_iter, self.tol, int(seed), self.m,
                             self.linkage, self.init)

    def to_dict(self) -> dict:
        return {"k": self.k, "max_iter": self.max_iter, "tol": self.tol, "seed": self.seed,
                "m": self.m, "linkage": self.linkage, "init": self.init}


def _jsonable(x):
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    return x


@dataclass
class HardPartition:
    labels: np.ndarray
    k: int
    representatives: list | None = None
    objective: float = 0.0
    n_iter: int = 0
    converged: bool = True
    trace: list[float] = field(default_factory=list)
    seed: int | None = None
    barycenters: list[np.ndarray] | None = None

    def __post_init__(self):
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.labels.size and (self.labels.min() < 0 or self.labels.max() >= self.k):
            raise InputError("cluster label out of range")

    @property
    def n(self) -> int:
        return self.labels.size

    @property
    def sizes(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.k)

    @property
    def empty_clusters(self) -> list[int]:
        return [int(c) for c in np.flatnonzero(self.sizes == 0)]

    @property
    def k_effective(self) -> int:
        return int(np.count_nonzero(self.sizes))

    def to_dict(self) -> dict:
        out = {
            "kind": "hard",
            "k": self.k,
            "k_effective": self.k_effective,
            "labels": self.labels,
            "empty_clusters": self.empty_clusters,
            "representatives": self.representatives,
            "objective": self.objective,
            "objective_trace": self.trace,
            "n_iter": self.n_iter,
            "converged": self.converged,
            "seed": self.seed,
        }
        if self.barycenters is not None:
            out["barycenters"] = self.barycenters
        return _jsonable(out)


@dataclass
class FuzzyPartition:
    memberships: np.ndarray
    m: float
    objective: float = 0.0
    n_iter: int = 0
    converged: bool = True
    trace: list[float] = field(default_factory=list)
    seed: int | None = None
    representatives: list[int] | None = None
    rep_distances: np.ndarray | None = None
    rep_separation: np.ndarray | None = None
    barycenters: list[np.ndarray] | None = None

    def __post_init__(self):
        u = np.asarray(self.memberships, dtype=float)
        if u.ndim != 2:
            raise InputError("memberships must be an N x k matrix")
        if np.any(u < 0) or np.any(u > 1):
            raise InputError("memberships must lie in [0, 1]")
        if np.any(np.abs(u.sum(axis=1) - 1.0) > 1e-9):
            raise InputError("membership rows must sum to 1")
        self.memberships = u

    @property
    def k(self) -> int:
        return self.memberships.shape[1]

    @property
    def n(self) -> int:
        return self.memberships.shape[0]

    @property
    def duplicate_representatives(self) -> list[int]:
        """Clusters whose medoid repeats a lower-indexed cluster's medoid."""
        if self.representatives is None:
            return []
        seen, dup = set(), []
        for c, r in enumerate(self.representatives):
            if r in seen:
                dup.append(c)
            seen.add(r)
        return dup

    def to_dict(self) -> dict:
        hp = harden(self)
        out = {
            "kind": "fuzzy",
            "k": self.k,
            "m": self.m,
            "memberships": self.memberships,
            "hardened_labels": hp.labels,
            "k_effective": hp.k_effective,
            "empty_clusters": hp.empty_clusters,
            "duplicate_representatives": self.duplicate_representatives,
            "representatives": self.representatives,
            "objective": self.objective,
            "objective_trace": self.trace,
            "n_iter": self.n_iter,
            "converged": self.converged,
            "seed": self.seed,
        }
        if self.barycenters is not None:
            out["barycenters"] = self.barycenters
        return _jsonable(out)


def partition_to_json(p, **extra) -> str:
    obj = p.to_dict()
    obj.update(_jsonable(extra))
    return json.dumps(obj, indent=1, sort_keys=True)


def harden(fp: FuzzyPartition) -> HardPartition:
    """Argmax membership per row; ties go to the lowest cluster index."""
    labels = np.argmax(fp.memberships, axis=1)
    return HardPartition(
        labels, fp.k, representatives=fp.representatives, objective=fp.objective,
        n_iter=fp.n_iter, converged=fp.converged, trace=list(fp.trace), seed=fp.seed,
    )


# -- shared helpers ---------------------------------------------------------

def derive_seeds(master_seed: int, n: int) -> list[int]:
    """Independent per-run seeds derived from one master seed."""
    children = np.random.SeedSequence(int(master_seed)).spawn(n)
    return [int(c.generate_state(1, dtype=np.uint32)[0]) for c in children]


def _check_k(k: int, n: int) -> None:
    if k > n:
        raise InputError(f"k={k} exceeds the number of individuals ({n})")


def _check_trace(trace: Sequence[float], name: str) -> None:
    for a, b in zip(trace, trace[1:]):
        if b > a + MONOTONE_SLACK:
            raise NumericalError(f"{name}: objective increased from {a!r} to {b!r}")


def _relative_change(prev: float, cur: float) -> float:
    return (prev - cur) / max(1.0, abs(prev))


def random_partition(n: int, k: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform random labels with every cluster guaranteed non-empty."""
    labels = rng.integers(0, k, size=n)
    labels[rng.permutation(n)[:k]] = np.arange(k)
    return labels


def kmeanspp_seeds(sqdist: np.ndarray, k: int, rng: np.random.Generator) -> list[int]:
    """Distance-proportional seeding on a matrix of squared distances."""
    n = sqdist.shape[0]
    seeds = [int(rng.integers(n))]
    closest = sqdist[seeds[0]].copy()
    for _ in range(1, k):
        total = closest.sum()
        if total <= 0:
            rest = [i for i in range(n) if i not in seeds]
            seeds.append(int(rng.choice(rest)))
        else:
            seeds.append(int(rng.choice(n, p=closest / total)))
        closest = np.minimum(closest, sqdist[seeds[-1]])
    return seeds


def fuzzy_memberships(dist: np.ndarray, m: float) -> np.ndarray:
    """FCM membership update from point-to-representative distances.

    ``u[i, c] = 1 / sum_c' (d[i, c] / d[i, c']) ** (2 / (m - 1))``. A zero
    distance gives that cluster membership 1; a row with zero distance to
    several (coincident) representatives splits it equally among them,
    which is the limit of the formula. Computed as a softmax of
    ``-p * log d`` for stability.
    """
    dist = np.asarray(dist, dtype=float)
    n, k = dist.shape
    u = np.zeros((n, k))
    zero = dist <= 0.0
    hit = zero.any(axis=1)
    if hit.any():
        z = zero[hit].astype(float)
        u[hit] = z / z.sum(axis=1, keepdims=True)
    rest = ~hit
    if rest.any():
        logits = -(2.0 / (m - 1.0)) * np.log(dist[rest])
        logits -= logits.max(axis=1, keepdims=True)
        e = np.exp(logits)
        u[rest] = e / e.sum(axis=1, keepdims=True)
    return u


def fuzzy_objective(u: np.ndarray, dist: np.ndarray, m: float) -> float:
    """``sum_i sum_c u[i, c]**m * d[i, c]**2``."""
    return float(np.sum(np.asarray(u) ** m * np.asarray(dist) ** 2))


def _medoid(d: np.ndarray, members: np.ndarray) -> int:
    sub = d[np.ix_(members, members)]
    return int(members[np.argmin(sub.sum(axis=1))])


# -- k-means with DTW and DBA ----------------------------------------------

def _dtw_table(arrays, bary, cfg) -> np.ndarray:
    return np.array([[dtw(x, b, cfg) for b in bary] for x in arrays])


def _initial_labels(dm: np.ndarray, ccfg: ClusterConfig, rng, sq: bool) -> np.ndarray:
    n = dm.shape[0]
    if ccfg.init == "random-partition":
        return random_partition(n, ccfg.k, rng)
    sqd = dm**2 if sq else dm
    seeds = kmeanspp_seeds(sqd, ccfg.k, rng)
    labels = np.argmin(dm[:, seeds], axis=1)
    labels[seeds] = np.arange(ccfg.k)
    return labels


def _start_barycenter(arrays, members, dm, cfg, weights=None):
    med = _medoid(dm, members)
    length = int(np.median([arrays[i].shape[0] for i in members]))
    start = resample(arrays[med], length)
    if cfg.band_radius is not None:
        start = arrays[med]
    return dba([arrays[i] for i in members], start,
               None if weights is None else weights[members], DBA_ITERATIONS, cfg)


def kmeans_dtw(
    ds: EmaDataset,
    dcfg: DtwConfig = DEFAULT_DTW,
    ccfg: ClusterConfig | None = None,
    dm: DistanceMatrix | None = None,
) -> HardPartition:
    """k-means under DTW with DBA barycenters.

    Barycenters start at the cluster medoid resampled to the cluster's
    median length, then get ``DBA_ITERATIONS`` averaging updates per outer
    iteration, warm-started from the previous barycenter. A cluster that
    empties is reseeded with the series farthest from its own barycenter.
    Stops when the relative objective change drops below ``tol``.

    ``dm`` is an optional precomputed DTW matrix used for medoids and
    seeding.
    """
    if ccfg is None:
        raise InputError("a ClusterConfig is required")
    ds.require_complete()
    arrays = [as_matrix(s) for s in ds.series]
    n, k = len(arrays), ccfg.k
    _check_k(k, n)
    d = (dm if dm is not None else distance_matrix(ds, dcfg)).d
    rng = np.random.default_rng(ccfg.seed)
    labels = _initial_labels(d, ccfg, rng, sq=False)

    bary: list[np.ndarray] = []
    total = 0.0
    for c in range(k):
        b, dists, cost = _start_barycenter(arrays, np.flatnonzero(labels == c), d, dcfg)
        bary.append(b)
        total += cost
    trace = [total]
    converged = False
    it = 0
    for it in range(1, ccfg.max_iter + 1):
        table = _dtw_table(arrays, bary, dcfg)
        labels = np.argmin(table, axis=1)
        own = table[np.arange(n), labels]
        for c in range(k):
            sizes = np.bincount(labels, minlength=k)
            if sizes[c]:
                continue
            movable = sizes[labels] > 1
            i = int(np.argmax(np.where(movable, own, -np.inf)))
            labels[i] = c
            bary[c] = arrays[i].copy()
            own[i] = 0.0
        total = 0.0
        for c in range(k):
            members = np.flatnonzero(labels == c)
            b, dists, cost = dba([arrays[i] for i in members], bary[c], None,
                                 DBA_ITERATIONS, dcfg)
            bary[c] = b
            total += cost
        trace.append(total)
        if _relative_change(trace[-2], trace[-1]) < ccfg.tol:
            converged = True
            break
    _check_trace(trace, "kmeans_dtw")
    reps = [int(np.flatnonzero(labels == c)[np.argmin(
        [dtw(arrays[i], bary[c], dcfg) for i in np.flatnonzero(labels == c)])]) for c in range(k)]
    return HardPartition(labels, k, representatives=reps, objective=trace[-1], n_iter=it,
                         converged=converged, trace=trace, seed=ccfg.seed, barycenters=bary)


def kmeans_dtw_objective(ds: EmaDataset, labels: np.ndarray, barycenters, dcfg=DEFAULT_DTW) -> float:
    return float(sum(dtw(s, barycenters[c], dcfg) for s, c in zip(ds.series, labels)))


# -- kernel k-means ---------------------------------------------------------

def _gram(km) -> np.ndarray:
    return np.asarray(km.k if isinstance(km, KernelMatrix) else km, dtype=float)


def feature_sqdist(k: np.ndarray, labels: np.ndarray, n_clusters: int) -> np.ndarray:
    """Squared feature-space distance of every point to every cluster mean.

    Empty clusters get ``inf``.
    """
    n = k.shape[0]
    out = np.full((n, n_clusters), np.inf)
    diag = np.diag(k)
    for c in range(n_clusters):
        mask = labels == c
        size = mask.sum()
        if size == 0:
            continue
        out[:, c] = (diag - 2.0 * k[:, mask].sum(axis=1) / size
                     + k[np.ix_(mask, mask)].sum() / size**2)
    return np.maximum(out, 0.0)


def kernel_kmeans_objective(km, labels: np.ndarray) -> float:
    """Sum of squared feature-space distances to own cluster means."""
    k = _gram(km)
    labels = np.asarray(labels)
    n_clusters = int(labels.max()) + 1
    d2 = feature_sqdist(k, labels, n_clusters)
    return float(d2[np.arange(k.shape[0]), labels].sum())


def kernel_kmeans(km, ccfg: ClusterConfig, init_labels: np.ndarray | None = None) -> HardPartition:
    """k-means on implicit feature-space centroids of a Gram matrix.

    ``d2(i, C) = k_ii - 2/|C| sum_{j in C} k_ij + 1/|C|^2 sum_{j,l in C} k_jl``.
    Pass ``init_labels`` to bypass the configured initialisation.
    """
    k = _gram(km)
    n = k.shape[0]
    nc = ccfg.k
    _check_k(nc, n)
    rng = np.random.default_rng(ccfg.seed)
    if init_labels is not None:
        labels = np.asarray(init_labels, dtype=np.int64).copy()
    elif ccfg.init == "random-partition":
        labels = random_partition(n, nc, rng)
    else:
        diag = np.diag(k)
        sq = np.maximum(diag[:, None] + diag[None, :] - 2 * k, 0.0)
        seeds = kmeanspp_seeds(sq, nc, rng)
        labels = np.argmin(sq[:, seeds], axis=1)
        labels[seeds] = np.arange(nc)
    idx = np.arange(n)
    trace = [float(feature_sqdist(k, labels, nc)[idx, labels].sum())]
    converged = False
    it = 0
    for it in range(1, ccfg.max_iter + 1):
        d2 = feature_sqdist(k, labels, nc)
        new = np.argmin(d2, axis=1)
        own = d2[idx, new]
        for c in range(nc):
            sizes = np.bincount(new, minlength=nc)
            if sizes[c]:
                continue
            movable = sizes[new] > 1
            i = int(np.argmax(np.where(movable, own, -np.inf)))
            new[i] = c
            own[i] = 0.0
        trace.append(float(feature_sqdist(k, new, nc)[idx, new].sum()))
        stable = np.array_equal(new, labels)
        labels = new
        if stable or _relative_change(trace[-2], trace[-1]) < ccfg.tol:
            converged = True
            break
    _check_trace(trace, "kernel_kmeans")
    d2 = feature_sqdist(k, labels, nc)
    reps = []
    for c in range(nc):
        members = np.flatnonzero(labels == c)
        reps.append(int(members[np.argmin(d2[members, c])]) if members.size else None)
    return HardPartition(labels, nc, representatives=reps, objective=trace[-1], n_iter=it,
                         converged=converged, trace=trace, seed=ccfg.seed)


# -- agglomerative ----------------------------------------------------------

def _as_dist(dm) -> np.ndarray:
    return np.asarray(dm.d if isinstance(dm, DistanceMatrix) else dm, dtype=float)


def hierarchical(dm, ccfg: ClusterConfig) -> HardPartition:
    """Agglomerative clustering cut at exactly ``k`` clusters.

    Lance-Williams updates for average, complete, or single linkage. Each
    cluster is indexed by its smallest member; among equally close pairs the
    lexicographically smallest ``(a, b)`` merges first. Labels are numbered
    by smallest member. No randomness is involved.
    """
    d = _as_dist(dm)
    n = d.shape[0]
    _check_k(ccfg.k, n)
    dc = d.copy()
    np.fill_diagonal(dc, np.inf)
    size = np.ones(n)
    active = np.ones(n, dtype=bool)
    owner = np.arange(n)
    heights = []
    iu = np.triu_indices(n, 1)
    for _ in range(n - ccfg.k):
        vals = np.where(active[iu[0]] & active[iu[1]], dc[iu], np.inf)
        p = int(np.argmin(vals))
        a, b = int(iu[0][p]), int(iu[1][p])
        heights.append(float(vals[p]))
        na, nb = size[a], size[b]
        if ccfg.linkage == "average":
            row = (na * dc[a] + nb * dc[b]) / (na + nb)
        elif ccfg.linkage == "complete":
            row = np.maximum(dc[a], dc[b])
        else:
            row = np.minimum(dc[a], dc[b])
        dc[a, :] = row
        dc[:, a] = row
        dc[a, a] = np.inf
        dc[b, :] = np.inf
        dc[:, b] = np.inf
        active[b] = False
        size[a] = na + nb
        owner[owner == b] = a
    slots = np.flatnonzero(active)
    labels = np.searchsorted(slots, owner)
    reps = [_medoid(d, np.flatnonzero(labels == c)) for c in range(ccfg.k)]
    objective = float(sum(d[i, reps[c]] for i, c in enumerate(labels)))
    return HardPartition(labels, ccfg.k, representatives=reps, objective=objective,
                         n_iter=n - ccfg.k, converged=True, trace=heights)


# -- fuzzy c-means with DTW -------------------------------------------------

def fuzzy_cmeans_dtw(
    ds: EmaDataset,
    dcfg: DtwConfig = DEFAULT_DTW,
    ccfg: ClusterConfig | None = None,
    dm: DistanceMatrix | None = None,
) -> FuzzyPartition:
    """Fuzzy c-means with DTW to DBA barycenters.

    Memberships follow the standard FCM update; barycenters are refreshed
    by DBA with weights ``u**m``, keeping the best iterate under the FCM
    objective ``sum u**m * dtw**2``. Starts from a random crisp partition.
    """
    if ccfg is None:
        raise InputError("a ClusterConfig is required")
    ds.require_complete()
    arrays = [as_matrix(s) for s in ds.series]
    n, k, m = len(arrays), ccfg.k, ccfg.m
    _check_k(k, n)
    d = (dm if dm is not None else distance_matrix(ds, dcfg)).d
    rng = np.random.default_rng(ccfg.seed)
    labels = _initial_labels(d, ccfg, rng, sq=False)
    bary = [_start_barycenter(arrays, np.flatnonzero(labels == c), d, dcfg)[0] for c in range(k)]
    table = _dtw_table(arrays, bary, dcfg)

    trace: list[float] = []
    converged = False
    it = 0
    for it in range(1, ccfg.max_iter + 1):
        u = fuzzy_memberships(table, m)
        trace.append(fuzzy_objective(u, table, m))
        if len(trace) > 1 and _relative_change(trace[-2], trace[-1]) < ccfg.tol:
            converged = True
            break
        w = u**m
        for c in range(k):
            b, dists, _ = dba(arrays, bary[c], w[:, c], DBA_ITERATIONS, dcfg, power=2)
            bary[c] = b
            table[:, c] = dists
        # try to revive clusters left empty after hardening
        hard = np.argmax(fuzzy_memberships(table, m), axis=1)
        for c in range(k):
            if np.any(hard == c):
                continue
            own = table[np.arange(n), hard]
            i = int(np.argmax(own))
            trial = table.copy()
            trial[:, c] = [dtw(x, arrays[i], dcfg) for x in arrays]
            cur = fuzzy_objective(fuzzy_memberships(table, m), table, m)
            new = fuzzy_objective(fuzzy_memberships(trial, m), trial, m)
            if new <= cur:
                bary[c] = arrays[i].copy()
                table = trial
                hard = np.argmax(fuzzy_memberships(table, m), axis=1)
    if not converged:
        u = fuzzy_memberships(table, m)
        trace.append(fuzzy_objective(u, table, m))
    _check_trace(trace, "fuzzy_cmeans_dtw")
    sep = np.array([[dtw(a, b, dcfg) if i != j else 0.0 for j, b in enumerate(bary)]
                    for i, a in enumerate(bary)])
    sep = np.maximum(sep, sep.T)
    return FuzzyPartition(u, m, objective=trace[-1], n_iter=it, converged=converged,
                          trace=trace, seed=ccfg.seed, rep_distances=table.copy(),
                          rep_separation=sep, barycenters=bary)


# -- fuzzy k-medoids --------------------------------------------------------

def _medoid_update(d2: np.ndarray, w: np.ndarray, current: list[int]) -> list[int]:
    cost = w.T @ d2  # (k, n): cost[c, j] = sum_i w[i, c] * d2[i, j]
    out = []
    for c, cur in enumerate(current):
        best = int(np.argmin(cost[c]))
        out.append(cur if cost[c, cur] <= cost[c, best] else best)
    return out


def fuzzy_kmedoids(dm, ccfg: ClusterConfig) -> FuzzyPartition:
    """Fuzzy k-medoids on a precomputed distance matrix.

    Memberships use the FCM update with ``d(i, c) = dm[i, medoid_c]``;
    each medoid moves to ``argmin_j sum_i u[i, c]**m * dm[i, j]**2``.
    Random-partition initialisation treats the random labels as crisp
    memberships and applies the medoid step, so two clusters may start on
    (and keep) the same medoid. Such clusters are not repaired: the
    duplicate loses every hardening tie and shows up as empty.
    """
    d = _as_dist(dm)
    n, k, m = d.shape[0], ccfg.k, ccfg.m
    _check_k(k, n)
    d2 = d**2
    rng = np.random.default_rng(ccfg.seed)
    if ccfg.init == "random-partition":
        labels = random_partition(n, k, rng)
        crisp = np.eye(k)[labels]
        medoids = [int(np.argmin(crisp[:, c] @ d2)) for c in range(k)]
    else:
        medoids = kmeanspp_seeds(d2, k, rng)
    trace: list[float] = []
    converged = False
    it = 0
    for it in range(1, ccfg.max_iter + 1):
        dist = d[:, medoids]
        u = fuzzy_memberships(dist, m)
        trace.append(fuzzy_objective(u, dist, m))
        new = _medoid_update(d2, u**m, medoids)
        if new == medoids:
            converged = True
            break
        if len(trace) > 1 and _relative_change(trace[-2], trace[-1]) < ccfg.tol:
            converged = True
            break
        medoids = new
    _check_trace(trace, "fuzzy_kmedoids")
    dist = d[:, medoids]
    u = fuzzy_memberships(dist, m)
    return FuzzyPartition(u, m, objective=fuzzy_objective(u, dist, m), n_iter=it,
                          converged=converged, trace=trace, seed=ccfg.seed,
                          representatives=[int(x) for x in medoids], rep_distances=dist,
                          rep_separation=d[np.ix_(medoids, medoids)])


# -- restarts ---------------------------------------------------------------

def best_of_restarts(
    engine: Callable[[int], HardPartition | FuzzyPartition],
    n_restarts: int,
    master_seed: int,
) -> tuple[HardPartition | FuzzyPartition, list]:
    """Run ``engine(seed)`` for derived seeds; keep the lowest objective.

    Ties keep the earliest run. Returns the winner and all runs.
    """
    runs = [engine(s) for s in derive_seeds(master_seed, n_restarts)]
    best = min(range(len(runs)), key=lambda i: (runs[i].objective, i))
    return runs[best], runs
