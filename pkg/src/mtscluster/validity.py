"""Cluster validity: silhouette, fuzzy indices, and run-to-run instability.

All indices are computed from precomputed distances, so they apply
unchanged to DTW matrices and to kernel-induced distances. Fuzzy
partitions are hardened (argmax membership) before a silhouette is taken.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations, permutations
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .clustering import FuzzyPartition, HardPartition, derive_seeds, harden
from .distance import DistanceMatrix
from .errors import DegenerateClusteringError, InputError

EXHAUSTIVE_MAX_K = 8
OUTLIER_FACTOR = 3.0


def _dist(dm) -> np.ndarray:
    return np.asarray(dm.d if isinstance(dm, DistanceMatrix) else dm, dtype=float)


@dataclass
class QualityReport:
    """Intrinsic quality of one partition.

    ``pc``, ``pe`` and ``xb`` are only filled in for fuzzy partitions.
    """

    silhouette_mean: float
    silhouette_per_individual: np.ndarray
    k_effective: int
    pc: float | None = None
    pe: float | None = None
    xb: float | None = None

    def to_dict(self) -> dict:
        return {
            "silhouette_mean": self.silhouette_mean,
            "silhouette_per_individual": [float(s) for s in self.silhouette_per_individual],
            "k_effective": self.k_effective,
            "pc": self.pc,
            "pe": self.pe,
            "xb": self.xb,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True)


def silhouette_values(d: np.ndarray, labels: np.ndarray) -> np.ndarray:
    """Per-individual silhouette; members of singleton clusters get 0."""
    d = _dist(d)
    labels = np.asarray(labels)
    n = labels.size
    if d.shape != (n, n):
        raise InputError(f"distance matrix {d.shape} does not match {n} labels")
    clusters = np.unique(labels)
    if clusters.size < 2:
        raise DegenerateClusteringError(
            f"silhouette undefined: only {clusters.size} populated cluster"
        )
    onehot = (labels[:, None] == clusters[None, :]).astype(float)
    sizes = onehot.sum(axis=0)
    sums = d @ onehot  # (n, c): total distance to each cluster
    own = np.searchsorted(clusters, labels)
    idx = np.arange(n)
    own_size = sizes[own]
    a = np.where(own_size > 1, sums[idx, own] / np.maximum(own_size - 1, 1), 0.0)
    means = sums / sizes[None, :]
    means[idx, own] = np.inf
    b = means.min(axis=1)
    denom = np.maximum(a, b)
    s = np.where(denom > 0, (b - a) / np.where(denom > 0, denom, 1.0), 0.0)
    s[own_size == 1] = 0.0
    return s


def silhouette(dm, hp: HardPartition | FuzzyPartition) -> QualityReport:
    """Silhouette of a hard partition (fuzzy ones are hardened first).

    Raises
    ------
    DegenerateClusteringError
        If fewer than two clusters are populated.
    """
    if isinstance(hp, FuzzyPartition):
        hp = harden(hp)
    s = silhouette_values(_dist(dm), hp.labels)
    return QualityReport(float(np.mean(s)), s, hp.k_effective)


def partition_coefficient(fp: FuzzyPartition) -> float:
    """``(1/N) sum u**2``, between ``1/k`` and 1; higher is crisper."""
    u = fp.memberships
    return float(np.sum(u * u) / u.shape[0])


def partition_entropy(fp: FuzzyPartition) -> float:
    """``-(1/N) sum u ln u`` with ``0 ln 0 = 0``; between 0 and ``ln k``."""
    u = fp.memberships
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(u > 0, u * np.log(np.where(u > 0, u, 1.0)), 0.0)
    return float(max(0.0, -terms.sum() / u.shape[0]))


def xie_beni_from_representatives(
    fp: FuzzyPartition, point_rep: np.ndarray, rep_rep: np.ndarray
) -> float:
    """Xie-Beni index from point-to-representative and representative distances.

    ``XB = sum u**m * d(i, rep_c)**2 / (N * min_{c != c'} d(rep_c, rep_c')**2)``.
    """
    u = fp.memberships
    point_rep = np.asarray(point_rep, dtype=float)
    rep_rep = np.asarray(rep_rep, dtype=float)
    k = u.shape[1]
    if point_rep.shape != u.shape or rep_rep.shape != (k, k):
        raise InputError("representative distances do not match the memberships")
    if k < 2:
        raise DegenerateClusteringError("Xie-Beni needs at least two clusters")
    off = rep_rep[~np.eye(k, dtype=bool)]
    sep = float(off.min()) ** 2
    if sep <= 0:
        raise DegenerateClusteringError("degenerate separation: coincident representatives")
    num = float(np.sum(u**fp.m * point_rep**2))
    return num / (u.shape[0] * sep)


def xie_beni(fp: FuzzyPartition, dm, medoids: Sequence[int] | None = None) -> float:
    """Xie-Beni index with individuals as representatives (medoids).

    ``medoids`` defaults to ``fp.representatives``. Scaling every distance
    by a constant leaves the value unchanged.
    """
    d = _dist(dm)
    meds = list(fp.representatives if medoids is None else medoids)
    if len(meds) != fp.k:
        raise InputError(f"expected {fp.k} medoids, got {len(meds)}")
    return xie_beni_from_representatives(fp, d[:, meds], d[np.ix_(meds, meds)])


def fuzzy_xie_beni(fp: FuzzyPartition, dm=None) -> float:
    """XB for either fuzzy engine: medoid-based or barycenter-based."""
    if fp.representatives is not None and dm is not None:
        return xie_beni(fp, dm)
    if fp.rep_distances is None or fp.rep_separation is None:
        raise InputError("partition carries no representative distances")
    return xie_beni_from_representatives(fp, fp.rep_distances, fp.rep_separation)


def evaluate(dm, p: HardPartition | FuzzyPartition) -> QualityReport:
    """Silhouette plus, for fuzzy partitions, PC, PE and XB.

    An XB with coincident representatives is reported as ``nan``.
    """
    rep = silhouette(dm, p)
    if isinstance(p, FuzzyPartition):
        rep.pc = partition_coefficient(p)
        rep.pe = partition_entropy(p)
        try:
            rep.xb = fuzzy_xie_beni(p, dm)
        except DegenerateClusteringError:
            rep.xb = float("nan")
    return rep


# -- instability ------------------------------------------------------------

def _perm_table(k: int) -> np.ndarray:
    return np.array(list(permutations(range(k))), dtype=np.int64)


def label_disagreement(a, b, k: int | None = None, _perms: np.ndarray | None = None) -> float:
    """Fraction of individuals labelled differently after the best relabeling.

    All ``k!`` relabelings are tried for ``k <= 8``; larger ``k`` uses an
    optimal assignment, which gives the same minimum.
    """
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    if a.shape != b.shape:
        raise InputError("labelings have different lengths")
    if k is None:
        k = int(max(a.max(), b.max())) + 1
    conf = np.zeros((k, k))
    np.add.at(conf, (a, b), 1.0)
    if k <= EXHAUSTIVE_MAX_K:
        perms = _perm_table(k) if _perms is None else _perms
        agree = conf[np.arange(k)[None, :], perms].sum(axis=1).max()
    else:
        r, c = linear_sum_assignment(-conf)
        agree = conf[r, c].sum()
    return float(1.0 - agree / a.size)


@dataclass
class StabilityReport:
    """Run-to-run agreement of a seed-sensitive method."""

    instability: float
    n_runs: int
    silhouette_distribution: np.ndarray
    pairwise_disagreements: np.ndarray
    seeds: list[int] = field(default_factory=list)
    outlier_runs: list[int] = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    @property
    def silhouette_iqr(self) -> float:
        s = self.silhouette_distribution[np.isfinite(self.silhouette_distribution)]
        if s.size == 0:
            return float("nan")
        q1, q3 = np.percentile(s, [25, 75])
        return float(q3 - q1)

    def run_contributions(self) -> np.ndarray:
        """Mean disagreement of each run with every other run."""
        p = self.pairwise_disagreements
        n = p.shape[0]
        return p.sum(axis=1) / max(n - 1, 1)

    def to_dict(self) -> dict:
        def num(x):
            return None if not math.isfinite(x) else float(x)

        return {
            "instability": self.instability,
            "n_runs": self.n_runs,
            "silhouette_distribution": [num(s) for s in self.silhouette_distribution],
            "silhouette_iqr": num(self.silhouette_iqr),
            "pairwise_disagreements": self.pairwise_disagreements.tolist(),
            "seeds": list(self.seeds),
            "outlier_runs": list(self.outlier_runs),
            "meta": self.meta,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True)

    def silhouette_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["run_index", "seed", "silhouette"])
        seeds = self.seeds or [""] * self.n_runs
        for i, (seed, s) in enumerate(zip(seeds, self.silhouette_distribution)):
            w.writerow([i, seed, repr(float(s)) if math.isfinite(s) else "nan"])
        return buf.getvalue()


def instability(
    runs: Sequence[HardPartition | FuzzyPartition],
    silhouettes: Sequence[float] | None = None,
    seeds: Sequence[int] | None = None,
) -> StabilityReport:
    """Mean pairwise label disagreement over all pairs of runs.

    Raises
    ------
    InputError
        Fewer than two runs, or runs that differ in N or k.
    """
    hard = [harden(r) if isinstance(r, FuzzyPartition) else r for r in runs]
    if len(hard) < 2:
        raise InputError("instability needs at least two runs")
    n, k = hard[0].n, hard[0].k
    if any(h.n != n or h.k != k for h in hard):
        raise InputError("runs differ in number of individuals or clusters")
    perms = _perm_table(k) if k <= EXHAUSTIVE_MAX_K else None
    r = len(hard)
    pair = np.zeros((r, r))
    for i, j in combinations(range(r), 2):
        pair[i, j] = pair[j, i] = label_disagreement(hard[i].labels, hard[j].labels, k, perms)
    value = float(pair[np.triu_indices(r, 1)].mean())
    sil = np.full(r, np.nan) if silhouettes is None else np.asarray(silhouettes, dtype=float)
    rep = StabilityReport(value, r, sil, pair, list(seeds or []))
    med = float(np.median(pair[np.triu_indices(r, 1)]))
    contrib = rep.run_contributions()
    rep.outlier_runs = [int(i) for i in np.flatnonzero(contrib > OUTLIER_FACTOR * med)]
    return rep


def stability_suite(
    runner: Callable[[int], HardPartition | FuzzyPartition],
    dm,
    n_runs: int = 50,
    master_seed: int = 0,
    n_jobs: int = 1,
) -> StabilityReport:
    """Run a seeded method ``n_runs`` times and report its stability.

    Parameters
    ----------
    runner : callable
        ``runner(seed)`` returns one partition. Each call is a single run,
        not a best-of-restarts result.
    dm : DistanceMatrix or ndarray
        Distances used for the per-run silhouette.
    n_runs : int
    master_seed : int
        Per-run seeds are derived from it, so replicas are reproducible
        whatever ``n_jobs`` is.

    Runs whose partition populates a single cluster get a ``nan``
    silhouette.
    """
    if n_runs < 2:
        raise InputError("n_runs must be at least 2")
    seeds = derive_seeds(master_seed, n_runs)
    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            runs = list(pool.map(runner, seeds))
    else:
        runs = [runner(s) for s in seeds]
    d = _dist(dm)
    sils = []
    for r in runs:
        try:
            sils.append(silhouette(d, r).silhouette_mean)
        except DegenerateClusteringError:
            sils.append(float("nan"))
    rep = instability(runs, sils, seeds)
    rep.meta["master_seed"] = int(master_seed)
    rep.meta["k_effective"] = [
        (harden(r) if isinstance(r, FuzzyPartition) else r).k_effective for r in runs
    ]
    return rep
