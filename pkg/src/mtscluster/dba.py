"""DTW Barycenter Averaging.

Each iteration aligns every member to the current barycenter and replaces
each barycenter frame by the (weighted) mean of the member frames warped
onto it. The iterate with the lowest cost is returned, so a call never
makes the barycenter worse than its starting point.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .distance import DEFAULT_DTW, DtwConfig, dtw

DBA_ITERATIONS = 10


def resample(a: np.ndarray, length: int) -> np.ndarray:
    """Linearly resample a ``T x V`` series onto ``length`` frames."""
    t = a.shape[0]
    if t == length:
        return np.array(a, dtype=float)
    src = np.linspace(0.0, 1.0, t)
    dst = np.linspace(0.0, 1.0, length)
    return np.column_stack([np.interp(dst, src, a[:, v]) for v in range(a.shape[1])])


def weighted_cost(dists: np.ndarray, weights: np.ndarray, power: int) -> float:
    return float(np.dot(weights, dists**power))


def dba(
    series: Sequence[np.ndarray],
    init: np.ndarray,
    weights: np.ndarray | None = None,
    n_iter: int = DBA_ITERATIONS,
    cfg: DtwConfig = DEFAULT_DTW,
    power: int = 1,
) -> tuple[np.ndarray, np.ndarray, float]:
    """Refine a barycenter of ``series`` starting from ``init``.

    Parameters
    ----------
    series : list of (T_i, V) arrays
    init : (L, V) array
        Starting barycenter; its length is kept.
    weights : (n,) array, optional
        Per-series averaging weights (membership degrees for fuzzy
        clustering). Defaults to ones.
    n_iter : int
        Number of averaging updates.
    power : {1, 2}
        The cost tracked to pick the best iterate is
        ``sum_i weights[i] * dtw(series[i], b) ** power``.

    Returns
    -------
    barycenter : (L, V) array
    dists : (n,) array
        DTW of each series to the returned barycenter.
    cost : float
    """
    w = np.ones(len(series)) if weights is None else np.asarray(weights, dtype=float)
    b = np.array(init, dtype=float)
    best = None
    for it in range(n_iter + 1):
        sums = np.zeros_like(b)
        counts = np.zeros(b.shape[0])
        dists = np.empty(len(series))
        for i, x in enumerate(series):
            d, path = dtw(x, b, cfg, return_path=True)
            dists[i] = d
            if it < n_iter and w[i] > 0:
                np.add.at(sums, path[:, 1], w[i] * x[path[:, 0]])
                np.add.at(counts, path[:, 1], w[i])
        cost = weighted_cost(dists, w, power)
        if best is None or cost < best[2]:
            best = (b, dists, cost)
        if it == n_iter or cost == 0.0 or not np.all(counts > 0):
            break
        b = sums / counts[:, None]
    return best
