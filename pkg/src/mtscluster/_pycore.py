"""Pure-Python versions of the dynamic-programming kernels.

Used when the compiled ``_core`` extension is unavailable or when
``MTSCLUSTER_PURE_PYTHON`` is set. Local costs are vectorised with numpy;
the recurrences themselves are plain loops.
"""

from __future__ import annotations

import math

import numpy as np

INF = math.inf


def _sqdist(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    diff = x[:, None, :] - y[None, :, :]
    return np.einsum("ijk,ijk->ij", diff, diff)


def _local(x, y, squared):
    c = _sqdist(x, y)
    return c if squared else np.sqrt(c)


def _bounds(i, m, band):
    # 1-based inclusive column range for padded row i
    if band < 0:
        return 1, m
    return max(1, i - band), min(m, i + band)


def _dtw_fill(x, y, band, squared):
    n, m = x.shape[0], y.shape[0]
    cost = _local(x, y, squared).tolist()
    acc = [[INF] * (m + 1) for _ in range(n + 1)]
    acc[0][0] = 0.0
    for i in range(1, n + 1):
        lo, hi = _bounds(i, m, band)
        prev, cur, ci = acc[i - 1], acc[i], cost[i - 1]
        for j in range(lo, hi + 1):
            a, b, c = prev[j - 1], prev[j], cur[j - 1]
            if b < a:
                a = b
            if c < a:
                a = c
            cur[j] = ci[j - 1] + a
    return acc


def dtw_distance(x, y, band, squared):
    return _dtw_fill(x, y, band, squared)[-1][-1]


def dtw_path(x, y, band, squared):
    acc = _dtw_fill(x, y, band, squared)
    i, j = x.shape[0], y.shape[0]
    path = []
    while True:
        path.append((i - 1, j - 1))
        if i == 1 and j == 1:
            break
        dg, vt, hz = acc[i - 1][j - 1], acc[i - 1][j], acc[i][j - 1]
        # tie order: diagonal, vertical, horizontal
        if dg <= vt and dg <= hz:
            i, j = i - 1, j - 1
        elif vt <= hz:
            i -= 1
        else:
            j -= 1
    path.reverse()
    return acc[-1][-1], np.array(path, dtype=np.int64)


def softdtw(x, y, gamma, band, squared):
    n, m = x.shape[0], y.shape[0]
    cost = _local(x, y, squared).tolist()
    r = [[INF] * (m + 1) for _ in range(n + 1)]
    r[0][0] = 0.0
    exp, log = math.exp, math.log
    for i in range(1, n + 1):
        lo, hi = _bounds(i, m, band)
        prev, cur, ci = r[i - 1], r[i], cost[i - 1]
        for j in range(lo, hi + 1):
            a, b, c = prev[j - 1], prev[j], cur[j - 1]
            mn = min(a, b, c)
            s = 0.0
            for v in (a, b, c):
                if v < INF:
                    s += exp(-(v - mn) / gamma)
            cur[j] = ci[j - 1] + mn - gamma * log(s)
    return r[-1][-1]


def gak_log(x, y, sigma, band):
    n, m = x.shape[0], y.shape[0]
    t = _sqdist(x, y) / (2.0 * sigma * sigma)
    logk = (-(t + np.log1p(-np.expm1(-t)))).tolist()
    g = [[-INF] * (m + 1) for _ in range(n + 1)]
    g[0][0] = 0.0
    exp, log = math.exp, math.log
    for i in range(1, n + 1):
        lo, hi = _bounds(i, m, band)
        prev, cur, li = g[i - 1], g[i], logk[i - 1]
        for j in range(lo, hi + 1):
            a, b, c = prev[j - 1], prev[j], cur[j - 1]
            mx = max(a, b, c)
            if mx == -INF:
                continue
            cur[j] = li[j - 1] + mx + log(exp(a - mx) + exp(b - mx) + exp(c - mx))
    return g[-1][-1]
