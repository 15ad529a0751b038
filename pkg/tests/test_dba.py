from __future__ import annotations

import numpy as np
import pytest

from mtscluster.dba import dba, resample
from mtscluster.distance import dtw


def test_resample_endpoints_and_identity():
    a = np.array([[0.0, 1.0], [2.0, 3.0], [4.0, 5.0]])
    assert np.array_equal(resample(a, 3), a)
    r = resample(a, 5)
    assert r.shape == (5, 2)
    np.testing.assert_allclose(r[[0, 2, 4]], a)
    np.testing.assert_allclose(r[1], [1.0, 2.0])


def test_identical_series_are_their_own_barycenter(backend):
    x = np.array([[0.0], [1.0], [3.0], [2.0]])
    b, dists, cost = dba([x, x, x], x)
    np.testing.assert_array_equal(b, x)
    assert cost == 0.0 and np.all(dists == 0.0)


def test_dba_never_worse_than_start(backend, rng):
    base = np.sin(np.linspace(0, 6, 30))[:, None]
    series = [base[int(s):] + rng.normal(0, 0.1, size=(30 - int(s), 1))
              for s in rng.integers(0, 5, size=6)]
    start = series[0]
    start_cost = sum(dtw(x, start) for x in series)
    b, dists, cost = dba(series, start)
    assert cost <= start_cost
    assert b.shape == start.shape
    assert cost == pytest.approx(sum(dtw(x, b) for x in series))
    np.testing.assert_allclose(dists, [dtw(x, b) for x in series])


def test_weights_select_members(backend, rng):
    a = rng.normal(size=(10, 2))
    far = a + 50.0
    b, _, _ = dba([a, far], a.copy(), weights=np.array([1.0, 0.0]))
    np.testing.assert_allclose(b, a)


def test_power_two_tracks_squared_cost(backend, rng):
    series = [rng.normal(size=(8, 1)) for _ in range(4)]
    b, dists, cost = dba(series, series[1], power=2)
    assert cost == pytest.approx(float(np.sum(dists**2)))
