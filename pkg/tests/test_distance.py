from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from mtscluster.data import from_arrays
from mtscluster.distance import DistanceMatrix, DtwConfig, distance_matrix, dtw, softdtw
from mtscluster.errors import InputError


def col(*v):
    return np.array(v, dtype=float)[:, None]


def test_dtw_examples(backend):
    assert dtw(col(0, 2), col(0, 1, 2)) == pytest.approx(1.0)
    assert dtw(col(0, 1), col(0, 1, 1)) == 0.0
    assert dtw(col(3), col(5)) == 4.0


def test_dtw_path_tie_break(backend):
    cost, path = dtw(col(0, 0), col(0, 0), return_path=True)
    assert cost == 0.0
    assert path.tolist() == [[0, 0], [1, 1]]


def test_dtw_multivariate_dependent(backend):
    x = np.array([[0.0, 0.0], [1.0, 1.0]])
    y = np.array([[0.0, 1.0], [1.0, 0.0]])
    # one shared path, costs summed over variables
    assert dtw(x, y) == pytest.approx(2.0)


def test_dtw_symmetry_identity(backend, rng):
    for _ in range(20):
        x = rng.normal(size=(int(rng.integers(1, 15)), 3))
        y = rng.normal(size=(int(rng.integers(1, 15)), 3))
        assert dtw(x, y) == pytest.approx(dtw(y, x), rel=1e-12)
        assert dtw(x, x) == 0.0
        assert dtw(x, y) >= 0.0


def test_band_monotone(backend, rng):
    x = rng.normal(size=(12, 2))
    y = rng.normal(size=(10, 2))
    vals = [dtw(x, y, DtwConfig(band_radius=r)) for r in range(2, 13)]
    assert all(a >= b - 1e-12 for a, b in zip(vals, vals[1:]))
    assert vals[-1] == pytest.approx(dtw(x, y))


def test_band_too_narrow(backend):
    with pytest.raises(InputError, match="too narrow"):
        dtw(col(1, 2, 3, 4), col(1), DtwConfig(band_radius=2))


def test_input_validation():
    with pytest.raises(InputError, match="mismatch"):
        dtw(np.zeros((3, 2)), np.zeros((3, 3)))
    with pytest.raises(InputError, match="missing"):
        dtw(col(1, np.nan), col(1))
    with pytest.raises(InputError):
        DtwConfig(band_radius=-1)
    with pytest.raises(InputError):
        DtwConfig(local_cost="manhattan")
    with pytest.raises(InputError):
        softdtw(col(1), col(1), gamma=0.0)


def test_softdtw_below_dtw_and_converges(backend, rng):
    for _ in range(20):
        x = rng.normal(size=(int(rng.integers(2, 10)), 2))
        y = rng.normal(size=(int(rng.integers(2, 10)), 2))
        hard = dtw(x, y)
        assert softdtw(x, y, 1.0) <= hard + 1e-12
        assert abs(softdtw(x, y, 1e-3) - hard) <= 1e-2


def test_softdtw_length_one_identical(backend):
    assert softdtw(col(2.5), col(2.5)) == 0.0


def test_triangle_inequality_can_fail(backend):
    # DTW is not a metric: warping lets the middle series bridge the ends
    a, b, c = col(0, 0, 0), col(0, 1), col(1, 1, 1)
    assert dtw(a, c) > dtw(a, b) + dtw(b, c)


def test_distance_matrix_properties(backend, rng):
    ds = from_arrays([rng.normal(size=(int(rng.integers(5, 12)), 2)) for _ in range(6)])
    dm = distance_matrix(ds)
    assert dm.n == 6 and dm.metric_tag == "dtw"
    assert np.all(np.diag(dm.d) == 0) and np.array_equal(dm.d, dm.d.T)
    assert dm.d[1, 4] == dtw(ds[1], ds[4])
    par = distance_matrix(ds, n_jobs=3)
    assert np.array_equal(par.d, dm.d)


def test_softdtw_matrix_allows_negative(backend, rng):
    ds = from_arrays([np.zeros((5, 1)), np.zeros((5, 1)) + 1e-3, np.ones((4, 1))])
    dm = distance_matrix(ds, metric="softdtw", gamma=1.0)
    assert dm.metric_tag == "softdtw"
    assert dm.d[0, 1] < 0
    assert np.all(np.diag(dm.d) == 0)


def test_distance_matrix_requires_complete():
    ds = from_arrays([np.array([[1.0, 1.0], [np.nan, 2.0]]), np.ones((2, 2))])
    with pytest.raises(InputError):
        distance_matrix(ds)


def test_distance_matrix_validation():
    with pytest.raises(InputError, match="symmetric"):
        DistanceMatrix(("a", "b"), [[0, 1], [2, 0]])
    with pytest.raises(InputError, match="diagonal"):
        DistanceMatrix(("a", "b"), [[1, 1], [1, 0]])
    with pytest.raises(InputError, match="negative"):
        DistanceMatrix(("a", "b"), [[0, -1], [-1, 0]])
    with pytest.raises(InputError, match="shape"):
        DistanceMatrix(("a",), [[0, 1], [1, 0]])
    with pytest.raises(InputError, match="non-finite"):
        DistanceMatrix(("a", "b"), [[0, np.inf], [np.inf, 0]])
    with pytest.raises(InputError, match="tag"):
        DistanceMatrix(("a", "b"), [[0, 1], [1, 0]], "cosine")
    dm = DistanceMatrix(("a", "b"), [[0, 1], [1, 0]])
    with pytest.raises(ValueError):
        dm.d[0, 1] = 3


def test_distance_matrix_round_trips(rng):
    ds = from_arrays([rng.normal(size=(6, 2)) for _ in range(4)])
    dm = distance_matrix(ds)
    back = DistanceMatrix.from_csv(dm.to_csv())
    assert np.array_equal(back.d, dm.d) and back.ids == dm.ids
    back = DistanceMatrix.from_json(dm.to_json())
    assert np.array_equal(back.d, dm.d) and back.meta == dm.meta


series = st.integers(1, 6).flatmap(
    lambda t: arrays(np.float64, (t, 2), elements=st.floats(-10, 10, allow_nan=False))
)


@settings(max_examples=60, deadline=None)
@given(series, series)
def test_dtw_properties(x, y):
    d = dtw(x, y)
    assert d >= 0
    assert d == pytest.approx(dtw(y, x), rel=1e-9, abs=1e-9)
    assert softdtw(x, y, 0.5) <= d + 1e-9
    # DTW never exceeds the cost of the diagonal-then-edge path
    n, m = len(x), len(y)
    if n == m:
        assert d <= float(((x - y) ** 2).sum()) + 1e-9
