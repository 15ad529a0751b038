from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from mtscluster.data import from_arrays
from mtscluster.errors import InputError, NumericalError
from mtscluster.kernel import (
    GakConfig,
    KernelMatrix,
    estimate_sigma,
    gak,
    gak_linear,
    kernel_matrix,
    kernel_to_distance,
    log_gak,
)


def col(*v):
    return np.array(v, dtype=float)[:, None]


def test_gak_length_one_identical(backend):
    # local kernel at zero distance is exp(0) / (2 - exp(0)) = 1
    assert gak(col(1.5), col(1.5), sigma=1.0) == pytest.approx(1.0)


def test_gak_length_one_value(backend):
    t = 1.0 / 2.0
    expected = math.exp(-t) / (2 - math.exp(-t))
    assert gak(col(0.0), col(1.0), sigma=1.0) == pytest.approx(expected, rel=1e-12)


def test_gak_symmetric_positive(backend, rng):
    for _ in range(20):
        x = rng.normal(size=(int(rng.integers(1, 20)), 3))
        y = rng.normal(size=(int(rng.integers(1, 20)), 3))
        a, b = log_gak(x, y, 2.0), log_gak(y, x, 2.0)
        assert a == pytest.approx(b, rel=1e-12, abs=1e-12)
        assert gak(x, y, 2.0) > 0


def test_log_gak_finite_for_long_series(backend, rng):
    x = rng.normal(size=(400, 3))
    y = rng.normal(size=(380, 3)) + 5
    v = log_gak(x, y, 0.5)
    assert math.isfinite(v) and v < -700  # exp would underflow


def test_invalid_sigma():
    with pytest.raises(InputError):
        log_gak(col(1), col(1), 0.0)
    with pytest.raises(InputError):
        GakConfig(sigma=-1.0)
    with pytest.raises(InputError):
        GakConfig(sigma_multiplier=0.0)


def test_estimate_sigma_examples():
    ds = from_arrays([col(0, 0), col(1, 1)])
    assert estimate_sigma(ds) == pytest.approx(1.0)
    assert estimate_sigma(ds, multiplier=3.0) == pytest.approx(3.0)
    same = from_arrays([col(2, 2, 2), col(2, 2)])
    with pytest.raises(NumericalError):
        estimate_sigma(same)


def test_estimate_sigma_mean_of_pair_medians():
    ds = from_arrays([col(0), col(1), col(3)])
    # pair medians 1, 3, 2
    assert estimate_sigma(ds) == pytest.approx(2.0)


def test_identical_series_give_all_ones(backend):
    x = np.array([[0.0, 1.0], [1.0, 2.0], [3.0, 0.0]])
    km = kernel_matrix(from_arrays([x, x, x]), GakConfig(sigma=1.0))
    np.testing.assert_allclose(km.k, 1.0, atol=1e-12)


def test_normalized_kernel_properties(backend, rng):
    ds = from_arrays([rng.normal(size=(int(rng.integers(5, 15)), 2)) for _ in range(8)])
    km = kernel_matrix(ds, GakConfig(sigma_multiplier=2.0))
    assert np.all(np.diag(km.k) == 1.0)
    assert np.all(km.k > 0) and np.all(km.k <= 1.0 + 1e-12)
    lo, hi = km.min_eig_ratio()
    assert lo >= -1e-8 * hi
    assert km.sigma_used == pytest.approx(2.0 * estimate_sigma(ds))


def test_unnormalized_matches_gak(backend, rng):
    ds = from_arrays([rng.normal(size=(4, 2)) for _ in range(3)])
    km = kernel_matrix(ds, GakConfig(sigma=1.5, normalize=False))
    assert km.k[0, 2] == pytest.approx(gak_linear(ds[0].values, ds[2].values, 1.5), rel=1e-10)
    assert km.k[1, 1] == pytest.approx(gak(ds[1], ds[1], 1.5), rel=1e-10)


def test_psd_check_rejects_indefinite():
    km = KernelMatrix(("a", "b", "c"), [[1, 0.9, -0.9], [0.9, 1, 0.9], [-0.9, 0.9, 1]], 1.0, True)
    with pytest.raises(NumericalError, match="PSD"):
        km.check_psd()


def test_kernel_to_distance_examples():
    km = KernelMatrix(("a", "b", "c"), [[1, 1, 0.5], [1, 1, 0.5], [0.5, 0.5, 1]], 1.0, True)
    dm = kernel_to_distance(km)
    assert dm.d[0, 1] == 0.0
    assert dm.d[0, 2] == pytest.approx(1.0)
    assert dm.metric_tag == "kernel-induced"
    raw = KernelMatrix(("a", "b"), [[3, 1], [1, 3]], 1.0, False)
    with pytest.raises(InputError):
        kernel_to_distance(raw)


def test_kernel_distance_is_metric(backend, rng):
    ds = from_arrays([rng.normal(size=(int(rng.integers(4, 10)), 2)) for _ in range(7)])
    d = kernel_to_distance(kernel_matrix(ds, GakConfig(sigma_multiplier=3.0))).d
    assert np.all(d >= 0) and np.all(d <= math.sqrt(2) + 1e-12)
    n = len(d)
    for i in range(n):
        for j in range(n):
            assert np.all(d[i, j] <= d[i, :] + d[:, j] + 1e-12)


def test_kernel_round_trips(rng):
    ds = from_arrays([rng.normal(size=(5, 2)) for _ in range(4)])
    km = kernel_matrix(ds, GakConfig(sigma=2.0))
    back = KernelMatrix.from_json(km.to_json())
    assert np.array_equal(back.k, km.k) and back.sigma_used == km.sigma_used
    back = KernelMatrix.from_csv(km.to_csv())
    assert np.array_equal(back.k, km.k) and back.normalized


series = st.integers(1, 5).flatmap(
    lambda t: arrays(np.float64, (t, 2), elements=st.floats(-5, 5, allow_nan=False))
)


@settings(max_examples=50, deadline=None)
@given(series, series, st.floats(0.2, 5.0))
def test_log_and_linear_agree(x, y, sigma):
    lin = gak_linear(x, y, sigma)
    assume(lin > 1e-300)  # linear space underflows for distant pairs
    assert log_gak(x, y, sigma) == pytest.approx(math.log(lin),
                                                 rel=1e-9, abs=1e-9)
    # Cauchy-Schwarz for a PSD kernel
    assert 2 * log_gak(x, y, sigma) <= log_gak(x, x, sigma) + log_gak(y, y, sigma) + 1e-9
