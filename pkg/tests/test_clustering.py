from __future__ import annotations

from itertools import combinations

import numpy as np
import pytest
from scipy.cluster.hierarchy import fcluster, linkage
from scipy.spatial.distance import squareform

from mtscluster.clustering import (
    ClusterConfig,
    FuzzyPartition,
    HardPartition,
    best_of_restarts,
    derive_seeds,
    fuzzy_cmeans_dtw,
    fuzzy_kmedoids,
    fuzzy_memberships,
    fuzzy_objective,
    harden,
    hierarchical,
    kernel_kmeans,
    kmeans_dtw,
    random_partition,
)
from mtscluster.data import from_arrays
from mtscluster.distance import distance_matrix
from mtscluster.errors import InputError
from mtscluster.validity import label_disagreement


def blobs(rng, n_per=5, gap=8.0, t=(8, 12)):
    arrays, truth = [], []
    for g in range(2):
        base = np.sin(np.linspace(0, 3 + 3 * g, 20))[:, None] + gap * g
        for _ in range(n_per):
            length = int(rng.integers(*t))
            arrays.append(base[:length] + rng.normal(0, 0.1, size=(length, 1)))
            truth.append(g)
    return from_arrays(arrays), np.array(truth)


def same_partition(a, b):
    return label_disagreement(a, b, max(a.max(), b.max()) + 1) == 0.0


# -- configuration and containers -------------------------------------------

def test_config_validation():
    for bad in [dict(k=0), dict(k=2, m=1.0), dict(k=2, tol=0), dict(k=2, max_iter=0),
                dict(k=2, linkage="ward"), dict(k=2, init="forgy")]:
        with pytest.raises(InputError):
            ClusterConfig(**bad)
    assert ClusterConfig(3).with_seed(9).seed == 9


def test_k_larger_than_n():
    with pytest.raises(InputError, match="exceeds"):
        hierarchical(np.zeros((2, 2)), ClusterConfig(3))


def test_harden_examples():
    fp = FuzzyPartition(np.array([[0.6, 0.4], [0.5, 0.5], [0.1, 0.9]]), 2.0)
    hp = harden(fp)
    assert hp.labels.tolist() == [0, 0, 1]
    fp = FuzzyPartition(np.array([[0.5, 0.5, 0.0], [0.2, 0.2, 0.6]]), 2.0)
    hp = harden(fp)
    assert hp.labels.tolist() == [0, 2] and hp.empty_clusters == [1] and hp.k_effective == 2


def test_fuzzy_partition_validation():
    with pytest.raises(InputError):
        FuzzyPartition(np.array([[0.6, 0.6]]), 2.0)
    with pytest.raises(InputError):
        FuzzyPartition(np.array([[1.2, -0.2]]), 2.0)
    with pytest.raises(InputError):
        HardPartition([0, 3], 2)


def test_random_partition_nonempty(rng):
    for _ in range(20):
        labels = random_partition(7, 7, rng)
        assert sorted(labels) == list(range(7))


def test_derive_seeds_deterministic():
    assert derive_seeds(5, 4) == derive_seeds(5, 4)
    assert derive_seeds(5, 4)[:2] == derive_seeds(5, 2)
    assert len(set(derive_seeds(0, 50))) == 50


# -- memberships ------------------------------------------------------------

def test_equidistant_memberships():
    u = fuzzy_memberships(np.full((4, 3), 2.5), 2.0)
    np.testing.assert_allclose(u, 1 / 3)


def test_membership_formula():
    d = np.array([[1.0, 2.0, 4.0]])
    m = 1.5
    p = 2 / (m - 1)
    expected = 1 / np.array([[sum((a / b) ** p for b in d[0]) for a in d[0]]])
    np.testing.assert_allclose(fuzzy_memberships(d, m), expected, rtol=1e-12)


def test_zero_distance_rule():
    u = fuzzy_memberships(np.array([[0.0, 3.0], [0.0, 0.0], [1.0, 1.0]]), 2.0)
    assert u.tolist() == [[1.0, 0.0], [0.5, 0.5], [0.5, 0.5]]


def test_fuzzy_objective():
    u = np.array([[0.5, 0.5]])
    assert fuzzy_objective(u, np.array([[1.0, 2.0]]), 2.0) == pytest.approx(0.25 * 5)


# -- hierarchical -------------------------------------------------------------

@pytest.mark.parametrize("method", ["average", "complete", "single"])
def test_hierarchical_matches_scipy(method, rng):
    for _ in range(10):
        pts = rng.normal(size=(12, 2))
        d = np.sqrt(((pts[:, None] - pts[None]) ** 2).sum(-1))
        for k in (2, 3, 5):
            ours = hierarchical(d, ClusterConfig(k, linkage=method)).labels
            ref = fcluster(linkage(squareform(d, checks=False), method), k, "maxclust") - 1
            assert same_partition(ours, ref)


def test_hierarchical_edge_cuts():
    d = np.array([[0, 1, 5], [1, 0, 5], [5, 5, 0]], dtype=float)
    assert hierarchical(d, ClusterConfig(3)).labels.tolist() == [0, 1, 2]
    assert hierarchical(d, ClusterConfig(1)).labels.tolist() == [0, 0, 0]
    assert hierarchical(d, ClusterConfig(2)).labels.tolist() == [0, 0, 1]


def test_hierarchical_equidistant_tie_is_deterministic():
    d = np.ones((3, 3)) - np.eye(3)
    hp = hierarchical(d, ClusterConfig(2))
    # smallest pair (0, 1) merges first
    assert hp.labels.tolist() == [0, 0, 1]


# -- kernel k-means -----------------------------------------------------------

def lloyd(x, labels, k, max_iter=100):
    for _ in range(max_iter):
        centers = np.array([x[labels == c].mean(axis=0) for c in range(k)])
        new = np.argmin(((x[:, None] - centers[None]) ** 2).sum(-1), axis=1)
        if np.array_equal(new, labels):
            break
        labels = new
    return labels


def test_linear_kernel_kmeans_equals_lloyd(rng):
    for _ in range(10):
        x = np.concatenate([rng.normal(c, 1.0, size=(8, 2)) for c in (0, 3, 6)])
        init = random_partition(len(x), 3, rng)
        ref = lloyd(x, init.copy(), 3)
        if np.bincount(ref, minlength=3).min() == 0:
            continue
        hp = kernel_kmeans(x @ x.T, ClusterConfig(3, tol=1e-14), init_labels=init)
        assert hp.labels.tolist() == ref.tolist()


def test_kernel_kmeans_block_kernel(rng):
    k = np.kron(np.eye(2), np.ones((4, 4))) * 0.9 + 0.1
    np.fill_diagonal(k, 1.0)
    truth = np.repeat([0, 1], 4)
    for seed in range(5):
        hp = kernel_kmeans(k, ClusterConfig(2, seed=seed))
        assert same_partition(hp.labels, truth)
        assert all(a >= b - 1e-9 for a, b in zip(hp.trace, hp.trace[1:]))


# -- DTW engines --------------------------------------------------------------

def test_kmeans_dtw_recovers_groups(backend, rng):
    ds, truth = blobs(rng)
    dm = distance_matrix(ds)
    best, runs = best_of_restarts(lambda s: kmeans_dtw(ds, ccfg=ClusterConfig(2, seed=s), dm=dm),
                                  3, 0)
    assert same_partition(best.labels, truth)
    for r in runs:
        assert all(a >= b - 1e-9 for a, b in zip(r.trace, r.trace[1:]))
    assert len(best.barycenters) == 2


def test_kmeans_dtw_deterministic(rng):
    ds, _ = blobs(rng)
    a = kmeans_dtw(ds, ccfg=ClusterConfig(2, seed=7))
    b = kmeans_dtw(ds, ccfg=ClusterConfig(2, seed=7))
    assert a.labels.tolist() == b.labels.tolist() and a.trace == b.trace


def test_fcm_dtw(backend, rng):
    ds, truth = blobs(rng)
    fp = fuzzy_cmeans_dtw(ds, ccfg=ClusterConfig(2, seed=1))
    assert same_partition(harden(fp).labels, truth)
    np.testing.assert_allclose(fp.memberships.sum(axis=1), 1.0)
    assert all(a >= b - 1e-9 for a, b in zip(fp.trace, fp.trace[1:]))
    assert fp.rep_separation.shape == (2, 2)


def fkm_brute_force(d, k, m):
    best = None
    for meds in combinations(range(len(d)), k):
        dist = d[:, list(meds)]
        obj = fuzzy_objective(fuzzy_memberships(dist, m), dist, m)
        if best is None or obj < best[0] - 1e-12:
            best = (obj, set(meds))
    return best


def test_fkm_matches_brute_force_on_tight_groups(rng):
    pts = np.concatenate([rng.normal(0, 0.1, size=(5, 2)), rng.normal(5, 0.1, size=(5, 2))])
    d = np.sqrt(((pts[:, None] - pts[None]) ** 2).sum(-1))
    obj, meds = fkm_brute_force(d, 2, 2.0)
    found = [fuzzy_kmedoids(d, ClusterConfig(2, seed=s, init="kmeans++")) for s in range(10)]
    best = min(found, key=lambda f: f.objective)
    assert best.objective == pytest.approx(obj, rel=1e-9)
    assert set(best.representatives) == meds


def test_fkm_duplicate_medoids_show_as_empty():
    d = np.ones((4, 4)) - np.eye(4)
    d[0, 1] = d[1, 0] = 0.1
    fp = FuzzyPartition(fuzzy_memberships(d[:, [0, 0]], 2.0), 2.0, representatives=[0, 0])
    hp = harden(fp)
    assert fp.duplicate_representatives == [1]
    assert hp.empty_clusters == [1] and hp.k_effective == 1


def test_relabeling_invariance(rng):
    pts = np.concatenate([rng.normal(0, 0.5, size=(6, 2)), rng.normal(4, 0.5, size=(6, 2))])
    d = np.sqrt(((pts[:, None] - pts[None]) ** 2).sum(-1))
    perm = rng.permutation(12)
    a = hierarchical(d, ClusterConfig(2)).labels
    b = hierarchical(d[np.ix_(perm, perm)], ClusterConfig(2)).labels
    assert same_partition(a[perm], b)
