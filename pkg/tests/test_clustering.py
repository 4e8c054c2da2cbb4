import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dopplerclust.clustering import ClusterModel, ClustererConfig, assign, kmeans_fit, kmedoids_fit

from oracles import exhaustive_kmeans_objective, exhaustive_kmedoids_objective

Z4 = np.array([0.0, 1.0, 10.0, 11.0])


def _recomputed_objective(Z, model):
    Z = Z.reshape(len(Z), -1)
    return float(((Z - model.centers[model.labels]) ** 2).sum())


def test_kmeans_four_points():
    m = kmeans_fit(Z4, 2, seed=0)
    assert sorted(m.centers[:, 0].tolist()) == [0.5, 10.5]
    assert m.objective == pytest.approx(1.0, abs=1e-12)
    assert exhaustive_kmeans_objective(Z4[:, None], 2) == pytest.approx(1.0)


def test_kmedoids_four_points():
    m = kmedoids_fit(Z4, 2, seed=0)
    assert sorted(m.medoid_indices.tolist()) == [0, 2]
    assert m.objective == pytest.approx(2.0, abs=1e-12)
    assert exhaustive_kmedoids_objective(Z4[:, None], 2) == pytest.approx(2.0)


@pytest.mark.parametrize("fit", [kmeans_fit, kmedoids_fit])
def test_k_equals_n(fit):
    Z = np.random.default_rng(0).normal(size=(6, 2))
    m = fit(Z, 6, seed=1)
    assert m.objective == pytest.approx(0.0, abs=1e-12)
    assert sorted(m.labels.tolist()) == list(range(6))


def test_kmeans_single_cluster():
    Z = np.random.default_rng(1).normal(size=(9, 3))
    m = kmeans_fit(Z, 1)
    assert np.allclose(m.centers[0], Z.mean(0), atol=1e-14)
    assert m.objective == pytest.approx(((Z - Z.mean(0)) ** 2).sum(), rel=1e-12)


def test_kmedoids_all_duplicates():
    Z = np.ones((5, 2))
    m = kmedoids_fit(Z, 2, seed=0, max_iter=50)
    assert m.objective == 0.0
    assert len(set(m.medoid_indices.tolist())) == 2
    assert m.iterations < 50


def test_kmeans_all_duplicates_terminates():
    m = kmeans_fit(np.ones((5, 2)), 3, seed=0, max_iter=50)
    assert m.objective == 0.0
    assert m.iterations < 50


@pytest.mark.parametrize("fit", [kmeans_fit, kmedoids_fit])
def test_input_errors(fit):
    with pytest.raises(ValueError, match="exceeds"):
        fit(np.zeros((3, 2)), 4)
    with pytest.raises(ValueError, match="non-finite"):
        fit(np.array([[0.0], [np.inf]]), 1)


def test_assign_tie_and_empty():
    model = ClusterModel("kmeans", np.array([[0.0], [5.0], [2.0]]), np.zeros(0, int), 0.0, 0, 0)
    assert assign(model, np.array([[1.0]])).tolist() == [0]
    assert assign(model, np.zeros((0, 1))).shape == (0,)
    with pytest.raises(ValueError, match="dimension"):
        assign(model, np.zeros((2, 3)))


def test_assign_training_set_consistent():
    Z = np.random.default_rng(2).normal(size=(40, 3))
    m = kmeans_fit(Z, 4, seed=3)
    assert np.array_equal(assign(m, Z), m.labels)


def test_model_json_round_trip():
    Z = np.random.default_rng(3).normal(size=(12, 2))
    m = kmedoids_fit(Z, 3, seed=5)
    back = ClusterModel.from_json(m.to_json())
    assert np.array_equal(back.centers, m.centers)
    assert np.array_equal(back.medoid_indices, m.medoid_indices)
    assert back.objective == m.objective and back.seed == m.seed


def test_config_dispatch_and_validation():
    Z = np.random.default_rng(4).normal(size=(10, 2))
    assert ClustererConfig("kmedoids", 2).fit(Z, 0).method == "kmedoids"
    with pytest.raises(ValueError):
        ClustererConfig("dbscan")


def test_fits_are_deterministic():
    Z = np.random.default_rng(5).normal(size=(30, 4))
    a, b = kmeans_fit(Z, 3, seed=11), kmeans_fit(Z, 3, seed=11)
    assert np.array_equal(a.centers, b.centers) and np.array_equal(a.labels, b.labels)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 25), st.integers(1, 4), st.integers(1, 3), st.integers(0, 2**32))
def test_clustering_invariants(n, K, m, seed):
    K = min(K, n)
    Z = np.random.default_rng(seed).normal(size=(n, m))
    km = kmeans_fit(Z, K, seed=seed, n_init=2)
    assert np.all(np.diff(km.history) <= 1e-12)
    assert abs(km.objective - _recomputed_objective(Z, km)) < 1e-8
    if km.converged:
        for k in range(K):
            assert np.abs(km.centers[k] - Z[km.labels == k].mean(0)).max() < 1e-10
    kd = kmedoids_fit(Z, K, seed=seed, n_init=2)
    assert np.all(np.diff(kd.history) <= 1e-12)
    assert abs(kd.objective - _recomputed_objective(Z, kd)) < 1e-8
    for k, idx in enumerate(kd.medoid_indices):
        assert np.array_equal(kd.centers[k], Z[idx])


@settings(max_examples=20, deadline=None)
@given(st.integers(4, 20), st.integers(2, 4), st.integers(0, 2**32))
def test_row_permutation_gives_same_partition(n, K, seed):
    rng = np.random.default_rng(seed)
    Z = rng.normal(size=(n, 2))
    K = min(K, n)
    perm = rng.permutation(n)
    a = kmeans_fit(Z, K, seed=1, n_init=1)
    # start the permuted fit from the same centers the original run ended with
    b = kmeans_fit(Z[perm], K, n_init=0, init=a.centers)
    inv = np.empty(n, dtype=int)
    inv[perm] = np.arange(n)
    relabel = b.labels[inv]
    pairs = set(zip(a.labels.tolist(), relabel.tolist()))
    assert len(pairs) == len(set(a.labels.tolist()))
