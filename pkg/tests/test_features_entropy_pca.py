import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from dopplerclust.clustering import ClustererConfig
from dopplerclust.features import (
    STRATEGY_GEOMETRY,
    EntropyStrategy,
    ExtractorConfig,
    entropy,
    extract_entropy_batch,
    extract_entropy_features,
    image_covariance,
    pca2d_fit,
    pca2d_project,
    pca2d_transform,
    pca_fit,
    pca_inverse,
    pca_transform,
    select_best_entropy_strategy,
)

from oracles import jacobi_eigenvalues, naive_entropy, naive_image_covariance


# ---- entropy ---------------------------------------------------------------

def test_constant_patch_has_zero_entropy():
    assert entropy(np.full((5, 5), 0.37), 32) == 0.0


def test_two_equiprobable_bins_give_one_bit():
    patch = np.array([0.0] * 8 + [1.0] * 8)
    assert entropy(patch, 256) == pytest.approx(1.0, abs=1e-15)


def test_entropy_matches_direct_sum():
    rng = np.random.default_rng(0)
    for _ in range(20):
        patch = rng.random((10, 10))
        assert abs(entropy(patch, 16) - naive_entropy(patch, 16)) < 1e-12


def test_entropy_errors():
    with pytest.raises(ValueError):
        entropy(np.zeros((0, 0)))
    with pytest.raises(ValueError):
        entropy(np.array([0.5, 1.5]))
    with pytest.raises(ValueError):
        entropy(np.array([0.5]), bins=1)


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, st.integers(1, 60), elements=st.floats(0, 1)), st.integers(2, 64))
def test_entropy_bounds(values, bins):
    h = entropy(values, bins)
    assert 0.0 <= h <= np.log2(bins) + 1e-12


@settings(max_examples=20, deadline=None)
@given(arrays(np.float64, (2, 80, 80), elements=st.floats(0, 1)), st.sampled_from(list(STRATEGY_GEOMETRY)))
def test_batch_entropy_equals_single(images, sid):
    s = EntropyStrategy(sid, 32)
    batch = extract_entropy_batch(images, s)
    for i in range(2):
        assert np.abs(batch[i] - extract_entropy_features(images[i], s)).max() < 1e-12


def test_feature_lengths_and_zero_image():
    img = np.zeros((80, 80))
    assert len(extract_entropy_features(img, EntropyStrategy("halves_vertical"))) == 2
    assert len(extract_entropy_features(img, EntropyStrategy("halves_horizontal"))) == 2
    f = extract_entropy_features(img, EntropyStrategy("grid10"))
    assert f.shape == (10,) and not f.any()


def test_constant_left_noisy_right():
    rng = np.random.default_rng(1)
    img = np.full((80, 80), 0.2)
    img[:, 40:] = rng.random((80, 40))
    f = extract_entropy_features(img, EntropyStrategy("halves_vertical"))
    assert f[0] == 0.0 and f[1] > 0


def test_grid10_is_entropy_over_declared_rectangles():
    rng = np.random.default_rng(2)
    img = rng.random((80, 80))
    rects = STRATEGY_GEOMETRY["grid10"]
    assert len(rects) == 10 and all((r1 - r0, c1 - c0) == (40, 16) for r0, r1, c0, c1 in rects)
    expected = [naive_entropy(img[r0:r1, c0:c1], 32) for r0, r1, c0, c1 in rects]
    assert np.abs(extract_entropy_features(img, EntropyStrategy("grid10")) - expected).max() < 1e-12


def _grid_images(seed, per_class=6, K=5):
    rng = np.random.default_rng(seed)
    cells = STRATEGY_GEOMETRY["grid10"]
    imgs = []
    for k in range(K):
        for _ in range(per_class):
            img = np.full((80, 80), 0.5)
            for r0, r1, c0, c1 in (cells[k], cells[k + 5]):
                img[r0:r1, c0:c1] = rng.random((r1 - r0, c1 - c0))
            imgs.append(img)
    return np.array(imgs)


def test_grid_structured_data_selects_grid10():
    best = select_best_entropy_strategy(_grid_images(0), ClustererConfig("kmeans", 5), seed=0)
    assert best.id == "grid10"


def test_entropy_tie_goes_to_first_strategy():
    best = select_best_entropy_strategy(np.full((6, 80, 80), 0.3), ClustererConfig("kmeans", 2), seed=1)
    assert best.id == "halves_vertical"


# ---- PCA -------------------------------------------------------------------

def test_rank_one_line():
    t = np.linspace(-3, 7, 100)
    X = np.column_stack([t, t])
    m = pca_fit(X)
    assert m.n_components == 1
    assert m.explained_variance_ratio[0] == pytest.approx(1.0, abs=1e-12)


def test_full_rank_reconstruction():
    X = np.random.default_rng(0).random((20, 5))
    m = pca_fit(X, variance_target=1.0)
    assert m.n_components == 5
    assert np.abs(pca_inverse(m, pca_transform(m, X)) - X).max() < 1e-8


def test_eigenvalues_match_jacobi():
    X = np.random.default_rng(1).random((50, 10))
    m = pca_fit(X, variance_target=1.0)
    C = np.cov(X, rowvar=False)
    assert np.abs(m.eigenvalues - jacobi_eigenvalues(C)).max() < 1e-6


def test_identical_rows_rejected():
    with pytest.raises(ValueError, match="zero total variance"):
        pca_fit(np.ones((4, 3)))


@settings(max_examples=25, deadline=None)
@given(st.integers(3, 12), st.integers(2, 8), st.integers(0, 2**31))
def test_pca_invariants(n, m, seed):
    X = np.random.default_rng(seed).normal(size=(n, m))
    model = pca_fit(X)
    W = model.W
    assert np.abs(W.T @ W - np.eye(W.shape[1])).max() < 1e-8
    ratio = model.eigenvalues / model.eigenvalues.sum()
    cum = np.cumsum(ratio)
    s = model.n_components
    assert cum[s - 1] >= 0.95 - 1e-12
    assert s == 1 or cum[s - 2] < 0.95
    assert np.abs(pca_transform(model, X).mean(axis=0)).max() < 1e-8


# ---- 2DPCA -----------------------------------------------------------------

def test_image_covariance_matches_triple_loop():
    imgs = np.random.default_rng(3).random((5, 8, 8))
    assert np.abs(image_covariance(imgs) - naive_image_covariance(imgs.tolist())).max() < 1e-10


def test_rank_one_images():
    rng = np.random.default_rng(4)
    base = rng.random((80, 80))
    u, v = rng.normal(size=80), rng.normal(size=80)
    c = rng.normal(size=12)
    c -= c.mean()  # the sample mean image is then exactly `base`
    imgs = base + c[:, None, None] * np.outer(u, v)[None]
    m = pca2d_fit(imgs)
    assert m.n_components == 1
    feats = pca2d_transform(m, imgs)
    assert feats.shape == (12, 80)
    # each feature vector is c_i times one fixed vector
    ref = feats[np.argmax(np.abs(c))] / c[np.argmax(np.abs(c))]
    assert np.abs(feats - c[:, None] * ref[None]).max() < 1e-6


def test_pca2d_flattening_is_component_major():
    rng = np.random.default_rng(5)
    imgs = rng.random((6, 80, 80))
    m = pca2d_fit(imgs, variance_target=0.5)
    Y = pca2d_project(m, imgs[0])
    assert np.array_equal(pca2d_transform(m, imgs[0]), Y.T.reshape(-1))
    assert np.abs(m.W.T @ m.W - np.eye(m.n_components)).max() < 1e-8


def test_pca2d_identical_images_rejected():
    with pytest.raises(ValueError, match="zero total variance"):
        pca2d_fit(np.full((3, 80, 80), 0.5))


# ---- extractor registry ----------------------------------------------------

def test_unknown_extractor_lists_valid_names():
    with pytest.raises(ValueError, match="local_dct.*raw_dct.*entropy.*pca.*pca2d"):
        ExtractorConfig("bogus")


@pytest.mark.parametrize("name,width", [("raw_dct", 54), ("raw", 6400)])
def test_fixed_extractors(name, width):
    X = np.random.default_rng(0).random((4, 6400))
    fitted = ExtractorConfig(name).fit(X, k=2)
    assert fitted.transform(X).shape == (4, width)


def test_fixed_plan_skips_selection():
    X = np.random.default_rng(0).random((3, 6400))
    fitted = ExtractorConfig("local_dct", plan=(20, 3)).fit(X, k=5)
    assert fitted.info["plan"] == {"patch_size": 20, "patch_index": 3}
    assert fitted.transform(X).shape == (3, 54)
