import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from dopplerclust.data import (
    CUBE_SHAPE,
    Dataset,
    DatasetError,
    SynthConfig,
    flatten_cube,
    flatten_image,
    generate_synthetic,
    load_dataset,
    reshape_to_image,
    save_dataset,
)


@pytest.fixture(scope="module")
def synth():
    return generate_synthetic(SynthConfig(4, 10, 5, 0.05, 42))


def test_reshape_row_major():
    v = np.arange(6400) / 6399
    img = reshape_to_image(v)
    assert img.shape == (80, 80)
    assert img[0, 0] == 0
    assert img[0, 79] == 79 / 6399
    assert img[1, 0] == 80 / 6399
    assert np.array_equal(flatten_image(img), v)


def test_reshape_zeros_and_bad_length():
    assert not reshape_to_image(np.zeros(6400)).any()
    with pytest.raises(ValueError):
        reshape_to_image(np.zeros(6399))


def test_cube_flattening_is_direction_then_bin_then_time():
    cube = np.arange(6400, dtype=float).reshape(CUBE_SHAPE)
    v = flatten_cube(cube)
    # element (d, b, t) lands at d*3200 + b*32 + t
    assert v[1 * 3200 + 7 * 32 + 5] == cube[1, 7, 5]
    img = reshape_to_image(v)
    assert sorted(img.ravel()) == sorted(cube.ravel())


@settings(max_examples=30, deadline=None)
@given(arrays(np.float64, (80, 80), elements=st.floats(0, 1)))
def test_flatten_reshape_identity(img):
    assert np.array_equal(reshape_to_image(flatten_image(img)), img)


def test_synthetic_shape_and_order(synth):
    assert synth.n_samples == 200
    assert synth.n_subjects == 4
    assert synth.n_activities == 5
    assert list(synth.subject_ids) == [1, 2, 3, 4]
    counts = np.zeros((4, 5), dtype=int)
    for s, a in zip(synth.subjects, synth.labels):
        counts[s - 1, a - 1] += 1
    assert (counts == 10).all()
    assert synth.X.min() >= 0 and synth.X.max() <= 1


def test_synthetic_is_deterministic(synth):
    again = generate_synthetic(SynthConfig(4, 10, 5, 0.05, 42))
    assert again == synth
    assert np.array_equal(again.X, synth.X)
    other = generate_synthetic(SynthConfig(4, 10, 5, 0.05, 43))
    assert not np.array_equal(other.X, synth.X)


def test_synthetic_accepts_64bit_seed():
    ds = generate_synthetic(n_subjects=2, reps_per_activity=1, n_activities=2, seed=2**64 - 1)
    assert ds.n_samples == 4


def test_noise_free_band_energy_separates_classes():
    ds = generate_synthetic(SynthConfig(3, 6, 5, 0.0, 1))
    cubes = ds.cubes()
    # mean energy per Doppler band (5 equal bands of the forward direction)
    band = cubes[:, 0].reshape(len(ds), 5, 20, 32).mean(axis=(2, 3))
    means = np.array([band[ds.labels == k].mean(0) for k in range(1, 6)])
    spread = max(
        np.linalg.norm(band[ds.labels == k] - means[k - 1], axis=1).max() for k in range(1, 6)
    )
    sep = min(
        np.linalg.norm(means[i] - means[j]) for i in range(5) for j in range(i + 1, 5)
    )
    assert sep >= 3 * spread


def test_noise_free_within_class_differs_only_by_phase():
    ds = generate_synthetic(SynthConfig(1, 4, 3, 0.0, 5))
    a, b = ds.cubes()[0], ds.cubes()[1]
    # same band envelope after averaging out the temporal modulation
    ea, eb = a[0].mean(axis=1), b[0].mean(axis=1)
    assert np.argmax(ea) == np.argmax(eb)
    assert not np.array_equal(a, b)


def test_single_activity_is_valid():
    ds = generate_synthetic(SynthConfig(2, 3, 1, 0.05, 0))
    assert ds.n_activities == 1
    assert ds.n_samples == 6


@pytest.mark.parametrize("kw", [dict(reps_per_activity=0), dict(noise_level=-1.0),
                                dict(n_subjects=0), dict(n_activities=0)])
def test_synthetic_rejects_degenerate_config(kw):
    with pytest.raises(ValueError):
        generate_synthetic(SynthConfig(**kw))


def test_csv_round_trip_exact(tmp_path, synth):
    path = save_dataset(synth, tmp_path / "d.csv")
    back = load_dataset(path)
    assert back == synth
    assert back.n_samples == 200 and back.n_subjects == 4 and back.n_activities == 5


def test_cube_round_trip_exact(tmp_path, synth):
    path = save_dataset(synth, tmp_path / "d.npz", layout="cube")
    assert load_dataset(path, layout="cube") == synth


def test_unlabelled_round_trip(tmp_path, synth):
    ds = synth.subset(range(5)).without_labels()
    back = load_dataset(save_dataset(ds, tmp_path / "u.csv"))
    assert back.labels is None
    assert back == ds


def test_out_of_range_value_names_cell(tmp_path, synth):
    path = save_dataset(synth.subset([0, 1, 2]), tmp_path / "d.csv")
    lines = path.read_text().splitlines()
    cells = lines[2].split(",")
    cells[2 + 17] = "1.5"
    lines[2] = ",".join(cells)
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(DatasetError, match=r"row 1.*f17"):
        load_dataset(path)


def test_empty_file_is_an_error(tmp_path):
    p = tmp_path / "empty.csv"
    p.write_text("")
    with pytest.raises(DatasetError, match="empty"):
        load_dataset(p)


def test_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_dataset(tmp_path / "nope.csv")


def test_bad_row_width(tmp_path, synth):
    path = save_dataset(synth.subset([0, 1]), tmp_path / "d.csv")
    lines = path.read_text().splitlines()
    lines[1] = lines[1].rsplit(",", 1)[0]
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(DatasetError, match="row 0"):
        load_dataset(path)


def test_dataset_rejects_nonfinite():
    X = np.zeros((1, 6400))
    X[0, 3] = np.nan
    with pytest.raises(DatasetError, match="f3"):
        Dataset(X, [1])


def test_dataset_is_immutable(synth):
    with pytest.raises(ValueError):
        synth.X[0, 0] = 0.5
    sample = synth[0]
    assert sample.cube.shape == CUBE_SHAPE
    assert sample.subject_id == 1 and sample.label == 1
    assert np.array_equal(sample.image, synth.images()[0])
