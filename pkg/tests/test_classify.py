import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sketchmatch.classify import (
    Metric,
    knn_rank,
    mahalanobis_distance,
    svm_rank,
    svm_train,
    train_binary_svm,
)
from sketchmatch.eigenspace import CenteringMode, EigenModel
from sketchmatch.errors import DataError


def gallery_model(labels, coords, eigenvalues):
    coords = np.asarray(coords, dtype=float)
    K = coords.shape[1]
    return EigenModel(
        dim=K,
        centering_mode=CenteringMode.PER_IMAGE_SCALAR,
        eigenvalues=np.asarray(eigenvalues, dtype=float),
        eigenvectors=np.eye(K),
        gallery_labels=tuple(labels),
        gallery_coords=coords,
    )


def test_mahalanobis_examples():
    assert mahalanobis_distance([3, 4], [0, 0], [1, 1], 0.0) == 5.0
    assert mahalanobis_distance([1.5, -2], [1.5, -2], [3, 7], 0.0) == 0.0
    assert mahalanobis_distance([2, 0], [0, 0], [4, 1], 0.0) == pytest.approx(1.0)


def test_mahalanobis_errors():
    with pytest.raises(DataError):
        mahalanobis_distance([1, 2], [1, 2, 3], [1, 1])
    with pytest.raises(DataError):
        mahalanobis_distance([1, 2], [1, 2], [1])
    with pytest.raises(DataError):
        mahalanobis_distance([1, 2], [0, 0], [1, -1])


@settings(max_examples=100)
@given(st.integers(0, 2**32 - 1))
def test_mahalanobis_is_a_metric(seed):
    rng = np.random.default_rng(seed)
    x, y, z = rng.normal(size=(3, 6)) * 10
    lam = rng.uniform(0.01, 50, 6)
    d = lambda a, b: mahalanobis_distance(a, b, lam, 0.0)  # noqa: E731
    assert d(x, y) == d(y, x)
    assert d(x, x) == 0.0
    assert d(x, z) <= d(x, y) + d(y, z) + 1e-12


def test_knn_rank_examples():
    m = gallery_model(["A", "B"], [[0, 0], [10, 0]], [1, 1])
    r = knn_rank(m, [1, 0], 0.0)
    assert r.metric is Metric.MAHALANOBIS
    assert r.entries == (("A", 1.0), ("B", 9.0))

    r = knn_rank(m, [10, 0], 0.0)
    assert r.entries[0] == ("B", 0.0)

    tie = gallery_model(["Z", "A"], [[-1, 0], [1, 0]], [1, 1])
    assert knn_rank(tie, [0, 0], 0.0).labels() == ["Z", "A"]


def test_knn_rank_default_epsilon_and_empty_gallery():
    m = gallery_model(["A", "B"], [[0, 0], [3, 0]], [4, 1])
    r = knn_rank(m, [1, 0])
    assert r.entries[0][0] == "A"
    assert r.entries[0][1] == pytest.approx(0.5, rel=1e-7)
    with pytest.raises(DataError):
        knn_rank(gallery_model([], np.zeros((0, 2)), [1, 1]), [0, 0])


def test_knn_rank_duplicate_labels_keep_best():
    m = gallery_model(["A", "B", "A"], [[5, 0], [2, 0], [0, 0]], [1, 1])
    r = knn_rank(m, [0, 0], 0.0)
    assert r.entries == (("A", 0.0), ("B", 2.0))


@settings(max_examples=50)
@given(st.integers(0, 2**32 - 1))
def test_knn_unit_eigenvalues_equal_euclidean(seed):
    rng = np.random.default_rng(seed)
    coords = rng.normal(size=(15, 4))
    probe = rng.normal(size=4)
    m = gallery_model([f"g{i}" for i in range(15)], coords, np.ones(4))
    euclid = sorted(range(15), key=lambda i: np.sqrt(np.sum((coords[i] - probe) ** 2)))
    assert knn_rank(m, probe, 0.0).labels() == [f"g{i}" for i in euclid]


def test_knn_ordering_unchanged_by_suppressed_coordinates():
    rng = np.random.default_rng(4)
    coords = rng.normal(size=(10, 3))
    probe = rng.normal(size=3)
    labels = [f"g{i}" for i in range(10)]
    base = knn_rank(gallery_model(labels, coords, [3, 2, 1]), probe, 0.0).labels()
    # extra coordinate whose values carry no spread across the gallery or probe
    ext_coords = np.hstack([coords, np.full((10, 1), 0.25)])
    ext_probe = np.append(probe, 0.25)
    for eps in (1e-8, 1e-3, 1.0):
        ext = gallery_model(labels, ext_coords, [3, 2, 1, 1e-12])
        assert knn_rank(ext, ext_probe, eps).labels() == base


def test_knn_self_queries_rank_one():
    rng = np.random.default_rng(9)
    coords = rng.normal(size=(20, 6))
    m = gallery_model([f"id{i}" for i in range(20)], coords, rng.uniform(0.5, 5, 6))
    for i in range(20):
        assert knn_rank(m, coords[i]).entries[0] == (f"id{i}", 0.0)


def test_svm_two_point_hard_margin():
    model = svm_train([("pos", [1.0, 0.0]), ("neg", [-1.0, 0.0])], C=1e6)
    i = model.labels.index("pos")
    assert np.allclose(model.weights[i], [1.0, 0.0])
    assert model.biases[i] == pytest.approx(0.0, abs=1e-12)
    assert model.scores([1.0, 0.0])[i] == pytest.approx(1.0)
    assert model.scores([-1.0, 0.0])[i] == pytest.approx(-1.0)

    r = svm_rank(model, [2.0, 0.0])
    assert r.metric is Metric.SVM_MARGIN
    assert r.entries[0] == ("pos", pytest.approx(2.0))
    assert svm_rank(model, [-3.0, 0.0]).entries[0][0] == "neg"


def test_svm_rank_ties_lexicographic():
    model = svm_train([("b", [1.0, 0.0]), ("a", [-1.0, 0.0])], C=1e6)
    r = svm_rank(model, [0.0, 5.0])
    assert [s for _, s in r.entries] == [pytest.approx(0.0), pytest.approx(0.0)]
    assert r.labels() == ["a", "b"]


def test_svm_degenerate_identical_points():
    # balanced labels on one point: every dual variable ends at the box
    x = np.ones((4, 3))
    y = np.array([1.0, -1.0, 1.0, -1.0])
    res = train_binary_svm(x, y, C=1.0)
    assert np.allclose(res.w, 0.0, atol=1e-9)
    assert np.all(res.alpha == 1.0)
    assert res.kkt_violation < 1e-3
    model = svm_train([(k, [1.0, 1.0]) for k in "abc"], C=1.0)
    assert np.all(np.isfinite(model.weights))
    assert len(svm_rank(model, [1.0, 1.0]).entries) == 3


def test_svm_errors():
    with pytest.raises(DataError):
        svm_train([("a", [1.0]), ("a", [2.0])])
    with pytest.raises(DataError):
        svm_train([])
    model = svm_train([("a", [1.0, 0.0]), ("b", [0.0, 1.0])])
    with pytest.raises(DataError):
        svm_rank(model, [1.0, 2.0, 3.0])


def separable_set(seed, n=20, dim=2, gap=1.0):
    rng = np.random.default_rng(seed)
    w = rng.normal(size=dim)
    w /= np.linalg.norm(w)
    offset = rng.uniform(-2, 2)
    X, y = [], []
    while len(X) < n:
        x = rng.uniform(-5, 5, dim)
        m = x @ w - offset
        if abs(m) >= gap / 2:
            X.append(x)
            y.append(1.0 if m > 0 else -1.0)
    if len(set(y)) < 2:
        return separable_set(seed + 1000, n, dim, gap)
    return np.array(X), np.array(y)


@pytest.mark.parametrize("C", [1.0, 100.0])
@pytest.mark.parametrize("seed", range(10))
def test_svm_separable_training_accuracy_and_kkt(seed, C):
    X, y = separable_set(seed)
    labels = ["pos" if t > 0 else "neg" for t in y]
    model = svm_train(list(zip(labels, X)), C=C)
    assert np.all(model.kkt_violations < 1e-3)
    predicted = [svm_rank(model, x).entries[0][0] for x in X]
    assert predicted == labels


@pytest.mark.parametrize("seed", range(5))
def test_svm_argmax_scale_invariance(seed):
    X, y = separable_set(seed, dim=3)
    labels = ["pos" if t > 0 else "neg" for t in y]
    probes = np.random.default_rng(seed).uniform(-5, 5, (10, 3))
    base = svm_train(list(zip(labels, X)), C=1e4)
    for s in (0.5, 3.0):
        scaled = svm_train(list(zip(labels, X * s)), C=1e4)
        for p in list(X) + list(probes):
            if abs(base.scores(p)[0]) < 1e-3:
                continue  # on the boundary, argmax is tie-broken
            assert svm_rank(scaled, p * s).entries[0][0] == svm_rank(base, p).entries[0][0]
