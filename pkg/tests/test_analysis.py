import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from protogeom.analysis import alignment, class_means, geometry_delta, metrics, within_class_spread
from protogeom.data import EmbeddingSet, LabelDistribution, init_embeddings
from protogeom.errors import DegenerateError, EmptyClassError
from protogeom.geometry import etf_gram, make_etf, make_majority_collapse, make_minority_angle

from conftest import random_unit


def at_prototypes(protos, per_class=3):
    labels = np.repeat(np.arange(protos.k), per_class)
    return EmbeddingSet(protos.vectors[:, labels], labels, protos.k)


def test_class_means_equal_members():
    v = np.array([0.6, 0.8])
    emb = EmbeddingSet(np.stack([v, v, [1.0, 0.0]], axis=1), [0, 0, 1], 2)
    np.testing.assert_allclose(class_means(emb)[:, 0], v)


def test_class_means_antipodal():
    emb = EmbeddingSet(np.array([[1.0, -1.0, 0.0], [0.0, 0.0, 1.0]]), [0, 0, 1], 2)
    np.testing.assert_allclose(class_means(emb)[:, 0], 0.0)


def test_class_means_hand():
    emb = EmbeddingSet(np.array([[1.0, 0.0, 1.0], [0.0, 1.0, 0.0]]), [0, 0, 1], 2)
    mu = class_means(emb)[:, 0]
    np.testing.assert_allclose(mu, [0.5, 0.5])
    assert np.linalg.norm(mu) == pytest.approx(np.sqrt(2) / 2)


def test_empty_class():
    with pytest.raises(EmptyClassError):
        class_means(EmbeddingSet(np.eye(2), [0, 0], 2))


def test_delta_zero_at_etf():
    w = make_etf(5, 6)
    assert geometry_delta(at_prototypes(w), etf_gram(5)) == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize(
    "protos",
    [make_minority_angle(4, {2, 3}, -0.8, 0.0, 4), make_majority_collapse(6, {0, 1, 2}, 5)],
)
def test_delta_zero_any_geometry(protos):
    assert geometry_delta(at_prototypes(protos), protos.gram) == pytest.approx(0.0, abs=1e-12)


def test_random_init_far_from_etf():
    values = [
        geometry_delta(init_embeddings(LabelDistribution((25,) * 4), 8, seed), etf_gram(4)) for seed in range(20)
    ]
    assert min(values) > 0.3


def test_delta_degenerate():
    emb = EmbeddingSet(np.array([[1.0, -1.0, 1.0, -1.0], [0, 0, 0, 0]]), [0, 0, 1, 1], 2)
    with pytest.raises(DegenerateError):
        geometry_delta(emb, np.eye(2))


@given(st.integers(0, 2**16))
@settings(max_examples=30, deadline=None)
def test_delta_rotation_invariant(seed):
    rng = np.random.default_rng(seed)
    emb = EmbeddingSet(random_unit(6, 20, rng), np.arange(20) % 4, 4)
    q, _ = np.linalg.qr(rng.standard_normal((6, 6)))
    rotated = EmbeddingSet(q @ emb.vectors, emb.labels, 4)
    assert geometry_delta(rotated, etf_gram(4)) == pytest.approx(geometry_delta(emb, etf_gram(4)), abs=1e-10)


def test_alignment_extremes():
    w = make_etf(3, 4)
    emb = at_prototypes(w)
    assert alignment(emb, w) == pytest.approx(1.0)
    assert alignment(EmbeddingSet(-emb.vectors, emb.labels, 3), w) == pytest.approx(-1.0)
    # a unit vector orthogonal to every prototype
    normal = np.linalg.svd(w.vectors)[0][:, -1]
    orth = EmbeddingSet(np.repeat(normal[:, None], 3, axis=1), [0, 1, 2], 3)
    assert alignment(orth, w) == pytest.approx(0.0, abs=1e-12)


def test_alignment_one_only_at_prototypes():
    w = make_etf(3, 4)
    emb = at_prototypes(w)
    emb.vectors[:, 0] = w.vectors[:, 1]
    assert alignment(emb, w) < 1 - 1e-9


def test_spread():
    w = make_etf(3, 4)
    assert within_class_spread(at_prototypes(w)) == pytest.approx(0.0, abs=1e-15)
    emb = EmbeddingSet(np.array([[1.0, 0.0], [0.0, 1.0]]), [0, 0], 1)
    assert within_class_spread(emb) == pytest.approx(np.sqrt(2) / 2)


def test_metrics_record():
    w = make_etf(3, 4)
    rec = metrics(at_prototypes(w), w, epoch=7, loss=1.5)
    assert rec.epoch == 7 and rec.loss == 1.5
    assert rec.delta == pytest.approx(0.0, abs=1e-12)
    assert rec.alignment == pytest.approx(1.0)
    assert rec.min_mean_norm == pytest.approx(1.0)


def test_normalized_means_flag():
    emb = EmbeddingSet(np.array([[1.0, 0.0, 1.0, 1.0], [0.0, 1.0, 0.0, 0.0]]), [0, 0, 1, 1], 2)
    raw = geometry_delta(emb, np.eye(2))
    norm = geometry_delta(emb, np.eye(2), normalize_means=True)
    assert raw != pytest.approx(norm)
