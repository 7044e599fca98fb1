import math

import numpy as np
import pytest

from degradeiqa.contrastive import (
    FEATURE_NAMES,
    Projector,
    build_training_batch,
    chance_level,
    cosine_similarity,
    handcrafted_features,
    nt_xent_arniqa,
    nt_xent_gradient,
    positive_index,
    read_embeddings_csv,
    retrieval_accuracy,
    train_projector,
    write_embeddings_csv,
)
from degradeiqa.degradation import PRISTINE, Composition, make_rng
from degradeiqa.distortions import apply_distortion
from degradeiqa.errors import InvalidArgument
from degradeiqa.synthetic import synthetic_image
from oracles import finite_difference, loss_oracle


def test_cosine_examples(rng):
    a = rng.normal(size=7)
    assert cosine_similarity(a, a) == pytest.approx(1.0)
    assert cosine_similarity([1, 0], [0, 1]) == 0.0
    b = rng.normal(size=7)
    ref = sum(x * y for x, y in zip(a, b)) / math.sqrt(sum(x * x for x in a) * sum(y * y for y in b))
    assert abs(cosine_similarity(a, b) - ref) < 1e-12
    with pytest.raises(InvalidArgument):
        cosine_similarity([0, 0], [1, 0])


def test_positive_partner_layout():
    b = 3
    pos = positive_index(b)
    assert list(pos[:3]) == [3, 4, 5]
    assert list(pos[6:9]) == [9, 10, 11]
    assert np.array_equal(pos[pos], np.arange(4 * b))


@pytest.mark.parametrize("b", [2, 3, 8])
def test_identical_embeddings(b):
    z = np.ones((4 * b, 5))
    loss, terms = nt_xent_arniqa(z, 0.1)
    # every similarity equals 1; the denominator runs over the 4B - 1 other views
    assert loss == pytest.approx(math.log(4 * b - 1), abs=1e-12)
    assert np.allclose(terms, terms[0])
    g = nt_xent_gradient(z, 0.1)
    norms = np.linalg.norm(g, axis=1)
    assert np.allclose(norms, norms[0])


def test_small_batch_oracle():
    z = np.array(
        [[1, 0.2, 0], [0.9, 0.1, 0.3], [0, 1, 0], [0.2, 1, 0.1],
         [1, 0, 0.1], [0.8, 0.3, 0], [0, 0.9, 0.3], [0.1, 1, 0]]
    )
    assert abs(nt_xent_arniqa(z, 0.2)[0] - loss_oracle(z, 0.2)) < 1e-10


def test_separated_positives_give_near_zero_loss():
    b = 2
    eye = np.eye(2 * b)
    # positives coincide, every negative is orthogonal; with a small temperature the loss vanishes
    z = np.concatenate([eye[:b], eye[:b], eye[b:], eye[b:]])  # blocks: src1 full, src2 full, src1 half, src2 half
    loss, _ = nt_xent_arniqa(z, 0.01)
    assert loss < 1e-8
    assert abs(loss - loss_oracle(z, 0.01)) < 1e-10


def test_large_temperature_limit(rng):
    b = 4
    z = rng.normal(size=(4 * b, 6))
    loss, _ = nt_xent_arniqa(z, 1e3)
    assert abs(loss - math.log(4 * b - 1)) < 1e-3


def test_loss_errors(rng):
    with pytest.raises(InvalidArgument):
        nt_xent_arniqa(rng.normal(size=(4, 3)))
    with pytest.raises(InvalidArgument):
        nt_xent_arniqa(rng.normal(size=(10, 3)))
    with pytest.raises(InvalidArgument):
        nt_xent_arniqa(rng.normal(size=(8, 3)), tau=0)


def test_gradient_b4_d8(rng):
    z = rng.normal(size=(16, 8))
    g = nt_xent_gradient(z, 0.1)
    fd = finite_difference(lambda x: nt_xent_arniqa(x, 0.1)[0], z, eps=1e-5)
    assert np.max(np.abs(g - fd)) / np.max(np.abs(fd)) < 1e-4


def _pairs(n, size=64, seed=0):
    rng = make_rng(seed)
    return [(synthetic_image(rng, size, size), synthetic_image(rng, size, size)) for _ in range(n)]


def test_batch_single_pair():
    batch = build_training_batch(_pairs(1), [Composition.of(("jpeg", 3))], 32, make_rng(1))
    assert batch.views.shape == (4, 32, 32, 3)
    assert list(batch.composition_ids) == [0, 0, 0, 0]
    assert list(batch.sources) == [1, 2, 1, 2]
    assert list(batch.scales) == ["full", "full", "half", "half"]


def test_batch_deterministic():
    pairs = _pairs(3)
    comps = [Composition.of(("white_noise", 2)), PRISTINE, Composition.of(("jitter", 4), ("darken", 1))]
    a = build_training_batch(pairs, comps, 32, make_rng(5))
    b = build_training_batch(pairs, comps, 32, make_rng(5))
    assert a.views.tobytes() == b.views.tobytes()


def test_batch_undersized_names_image():
    with pytest.raises(InvalidArgument, match="pair 0, source 2"):
        build_training_batch([(np.zeros((64, 64, 3)), np.zeros((40, 64, 3)))], [PRISTINE], 32, make_rng(0))


def test_features_constant_patch():
    f = handcrafted_features(np.full((48, 48, 3), 0.5))
    names = dict(zip(FEATURE_NAMES, f))
    zero = [n for n in FEATURE_NAMES if "std" in n or "contrast" in n or n.startswith("grad_hist")]
    assert all(names[n] == 0.0 for n in zero)
    assert len(f) == 30


def test_features_deterministic_and_noise_tail():
    img = synthetic_image(make_rng(3), 64, 64)
    assert np.array_equal(handcrafted_features(img), handcrafted_features(img))
    noisy = apply_distortion(img, "white_noise", 5, make_rng(1))
    tail = [i for i, n in enumerate(FEATURE_NAMES) if n in ("grad_hist_6", "grad_hist_7")]
    assert handcrafted_features(noisy)[tail].sum() > handcrafted_features(img)[tail].sum()
    with pytest.raises(InvalidArgument):
        handcrafted_features(np.zeros((16, 16, 3)))


def test_retrieval_examples():
    labels = np.repeat(np.arange(4), 4)
    z = np.eye(4)[labels]
    assert retrieval_accuracy(z, labels) == 1.0
    with pytest.raises(InvalidArgument):
        retrieval_accuracy(z, np.zeros(16))


def test_retrieval_chance_level():
    rng = np.random.default_rng(0)
    b = 16
    labels = np.tile(np.arange(b), 4)
    accs = [retrieval_accuracy(rng.normal(size=(4 * b, 16)), labels) for _ in range(100)]
    p = chance_level(b)
    sigma = math.sqrt(p * (1 - p) / (100 * 4 * b))
    assert abs(np.mean(accs) - p) <= 3 * sigma


def _feature_batches(n, b=4, d=10, seed=0):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        base = rng.normal(size=(b, d))
        out.append(np.concatenate([base + 0.1 * rng.normal(size=(b, d)) for _ in range(4)]))
    return out


def test_projector_lr_zero_constant():
    _, trace = train_projector(_feature_batches(3), epochs=4, lr=0.0)
    assert all(t == trace[0] for t in trace)


def test_projector_deterministic_and_learns():
    data = _feature_batches(4)
    p1, t1 = train_projector(data, 20, 0.05, rng=np.random.default_rng(1))
    p2, t2 = train_projector(data, 20, 0.05, rng=np.random.default_rng(1))
    assert t1 == t2
    assert t1[-1] < t1[0]
    assert isinstance(p1, Projector) and p1(data[0]).shape == (16, 16)


@pytest.mark.parametrize("kwargs", [{"epochs": 0, "lr": 0.1}, {"epochs": 1, "lr": -1.0}])
def test_projector_errors(kwargs):
    with pytest.raises(InvalidArgument):
        train_projector(_feature_batches(2), **kwargs)


def test_embeddings_csv_round_trip(tmp_path):
    batch = build_training_batch(_pairs(2), [PRISTINE, PRISTINE], 32, make_rng(0))
    z = np.random.default_rng(0).normal(size=(8, 5))
    n = write_embeddings_csv(tmp_path / "e.csv", [batch.with_views(z)])
    meta, feats = read_embeddings_csv(tmp_path / "e.csv")
    assert n == 8 and np.array_equal(feats, z)
    assert [m["composition_id"] for m in meta] == ["0", "1"] * 4
