import json

import numpy as np
import pytest

from degradeiqa.distortions import (
    DEFAULT_TABLE,
    GROUP_OF,
    GROUP_SIZES,
    GROUPS,
    KERNELS,
    KINDS,
    STOCHASTIC_KINDS,
    LadderTable,
    apply_distortion,
    get_jpeg2000_codec,
    load_ladders,
    register_jpeg2000_codec,
    severity_ladder,
)
from degradeiqa.errors import InvalidArgument, InvalidConfiguration, UnsupportedDistortion
from degradeiqa.synthetic import synthetic_image


@pytest.fixture(scope="module")
def textured():
    return synthetic_image(np.random.default_rng(5), 64, 64)


def test_catalog_shape():
    assert len(KINDS) == 24
    assert GROUP_SIZES == (3, 3, 5, 4, 4, 2, 3)
    assert set(KINDS) == set(KERNELS)
    for g, kinds in GROUPS.items():
        assert all(GROUP_OF[k] == g for k in kinds)


@pytest.mark.parametrize("kind", KINDS)
def test_every_kind_is_deterministic_and_in_range(kind, textured):
    for level in (1, 5):
        a = apply_distortion(textured, kind, level, np.random.default_rng(9))
        b = apply_distortion(textured, kind, level, np.random.default_rng(9))
        assert a.shape == textured.shape and a.dtype == np.float32
        assert np.array_equal(a, b)
        assert a.min() >= 0.0 and a.max() <= 1.0


@pytest.mark.parametrize("kind", sorted(set(KINDS) - set(STOCHASTIC_KINDS)))
def test_deterministic_kinds_ignore_rng(kind, textured):
    a = apply_distortion(textured, kind, 3, np.random.default_rng(1))
    b = apply_distortion(textured, kind, 3, np.random.default_rng(2))
    assert np.array_equal(a, b)


def test_mean_shift_constant():
    img = np.full((8, 8, 3), 0.5)
    out = apply_distortion(img, "mean_shift", 1, np.random.default_rng(0))
    assert np.allclose(out, 0.5 + DEFAULT_TABLE.params("mean_shift", 1)["shift"], atol=1e-6)


@pytest.mark.parametrize("level", range(1, 6))
def test_gaussian_blur_keeps_constant(level):
    img = np.full((16, 16, 3), 0.3)
    out = apply_distortion(img, "gaussian_blur", level, np.random.default_rng(0))
    assert np.allclose(out, 0.3, atol=1e-6)


@pytest.mark.parametrize("level", range(1, 6))
def test_white_noise_std(level):
    img = np.full((256, 256, 3), 0.5)
    raw = KERNELS["white_noise"](img, DEFAULT_TABLE.params("white_noise", level), np.random.default_rng(level))
    sigma = DEFAULT_TABLE.params("white_noise", level)["sigma"]
    assert abs(np.std(raw - 0.5) / sigma - 1) < 0.05


@pytest.mark.parametrize("level", range(1, 6))
def test_quantization_distinct_values(level, textured):
    out = apply_distortion(textured, "quantization", level, np.random.default_rng(0))
    n = DEFAULT_TABLE.params("quantization", level)["n_classes"]
    for c in range(3):
        assert np.unique(out[..., c]).size <= n


def test_unknown_kind_and_level(textured):
    rng = np.random.default_rng(0)
    with pytest.raises(InvalidArgument):
        apply_distortion(textured, "sepia", 1, rng)
    with pytest.raises(InvalidArgument):
        apply_distortion(textured, "jpeg", 6, rng)
    with pytest.raises(InvalidArgument):
        apply_distortion(textured, "jpeg", 1, None)


def test_jpeg2000_without_codec(textured):
    previous = register_jpeg2000_codec(None)
    try:
        with pytest.raises(UnsupportedDistortion) as exc:
            apply_distortion(textured, "jpeg2000", 1, np.random.default_rng(0))
        assert "jpeg2000" in str(exc.value)
    finally:
        register_jpeg2000_codec(previous)
    assert get_jpeg2000_codec() is previous


def test_custom_codec_adapter(textured):
    class Halve:
        def encode(self, img, bpp):
            return np.asarray(img, np.float32).tobytes()

        def decode(self, data):
            return np.frombuffer(data, np.float32).reshape(64, 64, 3) * 0.5

    previous = register_jpeg2000_codec(Halve())
    try:
        out = apply_distortion(textured, "jpeg2000", 2, np.random.default_rng(0))
        assert np.allclose(out, textured * 0.5, atol=1e-6)
    finally:
        register_jpeg2000_codec(previous)


def test_severity_ladder_values():
    assert [r["sigma"] for r in severity_ladder("gaussian_blur")] == [0.8, 1.6, 2.4, 3.2, 4.0]
    q = [r["quality"] for r in severity_ladder("jpeg")]
    assert all(b < a for a, b in zip(q, q[1:]))
    with pytest.raises(InvalidArgument):
        severity_ladder("nope")


def test_ladder_override(tmp_path, monkeypatch, textured):
    doc = {"version": "test", "ladders": {"gaussian_blur": [{"sigma": s} for s in (0.5, 1, 2, 3, 5)]}}
    p = tmp_path / "ladders.json"
    p.write_text(json.dumps(doc))
    table = load_ladders(p)
    assert table["gaussian_blur"][0]["sigma"] == 0.5
    assert table["jpeg"] == DEFAULT_TABLE["jpeg"]
    monkeypatch.setenv("DEGRADEIQA_LADDERS", str(p))
    assert load_ladders() == table
    a = apply_distortion(textured, "gaussian_blur", 1, np.random.default_rng(0), table)
    b = apply_distortion(textured, "gaussian_blur", 1, np.random.default_rng(0))
    assert not np.array_equal(a, b)


@pytest.mark.parametrize(
    "ladders",
    [
        {"gaussian_blur": [{"sigma": 1}] * 5},  # not monotone
        {"gaussian_blur": [{"sigma": s} for s in (1, 2, 3, 4)]},  # wrong length
        {"gaussian_blur": [{"radius": s} for s in (1, 2, 3, 4, 5)]},  # wrong key
        {"sepia": [{"x": s} for s in (1, 2, 3, 4, 5)]},
    ],
)
def test_bad_ladder_files(tmp_path, ladders):
    p = tmp_path / "bad.json"
    p.write_text(json.dumps({"ladders": ladders}))
    with pytest.raises(InvalidConfiguration):
        load_ladders(p)


def test_table_missing_kind():
    with pytest.raises(InvalidConfiguration):
        LadderTable({"jpeg": DEFAULT_TABLE["jpeg"]})
