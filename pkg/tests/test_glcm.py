import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from oracles import naive_features, naive_glcm
from PIL import Image

from evotnfin.exceptions import DegenerateImageError, InputFormatError
from evotnfin.glcm import (
    CSV_HEADER,
    FEATURE_NAMES,
    GlcmFeatureExtractor,
    GrayImage,
    compute_glcm,
    extract_features,
    featurize_dataset,
    image_features,
    list_image_dataset,
    preprocess,
    quantize,
    read_feature_csv,
    write_feature_csv,
)
from evotnfin.synth import write_texture_dataset


class TestPreprocess:
    def test_constant_mid_gray(self):
        img = preprocess(np.full((64, 64), 128, dtype=np.uint8))
        assert img.pixels.shape == (224, 224)
        assert np.all(img.pixels == 4)

    def test_white_is_top_level(self):
        img = preprocess(np.full((10, 10), 255, dtype=np.uint8), side=None)
        assert np.all(img.pixels == 7)

    def test_rgb_channel_average(self):
        rgb = np.array([[[255, 0, 0], [0, 255, 0]], [[0, 0, 255], [90, 90, 90]]], dtype=np.uint8)
        img = preprocess(rgb, side=None)
        # 85 -> floor(85 * 8 / 256) = 2, 90 -> 2
        np.testing.assert_array_equal(img.pixels, [[2, 2], [2, 2]])

    def test_quantize_edges(self):
        np.testing.assert_array_equal(quantize([0, 31, 32, 223, 224, 255]), [0, 0, 1, 6, 7, 7])

    def test_reads_png(self, tmp_path):
        path = tmp_path / "a.png"
        Image.fromarray(np.full((8, 8), 200, dtype=np.uint8), mode="L").save(path)
        img = preprocess(path)
        assert img.pixels.shape == (224, 224) and np.all(img.pixels == 6)

    def test_undecodable(self, tmp_path):
        path = tmp_path / "bad.png"
        path.write_bytes(b"not a png")
        with pytest.raises(InputFormatError):
            preprocess(path)

    def test_bad_levels(self):
        with pytest.raises(InputFormatError):
            GrayImage(np.array([[0, 8]]), levels=8)


class TestGlcm:
    def test_two_by_two(self):
        glcm = compute_glcm(GrayImage(np.array([[0, 1], [0, 1]]), levels=2))
        np.testing.assert_allclose(glcm.entries, [[0, 0.5], [0.5, 0]])

    def test_two_by_two_features(self):
        img = GrayImage(np.array([[0, 1], [0, 1]]), levels=2)
        f = extract_features(compute_glcm(img), img)
        assert f.contrast == pytest.approx(1.0)
        assert f.energy == pytest.approx(0.5)
        assert f.homogeneity == pytest.approx(0.5)
        assert f.correlation == pytest.approx(-1.0)

    def test_constant_image_features(self):
        img = GrayImage(np.full((16, 16), 3), levels=8)
        f = extract_features(compute_glcm(img), img)
        assert (f.contrast, f.correlation, f.energy, f.homogeneity) == (0.0, 1.0, 1.0, 1.0)
        assert (f.mean, f.std) == (3.0, 0.0)

    @pytest.mark.parametrize("offset", [(0, 1), (1, 0), (1, 1), (0, -2), (-1, 2)])
    def test_matches_oracle(self, rng, offset):
        px = rng.integers(0, 8, (13, 17))
        got = compute_glcm(GrayImage(px), offset).entries
        np.testing.assert_allclose(got, naive_glcm(px.tolist(), 8, *offset), atol=1e-15)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.integers(2, 12), st.integers(2, 12))
    def test_features_match_oracle(self, seed, h, w):
        px = np.random.default_rng(seed).integers(0, 8, (h, w))
        img = GrayImage(px)
        got = extract_features(compute_glcm(img), img).as_array()
        np.testing.assert_allclose(got, naive_features(px.tolist(), 8), atol=1e-12)

    def test_probability_properties(self, rng):
        p = compute_glcm(GrayImage(rng.integers(0, 8, (30, 30)))).entries
        assert p.sum() == pytest.approx(1.0, abs=1e-12)
        np.testing.assert_array_equal(p, p.T)
        assert p.min() >= 0

    def test_opposite_offsets_agree(self, rng):
        img = GrayImage(rng.integers(0, 8, (20, 20)))
        np.testing.assert_allclose(compute_glcm(img, (0, 1)).entries, compute_glcm(img, (0, -1)).entries)

    def test_periodic_translation_invariance(self, rng):
        # a horizontally periodic image is unchanged in texture when shifted by a period
        tile = rng.integers(0, 8, (12, 4))
        wide = np.tile(tile, (1, 6))
        a = GrayImage(wide[:, :16])
        b = GrayImage(wide[:, 4:20])
        np.testing.assert_allclose(compute_glcm(a).entries, compute_glcm(b).entries)

    def test_too_small_for_offset(self):
        with pytest.raises(DegenerateImageError):
            compute_glcm(GrayImage(np.zeros((1, 1), dtype=int)), (0, 1))

    def test_features_bounded(self, rng):
        img = GrayImage(rng.integers(0, 8, (40, 40)))
        f = extract_features(compute_glcm(img), img)
        assert 0 < f.energy <= 1 and 0 < f.homogeneity <= 1
        assert -1 - 1e-12 <= f.correlation <= 1 + 1e-12
        assert 0 <= f.contrast <= 49


class TestDataset:
    def test_directory_tree(self, tmp_path):
        write_texture_dataset(tmp_path, per_class=3, size=16)
        items = list_image_dataset(tmp_path)
        assert len(items) == 9
        X, labels, (lo, hi) = featurize_dataset(items, side=32)
        assert X.shape == (9, len(FEATURE_NAMES))
        assert sorted(set(labels)) == ["constant", "noise", "stripes"]
        np.testing.assert_array_equal(lo, X.min(axis=0))
        np.testing.assert_array_equal(hi, X.max(axis=0))
        assert np.all(np.isfinite(X))

    def test_constant_class_features(self, tmp_path):
        write_texture_dataset(tmp_path, per_class=2, size=16)
        items = [it for it in list_image_dataset(tmp_path) if it[1] == "constant"]
        X, _, _ = featurize_dataset(items, side=32)
        np.testing.assert_array_equal(X[:, 0], 0.0)
        np.testing.assert_array_equal(X[:, 5], 0.0)

    def test_all_failures_listed(self, tmp_path):
        (tmp_path / "a").mkdir()
        for name in ("x.png", "y.png"):
            (tmp_path / "a" / name).write_bytes(b"garbage")
        with pytest.raises(InputFormatError) as info:
            featurize_dataset(list_image_dataset(tmp_path))
        assert "x.png" in str(info.value) and "y.png" in str(info.value)

    def test_missing_directory(self, tmp_path):
        with pytest.raises(InputFormatError):
            list_image_dataset(tmp_path / "nope")

    def test_transformer(self, rng):
        images = [rng.integers(0, 256, (20, 20)).astype(np.uint8) for _ in range(3)]
        X = GlcmFeatureExtractor(side=None).fit_transform(images)
        np.testing.assert_array_equal(X[1], image_features(images[1], side=None).as_array())
        assert list(GlcmFeatureExtractor().get_feature_names_out()) == list(FEATURE_NAMES)


class TestCsv:
    def test_round_trip(self, tmp_path, rng):
        X = rng.normal(size=(5, 6))
        path = tmp_path / "f.csv"
        write_feature_csv(path, X, list("abcab"))
        back, labels = read_feature_csv(path)
        np.testing.assert_allclose(back, X, rtol=1e-9)
        assert labels == list("abcab")

    def test_lf_and_header(self, tmp_path):
        path = tmp_path / "f.csv"
        write_feature_csv(path, np.zeros((2, 6)), ["a", "b"])
        data = path.read_bytes()
        assert b"\r" not in data
        assert data.split(b"\n")[0].decode() == ",".join(CSV_HEADER)

    @pytest.mark.parametrize(
        "body",
        [
            "a,b\n1,2\n",
            ",".join(CSV_HEADER) + "\n1,2,3\n",
            ",".join(CSV_HEADER) + "\n1,2,3,4,5,x,a\n",
            ",".join(CSV_HEADER) + "\n1,2,3,4,5,nan,a\n",
        ],
    )
    def test_malformed(self, tmp_path, body):
        path = tmp_path / "f.csv"
        path.write_text(body)
        with pytest.raises(InputFormatError):
            read_feature_csv(path)
