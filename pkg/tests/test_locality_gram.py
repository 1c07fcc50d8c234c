import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tisvm.kernels import (GramMatrix, KernelSpec, Linear, Locality, LocalityLayer, Polynomial,
                           cross_kernel, gram_matrix, kernel_block, layer_maps, load_gram,
                           locality_kernel, poly_kernel, save_gram, top_layer, two_layer_locality)
from tisvm.transforms import translation_group


def brute_locality(x, y, k1, d1, d2, padding=0):
    """Direct 1-D two-layer evaluation with explicit loops."""
    prod = np.pad(np.asarray(x) * np.asarray(y), padding)
    width = k1 + 1
    inner = [(1 + prod[j:j + width].sum()) ** d1 for j in range(len(prod) - width + 1)]
    return (1 + sum(inner)) ** d2


class TestLocalityKernel:
    def test_one_dimensional_example(self):
        layers = [LocalityLayer(1, 1), top_layer(1)]
        assert locality_kernel([1.0, 0.0, 1.0], [1.0, 0.0, 1.0], layers) == 5.0

    def test_all_zero_example(self):
        layers = [LocalityLayer(1, 2), top_layer(2)]
        assert locality_kernel(np.zeros(3), np.zeros(3), layers) == 9.0

    @pytest.mark.parametrize("low_memory", [False, True])
    def test_matches_brute_force(self, rng, low_memory):
        x, y = rng.normal(size=(2, 9))
        layers = [LocalityLayer(2, 2, padding=1), top_layer(3)]
        got = locality_kernel(x, y, layers, low_memory=low_memory)
        assert got == pytest.approx(brute_locality(x, y, 2, 2, 3, padding=1), rel=1e-12)

    def test_low_memory_agrees_in_2d(self, rng):
        x, y = rng.random(size=(2, 6, 5))
        loc = Locality((LocalityLayer(2, 2, padding=1, stride=2), LocalityLayer(1, 2), top_layer(2)))
        assert locality_kernel(x, y, loc, low_memory=True) == pytest.approx(locality_kernel(x, y, loc), rel=1e-12)

    def test_window_of_one_pixel(self, rng):
        x, y = rng.normal(size=(2, 4))
        got = locality_kernel(x, y, [LocalityLayer(0, 2), top_layer(1)])
        assert got == pytest.approx(1 + np.sum((1 + x * y) ** 2), rel=1e-12)

    def test_depends_only_on_product(self, rng):
        x, y = rng.normal(size=(2, 5, 5))
        loc = two_layer_locality(3)
        assert locality_kernel(x, y, loc) == pytest.approx(locality_kernel(x * y, np.ones_like(x), loc), rel=1e-13)

    def test_top_only_is_polynomial(self, rng):
        x, y = rng.normal(size=(2, 4, 4))
        assert locality_kernel(x, y, [top_layer(3, 0.5)]) == pytest.approx(poly_kernel(x, y, 0.5, 3), rel=1e-13)

    def test_receptive_field_overflow(self):
        with pytest.raises(ValueError, match="receptive field"):
            locality_kernel(np.ones((3, 3)), np.ones((3, 3)), [LocalityLayer(5, 2), top_layer(2)])

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            locality_kernel(np.ones(3), np.ones(4), [top_layer(1)])

    def test_layer_map_shapes(self, rng):
        # width k1 + 1 = 6 with padding 2: 28 + 4 - 6 + 1 = 27 outputs per axis
        prod = rng.random((28, 28))
        maps = layer_maps(prod, two_layer_locality(), ndim=2)
        assert maps[0].shape == (27, 27)

    def test_normalized_gamma(self):
        # gamma=None divides each window sum by its term count
        x = np.ones(4)
        layers = [LocalityLayer(1, 1, gamma=None), top_layer(1, gamma=None)]
        assert locality_kernel(x, x, layers) == pytest.approx(1 + (3 * 2) / 3)


class TestGram:
    def test_single_sample(self):
        g = gram_matrix(np.array([[[1.0, 2.0]]]), KernelSpec(Linear()))
        np.testing.assert_array_equal(g.entries, [[2.5]])

    def test_matches_direct_poly(self, rng):
        imgs = rng.normal(size=(3, 4, 4))
        g = gram_matrix(imgs, KernelSpec(Polynomial(0.2, 3)))
        for i in range(3):
            for j in range(3):
                assert g.entries[i, j] == pytest.approx(poly_kernel(imgs[i], imgs[j], 0.2, 3), rel=1e-13)

    @pytest.mark.parametrize("spec", [KernelSpec(Polynomial(), "best", translation_group()),
                                      KernelSpec(two_layer_locality(3))])
    def test_workers_bitwise_identical(self, rng, spec):
        imgs = rng.random((70, 6, 6))
        a = gram_matrix(imgs, spec, workers=1, tile=16).entries
        b = gram_matrix(imgs, spec, workers=4, tile=16).entries
        assert a.tobytes() == b.tobytes()

    def test_symmetric_and_read_only(self, rng):
        g = gram_matrix(rng.normal(size=(10, 3, 3)), KernelSpec(Polynomial(), "best", translation_group()), tile=4)
        assert np.array_equal(g.entries, g.entries.T)
        with pytest.raises(ValueError):
            g.entries[0, 0] = 1.0

    def test_tile_size_irrelevant(self, rng):
        imgs = rng.normal(size=(9, 4, 4))
        spec = KernelSpec(Polynomial(), "best", translation_group())
        a = gram_matrix(imgs, spec, tile=2).entries
        b = gram_matrix(imgs, spec, tile=32).entries
        np.testing.assert_allclose(a, b, rtol=1e-14)

    def test_cross_kernel_shape(self, rng):
        spec = KernelSpec(Linear())
        A, B = rng.normal(size=(4, 3, 3)), rng.normal(size=(7, 3, 3))
        K = cross_kernel(spec, A, B, tile=3, workers=2)
        np.testing.assert_allclose(K, kernel_block(spec, A, B), rtol=1e-14)

    def test_save_load_round_trip(self, rng, tmp_path):
        spec = KernelSpec(Polynomial(), "best", translation_group())
        g = gram_matrix(rng.normal(size=(6, 4, 4)), spec)
        path = tmp_path / "g.bin"
        save_gram(path, g)
        back = load_gram(path, spec)
        assert back.entries.tobytes() == g.entries.tobytes()
        assert back.fingerprint == g.fingerprint
        with pytest.raises(ValueError):
            load_gram(path, KernelSpec(Linear()))

    def test_csv_export(self, rng, tmp_path):
        g = gram_matrix(rng.normal(size=(3, 2, 2)), KernelSpec())
        g.to_csv(tmp_path / "g.csv")
        back = np.loadtxt(tmp_path / "g.csv", delimiter=",")
        np.testing.assert_allclose(back, g.entries, rtol=1e-15)

    def test_submatrix(self, rng):
        g = gram_matrix(rng.normal(size=(5, 2, 2)), KernelSpec())
        np.testing.assert_array_equal(g.submatrix([0, 3]), g.entries[np.ix_([0, 3], [0, 3])])

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            gram_matrix(np.array([[[np.nan]]]), KernelSpec())

    @settings(max_examples=20, deadline=None)
    @given(st.integers(0, 2 ** 31))
    def test_linear_gram_is_psd(self, seed):
        imgs = np.random.default_rng(seed).normal(size=(6, 3, 3))
        g = gram_matrix(imgs, KernelSpec(Linear()))
        assert np.linalg.eigvalsh(g.entries).min() > -1e-10

    def test_isinstance(self, rng):
        assert isinstance(gram_matrix(rng.normal(size=(2, 2, 2)), KernelSpec()), GramMatrix)
