import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from warpattack.core import NoiseFrame, SeededRng
from warpattack.warp import (
    TransformFamily,
    TransformMatrix,
    WarpParams,
    build_matrix,
    trans_warp,
    warp_frame,
)

from oracles import brute_force_warp

IDENTITY_AFFINE = np.array([1.0, 0.0, 0.0, 0.0, 1.0, 0.0])


def random_frame(seed, h=8, w=8, c=1):
    return NoiseFrame(SeededRng(seed).normal((h, w, c)))


class TestBuildMatrix:
    def test_affine_identity(self):
        m = build_matrix(TransformFamily.AFFINE, IDENTITY_AFFINE).m
        np.testing.assert_array_equal(m, [[1, 0, 0], [0, 1, 0]])

    def test_similarity_layout(self):
        a, b, c, d = 0.9, 0.3, -0.2, 0.5
        m = build_matrix(TransformFamily.SIMILARITY, [a, b, c, d]).m
        np.testing.assert_array_equal(m[0], [a, b, c])
        np.testing.assert_array_equal(m[1], [-b, a, d])

    def test_translation_dilation_off_diagonals_zero(self):
        m = build_matrix(TransformFamily.TRANSLATION_DILATION, [1.3, 0.1, -0.4]).m
        assert m[0, 1] == 0.0 and m[1, 0] == 0.0
        np.testing.assert_array_equal(m, [[1.3, 0, 0.1], [0, 1.3, -0.4]])

    def test_translation_and_dilation(self):
        np.testing.assert_array_equal(
            build_matrix(TransformFamily.TRANSLATION, [0.2, -0.3]).m,
            [[1, 0, 0.2], [0, 1, -0.3]])
        np.testing.assert_array_equal(
            build_matrix(TransformFamily.DILATION, [1.7]).m,
            [[1.7, 0, 0], [0, 1.7, 0]])

    def test_wrong_parameter_count(self):
        with pytest.raises(ValueError):
            build_matrix(TransformFamily.SIMILARITY, [1.0, 0.0])

    def test_families_nest_in_affine(self):
        # embedding each family's parameters into affine layout reproduces it
        cases = [
            (TransformFamily.SIMILARITY, [0.8, 0.2, 0.1, -0.3],
             [0.8, 0.2, 0.1, -0.2, 0.8, -0.3]),
            (TransformFamily.TRANSLATION_DILATION, [1.2, 0.1, 0.2],
             [1.2, 0, 0.1, 0, 1.2, 0.2]),
            (TransformFamily.TRANSLATION, [0.1, 0.2], [1, 0, 0.1, 0, 1, 0.2]),
            (TransformFamily.DILATION, [0.7], [0.7, 0, 0, 0, 0.7, 0]),
        ]
        for family, params, affine_params in cases:
            np.testing.assert_array_equal(
                build_matrix(family, params).m,
                build_matrix(TransformFamily.AFFINE, affine_params).m)


class TestWarpFrame:
    def test_identity_reproduces_input(self):
        frame = random_frame(0)
        out = warp_frame(frame, build_matrix(TransformFamily.AFFINE, IDENTITY_AFFINE))
        np.testing.assert_allclose(out.data, frame.data, atol=1e-6)

    def test_full_width_translation_is_zero(self):
        frame = random_frame(1)
        for shift in (2.0, -2.0, 3.5):
            m = build_matrix(TransformFamily.TRANSLATION, [shift, 0.0])
            assert np.all(warp_frame(frame, m).data == 0.0)
            m = build_matrix(TransformFamily.TRANSLATION, [0.0, shift])
            assert np.all(warp_frame(frame, m).data == 0.0)

    def test_matches_brute_force_oracle(self):
        rng = SeededRng(99)
        for _ in range(50):
            frame = NoiseFrame(rng.normal((8, 8, 1)))
            m = rng.normal((2, 3))
            got = warp_frame(frame, TransformMatrix(m)).data
            want = brute_force_warp(frame.data, m)
            np.testing.assert_allclose(got, want, atol=1e-5)

    def test_multichannel_channels_independent(self):
        rng = SeededRng(5)
        frame = NoiseFrame(rng.normal((6, 7, 3)))
        m = TransformMatrix(rng.normal((2, 3)))
        out = warp_frame(frame, m)
        for ch in range(3):
            single = NoiseFrame(frame.data[:, :, ch:ch + 1])
            np.testing.assert_allclose(out.data[:, :, ch:ch + 1],
                                       warp_frame(single, m).data, atol=1e-12)

    def test_too_small_frame_rejected(self):
        with pytest.raises(ValueError):
            warp_frame(NoiseFrame(np.zeros((1, 4, 1))),
                       build_matrix(TransformFamily.DILATION, [1.0]))

    @given(seed=st.integers(0, 10_000), scale=st.floats(-3, 3, allow_nan=False))
    @settings(max_examples=30, deadline=None)
    def test_linear_in_frame(self, seed, scale):
        rng = SeededRng(seed)
        f1 = rng.normal((6, 6, 1))
        f2 = rng.normal((6, 6, 1))
        m = TransformMatrix(rng.normal((2, 3)))
        combined = warp_frame(NoiseFrame(scale * f1 + 0.5 * f2), m).data
        parts = scale * warp_frame(NoiseFrame(f1), m).data \
            + 0.5 * warp_frame(NoiseFrame(f2), m).data
        np.testing.assert_allclose(combined, parts, atol=1e-5)
        assert np.all(np.isfinite(combined))


class TestTransWarp:
    def test_identity_params_reproduce_frame(self):
        frame = random_frame(2)
        phi = np.tile(IDENTITY_AFFINE, (3, 1))
        pi = trans_warp(frame, WarpParams(TransformFamily.AFFINE, phi))
        assert pi.shape == (3, 8, 8, 1)
        for t in range(3):
            np.testing.assert_allclose(pi[t], frame.data, atol=1e-6)

    def test_pure_function(self):
        frame = random_frame(3)
        params = WarpParams(TransformFamily.SIMILARITY, SeededRng(4).normal((4, 4)))
        np.testing.assert_array_equal(trans_warp(frame, params),
                                      trans_warp(frame, params))

    def test_dilation_sequence_matches_oracle(self):
        frame = random_frame(6)
        params = WarpParams(TransformFamily.DILATION, np.array([[1.0], [2.0]]))
        pi = trans_warp(frame, params)
        np.testing.assert_allclose(pi[0], frame.data, atol=1e-6)
        want = brute_force_warp(frame.data, np.array([[2.0, 0, 0], [0, 2.0, 0]]))
        np.testing.assert_allclose(pi[1], want, atol=1e-5)

    def test_phi_shape_validated(self):
        with pytest.raises(ValueError):
            WarpParams(TransformFamily.AFFINE, np.zeros((3, 4)))
