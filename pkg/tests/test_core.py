import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from warpattack.core import (
    NoiseFrame,
    SeededRng,
    VideoTensor,
    clip_perturbation,
    l2_normalize,
    linf_norm,
    sample_normal,
    sign,
)

SHAPE = (2, 4, 4, 1)

finite_videos = arrays(
    np.float64, SHAPE,
    elements=st.floats(-2.0, 3.0, allow_nan=False, allow_infinity=False))

pixel_videos = arrays(
    np.float64, SHAPE,
    elements=st.floats(0.0, 1.0, allow_nan=False, allow_infinity=False))


class TestSeededRng:
    def test_same_seed_bit_identical(self):
        a = SeededRng(7)
        b = SeededRng(7)
        first_a, second_a = sample_normal(a, (2,)), sample_normal(a, (2,))
        first_b, second_b = sample_normal(b, (2,)), sample_normal(b, (2,))
        assert not np.array_equal(first_a, second_a)
        np.testing.assert_array_equal(first_a, first_b)
        np.testing.assert_array_equal(second_a, second_b)

    def test_distinct_seeds_differ(self):
        assert not np.array_equal(sample_normal(SeededRng(1), (8,)),
                                  sample_normal(SeededRng(2), (8,)))

    def test_standard_normal_statistics(self):
        draws = sample_normal(SeededRng(123), (10000,))
        assert abs(draws.mean()) < 0.05
        assert abs(draws.var() - 1.0) < 0.1

    def test_zero_dim_rejected(self):
        with pytest.raises(ValueError):
            sample_normal(SeededRng(0), (0,))

    def test_seed_range(self):
        with pytest.raises(ValueError):
            SeededRng(-1)
        with pytest.raises(ValueError):
            SeededRng(2**64)

    def test_draw_accounting(self):
        rng = SeededRng(5)
        sample_normal(rng, (3, 4))
        rng.uniform((2,))
        assert rng.draws == 14

    def test_spawned_workers_independent(self):
        base = SeededRng(10)
        w0, w1 = base.spawn(0), base.spawn(1)
        assert np.array_equal(sample_normal(w0, (4,)), sample_normal(SeededRng(10), (4,)))
        assert not np.array_equal(sample_normal(SeededRng(10), (4,)), sample_normal(w1, (4,)))


class TestTensorTypes:
    def test_video_requires_rank_4(self):
        with pytest.raises(ValueError):
            VideoTensor(np.zeros((4, 4)))

    def test_video_rejects_nan(self):
        data = np.zeros(SHAPE)
        data[0, 0, 0, 0] = np.nan
        with pytest.raises(ValueError):
            VideoTensor(data)

    def test_video_rejects_zero_dim(self):
        with pytest.raises(ValueError):
            VideoTensor(np.zeros((0, 4, 4, 1)))

    def test_video_immutable(self):
        v = VideoTensor(np.zeros(SHAPE))
        with pytest.raises(ValueError):
            v.data[0, 0, 0, 0] = 1.0

    def test_noise_frame_rank(self):
        NoiseFrame(np.zeros((4, 4, 1)))
        with pytest.raises(ValueError):
            NoiseFrame(np.zeros(SHAPE))


class TestClipPerturbation:
    def test_zero_perturbation_unchanged(self):
        x = VideoTensor(np.full(SHAPE, 0.5))
        np.testing.assert_array_equal(clip_perturbation(x, x, 10 / 255).data, x.data)

    def test_saturating_clamp(self):
        x = VideoTensor(np.full(SHAPE, 0.5))
        adv = VideoTensor(np.full(SHAPE, 0.9))
        out = clip_perturbation(adv, x, 10 / 255)
        np.testing.assert_allclose(out.data, 0.5 + 10 / 255)

    def test_pixel_domain_clamp(self):
        x = VideoTensor(np.zeros(SHAPE))
        adv = VideoTensor(np.full(SHAPE, -0.2))
        out = clip_perturbation(adv, x, 16 / 255)
        np.testing.assert_array_equal(out.data, 0.0)

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            clip_perturbation(VideoTensor(np.zeros(SHAPE)),
                              VideoTensor(np.zeros((3, 4, 4, 1))), 0.1)

    @given(adv=finite_videos, orig=pixel_videos,
           rho=st.floats(1 / 255, 64 / 255))
    @settings(max_examples=50, deadline=None)
    def test_both_constraints_and_idempotence(self, adv, orig, rho):
        x_adv, x = VideoTensor(adv), VideoTensor(orig)
        out = clip_perturbation(x_adv, x, rho)
        assert linf_norm(out, x) <= rho + 1e-9
        assert out.data.min() >= 0.0 and out.data.max() <= 1.0
        again = clip_perturbation(out, x, rho)
        np.testing.assert_array_equal(again.data, out.data)


class TestElementwise:
    def test_sign_values(self):
        np.testing.assert_array_equal(sign(np.array([-3.2, 0.0, 7.1])), [-1, 0, 1])

    def test_sign_all_zero(self):
        np.testing.assert_array_equal(sign(np.zeros(5)), np.zeros(5))

    @given(t=arrays(np.float64, (8,), elements=st.floats(-5, 5, allow_nan=False)))
    def test_sign_idempotent(self, t):
        np.testing.assert_array_equal(sign(sign(t)), sign(t))

    def test_linf_equal_is_zero(self):
        x = VideoTensor(np.full(SHAPE, 0.3))
        assert linf_norm(x, x) == 0.0

    def test_linf_single_element(self):
        a = np.full(SHAPE, 0.5)
        b = a.copy()
        b[1, 2, 3, 0] -= 0.3
        assert linf_norm(VideoTensor(a), VideoTensor(b)) == pytest.approx(0.3)

    def test_l2_normalize_unit_norm(self):
        t = sample_normal(SeededRng(3), SHAPE)
        assert np.linalg.norm(l2_normalize(t)) == pytest.approx(1.0, abs=1e-6)

    def test_l2_normalize_zero_errors(self):
        with pytest.raises(ValueError):
            l2_normalize(np.zeros(4))
