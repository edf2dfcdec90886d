import numpy as np
import pytest

from warpattack.core import SeededRng
from warpattack.samplers import (
    FlowPriorSampler,
    GeoTrapSampler,
    MultiNoiseSampler,
    OneNoiseSampler,
    sampler_from_string,
)
from warpattack.warp import TransformFamily

SHAPE = (4, 8, 8, 1)


@pytest.mark.parametrize("sampler", [
    GeoTrapSampler(TransformFamily.AFFINE),
    GeoTrapSampler(TransformFamily.DILATION),
    OneNoiseSampler(),
    MultiNoiseSampler(),
    FlowPriorSampler(np.zeros((4, 8, 8, 2))),
])
def test_unit_norm_finite_deterministic(sampler):
    pi = sampler.sample(SeededRng(7), SHAPE)
    assert pi.shape == SHAPE
    assert np.all(np.isfinite(pi))
    assert np.linalg.norm(pi) == pytest.approx(1.0, abs=1e-6)
    np.testing.assert_array_equal(pi, sampler.sample(SeededRng(7), SHAPE))
    assert not np.array_equal(pi, sampler.sample(SeededRng(8), SHAPE))


def test_one_noise_frames_identical():
    pi = OneNoiseSampler().sample(SeededRng(0), SHAPE)
    for t in range(1, SHAPE[0]):
        np.testing.assert_array_equal(pi[t], pi[0])


def test_zero_flow_equals_one_noise():
    flow = FlowPriorSampler(np.zeros((4, 8, 8, 2)))
    np.testing.assert_allclose(flow.sample(SeededRng(3), SHAPE),
                               OneNoiseSampler().sample(SeededRng(3), SHAPE),
                               atol=1e-12)


def test_flow_shifts_noise_by_pixels():
    # flow of +1 row everywhere pulls the noise up by one pixel row
    flow = np.zeros((4, 8, 8, 2))
    flow[..., 0] = 1.0
    pi = FlowPriorSampler(flow).sample(SeededRng(3), SHAPE)
    r_frame = SeededRng(3).normal((8, 8, 1))
    shifted = np.zeros_like(r_frame)
    shifted[:-1] = r_frame[1:]
    expected = np.stack([shifted] * 4)
    expected /= np.linalg.norm(expected)
    np.testing.assert_allclose(pi, expected, atol=1e-9)


def test_flow_accepts_t_minus_1_fields():
    flow = np.zeros((3, 8, 8, 2))
    pi = FlowPriorSampler(flow).sample(SeededRng(1), SHAPE)
    assert pi.shape == SHAPE


def test_flow_shape_mismatch_errors():
    with pytest.raises(ValueError):
        FlowPriorSampler(np.zeros((4, 8, 8, 3)))
    sampler = FlowPriorSampler(np.zeros((4, 6, 6, 2)))
    with pytest.raises(ValueError):
        sampler.sample(SeededRng(0), SHAPE)
    with pytest.raises(ValueError):
        FlowPriorSampler(np.zeros((2, 8, 8, 2))).sample(SeededRng(0), SHAPE)


def test_search_space_dimensionality():
    t, h, w, c = SHAPE
    rng = SeededRng(0)
    GeoTrapSampler(TransformFamily.TRANSLATION_DILATION).sample(rng, SHAPE)
    assert rng.draws == h * w * c + t * 3

    rng = SeededRng(0)
    MultiNoiseSampler().sample(rng, SHAPE)
    assert rng.draws == t * h * w * c

    rng = SeededRng(0)
    OneNoiseSampler().sample(rng, SHAPE)
    assert rng.draws == h * w * c


def test_geotrap_identity_dilation_degenerates_to_one_noise():
    class PinnedDilation(GeoTrapSampler):
        def sample(self, rng, shape):
            t, h, w, c = shape
            from warpattack.core import NoiseFrame, l2_normalize, sample_normal
            from warpattack.warp import WarpParams, trans_warp
            r_frame = NoiseFrame(sample_normal(rng, (h, w, c)))
            phi = np.ones((t, 1))  # dilation factor pinned to identity
            return l2_normalize(trans_warp(r_frame, WarpParams(self.family, phi)))

    pinned = PinnedDilation(TransformFamily.DILATION)
    np.testing.assert_allclose(pinned.sample(SeededRng(5), SHAPE),
                               OneNoiseSampler().sample(SeededRng(5), SHAPE),
                               atol=1e-6)


def test_sampler_from_string():
    assert sampler_from_string("multi-noise").name == "multi-noise"
    geo = sampler_from_string("geotrap", family=TransformFamily.AFFINE)
    assert geo.name == "geotrap/affine"
    with pytest.raises(ValueError):
        sampler_from_string("flow")
    with pytest.raises(ValueError):
        sampler_from_string("nope")
