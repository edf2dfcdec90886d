"""Candidate search directions for the gradient estimator.

All samplers draw fresh randomness every iteration and return a unit-L2
direction; normalizing here is the one place direction scale matters for
the estimator, and keeps perturbation magnitudes comparable across
samplers in query-efficiency comparisons.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import NoiseFrame, SeededRng, l2_normalize, sample_normal
from .warp import TransformFamily, WarpParams, trans_warp

__all__ = [
    "DirectionSampler",
    "GeoTrapSampler",
    "OneNoiseSampler",
    "MultiNoiseSampler",
    "FlowPriorSampler",
    "sampler_from_string",
]


class DirectionSampler:
    """Interface: produce a unit-L2 (T, H, W, C) direction from an rng."""

    name = "base"

    def sample(self, rng: SeededRng, shape: tuple[int, int, int, int]) -> np.ndarray:
        raise NotImplementedError


@dataclass
class GeoTrapSampler(DirectionSampler):
    """Warp one shared noise frame through per-frame random transforms.

    Consumes H*W*C + T*D scalars from the rng, versus T*H*W*C for the
    unstructured sampler.
    """

    family: TransformFamily = TransformFamily.TRANSLATION_DILATION

    @property
    def name(self) -> str:
        return f"geotrap/{self.family.key}"

    def sample(self, rng, shape):
        t, h, w, c = shape
        r_frame = NoiseFrame(sample_normal(rng, (h, w, c)))
        phi = sample_normal(rng, (t, self.family.dof))
        pi = trans_warp(r_frame, WarpParams(self.family, phi))
        return l2_normalize(pi)


class OneNoiseSampler(DirectionSampler):
    """One noise frame tiled across all T frames."""

    name = "one-noise"

    def sample(self, rng, shape):
        t, h, w, c = shape
        r_frame = sample_normal(rng, (h, w, c))
        return l2_normalize(np.broadcast_to(r_frame, shape).copy())


class MultiNoiseSampler(DirectionSampler):
    """Fully independent noise, the unstructured T*H*W*C search space."""

    name = "multi-noise"

    def sample(self, rng, shape):
        return l2_normalize(sample_normal(rng, shape))


@dataclass
class FlowPriorSampler(DirectionSampler):
    """Displace one noise frame along externally supplied optical flow.

    ``flow`` holds per-frame dense displacement fields of shape
    (T, H, W, 2) or (T-1, H, W, 2), displacement in pixels (row, col);
    frames beyond the provided fields reuse the last field. Flow
    estimation itself is out of scope; fields come from GTT1 files.
    The noise frame is re-sampled every iteration, matching the other
    samplers.
    """

    flow: np.ndarray

    name = "flow"

    def __post_init__(self):
        flow = np.asarray(self.flow, dtype=np.float64)
        if flow.ndim != 4 or flow.shape[-1] != 2:
            raise ValueError(f"flow must have shape (T, H, W, 2), got {flow.shape}")
        if not np.all(np.isfinite(flow)):
            raise ValueError("flow contains non-finite values")
        self.flow = flow

    def sample(self, rng, shape):
        t, h, w, c = shape
        if self.flow.shape[1] != h or self.flow.shape[2] != w:
            raise ValueError(
                f"flow spatial dims {self.flow.shape[1:3]} do not match video ({h}, {w})")
        if self.flow.shape[0] not in (t, t - 1):
            raise ValueError(
                f"expected {t} or {t - 1} flow fields, got {self.flow.shape[0]}")
        r_frame = sample_normal(rng, (h, w, c))
        frames = []
        for i in range(t):
            field = self.flow[min(i, self.flow.shape[0] - 1)]
            frames.append(_displace(r_frame, field))
        return l2_normalize(np.stack(frames, axis=0))


def _displace(frame: np.ndarray, field: np.ndarray) -> np.ndarray:
    """Bilinear pull sampling at pixel + flow, zero padding outside."""
    h, w, _ = frame.shape
    ys, xs = np.meshgrid(np.arange(h), np.arange(w), indexing="ij")
    fy = ys + field[..., 0]
    fx = xs + field[..., 1]
    y0 = np.floor(fy).astype(np.int64)
    x0 = np.floor(fx).astype(np.int64)
    wy = fy - y0
    wx = fx - x0
    out = np.zeros_like(frame)
    for dy, dx, wgt in (
        (0, 0, (1 - wy) * (1 - wx)),
        (0, 1, (1 - wy) * wx),
        (1, 0, wy * (1 - wx)),
        (1, 1, wy * wx),
    ):
        yy = y0 + dy
        xx = x0 + dx
        valid = (yy >= 0) & (yy < h) & (xx >= 0) & (xx < w)
        yc = np.where(valid, yy, 0)
        xc = np.where(valid, xx, 0)
        out += (wgt * valid)[..., None] * frame[yc, xc, :]
    return out


def sampler_from_string(name: str, family: TransformFamily | None = None,
                        flow: np.ndarray | None = None) -> DirectionSampler:
    if name == "geotrap":
        return GeoTrapSampler(family or TransformFamily.TRANSLATION_DILATION)
    if name == "one-noise":
        return OneNoiseSampler()
    if name == "multi-noise":
        return MultiNoiseSampler()
    if name == "flow":
        if flow is None:
            raise ValueError("flow sampler requires a flow field")
        return FlowPriorSampler(flow)
    raise ValueError(f"unknown sampler {name!r}")
