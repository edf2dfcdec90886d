"""Fundamental tensor types, seeded sampling, and elementwise primitives.

Pixels are stored as reals in [0, 1]. Budgets quoted "out of N pixel values
(out of 255)" are divided by 255 on ingest, so the optimizer never touches
integer pixel values.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "VideoTensor",
    "NoiseFrame",
    "SeededRng",
    "sample_normal",
    "clip_perturbation",
    "sign",
    "linf_norm",
    "l2_normalize",
]


def _validate_array(data: np.ndarray, rank: int, name: str) -> np.ndarray:
    arr = np.asarray(data, dtype=np.float64)
    if arr.ndim != rank:
        raise ValueError(f"{name} must be rank {rank}, got shape {arr.shape}")
    if any(d < 1 for d in arr.shape):
        raise ValueError(f"{name} dimensions must all be >= 1, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


@dataclass(frozen=True)
class VideoTensor:
    """A (T, H, W, C) real-valued clip.

    Carries the attack state x / x_adv as well as same-shaped tensors
    (gradient estimates, directions, perturbations). Pixel-domain clips
    keep every element in [0, 1]; intermediate tensors are unconstrained.
    """

    data: np.ndarray

    def __post_init__(self):
        arr = _validate_array(self.data, 4, "VideoTensor")
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)

    @property
    def shape(self) -> tuple[int, int, int, int]:
        return self.data.shape

    def in_pixel_domain(self, atol: float = 1e-9) -> bool:
        return bool(self.data.min() >= -atol and self.data.max() <= 1.0 + atol)

    @staticmethod
    def zeros(shape: tuple[int, int, int, int]) -> "VideoTensor":
        return VideoTensor(np.zeros(shape))


@dataclass(frozen=True)
class NoiseFrame:
    """A single (H, W, C) frame, the shared noise that gets warped per frame."""

    data: np.ndarray

    def __post_init__(self):
        arr = _validate_array(self.data, 3, "NoiseFrame")
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.data.shape


class SeededRng:
    """Deterministic Gaussian source.

    Backed by numpy's PCG64 bit generator with the ziggurat-free
    ``standard_normal`` transform; identical seeds yield bit-identical
    streams across runs and platforms. ``draws`` counts scalars consumed,
    which lets tests assert search-space dimensionality.
    """

    algorithm = "pcg64"

    def __init__(self, seed: int):
        if not (0 <= int(seed) < 2**64):
            raise ValueError("seed must be a 64-bit unsigned integer")
        self.seed = int(seed)
        self._gen = np.random.Generator(np.random.PCG64(self.seed))
        self.draws = 0

    def normal(self, shape: tuple[int, ...]) -> np.ndarray:
        if any(d < 1 for d in shape):
            raise ValueError(f"all dims must be >= 1, got {shape}")
        out = self._gen.standard_normal(shape)
        self.draws += int(np.prod(shape))
        return out

    def uniform(self, shape: tuple[int, ...]) -> np.ndarray:
        if any(d < 1 for d in shape):
            raise ValueError(f"all dims must be >= 1, got {shape}")
        out = self._gen.random(shape)
        self.draws += int(np.prod(shape))
        return out

    def integer(self, low: int, high: int) -> int:
        self.draws += 1
        return int(self._gen.integers(low, high))

    def spawn(self, worker_index: int) -> "SeededRng":
        # parallel workers get independently seeded single-owner instances
        return SeededRng((self.seed + worker_index) % 2**64)


def sample_normal(rng: SeededRng, shape: tuple[int, ...]) -> np.ndarray:
    """i.i.d. standard normal tensor of the given shape; advances rng state."""
    return rng.normal(shape)


def clip_perturbation(x_adv: VideoTensor, x_orig: VideoTensor, rho_max: float) -> VideoTensor:
    """Project x_adv into the intersection of the L-inf ball around x_orig
    and the pixel domain [0, 1].

    The perturbation box is applied first, then the pixel box; since x_orig
    is itself feasible the intersection is nonempty and the result satisfies
    both constraints. Idempotent.
    """
    if x_adv.shape != x_orig.shape:
        raise ValueError(f"shape mismatch: {x_adv.shape} vs {x_orig.shape}")
    if rho_max <= 0:
        raise ValueError("rho_max must be > 0")
    delta = np.clip(x_adv.data - x_orig.data, -rho_max, rho_max)
    return VideoTensor(np.clip(x_orig.data + delta, 0.0, 1.0))


def sign(t: np.ndarray) -> np.ndarray:
    """Elementwise -1 / 0 / +1."""
    return np.sign(t)


def linf_norm(a: VideoTensor, b: VideoTensor) -> float:
    """Max absolute elementwise difference."""
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    return float(np.max(np.abs(a.data - b.data)))


def l2_normalize(t: np.ndarray) -> np.ndarray:
    """Rescale to unit L2 norm; all-zero input is an error."""
    norm = float(np.linalg.norm(t))
    if norm == 0.0:
        raise ValueError("cannot L2-normalize an all-zero tensor")
    return t / norm
