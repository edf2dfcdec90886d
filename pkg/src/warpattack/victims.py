"""Victim oracles: the query contract, synthetic victims with known
gradients, and a finite-difference ground-truth oracle.

The synthetic victims are desk-scale stand-ins for real video classifiers:
small enough that per-coordinate finite differences are feasible, but
motion-sensitive, so temporally structured perturbations matter.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import SeededRng, VideoTensor
from .losses import (
    DEFAULT_FLICKER_MARGIN,
    Goal,
    LOG_CLAMP,
    LossKind,
    ProbVector,
    Targeted,
    Untargeted,
    evaluate_loss,
)
from .warp import TransformFamily, TransformMatrix, WarpParams, build_matrix, trans_warp
from .core import NoiseFrame

__all__ = [
    "VictimInfo",
    "VictimOracle",
    "CountingOracle",
    "LinearSoftmaxVictim",
    "StructuredGradientVictim",
    "MovingBlobVictim",
    "QuadraticLossOracle",
    "fd_gradient",
    "make_blob_video",
    "softmax",
]


@dataclass(frozen=True)
class VictimInfo:
    k: int
    shape: tuple[int, int, int, int]
    concurrent_safe: bool = True


class VictimOracle:
    """query(x) -> ProbVector; stateless with respect to queries."""

    def info(self) -> VictimInfo:
        raise NotImplementedError

    def query(self, x: VideoTensor) -> ProbVector:
        raise NotImplementedError

    def _check_shape(self, x: VideoTensor) -> None:
        expected = self.info().shape
        if x.shape != expected:
            raise ValueError(f"expected video of shape {expected}, got {x.shape}")


class CountingOracle(VictimOracle):
    """Pass-through wrapper that counts queries."""

    def __init__(self, inner: VictimOracle):
        self.inner = inner
        self.queries = 0

    def info(self) -> VictimInfo:
        return self.inner.info()

    def query(self, x: VideoTensor) -> ProbVector:
        self.queries += 1
        return self.inner.query(x)


def softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - np.max(logits)
    e = np.exp(z)
    return e / e.sum()


class LinearSoftmaxVictim(VictimOracle):
    """probs = softmax(W x + b) on the flattened clip.

    Simple enough for closed-form gradients of every loss, which the
    finite-difference oracle cross-checks in tests.
    """

    def __init__(self, weights: np.ndarray, bias: np.ndarray,
                 shape: tuple[int, int, int, int]):
        w = np.asarray(weights, dtype=np.float64)
        b = np.asarray(bias, dtype=np.float64).ravel()
        n = int(np.prod(shape))
        if w.ndim != 2 or w.shape[1] != n or w.shape[0] != b.size or w.shape[0] < 2:
            raise ValueError(f"weights {w.shape} / bias {b.shape} inconsistent with shape {shape}")
        self.weights = w
        self.bias = b
        self.shape = tuple(shape)

    @classmethod
    def random(cls, shape: tuple[int, int, int, int], k: int, seed: int,
               scale: float = 1.0) -> "LinearSoftmaxVictim":
        rng = SeededRng(seed)
        n = int(np.prod(shape))
        w = rng.normal((k, n)) * scale / np.sqrt(n)
        b = rng.normal((k,)) * 0.1
        return cls(w, b, shape)

    def info(self) -> VictimInfo:
        return VictimInfo(k=self.weights.shape[0], shape=self.shape)

    def logits(self, x: VideoTensor) -> np.ndarray:
        self._check_shape(x)
        return self.weights @ x.data.ravel() + self.bias

    def query(self, x: VideoTensor) -> ProbVector:
        return ProbVector(softmax(self.logits(x)))

    def true_gradient(self, x: VideoTensor, loss: LossKind, goal: Goal,
                      flicker_margin: float = DEFAULT_FLICKER_MARGIN) -> np.ndarray:
        """Analytic d loss / d x via the softmax Jacobian.

        Valid away from the hinge/argmax kinks of the piecewise losses;
        tests construct their evaluation points accordingly.
        """
        p = softmax(self.logits(x))
        dl_dp = _loss_grad_wrt_probs(p, loss, goal, flicker_margin)
        # d p / d logits = diag(p) - p p^T
        dl_dz = p * dl_dp - p * float(p @ dl_dp)
        return (self.weights.T @ dl_dz).reshape(self.shape)


def _loss_grad_wrt_probs(p: np.ndarray, loss: LossKind, goal: Goal,
                         m: float) -> np.ndarray:
    grad = np.zeros_like(p)
    if loss is LossKind.TARGETED_CE:
        assert isinstance(goal, Targeted)
        t = goal.y_target
        if p[t] > LOG_CLAMP:
            grad[t] = -1.0 / p[t]
        return grad
    assert isinstance(goal, Untargeted)
    y = goal.y
    if loss is LossKind.UNTARGETED_CE:
        if 1.0 - p[y] > LOG_CLAMP:
            grad[y] = 1.0 / (1.0 - p[y])
        return grad
    rest = np.delete(p, y)
    y_prime = int(np.argmax(rest))
    if y_prime >= y:
        y_prime += 1
    gap = p[y] - p[y_prime]
    if loss is LossKind.CW:
        if gap > 0:
            grad[y] = 1.0
            grad[y_prime] = -1.0
        return grad
    # flicker
    kval = gap + m
    if kval <= 0:
        return grad
    dk = 2.0 * kval / m if kval < m else 1.0
    grad[y] = dk
    grad[y_prime] = -dk
    return grad


class StructuredGradientVictim(LinearSoftmaxVictim):
    """Linear-softmax victim whose true gradient is, by construction, a
    sequence of geometric transforms of one shared frame.

    Every class weight tensor is a scalar multiple of a single template
    whose frame t is ``warp_frame(base_frame, M_t)``; any loss gradient is
    then proportional to that template. The construction parameters are
    kept so tests can verify the slices against the warp directly.
    """

    def __init__(self, shape: tuple[int, int, int, int], k: int, seed: int,
                 family: TransformFamily = TransformFamily.TRANSLATION_DILATION,
                 logit_scale: float = 3.0):
        t, h, w, c = shape
        rng = SeededRng(seed)
        base = rng.normal((h, w, c))
        phi = rng.normal((t, family.dof))
        self.base_frame = base
        self.warp_params = WarpParams(family, phi)
        template = trans_warp(NoiseFrame(base), self.warp_params)
        norm = np.linalg.norm(template)
        if norm == 0.0:
            raise ValueError("degenerate template (all warps landed outside the frame)")
        self.template = template / norm
        self.betas = logit_scale * np.linspace(-1.0, 1.0, k)
        weights = np.outer(self.betas, self.template.ravel())
        super().__init__(weights, np.zeros(k), shape)


class MovingBlobVictim(VictimOracle):
    """Classifies the dominant motion direction of a clip.

    Scores correlate frame differences with the directional spatial
    derivative of the frames: a blob translating along class k's direction
    maximizes score k. Deterministic, smooth almost everywhere, and driven
    purely by motion, so temporally structured perturbations matter.
    """

    def __init__(self, shape: tuple[int, int, int, int], k: int = 4,
                 temperature: float = 0.5):
        if k < 2:
            raise ValueError("need at least 2 motion classes")
        self.shape = tuple(shape)
        self.k = k
        self.temperature = temperature
        angles = 2.0 * np.pi * np.arange(k) / k
        # (dy, dx) unit velocity per class
        self.directions = np.stack([np.sin(angles), np.cos(angles)], axis=1)

    def info(self) -> VictimInfo:
        return VictimInfo(k=self.k, shape=self.shape)

    def scores(self, x: VideoTensor) -> np.ndarray:
        self._check_shape(x)
        frames = x.data.mean(axis=3)  # (T, H, W)
        diffs = frames[1:] - frames[:-1]
        gy, gx = np.gradient(frames, axis=(1, 2))
        # mid-step spatial gradients pair with each temporal difference
        gy = 0.5 * (gy[1:] + gy[:-1])
        gx = 0.5 * (gx[1:] + gx[:-1])
        scores = np.empty(self.k)
        for j, (vy, vx) in enumerate(self.directions):
            scores[j] = -np.sum(diffs * (vy * gy + vx * gx))
        return scores

    def query(self, x: VideoTensor) -> ProbVector:
        return ProbVector(softmax(self.temperature * self.scores(x)))

    def true_gradient(self, x: VideoTensor, loss: LossKind, goal: Goal,
                      flicker_margin: float = DEFAULT_FLICKER_MARGIN,
                      fd_step: float = 1e-4) -> np.ndarray:
        def loss_at(v: np.ndarray) -> float:
            return evaluate_loss(loss, self.query(VideoTensor(v)), goal, flicker_margin)
        return fd_gradient(loss_at, x.data, fd_step)


def make_blob_video(rng: SeededRng, shape: tuple[int, int, int, int], label: int,
                    k: int = 4, sigma: float = 2.0, amplitude: float = 0.45,
                    background: float = 0.15, speed: float = 1.2) -> VideoTensor:
    """A Gaussian blob translating along class ``label``'s direction."""
    t, h, w, c = shape
    angles = 2.0 * np.pi * np.arange(k) / k
    vy, vx = np.sin(angles[label]), np.cos(angles[label])
    cy = h / 2.0 + rng.normal((1,))[0] * 1.0 - vy * speed * t / 2.0
    cx = w / 2.0 + rng.normal((1,))[0] * 1.0 - vx * speed * t / 2.0
    ys, xs = np.meshgrid(np.arange(h), np.arange(w), indexing="ij")
    frames = []
    for i in range(t):
        by = cy + vy * speed * i
        bx = cx + vx * speed * i
        blob = amplitude * np.exp(-((ys - by) ** 2 + (xs - bx) ** 2) / (2 * sigma**2))
        frames.append(background + blob)
    data = np.clip(np.stack(frames)[..., None] * np.ones((1, 1, 1, c)), 0.0, 1.0)
    return VideoTensor(data)


class QuadraticLossOracle:
    """Loss-only test oracle L(v) = ||v - v*||^2 / 2, with exact gradient.

    Not a probability-returning victim; used to verify the estimator
    against analytic directional derivatives.
    """

    def __init__(self, target: np.ndarray):
        self.target = np.asarray(target, dtype=np.float64)

    def loss(self, v: np.ndarray) -> float:
        return 0.5 * float(np.sum((v - self.target) ** 2))

    def true_gradient(self, v: np.ndarray) -> np.ndarray:
        return v - self.target


def fd_gradient(loss_fn, x: np.ndarray, step: float = 1e-4) -> np.ndarray:
    """Central finite differences per coordinate.

    The independent ground-truth oracle for estimator and analytic-gradient
    verification; O(2 * x.size) loss evaluations.
    """
    if step <= 0:
        raise ValueError("step must be > 0")
    x = np.asarray(x, dtype=np.float64)
    grad = np.zeros_like(x)
    flat = grad.ravel()
    base = x.copy().ravel()
    for j in range(base.size):
        orig = base[j]
        base[j] = orig + step
        hi = loss_fn(base.reshape(x.shape))
        base[j] = orig - step
        lo = loss_fn(base.reshape(x.shape))
        base[j] = orig
        flat[j] = (hi - lo) / (2.0 * step)
    return grad
