"""Two-query antithetic estimation of the surrogate-loss gradient.

The running estimate g is probed at g + delta*pi and g - delta*pi; the two
victim losses at x + eps*w give a rank-1 update along pi. The numerator is
oriented so that the descent step g <- g - eta * delta_tensor moves g
toward the true gradient (equivalently, -delta_tensor has nonnegative
expected cosine with it), which is what makes the outer sign-update attack
a descent on the attack loss.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .core import VideoTensor
from .losses import Goal, LossKind, evaluate_loss
from .victims import VictimOracle

__all__ = ["EstimatorState", "grad_est", "update_g", "oracle_loss_fn", "OracleFailure"]


class OracleFailure(RuntimeError):
    """Raised when the victim cannot be queried; carries partial accounting."""

    def __init__(self, message: str, queries_used: int = 0):
        super().__init__(message)
        self.queries_used = queries_used


@dataclass(frozen=True)
class EstimatorState:
    """Running gradient estimate plus the probe step sizes.

    epsilon: image-space query step; delta: antithetic step along pi;
    eta: learning rate for the g update.
    """

    g: np.ndarray
    epsilon: float = 0.1
    delta: float = 0.1
    eta: float = 0.1

    def __post_init__(self):
        if self.epsilon <= 0 or self.delta <= 0 or self.eta <= 0:
            raise ValueError("epsilon, delta, eta must all be > 0")
        if not np.all(np.isfinite(self.g)):
            raise ValueError("g contains non-finite values")

    @staticmethod
    def initial(shape: tuple[int, int, int, int], epsilon: float = 0.1,
                delta: float = 0.1, eta: float = 0.1) -> "EstimatorState":
        return EstimatorState(np.zeros(shape), epsilon, delta, eta)


def oracle_loss_fn(oracle: VictimOracle, kind: LossKind, goal: Goal,
                   flicker_margin: float = 0.05, clamp: bool = True):
    """Build the scalar loss the estimator probes.

    Query inputs are pixel-clamped to [0, 1] before submission so victims
    never see out-of-range images; the loss is computed on what was sent.
    """

    def loss(v: np.ndarray) -> float:
        sent = np.clip(v, 0.0, 1.0) if clamp else v
        try:
            p = oracle.query(VideoTensor(sent))
        except Exception as exc:  # transport/shape failures surface uniformly
            raise OracleFailure(str(exc)) from exc
        return evaluate_loss(kind, p, goal, flicker_margin)

    return loss


def grad_est(x: VideoTensor, state: EstimatorState, pi: np.ndarray,
             loss_fn) -> tuple[np.ndarray, int, tuple[float, float]]:
    """Estimate the surrogate-loss gradient with exactly two loss probes.

    Returns (delta_tensor, queries_used, (L1, L2)) with
    L1 = L(x + eps*(g - delta*pi)), L2 = L(x + eps*(g + delta*pi)) and
    delta_tensor = (L1 - L2) * pi / (eps * delta).
    """
    if state.g.shape != x.shape or pi.shape != x.shape:
        raise ValueError("x, g, and pi shapes must match")
    w1 = state.g + state.delta * pi
    w2 = state.g - state.delta * pi
    try:
        l1 = loss_fn(x.data + state.epsilon * w2)
    except OracleFailure as exc:
        exc.queries_used = 0
        raise
    try:
        l2 = loss_fn(x.data + state.epsilon * w1)
    except OracleFailure as exc:
        exc.queries_used = 1
        raise
    delta_tensor = (l1 - l2) / (state.epsilon * state.delta) * pi
    return delta_tensor, 2, (l1, l2)


def update_g(state: EstimatorState, delta_tensor: np.ndarray) -> EstimatorState:
    """One descent step on the surrogate loss: g <- g - eta * delta_tensor."""
    if delta_tensor.shape != state.g.shape:
        raise ValueError("delta tensor shape must match g")
    return replace(state, g=state.g - state.eta * delta_tensor)
