"""Attack objectives computed from the victim's probability vector.

Log losses are floor-clamped at 1e-12 so traces stay finite; argmax ties
break toward the lowest index so runs are reproducible.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

__all__ = [
    "ProbVector",
    "LossKind",
    "Goal",
    "Untargeted",
    "Targeted",
    "flicker_loss",
    "cw_loss",
    "untargeted_ce",
    "targeted_ce",
    "evaluate_loss",
    "is_success",
    "DEFAULT_FLICKER_MARGIN",
    "LOG_CLAMP",
]

LOG_CLAMP = 1e-12
DEFAULT_FLICKER_MARGIN = 0.05


@dataclass(frozen=True)
class ProbVector:
    """K class probability scores, the only victim output the attack sees."""

    probs: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=np.float64).ravel()
        if p.size < 2:
            raise ValueError("need at least 2 classes")
        if np.any(p < -1e-9) or np.any(p > 1.0 + 1e-9):
            raise ValueError("probabilities must lie in [0, 1]")
        total = float(p.sum())
        if not (1.0 - 1e-3 <= total <= 1.0 + 1e-3):
            raise ValueError(f"probabilities must sum to ~1, got {total}")
        object.__setattr__(self, "probs", p)

    @property
    def k(self) -> int:
        return self.probs.size

    def argmax(self) -> int:
        # np.argmax breaks ties toward the lowest index
        return int(np.argmax(self.probs))


class LossKind(Enum):
    FLICKER = "flicker"
    CW = "cw"
    UNTARGETED_CE = "ce"
    TARGETED_CE = "targeted-ce"

    @classmethod
    def from_string(cls, s: str) -> "LossKind":
        for kind in cls:
            if kind.value == s:
                return kind
        raise ValueError(f"unknown loss {s!r} (expected one of {[k.value for k in cls]})")


@dataclass(frozen=True)
class Untargeted:
    y: int


@dataclass(frozen=True)
class Targeted:
    y_target: int


Goal = Untargeted | Targeted


def _check_label(p: ProbVector, y: int) -> None:
    if not (0 <= y < p.k):
        raise ValueError(f"label {y} out of range for {p.k} classes")


def _best_other(p: ProbVector, y: int) -> float:
    """Largest probability over labels != y.

    Used uniformly, whether or not the attack has already displaced y from
    the top; this coincides with the second-most-likely label while y still
    leads.
    """
    rest = np.delete(p.probs, y)
    return float(rest.max())


def flicker_loss(p: ProbVector, y: int, m: float = DEFAULT_FLICKER_MARGIN) -> float:
    """Hinge on the gap between p_y and the best other class, with margin m.

    K = p_y - p_y' + m; loss = [min(K^2 / m, K)]_+ . Zero exactly when the
    best other class leads p_y by at least the margin.
    """
    _check_label(p, y)
    if m <= 0:
        raise ValueError("flicker margin must be > 0")
    gap = float(p.probs[y]) - _best_other(p, y) + m
    return max(0.0, min(gap * gap / m, gap))


def cw_loss(p: ProbVector, y: int) -> float:
    """[p_y - max_{y' != y} p_y']_+"""
    _check_label(p, y)
    return max(0.0, float(p.probs[y]) - _best_other(p, y))


def untargeted_ce(p: ProbVector, y: int) -> float:
    """-log(1 - p_y), encouraging a lower p_y; clamped at the log floor."""
    _check_label(p, y)
    return -float(np.log(max(1.0 - float(p.probs[y]), LOG_CLAMP)))


def targeted_ce(p: ProbVector, y_target: int) -> float:
    """-log(p_target), clamped at the log floor."""
    _check_label(p, y_target)
    return -float(np.log(max(float(p.probs[y_target]), LOG_CLAMP)))


def evaluate_loss(kind: LossKind, p: ProbVector, goal: Goal,
                  flicker_margin: float = DEFAULT_FLICKER_MARGIN) -> float:
    if kind is LossKind.TARGETED_CE:
        if not isinstance(goal, Targeted):
            raise ValueError("targeted-ce requires a targeted goal")
        return targeted_ce(p, goal.y_target)
    if not isinstance(goal, Untargeted):
        raise ValueError(f"{kind.value} requires an untargeted goal")
    if kind is LossKind.FLICKER:
        return flicker_loss(p, goal.y, flicker_margin)
    if kind is LossKind.CW:
        return cw_loss(p, goal.y)
    return untargeted_ce(p, goal.y)


def is_success(p: ProbVector, goal: Goal) -> bool:
    top = p.argmax()
    if isinstance(goal, Untargeted):
        _check_label(p, goal.y)
        return top != goal.y
    _check_label(p, goal.y_target)
    return top == goal.y_target
