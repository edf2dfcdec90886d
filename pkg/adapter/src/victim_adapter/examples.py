"""Example model entrypoints for demos and tests.

Each function maps a (T,H,W,C) float array to K scores, matching the
`module:function` entrypoint contract. The linear-softmax model reads its
weights from an .npz file named by the VICTIM_ADAPTER_NPZ environment
variable (keys: weights (K,N), bias (K)).
"""
from __future__ import annotations

import os
from functools import lru_cache

import numpy as np

__all__ = ["uniform_probs", "linear_logits", "raises_on_nonzero"]


def uniform_probs(x: np.ndarray) -> np.ndarray:
    """Constant model: uniform probabilities over 4 classes."""
    return np.full(4, 0.25)


@lru_cache(maxsize=1)
def _load_npz(path: str):
    data = np.load(path)
    return np.asarray(data["weights"], dtype=np.float64), \
        np.asarray(data["bias"], dtype=np.float64)


def linear_logits(x: np.ndarray) -> np.ndarray:
    """Logits W x + b from the npz named by VICTIM_ADAPTER_NPZ."""
    weights, bias = _load_npz(os.environ["VICTIM_ADAPTER_NPZ"])
    return weights @ np.asarray(x, dtype=np.float64).ravel() + bias


def raises_on_nonzero(x: np.ndarray) -> np.ndarray:
    """Misbehaving model used to test the 500 error path: it survives the
    startup probe (all-zeros input) but fails on real queries."""
    if np.any(np.asarray(x) != 0.0):
        raise RuntimeError("secret internal failure detail")
    return np.full(4, 0.25)
