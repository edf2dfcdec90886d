"""Warp a shared noise frame through per-frame geometric transforms.

Coordinate convention (fixed, load-bearing for reproducibility):

* Each spatial axis of size N is normalized to [-1, 1] with pixel k's
  center at ``-1 + (2k + 1) / N``. The first coordinate is the row
  (height) axis, the second the column (width) axis.
* Sampling is pull-based: for every target pixel, its normalized
  coordinates are mapped through the 2x3 matrix to source coordinates
  in the input frame, which is bilinearly interpolated there. Forward
  (push) mapping would leave holes.
* Out-of-bounds source samples contribute zero (zero padding), so large
  translations slide the noise out of the frame entirely.

N(0,1)-sampled parameters are used directly as matrix entries in this
normalized space, where unit-scale entries produce meaningful transforms.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .core import NoiseFrame

__all__ = ["TransformFamily", "WarpParams", "TransformMatrix", "build_matrix", "warp_frame", "trans_warp"]


class TransformFamily(Enum):
    """Transform family and its per-frame degrees of freedom."""

    AFFINE = ("affine", 6)
    SIMILARITY = ("similarity", 4)
    TRANSLATION_DILATION = ("trans-dilation", 3)
    TRANSLATION = ("translation", 2)
    DILATION = ("dilation", 1)

    def __init__(self, key: str, dof: int):
        self.key = key
        self.dof = dof

    @classmethod
    def from_string(cls, s: str) -> "TransformFamily":
        for fam in cls:
            if fam.key == s:
                return fam
        raise ValueError(f"unknown transform family {s!r} (expected one of "
                         f"{[f.key for f in cls]})")


@dataclass(frozen=True)
class WarpParams:
    """Per-frame transform parameters, shape (T, D)."""

    family: TransformFamily
    phi: np.ndarray

    def __post_init__(self):
        phi = np.asarray(self.phi, dtype=np.float64)
        if phi.ndim != 2 or phi.shape[1] != self.family.dof:
            raise ValueError(
                f"phi must have shape (T, {self.family.dof}) for {self.family.key}, "
                f"got {phi.shape}")
        if not np.all(np.isfinite(phi)):
            raise ValueError("phi contains non-finite values")
        object.__setattr__(self, "phi", phi)

    @property
    def frames(self) -> int:
        return self.phi.shape[0]


@dataclass(frozen=True)
class TransformMatrix:
    """2x3 matrix; the homogeneous third row [0, 0, 1] is implicit."""

    m: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.m, dtype=np.float64)
        if m.shape != (2, 3):
            raise ValueError(f"expected a 2x3 matrix, got {m.shape}")
        if not np.all(np.isfinite(m)):
            raise ValueError("matrix contains non-finite entries")
        object.__setattr__(self, "m", m)


def build_matrix(family: TransformFamily, phi_t: np.ndarray) -> TransformMatrix:
    """Lay out a parameter vector as the family's 2x3 matrix.

    Families nest: a dilation is a translation-dilation with zero shifts,
    which is a similarity with zero rotation, which is an affine matrix.
    """
    p = np.asarray(phi_t, dtype=np.float64).ravel()
    if p.size != family.dof:
        raise ValueError(f"{family.key} needs {family.dof} parameters, got {p.size}")
    if family is TransformFamily.AFFINE:
        m = p.reshape(2, 3)
    elif family is TransformFamily.SIMILARITY:
        a, b, tx, ty = p
        m = np.array([[a, b, tx], [-b, a, ty]])
    elif family is TransformFamily.TRANSLATION_DILATION:
        s, tx, ty = p
        m = np.array([[s, 0.0, tx], [0.0, s, ty]])
    elif family is TransformFamily.TRANSLATION:
        tx, ty = p
        m = np.array([[1.0, 0.0, tx], [0.0, 1.0, ty]])
    else:  # DILATION
        s = p[0]
        m = np.array([[s, 0.0, 0.0], [0.0, s, 0.0]])
    return TransformMatrix(m)


def _pixel_centers(n: int) -> np.ndarray:
    return -1.0 + (2.0 * np.arange(n) + 1.0) / n


def warp_frame(frame: NoiseFrame, matrix: TransformMatrix) -> NoiseFrame:
    """Resample a frame through a transform matrix (pull, bilinear, zero pad)."""
    h, w, c = frame.shape
    if h < 2 or w < 2:
        raise ValueError("bilinear sampling needs H, W >= 2")
    m = matrix.m

    rows = _pixel_centers(h)
    cols = _pixel_centers(w)
    ty, tx = np.meshgrid(rows, cols, indexing="ij")  # target (row, col) coords

    src_y = m[0, 0] * ty + m[0, 1] * tx + m[0, 2]
    src_x = m[1, 0] * ty + m[1, 1] * tx + m[1, 2]

    # normalized -> continuous pixel index
    fy = (src_y + 1.0) * h / 2.0 - 0.5
    fx = (src_x + 1.0) * w / 2.0 - 0.5

    y0 = np.floor(fy).astype(np.int64)
    x0 = np.floor(fx).astype(np.int64)
    wy = fy - y0
    wx = fx - x0

    out = np.zeros((h, w, c))
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
        out += (wgt * valid)[..., None] * frame.data[yc, xc, :]
    return NoiseFrame(out)


def trans_warp(frame: NoiseFrame, params: WarpParams) -> np.ndarray:
    """Warp the shared frame through every per-frame transform.

    Returns the stacked (T, H, W, C) candidate direction.
    """
    frames = [
        warp_frame(frame, build_matrix(params.family, params.phi[t])).data
        for t in range(params.frames)
    ]
    return np.stack(frames, axis=0)
