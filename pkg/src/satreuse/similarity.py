"""Input preprocessing and the two similarity measures used for reuse gating.

Structural similarity is computed with global statistics (one mean/variance
per image, not a sliding window) over the resized, pre-normalization pixel
grid; cosine similarity runs on the unit-normalized vectors.
"""

from __future__ import annotations

import dataclasses

import numpy as np

from .domain import InputData, PreprocessedInput
from .errors import DegenerateInputError, DimensionMismatchError

# Conventional stabilizers for dynamic range L = 1 (pixels are in [0, 1]).
_L = 1.0


@dataclasses.dataclass(frozen=True)
class SsimConstants:
    """Positive stabilizers for the three structural-similarity factors."""

    c1: float = (0.01 * _L) ** 2
    c2: float = (0.03 * _L) ** 2
    c3: float = (0.03 * _L) ** 2 / 2.0

    def __post_init__(self):
        if self.c1 <= 0 or self.c2 <= 0 or self.c3 <= 0:
            raise ValueError("stabilizers must be strictly positive")


def resize_bilinear(grid: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Bilinear resample with half-pixel-center sampling and edge clamping.

    Identity when the shape already matches, so repeated preprocessing of an
    already-resized image is exact.
    """
    grid = np.asarray(grid, dtype=np.float64)
    in_h, in_w = grid.shape
    if (in_h, in_w) == (out_h, out_w):
        return grid.copy()

    def axis_coords(n_out: int, n_in: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        src = (np.arange(n_out) + 0.5) * (n_in / n_out) - 0.5
        lo = np.clip(np.floor(src).astype(np.int64), 0, n_in - 1)
        hi = np.clip(lo + 1, 0, n_in - 1)
        frac = np.clip(src - lo, 0.0, 1.0)
        return lo, hi, frac

    r0, r1, rf = axis_coords(out_h, in_h)
    c0, c1, cf = axis_coords(out_w, in_w)
    rf = rf[:, None]
    cf = cf[None, :]
    top = grid[np.ix_(r0, c0)] * (1 - cf) + grid[np.ix_(r0, c1)] * cf
    bot = grid[np.ix_(r1, c0)] * (1 - cf) + grid[np.ix_(r1, c1)] * cf
    return top * (1 - rf) + bot * rf


def preprocess(d: InputData, target_dims: tuple[int, int]) -> PreprocessedInput:
    """Resize to ``target_dims`` (width, height), flatten row-major, unit-normalize."""
    width, height = target_dims
    resized = resize_bilinear(d.pixels, height, width)
    flat = resized.ravel()
    norm = float(np.linalg.norm(flat))
    if norm == 0.0:
        raise DegenerateInputError("all-zero image cannot be normalized")
    return PreprocessedInput(vector=flat / norm, dims=(width, height), norm=norm)


def ssim(x: PreprocessedInput, y: PreprocessedInput, k: SsimConstants = SsimConstants()) -> float:
    """Three-factor structural similarity over whole-image statistics.

    Uses population moments (divide by N). Returns a value in [-1, 1];
    identical inputs score exactly 1 because each factor's numerator and
    denominator are computed by the same expressions.
    """
    if x.dims != y.dims:
        raise DimensionMismatchError(f"dims {x.dims} vs {y.dims}")
    a = x.vector * x.norm
    b = y.vector * y.norm
    mu_a = float(a.mean())
    mu_b = float(b.mean())
    da = a - mu_a
    db = b - mu_b
    var_a = float((da * da).mean())
    var_b = float((db * db).mean())
    cov = float((da * db).mean())
    sd_a = float(np.sqrt(var_a))
    sd_b = float(np.sqrt(var_b))

    luminance = (2.0 * mu_a * mu_b + k.c1) / (mu_a * mu_a + mu_b * mu_b + k.c1)
    contrast = (2.0 * sd_a * sd_b + k.c2) / (var_a + var_b + k.c2)
    structure = (cov + k.c3) / (sd_a * sd_b + k.c3)
    return luminance * contrast * structure


def cosine(x: PreprocessedInput, y: PreprocessedInput) -> float:
    """Dot product of the unit vectors, clipped into [-1, 1]."""
    if x.vector.shape != y.vector.shape:
        raise DimensionMismatchError(f"lengths {x.vector.shape} vs {y.vector.shape}")
    return float(np.clip(np.dot(x.vector, y.vector), -1.0, 1.0))
