"""Vector math in n dimensions: distances, hyperspherical angles, wave vectors and ball sampling."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Bounds",
    "DegenerateDirectionError",
    "clamp_to_bounds",
    "compose_wave",
    "direction_angles",
    "euclidean_distance",
    "random_angles",
    "sample_in_ball",
]

TWO_PI = 2.0 * math.pi


class DegenerateDirectionError(ValueError):
    """Raised when a direction is requested for the zero vector."""


@dataclass(frozen=True)
class Bounds:
    """Axis-aligned box ``lower <= x <= upper``. Infinite limits mean unbounded."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lower = np.asarray(self.lower, dtype=float)
        upper = np.asarray(self.upper, dtype=float)
        if lower.ndim != 1 or lower.shape != upper.shape:
            raise ValueError("lower and upper must be 1-D arrays of equal length")
        if not np.all(lower < upper):
            raise ValueError("lower must be strictly below upper in every dimension")
        lower.setflags(write=False)
        upper.setflags(write=False)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @classmethod
    def box(cls, low: float, high: float, dim: int) -> "Bounds":
        return cls(np.full(dim, float(low)), np.full(dim, float(high)))

    @property
    def dim(self) -> int:
        return self.lower.size

    @property
    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.lower)) and np.all(np.isfinite(self.upper)))

    @property
    def mean_width(self) -> float:
        return float(np.mean(self.upper - self.lower))

    def contains(self, x) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= self.lower) and np.all(x <= self.upper))


def _check_same_dim(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")


def euclidean_distance(a, b) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    _check_same_dim(a, b)
    d = a - b
    return math.sqrt(float(d @ d))


def direction_angles(v) -> np.ndarray:
    """
    Hyperspherical angles of a vector.

    Parameters
    ----------
    v : array_like
        Vector of dimension ``D >= 2`` with nonzero norm.

    Returns
    -------
    numpy.ndarray
        ``D - 1`` angles such that ``compose_wave(norm(v), angles)`` gives ``v`` back.
        The first ``D - 2`` angles lie in ``[0, pi]``, the last in ``(-pi, pi]``.

    Raises
    ------
    DegenerateDirectionError
        If ``v`` is the zero vector.

    """
    v = np.asarray(v, dtype=float)
    dim = v.size
    if v.ndim != 1 or dim < 2:
        raise ValueError("direction_angles needs a 1-D vector with at least 2 components")
    if not np.any(v):
        raise DegenerateDirectionError("zero vector has no direction")
    # adding 0.0 turns -0.0 into +0.0 so atan2 never sees a signed zero
    v = v + 0.0
    # tail[d] = norm of v[d:]; hypot avoids the under/overflow of summing squares
    tail = [0.0] * (dim + 1)
    for d in range(dim - 1, -1, -1):
        tail[d] = math.hypot(v[d], tail[d + 1])
    angles = np.empty(dim - 1)
    for d in range(dim - 2):
        angles[d] = math.atan2(tail[d + 1], v[d])

    x, y = v[-2], v[-1]
    # the last angle only depends on the pair's direction; rescale so y * y stays normal
    pair = max(abs(x), abs(y))
    if pair > 0.0:
        x, y = x / pair, y / pair
    r = math.hypot(x, y)
    if y == 0.0:
        angles[-1] = math.pi if x < 0.0 else 0.0
    else:
        # x + r rewritten as y^2 / (r - x) when x < 0 to dodge cancellation
        denom = x + r if x >= 0.0 else y * y / (r - x)
        last = 2.0 * math.atan2(y, denom)
        # denom can underflow to 0 for tiny negative y, giving exactly -pi
        angles[-1] = math.pi if last <= -math.pi else last
    return angles


def random_angles(dim: int, rng: np.random.Generator) -> np.ndarray:
    if dim < 2:
        raise ValueError(f"random_angles needs dim >= 2, got {dim}")
    return rng.uniform(0.0, TWO_PI, dim - 1)


def compose_wave(magnitude: float, angles) -> np.ndarray:
    """Cartesian vector of length ``magnitude`` pointing along the hyperspherical ``angles``."""
    angles = np.asarray(angles, dtype=float)
    if angles.ndim != 1 or angles.size < 1:
        raise ValueError("angles must be a non-empty 1-D array")
    if magnitude < 0:
        raise ValueError(f"magnitude must be nonnegative, got {magnitude}")
    sines = np.sin(angles)
    out = np.empty(angles.size + 1)
    out[0] = 1.0
    out[1:] = np.cumprod(sines)
    out[:-1] *= np.cos(angles)
    return magnitude * out


def sample_in_ball(center, radius: float, rng: np.random.Generator) -> np.ndarray:
    """
    Draw a point uniformly from the closed ball of ``radius`` around ``center``.

    The direction is an isotropic Gaussian draw normalized to unit length and the
    distance from the center is ``radius * u ** (1 / D)``.
    """
    center = np.asarray(center, dtype=float)
    if radius < 0:
        raise ValueError(f"radius must be nonnegative, got {radius}")
    if radius == 0:
        return center.copy()
    dim = center.size
    while True:
        direction = rng.standard_normal(dim)
        norm = math.sqrt(float(direction @ direction))
        if norm > 0.0:
            break
    scale = radius * rng.random() ** (1.0 / dim) / norm
    return center + scale * direction


def clamp_to_bounds(p, bounds: Bounds) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.shape != bounds.lower.shape:
        raise ValueError(f"dimension mismatch: {p.shape} vs bounds of dim {bounds.dim}")
    return np.minimum(np.maximum(p, bounds.lower), bounds.upper)
