"""Discretized rectangular product spaces with linear state indexing.

A GridSpace covers [lower_k, upper_k] in each dimension k with points
lower_k + i*width, i = 0..n_k-1, sharing a single width across dimensions.
Flat indices enumerate states in row-major (last dimension fastest) order;
they are plain Python ints because the total state count can exceed 2**64.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import OutOfDomainError, ShapeError

# Guard against float noise in (upper-lower)/width before flooring: 20/0.1
# evaluates below 200 in binary floating point.
_COUNT_EPS = 1e-9


def _as_1d_float(x, dims: int, name: str) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 0:
        arr = np.full(dims, float(arr))
    if arr.shape != (dims,):
        raise ShapeError(f"{name} must be scalar or length-{dims}, got shape {arr.shape}")
    return arr


@dataclass(frozen=True)
class GridSpace:
    """A uniform grid over a box, with bijective (coords <-> index) mappings."""

    dims: int
    lower: np.ndarray
    upper: np.ndarray
    width: float
    n_points: np.ndarray = field(init=False)

    def __init__(self, dims: int, lower, upper, width: float):
        if dims < 1:
            raise ValueError(f"dims must be >= 1, got {dims}")
        if not (width > 0):
            raise ValueError(f"width must be positive, got {width}")
        lo = _as_1d_float(lower, dims, "lower")
        hi = _as_1d_float(upper, dims, "upper")
        if not np.all(hi > lo):
            raise ValueError("upper must exceed lower in every dimension")
        counts = np.floor((hi - lo) / width + _COUNT_EPS).astype(np.int64) + 1
        if np.any(counts < 2):
            raise ValueError("every dimension needs at least 2 grid points")
        object.__setattr__(self, "dims", int(dims))
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)
        object.__setattr__(self, "width", float(width))
        object.__setattr__(self, "n_points", counts)

    @property
    def m(self) -> int:
        """Total state count (Python int; may exceed 2**64)."""
        return int(math.prod(int(c) for c in self.n_points))

    # -- coordinate/index mappings -------------------------------------------------

    def snap_index(self, value: float, dim: int) -> int:
        """Index of the grid point nearest to value along one dimension.

        Ties (value exactly midway between two points) go to the point farther
        from zero.
        """
        lo = self.lower[dim]
        if value < lo or value > self.upper[dim]:
            raise OutOfDomainError(
                f"coordinate {value} outside [{lo}, {self.upper[dim]}] in dim {dim}"
            )
        t = (value - lo) / self.width
        i0 = int(math.floor(t))
        n = int(self.n_points[dim])
        if i0 >= n - 1:
            return n - 1
        frac = t - i0
        if frac > 0.5:
            return i0 + 1
        if frac < 0.5:
            return i0
        # exact midpoint: pick the candidate with larger |grid value|
        v0 = lo + i0 * self.width
        v1 = lo + (i0 + 1) * self.width
        return i0 + 1 if abs(v1) > abs(v0) else i0

    def encode_multi(self, coords) -> np.ndarray:
        """Per-dimension indices of the grid point nearest to coords."""
        coords = np.asarray(coords, dtype=float)
        if coords.shape != (self.dims,):
            raise ShapeError(f"expected {self.dims} coordinates, got shape {coords.shape}")
        return np.array(
            [self.snap_index(float(coords[k]), k) for k in range(self.dims)],
            dtype=np.int64,
        )

    def encode(self, coords) -> int:
        """Flat state index of the nearest grid point (row-major)."""
        return self.flatten(self.encode_multi(coords))

    def decode_multi(self, flat: int) -> np.ndarray:
        """Per-dimension indices for a flat state index."""
        if flat < 0 or flat >= self.m:
            raise OutOfDomainError(f"flat index {flat} outside [0, {self.m})")
        out = np.empty(self.dims, dtype=np.int64)
        rem = int(flat)
        for k in range(self.dims - 1, -1, -1):
            n = int(self.n_points[k])
            out[k] = rem % n
            rem //= n
        return out

    def decode(self, flat: int) -> np.ndarray:
        """Grid-point coordinates for a flat state index."""
        return self.values(self.decode_multi(flat))

    def flatten(self, multi) -> int:
        """Row-major flat index from per-dimension indices (Python int math)."""
        multi = np.asarray(multi)
        if multi.shape != (self.dims,):
            raise ShapeError(f"expected {self.dims} indices, got shape {multi.shape}")
        flat = 0
        for k in range(self.dims):
            n = int(self.n_points[k])
            i = int(multi[k])
            if i < 0 or i >= n:
                raise OutOfDomainError(f"index {i} outside [0, {n}) in dim {k}")
            flat = flat * n + i
        return flat

    def values(self, multi) -> np.ndarray:
        """Coordinates of the grid point with the given per-dimension indices."""
        multi = np.asarray(multi, dtype=np.int64)
        return self.lower + multi * self.width

    def axis_values(self, dim: int) -> np.ndarray:
        """All grid values along one dimension."""
        return self.lower[dim] + self.width * np.arange(int(self.n_points[dim]))

    def contains_multi(self, multi) -> bool:
        multi = np.asarray(multi)
        return bool(np.all(multi >= 0) and np.all(multi < self.n_points))
