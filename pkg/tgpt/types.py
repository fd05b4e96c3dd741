"""types module -- define some basic types"""

from math import prod

import numpy as np
import torch

from .errors import DomainError, SizingError


__all__ = [
    "DTYPE",
    "Box",
    "as_points",
    "as_mu",
]


"""Floating point type of every tensor in the package."""
DTYPE = torch.float64


class Box():
    """Axis-aligned box, used for spatial domains and parameter domains.

    Examples
    --------
    >>> box = Box((-1, 1))
    >>> box.dim, box.volume
    (1, 2.0)

    >>> Box((0, 1), (0, 1)).contains((0.5, 1.0))
    True
    """

    def __init__(self, *ranges):
        """Initialize with one (lower, upper) pair per dimension."""
        if not ranges:
            raise DomainError("Box needs at least one (lower, upper) range")
        self.ranges = tuple((float(lo), float(hi)) for lo, hi in ranges)

    def __repr__(self):
        """Return repr string containing the ranges"""
        return f"Box{self.ranges!r}"

    def __eq__(self, other):
        """Boxes are equal when their ranges are."""
        return isinstance(other, Box) and self.ranges == other.ranges

    def __iter__(self):
        """Iterate over the (lower, upper) pairs"""
        return iter(self.ranges)

    @property
    def dim(self) -> int:
        """Number of dimensions"""
        return len(self.ranges)

    @property
    def lower(self) -> tuple:
        """Lower corner"""
        return tuple(lo for lo, _ in self.ranges)

    @property
    def upper(self) -> tuple:
        """Upper corner"""
        return tuple(hi for _, hi in self.ranges)

    @property
    def widths(self) -> tuple:
        """Edge lengths"""
        return tuple(hi - lo for lo, hi in self.ranges)

    @property
    def volume(self) -> float:
        """Product of the edge lengths"""
        return float(prod(self.widths))

    @property
    def is_degenerate(self) -> bool:
        """True if any edge has zero (or negative) length"""
        return any(w <= 0 for w in self.widths)

    def contains(self, point, tol: float=1e-12) -> bool:
        """Return True if {point} lies in the closed box (up to {tol})."""
        point = as_mu(point)
        if len(point) != self.dim:
            return False
        return all(lo - tol <= p <= hi + tol
                   for p, (lo, hi) in zip(point, self.ranges))

    def extend(self, lower: float, upper: float):
        """Return a new Box with one more dimension appended."""
        return Box(*self.ranges, (lower, upper))

    def linspace(self, counts) -> np.ndarray:
        """Return the tensor grid with {counts} equispaced points per dimension,
           flattened row-major to shape (prod(counts), dim)."""
        if isinstance(counts, int):
            counts = [counts] * self.dim
        axes = [np.linspace(lo, hi, n) for (lo, hi), n in zip(self.ranges, counts)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.reshape(-1) for m in mesh], axis=-1)


def as_mu(value) -> tuple:
    """Return a parameter value as a tuple of floats.

    Examples
    --------
    >>> as_mu(2)
    (2.0,)
    >>> as_mu("1.5,2")
    (1.5, 2.0)
    """
    if isinstance(value, str):
        value = [v for v in value.split(",") if v.strip()]
    if isinstance(value, torch.Tensor):
        value = value.detach().reshape(-1).tolist()
    if np.ndim(value) == 0:
        return (float(value),)
    return tuple(float(v) for v in np.asarray(value, dtype=float).reshape(-1))


def as_points(value, dim: int) -> torch.Tensor:
    """Return {value} as a (N, dim) float64 tensor.
       A single point of length {dim} becomes a batch of one.
    """
    points = torch.as_tensor(value, dtype=DTYPE)
    if points.dim() == 1:
        if points.shape[0] != dim:
            raise SizingError("input", expected=dim, actual=points.shape[0])
        points = points.reshape(1, dim)
    if points.dim() != 2 or points.shape[1] != dim:
        actual = points.shape[-1] if points.dim() else 0
        raise SizingError("input", expected=dim, actual=actual)
    return points
