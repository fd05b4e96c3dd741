"""Sampling module -- collocation sets for the offline and online losses"""

from dataclasses import dataclass, field
from functools import cached_property
from math import sqrt

import numpy as np
import torch

from .errors import DomainError
from .types import DTYPE, Box


__all__ = [
    "CollocationSet",
    "shock_collocation",
    "uniform_collocation",
]


@dataclass(frozen=True)
class CollocationSet():
    """Interior, periodic boundary and initial collocation points.

       interior: (n_o, d+1) array of (x, t)
       boundary: (n_b, 2, d+1) array of paired ((x_L, t), (x_R, t))
       initial:  (n_i, d) array of x
    """
    interior: np.ndarray
    boundary: np.ndarray
    initial: np.ndarray
    seed: int = 0
    meta: dict = field(default_factory=dict, compare=False)

    def __eq__(self, other):
        """Sets are equal when all points and the seed agree bit for bit"""
        return (isinstance(other, CollocationSet) and self.seed == other.seed
                and all(np.array_equal(a, b) for a, b in zip(self.arrays, other.arrays)))

    @property
    def arrays(self) -> tuple:
        """(interior, boundary, initial)"""
        return (self.interior, self.boundary, self.initial)

    @property
    def counts(self) -> tuple:
        """(n_o, n_b, n_i)"""
        return tuple(len(a) for a in self.arrays)

    @cached_property
    def tensors(self) -> dict:
        """Torch views of the points used by the losses:
           interior (n_o, d+1), left/right boundary (n_b, d+1), initial (n_i, d+1) at t=0
        """
        initial = np.concatenate([self.initial, np.zeros((len(self.initial), 1))], axis=1)
        as_tensor = lambda a: torch.as_tensor(a, dtype=DTYPE)
        return dict(
            interior=as_tensor(self.interior),
            left=as_tensor(self.boundary[:, 0]),
            right=as_tensor(self.boundary[:, 1]),
            initial=as_tensor(initial),
        )


def _check_counts(**counts):
    """Raise DomainError for negative counts"""
    for name, count in counts.items():
        if count < 0:
            raise DomainError(f"{name} must be non-negative, got {count}")


def uniform_collocation(omega: Box, T: float, n_o: int, n_b: int, n_i: int, seed: int=0) -> CollocationSet:
    """Uniform random collocation sets on Omega x (0, T).

       Params
       ------
       omega (Box)          : spatial domain
       T (float)            : time horizon
       n_o, n_b, n_i (int)  : interior, boundary pair and initial counts
       seed (int)           : generator seed
    """
    if omega.is_degenerate or T <= 0:
        raise DomainError(f"degenerate domain {omega} x [0, {T}]")
    _check_counts(n_o=n_o, n_b=n_b, n_i=n_i)

    rng = np.random.default_rng(seed)
    lower, upper = np.array(omega.lower), np.array(omega.upper)
    d = omega.dim

    interior = np.concatenate([rng.uniform(lower, upper, size=(n_o, d)),
                               rng.uniform(0.0, T, size=(n_o, 1))], axis=1)

    # periodic pairs along the first spatial axis
    times = rng.uniform(0.0, T, size=(n_b, 1))
    others = rng.uniform(lower[1:], upper[1:], size=(n_b, d - 1))
    left = np.concatenate([np.full((n_b, 1), lower[0]), others, times], axis=1)
    right = np.concatenate([np.full((n_b, 1), upper[0]), others, times], axis=1)
    boundary = np.stack([left, right], axis=1).reshape(n_b, 2, d + 1)

    initial = rng.uniform(lower, upper, size=(n_i, d))
    return CollocationSet(interior, boundary, initial, seed)


def _wrapped(s, period=2.0):
    """Distance-preserving wrap of s onto [-period/2, period/2)"""
    return np.mod(s + period / 2, period) - period / 2


def _band_pick(rng, distances, quotas, edges):
    """Pick indices band by band.

       Band k holds points with edges[k] < distance <= edges[k+1]. A band with
       fewer points than its quota passes the shortfall to the next band
       outward; the outermost band passes it back inward.

       Returns
       -------
       (indices, meta): chosen indices (in band order) and per-band bookkeeping
    """
    bands = [np.flatnonzero((distances > lo) & (distances <= hi))
             for lo, hi in zip(edges[:-1], edges[1:])]
    bands[0] = np.union1d(bands[0], np.flatnonzero(distances <= edges[0]))
    taken = [0] * len(bands)

    carry = 0
    for k, band in enumerate(bands):
        taken[k] = min(len(band), quotas[k] + carry)
        carry = quotas[k] + carry - taken[k]
    for k in reversed(range(len(bands))):
        extra = min(len(bands[k]) - taken[k], carry)
        taken[k] += extra
        carry -= extra

    chosen = [rng.choice(band, size=count, replace=False) if count else np.empty(0, dtype=int)
              for band, count in zip(bands, taken)]
    meta = dict(
        quotas=list(quotas),
        taken=list(taken),
        available=[len(b) for b in bands],
        shortfall=[max(q - t, 0) for q, t in zip(quotas, taken)],
        unfilled=carry,
    )
    return np.concatenate(chosen).astype(int), meta


"""Fractions of points within 0.1, within (0.1, 0.2], and beyond 0.2 of the jump"""
SHOCK_FRACTIONS = (0.6, 0.2, 0.2)
SHOCK_EDGES = (0.0, 0.1, 0.2, np.inf)


def shock_distance(x, t, nu) -> np.ndarray:
    """Euclidean distance in (x, t) to the nearest characteristic line
       x = +/-0.5 + nu t, the lines repeating with period 2 in x."""
    x, t = np.asarray(x, dtype=float), np.asarray(t, dtype=float)
    scale = sqrt(1.0 + nu * nu)
    return np.minimum(*(np.abs(_wrapped(x - nu * t - c)) / scale for c in (-0.5, 0.5)))


def shock_collocation(nu: float, seed: int=0, n_interior: int=10000, n_initial: int=1000,
                      grid: int=400, initial_grid: int=10000, n_boundary: int=200) -> CollocationSet:
    """Transport collocation concentrated near the discontinuity.

       Interior points are drawn from a {grid} x {grid} equidistant grid on
       [-1, 1] x [0, 2], initial points from {initial_grid} equispaced x, both
       split 60/20/20 by distance to the jump.
    """
    if not np.isfinite(nu):
        raise DomainError(f"nu must be finite, got {nu}")
    _check_counts(n_interior=n_interior, n_initial=n_initial, n_boundary=n_boundary)
    rng = np.random.default_rng(seed)

    xs, ts = np.linspace(-1.0, 1.0, grid), np.linspace(0.0, 2.0, grid)
    xx, tt = np.meshgrid(xs, ts, indexing="ij")
    points = np.stack([xx.reshape(-1), tt.reshape(-1)], axis=1)
    quotas = _quotas(n_interior)
    chosen, interior_meta = _band_pick(rng, shock_distance(points[:, 0], points[:, 1], nu),
                                       quotas, SHOCK_EDGES)
    interior = points[chosen]

    x0 = np.linspace(-1.0, 1.0, initial_grid)
    chosen, initial_meta = _band_pick(rng, shock_distance(x0, 0.0, 0.0),
                                      _quotas(n_initial), SHOCK_EDGES)
    initial = x0[chosen].reshape(-1, 1)

    times = rng.uniform(0.0, 2.0, size=(n_boundary, 1))
    boundary = np.stack([np.concatenate([np.full((n_boundary, 1), -1.0), times], axis=1),
                         np.concatenate([np.full((n_boundary, 1), 1.0), times], axis=1)], axis=1)

    meta = dict(nu=float(nu), interior=interior_meta, initial=initial_meta)
    return CollocationSet(interior, boundary, initial, seed, meta)


def _quotas(total: int) -> list:
    """Split {total} 60/20/20, rounding into the last band"""
    near = int(round(SHOCK_FRACTIONS[0] * total))
    mid = int(round(SHOCK_FRACTIONS[1] * total))
    return [near, mid, total - near - mid]
