"""EIM module -- empirical interpolation baseline on a fixed spatial grid"""

from dataclasses import dataclass, field
from typing import List, NamedTuple, Sequence

import numpy as np
import torch

from .app import App
from .errors import DomainError, EimError, SizingError
from .problems import get_target
from .types import DTYPE, as_mu


__all__ = [
    "EimBasis",
    "EimRound",
    "eim_apply",
    "eim_offline",
    "snapshot_matrix",
    "sv_decay",
]


"""Residual sup-norm below which the snapshot manifold counts as exhausted."""
EXHAUSTED = 1e-14


@dataclass
class EimBasis():
    """Basis functions q (n, G) sampled on the grid and magic point indices."""
    q: np.ndarray
    points: List[int] = field(default_factory=list)
    mus: List[tuple] = field(default_factory=list)

    @property
    def n(self) -> int:
        """Number of basis functions"""
        return len(self.points)

    @property
    def B(self) -> np.ndarray:
        """Interpolation matrix B[j, k] = q_k(p_j)"""
        return self.q[:, self.points].T

    def check(self, tol: float=1e-12):
        """Assert B is lower triangular with unit diagonal"""
        B = self.B
        assert np.allclose(np.triu(B, 1), 0, atol=tol), "EIM matrix is not lower triangular"
        assert np.allclose(np.diag(B), 1, atol=tol), "EIM matrix does not have a unit diagonal"

    def coefficients(self, values: np.ndarray) -> np.ndarray:
        """Solve B c = values at the magic points; {values} is (G,) or (M, G)."""
        if not self.n:
            raise EimError("empty basis")
        at_points = np.asarray(values)[..., self.points]
        B = self.B
        if np.any(np.abs(np.diag(B)) < EXHAUSTED):
            raise EimError("interpolation matrix is singular")
        try:
            return np.linalg.solve(B, at_points.T).T
        except np.linalg.LinAlgError as e:
            raise EimError(f"interpolation matrix is singular: {e}") from e


class EimRound(NamedTuple):
    """One row of the error history"""
    n: int
    max_l2: float
    max_sup: float
    mu: tuple
    magic: int


def eim_apply(basis: EimBasis, values) -> np.ndarray:
    """Interpolant sum c_j q_j of {values} (sampled on the basis grid)"""
    values = np.asarray(values, dtype=float)
    if values.shape[-1] != basis.q.shape[1]:
        raise SizingError("grid values", expected=basis.q.shape[1], actual=values.shape[-1])
    return basis.coefficients(values) @ basis.q


def snapshot_matrix(family, xi: Sequence, grid=None) -> np.ndarray:
    """Values of {family} at every parameter of {xi} on {grid}, shape (len(xi), G).
       2D grids are flattened row-major."""
    family = get_target(family)
    if family.is_pde:
        raise DomainError(f"{family.id} is a PDE problem, not a function family")
    grid = family.grid if grid is None else torch.as_tensor(grid, dtype=DTYPE)
    with torch.no_grad():
        rows = [family(grid, as_mu(mu)).numpy() for mu in xi]
    return np.stack(rows)


def eim_offline(family, xi: Sequence, grid=None, n_max: int=100, tol: float=1e-12):
    """Greedy EIM.

       Each round picks the parameter with the largest sup-norm interpolation
       error, adds its normalized residual as a basis function and its
       residual maximum as a magic point. Stops once the largest L2 error is
       at most {tol}, after {n_max} rounds, or when every residual sup-norm
       falls below 1e-14.

       Returns
       -------
       (EimBasis, list of EimRound)
    """
    family = get_target(family)
    xi = [as_mu(mu) for mu in xi]
    if not xi:
        raise DomainError("empty training set")
    S = snapshot_matrix(family, xi, grid)
    volume = family.omega.volume

    basis = EimBasis(np.empty((0, S.shape[1])))
    history = []
    residual = S.copy()

    while basis.n < n_max:
        sup = np.max(np.abs(residual), axis=1)
        j = int(np.argmax(sup))
        if sup[j] < EXHAUSTED:
            App.APP.info(f"manifold exhausted after {basis.n} basis functions", prefix="eim")
            break

        r = residual[j].copy()
        # the interpolant matches at the earlier magic points, leaving round-off only
        r[basis.points] = 0.0
        p = int(np.argmax(np.abs(r)))
        basis.q = np.vstack([basis.q, r / r[p]])
        basis.points.append(p)
        basis.mus.append(xi[j])
        basis.check()

        residual = S - eim_apply(basis, S)
        l2 = np.sqrt(volume * np.mean(residual ** 2, axis=1))
        row = EimRound(basis.n, float(np.max(l2)), float(np.max(np.abs(residual))), xi[j], p)
        history.append(row)
        App.APP.info(f"n={row.n} max L2 {row.max_l2:.3e} mu={row.mu} p={p}", prefix="eim")
        if row.max_l2 <= tol:
            break

    return basis, history


def sv_decay(matrix) -> np.ndarray:
    """Singular values of a snapshot matrix, non-increasing"""
    return np.linalg.svd(np.asarray(matrix, dtype=float), compute_uv=False)
