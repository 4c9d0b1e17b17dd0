"""Radial discretization of [0, r_max] for dimensions 1, 2, 3.

Uniform mesh, trapezoid quadrature against the surface measure
s_N r^(N-1) dr, and a conservative tridiagonal stencil for -Lap+1 that is
exactly self-adjoint under the quadrature weights.  Functions are radial
representatives: in dimension 1 they are even on the whole line, so the
measure carries a factor 2 for the two half-lines.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_banded

from .errors import ConfigError

SPHERE_MEASURE = {1: 2.0, 2: 2.0 * np.pi, 3: 4.0 * np.pi}


@dataclass(frozen=True)
class RadialGrid:
    """Immutable radial mesh with quadrature weights and operator bands.

    nodes[0] = 0 and nodes[-1] = r_max carry halved trapezoid weights;
    for dimension >= 2 the axis weight is exactly zero.  edge_weights[j]
    is the conductance of the interval (nodes[j], nodes[j+1]) in the flux
    form of the radial Laplacian.
    """

    dimension: int
    n_points: int
    r_max: float
    nodes: np.ndarray
    dr: float
    quad_weights: np.ndarray
    edge_weights: np.ndarray
    op_lower: np.ndarray = field(repr=False)
    op_diag: np.ndarray = field(repr=False)
    op_upper: np.ndarray = field(repr=False)

    @property
    def sphere_measure(self) -> float:
        return SPHERE_MEASURE[self.dimension]


@dataclass
class RadialField:
    """A per-node sample vector tied to its grid."""

    grid: RadialGrid
    values: np.ndarray

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.n_points,):
            raise ConfigError(
                f"field length {self.values.shape} != grid size {self.grid.n_points}"
            )

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("r,value\n")
            for r, v in zip(self.grid.nodes, self.values):
                fh.write(f"{r:.17g},{v:.17g}\n")

    @staticmethod
    def from_csv(grid: RadialGrid, path) -> "RadialField":
        data = np.loadtxt(path, delimiter=",", skiprows=1)
        return RadialField(grid, data[:, 1])


def build_grid(dimension: int, n_points: int = 4096, r_max: float = 40.0) -> RadialGrid:
    """Construct the uniform radial grid with n_points nodes on [0, r_max]."""
    if dimension not in (1, 2, 3):
        raise ConfigError(f"dimension must be 1, 2 or 3, got {dimension}")
    if n_points < 16:
        raise ConfigError(f"n_points must be at least 16, got {n_points}")
    if not (r_max > 0):
        raise ConfigError(f"r_max must be positive, got {r_max}")
    n = int(n_points)
    r = np.linspace(0.0, float(r_max), n)
    dr = r[1] - r[0]
    sN = SPHERE_MEASURE[dimension]
    w = sN * r ** (dimension - 1) * dr
    w[0] *= 0.5
    w[-1] *= 0.5
    if dimension == 1:
        g = np.ones(n - 1)
    elif dimension == 2:
        # harmonic mean of r on each edge; zero on the axis edge
        g = np.zeros(n - 1)
        g[1:] = 2.0 * r[1:-1] * r[2:] / (r[1:-1] + r[2:])
    else:
        g = r[:-1] * r[1:]
    lo, di, up = _operator_bands(dimension, r, dr, g)
    return RadialGrid(
        dimension=dimension,
        n_points=n,
        r_max=float(r_max),
        nodes=r,
        dr=float(dr),
        quad_weights=w,
        edge_weights=g,
        op_lower=lo,
        op_diag=di,
        op_upper=up,
    )


def _operator_bands(dimension, r, dr, g):
    """Bands of the tridiagonal -Lap+1: row 0 by the axis limit
    -Lap u(0) = -N u''(0), last row the identity (Dirichlet)."""
    n = len(r)
    rho = r ** (dimension - 1) if dimension > 1 else np.ones(n)
    lo = np.zeros(n - 1)
    di = np.zeros(n)
    up = np.zeros(n - 1)
    j = np.arange(1, n - 1)
    di[j] = (g[j] + g[j - 1]) / (rho[j] * dr**2) + 1.0
    up[j] = -g[j] / (rho[j] * dr**2)
    lo[j - 1] = -g[j - 1] / (rho[j] * dr**2)
    di[0] = 2.0 * dimension / dr**2 + 1.0
    up[0] = -2.0 * dimension / dr**2
    di[-1] = 1.0
    lo[-1] = 0.0
    return lo, di, up


def _values(u) -> np.ndarray:
    if isinstance(u, RadialField):
        return u.values
    return np.asarray(u, dtype=float)


def apply_tridiag(lo, di, up, u):
    out = di * u
    out[:-1] += up * u[1:]
    out[1:] += lo * u[:-1]
    return out


def solve_tridiag(lo, di, up, b):
    n = len(di)
    ab = np.zeros((3, n))
    ab[0, 1:] = up
    ab[1, :] = di
    ab[2, :-1] = lo
    return solve_banded((1, 1), ab, b)


def apply_schrodinger(grid: RadialGrid, u) -> np.ndarray:
    """(-Lap + 1) u with the Dirichlet row at r_max left as the identity."""
    v = _values(u)
    if v.shape != (grid.n_points,):
        raise ConfigError("field does not match grid")
    return apply_tridiag(grid.op_lower, grid.op_diag, grid.op_upper, v)


def h1_inner(grid: RadialGrid, u, v) -> float:
    """H1 inner product from the gradient quadrature.

    Gradients are one-sided per interval (exact summation by parts against
    the operator bands for fields vanishing at r_max).
    """
    uu = _values(u)
    vv = _values(v)
    if uu.shape != (grid.n_points,) or vv.shape != (grid.n_points,):
        raise ConfigError("field does not match grid")
    du = (uu[1:] - uu[:-1]) / grid.dr
    dv = (vv[1:] - vv[:-1]) / grid.dr
    return float(
        grid.sphere_measure * grid.dr * np.dot(grid.edge_weights, du * dv)
        + np.dot(grid.quad_weights, uu * vv)
    )


def h1_norm_sq(grid: RadialGrid, u) -> float:
    return h1_inner(grid, u, u)


def lp_integral(grid: RadialGrid, u, p) -> float:
    """Integral of |u|^p over R^N via the trapezoid weights."""
    v = _values(u)
    if v.shape != (grid.n_points,):
        raise ConfigError("field does not match grid")
    return float(np.dot(grid.quad_weights, np.abs(v) ** p))
