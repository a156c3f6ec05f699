"""Restriction of quasimodes to submanifolds and restricted norms.

Two kinds of hosts are supported: periodic grids (restriction to
coordinate slices) and spheres (restriction to great circles through the
poles, to the equator, and to great circles of S^3).  Restrictions are
returned as quadrature samples so the same L^p machinery applies to both.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DomainError, PlacementError, ResolutionError
from .families import SphereHarmonic
from .grids import GridFunction


@dataclass(frozen=True)
class Submanifold:
    """A k-dimensional restriction target.

    kind is one of ``coordinate_slice`` (on a periodic grid; ``axes`` are
    the kept axes and ``offsets`` the fixed values of the others),
    ``great_circle`` (a circle through the poles of S^2), ``equator``
    (the circle theta = pi/2 of S^2), or ``geodesic`` (a great circle of
    S^3 through the poles).
    """

    kind: str
    axes: tuple = ()
    offsets: tuple = ()

    def __post_init__(self):
        if self.kind not in ("coordinate_slice", "great_circle", "equator", "geodesic"):
            raise DomainError(f"unknown submanifold kind {self.kind!r}")


def coordinate_slice(axes, offsets) -> Submanifold:
    return Submanifold("coordinate_slice", tuple(axes), tuple(offsets))


def polar_circle() -> Submanifold:
    return Submanifold("great_circle")


def equator_circle() -> Submanifold:
    return Submanifold("equator")


def s3_geodesic() -> Submanifold:
    return Submanifold("geodesic")


@dataclass
class RestrictionSample:
    """Quadrature samples of |u| restricted to a submanifold."""

    nodes: np.ndarray       # parameter values, shape (k, M) or (M,) for k = 1
    values: np.ndarray      # u at the nodes
    weights: np.ndarray     # quadrature weights, same length as values

    def lp_norm(self, p: float) -> float:
        v = np.abs(self.values)
        if p == np.inf:
            return float(v.max())
        return float(np.sum(self.weights * v ** p) ** (1.0 / p))


def lp_norm(sample: RestrictionSample, p: float) -> float:
    return sample.lp_norm(p)


def restrict(u, target: Submanifold, nodes: Optional[int] = None) -> RestrictionSample:
    """Sample u on the submanifold with a suitable quadrature rule.

    Grid slices are exact (the slice must pass through lattice points);
    sphere restrictions use a uniform rule in the circle parameter with
    at least 10 nodes per wavelength.
    """
    if isinstance(u, GridFunction):
        return _restrict_grid(u, target)
    if isinstance(u, SphereHarmonic):
        return _restrict_sphere(u, target, nodes)
    raise DomainError(f"cannot restrict object of type {type(u).__name__}")


def _restrict_grid(u: GridFunction, target: Submanifold) -> RestrictionSample:
    if target.kind != "coordinate_slice":
        raise DomainError(f"grid functions restrict to coordinate slices, not {target.kind}")
    grid = u.grid
    axes = target.axes
    fixed = [a for a in range(grid.dim) if a not in axes]
    if len(target.offsets) != len(fixed):
        raise DomainError(
            f"need {len(fixed)} offsets for the fixed axes, got {len(target.offsets)}")
    x = grid.axis_points()
    indexer: list = [slice(None)] * grid.dim
    for a, off in zip(fixed, target.offsets):
        i = int(np.argmin(np.abs(x - off)))
        if abs(x[i] - off) > 1e-9:
            raise PlacementError(f"offset {off} on axis {a} is not a lattice point")
        indexer[a] = i
    if list(axes) != sorted(axes):
        raise DomainError("slice axes must be listed in increasing order")
    vals = u.values[tuple(indexer)]
    k = len(axes)
    weights = np.full(vals.size, grid.cell_volume ** (k / grid.dim))
    node_mesh = np.stack(np.meshgrid(*([x] * k), indexing="ij")).reshape(k, -1)
    return RestrictionSample(node_mesh if k > 1 else node_mesh[0],
                             vals.reshape(-1), weights)


def _restrict_sphere(u: SphereHarmonic, target: Submanifold,
                     nodes: Optional[int]) -> RestrictionSample:
    l = u.degree
    if nodes is None:
        nodes = max(40 * l, 400)
    if nodes < 10 * l:
        raise ResolutionError(f"{nodes} nodes cannot resolve degree {l}")
    t = np.arange(nodes) * 2 * math.pi / nodes
    w = np.full(nodes, 2 * math.pi / nodes)
    if target.kind in ("great_circle", "geodesic"):
        if target.kind == "great_circle" and u.sphere_dim != 2:
            raise DomainError("great_circle lives on S^2")
        if target.kind == "geodesic" and u.sphere_dim != 3:
            raise DomainError("geodesic targets the S^3 families")
        theta = np.pi - np.abs(np.pi - t)     # sweep down and back up
        return RestrictionSample(t, u(theta), w)
    if target.kind == "equator":
        if u.sphere_dim != 2:
            raise DomainError("equator lives on S^2")
        vals = np.broadcast_to(u(np.array([math.pi / 2])), t.shape).copy()
        return RestrictionSample(t, vals, w)
    raise DomainError(f"sphere families restrict to circles, not {target.kind}")


def mixed_norm(u: GridFunction, y_axes) -> float:
    """sup over the transverse variable of the L^2 norm along y_axes.

    The mixed L^infty_z L^2_y norm controlling restriction estimates that
    are uniform over a family of parallel slices.
    """
    grid = u.grid
    y_axes = tuple(y_axes)
    if not y_axes or any(a not in range(grid.dim) for a in y_axes):
        raise DomainError(f"bad slice axes {y_axes} for a {grid.dim}-dimensional grid")
    k = len(y_axes)
    w = grid.cell_volume ** (k / grid.dim)
    sq = np.sum(np.abs(u.values) ** 2, axis=y_axes) * w
    return float(np.sqrt(np.max(sq)))
