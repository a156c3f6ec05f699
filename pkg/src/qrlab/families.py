"""Concrete quasimode families with known concentration behaviour.

Sphere harmonics (zonal and highest weight) on S^2 and S^3, harmonic
oscillator eigenfunctions, and coherent states on periodic grids.  Each
family carries its semiclassical parameter h explicitly so scaling sweeps
can be driven by a single ladder of h values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.special import gammaln, roots_legendre

from .errors import DomainError, DomainSizeError, PlacementError, ResolutionError
from .grids import GridFunction, PeriodicGrid
from .symbols import SymbolField


def h_ladder(start: float, rungs: int, ratio: float = 0.5) -> list[float]:
    """Geometric ladder of h values, largest first."""
    if not 0 < ratio < 1:
        raise DomainError(f"ratio {ratio} must lie in (0, 1)")
    if rungs < 1:
        raise DomainError("need at least one rung")
    return [start * ratio ** j for j in range(rungs)]


@dataclass
class SphereHarmonic:
    """An L^2-normalized harmonic of degree l on S^dim, sampled in angles.

    ``eval_colatitude`` gives |u| as a function of the colatitude theta
    alone (the families here are zonal or equatorially concentrated, so
    the longitude dependence is a pure phase).
    """

    degree: int
    sphere_dim: int
    h: float
    eval_colatitude: Callable
    kind: str

    def __call__(self, theta):
        return self.eval_colatitude(np.asarray(theta, dtype=float))


def _legendre_values(l: int, x: np.ndarray) -> np.ndarray:
    """P_l(x) by the three-term recurrence, stable for all l used here."""
    p_prev = np.ones_like(x)
    if l == 0:
        return p_prev
    p = x.copy()
    for m in range(1, l):
        p, p_prev = ((2 * m + 1) * x * p - m * p_prev) / (m + 1), p
    return p


def _chebyshev_u_over_sin(l: int, theta: np.ndarray) -> np.ndarray:
    """sin((l+1) theta) / sin(theta) with the pole limits filled in."""
    s = np.sin(theta)
    out = np.empty_like(theta)
    small = np.abs(s) < 1e-12
    out[~small] = np.sin((l + 1) * theta[~small]) / s[~small]
    sign = np.where(np.cos(theta[small]) > 0, 1.0, (-1.0) ** l)
    out[small] = (l + 1) * sign
    return out


def zonal(l: int, sphere_dim: int = 2) -> SphereHarmonic:
    """Zonal (rotation-invariant) harmonic of degree l, peaking at the poles.

    On S^2 this is sqrt((2l+1)/(4 pi)) P_l(cos theta); on S^3 it is the
    normalized Chebyshev kernel sin((l+1)theta)/sin(theta).
    """
    if l < 1:
        raise DomainError("degree must be at least 1")
    if sphere_dim == 2:
        c = math.sqrt((2 * l + 1) / (4 * math.pi))
        h = 1.0 / math.sqrt(l * (l + 1))
        return SphereHarmonic(l, 2, h,
                              lambda th: c * _legendre_values(l, np.cos(th)),
                              "zonal")
    if sphere_dim == 3:
        c = 1.0 / math.sqrt(2 * math.pi ** 2)
        h = 1.0 / math.sqrt(l * (l + 2))
        return SphereHarmonic(l, 3, h,
                              lambda th: c * _chebyshev_u_over_sin(l, th),
                              "zonal")
    raise DomainError(f"sphere dimension {sphere_dim} not supported (use 2 or 3)")


def highest_weight(l: int) -> SphereHarmonic:
    """Highest-weight harmonic c_l (sin theta)^l e^{i l phi} on S^2.

    Concentrates on a sqrt(h) collar around the equator; |u| depends on
    theta only.  The constant c_l is evaluated in log space.
    """
    if l < 1:
        raise DomainError("degree must be at least 1")
    # 1/c_l^2 = 2 pi * int_0^pi (sin)^(2l+1) = 2 pi * B(l+1, 1/2)
    log_c = -0.5 * (math.log(2 * math.pi)
                    + gammaln(l + 1) + gammaln(0.5) - gammaln(l + 1.5))
    h = 1.0 / math.sqrt(l * (l + 1))

    def profile(th):
        s = np.sin(np.asarray(th, dtype=float))
        out = np.zeros_like(s)
        pos = s > 0
        out[pos] = np.exp(log_c + l * np.log(s[pos]))
        return out

    return SphereHarmonic(l, 2, h, profile, "highest_weight")


def sphere_lp_norm(u: SphereHarmonic, p: float, nodes: Optional[int] = None) -> float:
    """Full-sphere L^p norm of |u| via Gauss-Legendre in the colatitude.

    Valid for families whose modulus depends on theta only.  Raises
    ResolutionError when the node count cannot resolve degree-l
    oscillation.
    """
    l = u.degree
    if p == np.inf:
        th = np.linspace(0, math.pi, max(40 * l, 2000))
        return float(np.max(np.abs(u(th))))
    if nodes is None:
        nodes = max(10 * l, 400)
    if nodes < 10 * l:
        raise ResolutionError(f"{nodes} nodes cannot resolve degree {l}")
    if u.sphere_dim == 2:
        x, w = roots_legendre(nodes)
        vals = np.abs(u(np.arccos(x))) ** p
        integral = 2 * math.pi * np.sum(w * vals)
    else:
        # the S^3 profiles are trigonometric in theta, so a uniform midpoint
        # rule against the measure 4 pi sin^2(theta) d theta is spectral
        th = (np.arange(nodes) + 0.5) * math.pi / nodes
        vals = np.abs(u(th)) ** p
        integral = 4 * math.pi * np.sum(np.sin(th) ** 2 * vals) * math.pi / nodes
    return float(integral ** (1.0 / p))


def oscillator_mode(k: int, h: float, grid: PeriodicGrid) -> GridFunction:
    """k-th harmonic oscillator eigenfunction, semiclassically scaled.

    u(x) = h^{-1/4} psi_k(x / sqrt(h)) with psi_k the unit-mass Hermite
    function, an exact eigenfunction of (hD)^2/2 + x^2/2 with eigenvalue
    (2k+1)h/2 on the line.  Raises DomainSizeError when the classically
    allowed region spills off the periodic cell.
    """
    if grid.dim != 1:
        raise DomainError("oscillator modes are one-dimensional")
    x = grid.axis_points()
    y = x / math.sqrt(h)
    psi_prev = np.zeros_like(y)
    psi = np.pi ** -0.25 * np.exp(-y ** 2 / 2)
    for m in range(k):
        psi, psi_prev = (y * math.sqrt(2.0 / (m + 1)) * psi
                         - math.sqrt(m / (m + 1.0)) * psi_prev), psi
    vals = h ** -0.25 * psi
    edge = max(abs(vals[0]), abs(vals[-1])) * grid.spacing ** 0.5
    if edge > 1e-8:
        raise DomainSizeError(
            f"oscillator mode k={k}, h={h} leaks {edge:.2g} at the cell boundary")
    return GridFunction(grid, vals.astype(complex), h)


def oscillator_energy(k: int, h: float) -> float:
    """Eigenvalue of xi^2/2 + x^2/2 for the k-th scaled mode."""
    return (2 * k + 1) * h / 2


def coherent_state(x0, xi0, h: float, grid: PeriodicGrid) -> GridFunction:
    """Gaussian coherent state at phase-space point (x0, xi0), unit L^2 mass.

    (pi h)^{-n/4} exp(i <x, xi0>/h) exp(-|x - x0|^2 / (2h)).  Raises
    PlacementError if the Gaussian tail wraps measurably around the torus.
    """
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    xi0 = np.atleast_1d(np.asarray(xi0, dtype=float))
    if x0.size != grid.dim or xi0.size != grid.dim:
        raise DomainError("phase-space point dimension does not match the grid")
    mesh = grid.meshgrid()
    r2 = sum((np.asarray(mesh[j]) - x0[j]) ** 2 for j in range(grid.dim))
    phase = sum(np.asarray(mesh[j]) * xi0[j] for j in range(grid.dim))
    vals = (np.pi * h) ** (-grid.dim / 4) * np.exp(1j * phase / h - r2 / (2 * h))
    half = grid.period / 2
    seam = min(half - abs(float(c)) for c in x0)
    if seam < 0:
        raise PlacementError(f"center {x0} lies outside the cell")
    tail = (np.pi * h) ** (-grid.dim / 4) * math.exp(-seam ** 2 / (2 * h))
    if tail > 1e-10:
        raise PlacementError(
            f"coherent state at {x0} leaks {tail:.2g} through the cell seam at h={h}")
    return GridFunction(grid, vals, h)


def quasimode_defect(sym: SymbolField, u: GridFunction,
                     energy: float = 0.0) -> float:
    """|| (p^w(x, hD) - energy) u ||_{L^2}: how far u is from an eigenfunction."""
    from .quantize import quantize_weyl
    pu = quantize_weyl(sym, u.h, u)
    return GridFunction(u.grid, pu.values - energy * u.values, u.h).norm(2)
