"""Semiclassical propagation: eikonal phases, oscillatory parametrix,
split-step reference propagation, and restricted kernel decay sweeps.

The evolution convention is h D_t u + a(x, hD) u = 0, so the propagator
is e^{-i t a / h} and a pure multiplier a(xi) evolves each Fourier mode
by the phase -t a(h zeta)/h.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.interpolate import InterpolatedUnivariateSpline

from .errors import (
    CausticError,
    CollinearityError,
    DomainError,
    ResolutionError,
)
from .grids import GridFunction, PeriodicGrid
from .symbols import SymbolField


@dataclass
class PhaseTable:
    """Eikonal phase phi(t, x, eta) and momentum xi = d phi/dx on a grid.

    phi solves d phi/dt + a(x, d phi/dx) = 0 with phi(0) = x eta, built by
    the method of characteristics and resampled back to the fixed x grid.
    The stored phi is the periodic part psi = phi - x eta plus x eta, so
    it is smooth in t at fixed grid point.
    """

    grid: PeriodicGrid
    etas: np.ndarray          # sorted, shape (ne,)
    times: np.ndarray         # increasing from 0, shape (nt,)
    phi: np.ndarray           # (nt, nx, ne)
    xi: np.ndarray            # (nt, nx, ne)
    symbol: SymbolField

    def time_index(self, t: float) -> int:
        j = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[j] - t) > 1e-12:
            raise DomainError(f"t={t} is not a stored table time")
        return j


def eta_grid(grid: PeriodicGrid, h: float) -> np.ndarray:
    """The momentum lattice h * zeta matching the grid's frequencies, sorted."""
    return h * np.sort(grid.axis_frequencies())


def solve_eikonal(sym: SymbolField, grid: PeriodicGrid, etas, times,
                  steps_per_unit: int = 1024) -> PhaseTable:
    """Integrate the eikonal equation by characteristics (1D base).

    Raises CausticError (with the offending time attached) as soon as the
    x-flow stops being injective and the phase would fold.
    """
    if grid.dim != 1:
        raise DomainError("eikonal tables are built over one-dimensional grids")
    etas = np.asarray(etas, dtype=float)
    times = np.asarray(times, dtype=float)
    if times[0] != 0 or np.any(np.diff(times) <= 0):
        raise DomainError("times must increase from 0")
    x0 = grid.axis_points()
    nx, ne = x0.size, etas.size
    x = np.repeat(x0[:, None], ne, axis=1)
    xi = np.repeat(etas[None, :], nx, axis=0).copy()
    phi = x * etas[None, :]

    def rhs(xc, xic):
        xs, xis = xc[None], xic[None]
        da_dxi = np.asarray(sym.dxi(xs, xis), dtype=float)[0]
        da_dx = np.asarray(sym.dx(xs, xis), dtype=float)[0]
        aval = np.asarray(sym.eval(xs, xis), dtype=float)
        return da_dxi, -da_dx, xic * da_dxi - aval

    phi_out = np.empty((times.size, nx, ne))
    xi_out = np.empty_like(phi_out)
    _resample(grid, etas, x, xi, phi, x0, phi_out[0], xi_out[0], float(times[0]))
    for j in range(1, times.size):
        span = float(times[j] - times[j - 1])
        nsub = max(1, math.ceil(span * steps_per_unit))
        dt = span / nsub
        for _ in range(nsub):
            k1 = rhs(x, xi)
            k2 = rhs(x + dt / 2 * k1[0], xi + dt / 2 * k1[1])
            k3 = rhs(x + dt / 2 * k2[0], xi + dt / 2 * k2[1])
            k4 = rhs(x + dt * k3[0], xi + dt * k3[1])
            x = x + dt / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
            xi = xi + dt / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
            phi = phi + dt / 6 * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2])
        _resample(grid, etas, x, xi, phi, x0, phi_out[j], xi_out[j], float(times[j]))
    return PhaseTable(grid, etas, times, phi_out, xi_out, sym)


def _resample(grid, etas, x, xi, phi, x0, phi_row, xi_row, t):
    """Invert the x-flow per eta and pull psi = phi - x eta back to the grid."""
    L = grid.period
    for e in range(etas.size):
        xe = x[:, e]
        dx_dx0 = np.gradient(xe, x0)
        if np.min(dx_dx0) < 1e-3:
            raise CausticError(f"flow folds at t={t:.6g} for eta={etas[e]:.6g}",
                               critical_time=t)
        psi = phi[:, e] - xe * etas[e]
        x0_ext = np.concatenate([x0 - L, x0, x0 + L])
        xe_ext = np.concatenate([xe - L, xe, xe + L])
        inv = InterpolatedUnivariateSpline(xe_ext, x0_ext, k=5)
        psi_s = InterpolatedUnivariateSpline(x0_ext, np.tile(psi, 3), k=5)
        xi_s = InterpolatedUnivariateSpline(x0_ext, np.tile(xi[:, e], 3), k=5)
        center = 0.5 * (xe_ext[0] + xe_ext[-1])
        targets = x0 + L * np.round((center - x0) / L)
        x0_t = inv(targets)
        phi_row[:, e] = psi_s(x0_t) + x0 * etas[e]
        xi_row[:, e] = xi_s(x0_t)


def eikonal_residual(table: PhaseTable) -> float:
    """Max of |d phi/dt + a(x, xi)| by fourth-order differencing in t.

    An independent consistency check of integration plus resampling;
    requires at least five uniformly spaced table times.
    """
    t = table.times
    if t.size < 5:
        raise ResolutionError("need at least 5 table times for the residual check")
    dts = np.diff(t)
    if np.max(np.abs(dts - dts[0])) > 1e-12 * dts[0]:
        raise ResolutionError("residual check needs uniform table times")
    dt = dts[0]
    phi = table.phi
    dphi_dt = (phi[:-4] - 8 * phi[1:-3] + 8 * phi[3:-1] - phi[4:]) / (12 * dt)
    x = table.grid.axis_points()[:, None]
    worst = 0.0
    for j in range(2, t.size - 2):
        aval = np.asarray(table.symbol.eval(x[None], table.xi[j][None]), dtype=float)
        worst = max(worst, float(np.max(np.abs(dphi_dt[j - 2] + aval))))
    return worst


def apply_parametrix(table: PhaseTable, u: GridFunction, t: float) -> GridFunction:
    """Oscillatory-integral propagator built from the phase table.

    U(t) u(x) = (1/N) sum_zeta e^{i phi(t, x, h zeta)/h} b(t, x, h zeta)
    u~(zeta) with the half-density amplitude b = |d^2 phi / dx d eta|^{1/2}.
    Reduces to the identity at t = 0.

    The table's etas may cover only a sub-band of the lattice h * zeta;
    frequencies outside the band are dropped, so the input should be
    band-limited accordingly.
    """
    grid = u.grid
    h = u.h
    freqs = np.sort(grid.axis_frequencies())
    # locate each table eta on the lattice h * zeta
    idx = np.searchsorted(h * freqs, table.etas)
    idx = np.clip(idx, 0, freqs.size - 1)
    left = np.clip(idx - 1, 0, freqs.size - 1)
    idx = np.where(np.abs(h * freqs[left] - table.etas)
                   < np.abs(h * freqs[idx] - table.etas), left, idx)
    if np.max(np.abs(h * freqs[idx] - table.etas)) > 1e-12:
        raise DomainError("table eta grid does not sit on the lattice h * frequencies")
    j = table.time_index(t)
    phi = table.phi[j]
    phi_xeta = np.gradient(table.xi[j], table.etas, axis=1)
    b = np.sqrt(np.abs(phi_xeta))
    order = np.argsort(grid.axis_frequencies())
    coeffs = u.fft()[order][idx]
    n = grid.points_per_axis
    out = np.exp(1j * phi / h) * b @ coeffs / n
    return GridFunction(grid, out, h)


def reference_propagator(sym: SymbolField, u: GridFunction, t: float,
                         steps: Optional[int] = None) -> GridFunction:
    """Propagate u by e^{-i t a(x, hD)/h} with a converged reference scheme.

    Exact for pure multipliers; Strang split-step for kinetic+potential
    symbols; dense matrix exponential otherwise.
    """
    grid = u.grid
    h = u.h
    zeta = np.stack([np.asarray(g) for g in grid.frequency_meshgrid()])
    if sym.x_independent:
        mult = np.exp(-1j * t * np.asarray(sym.eval(np.zeros_like(zeta), h * zeta)) / h)
        return u.from_fft(u.fft() * mult)
    if sym.split is not None:
        kin, pot = sym.split
        if steps is None:
            steps = max(64, math.ceil(40 * abs(t) / h))
        dt = t / steps
        xmesh = np.stack([np.asarray(g) for g in grid.meshgrid()])
        half_v = np.exp(-0.5j * dt * np.asarray(pot(xmesh)) / h)
        full_k = np.exp(-1j * dt * np.asarray(kin(h * zeta)) / h)
        vals = u.values
        work = GridFunction(grid, vals, h)
        for _ in range(steps):
            work = GridFunction(grid, work.values * half_v, h)
            work = work.from_fft(work.fft() * full_k)
            work = GridFunction(grid, work.values * half_v, h)
        return work
    from scipy.linalg import expm
    from .quantize import weyl_matrix
    mat = expm(-1j * t / h * weyl_matrix(sym, h, grid))
    m = grid.points_per_axis ** grid.dim
    out = mat @ u.values.reshape(m)
    return GridFunction(grid, out.reshape(grid.shape()), h)


def duhamel_solve(sym: SymbolField, u0: GridFunction, forcing: Callable,
                  t: float, steps: int = 64,
                  propagator_steps: Optional[int] = None) -> GridFunction:
    """Solve h D_t u + a(x, hD) u = h f with u(0) = u0 by Duhamel's formula.

    u(t) = U(t) u0 + i int_0^t U(t - s) f(s) ds, with the integral done by
    the midpoint rule; ``forcing(s)`` must return a GridFunction.
    """
    out = reference_propagator(sym, u0, t, steps=propagator_steps)
    ds = t / steps
    acc = np.zeros(u0.grid.shape(), dtype=complex)
    for j in range(steps):
        s = (j + 0.5) * ds
        fs = forcing(s)
        prop = reference_propagator(sym, fs, t - s, steps=propagator_steps)
        acc += prop.values
    return GridFunction(u0.grid, out.values + 1j * ds * acc, u0.h)


# -- restricted kernel decay sweeps --------------------------------------

@dataclass
class KernelEstimate:
    """One rung of a restricted propagator kernel sweep."""

    h: float
    tau: float
    sup_value: float           # pointwise kernel bound sup |K|
    l2_value: float            # operator norm on L^2 of the submanifold


def restricted_kernel_decay(sym: SymbolField, window: SymbolField,
                            hs: Sequence[float], taus_for_h: Callable,
                            grid: PeriodicGrid,
                            restriction: str = "point") -> list[KernelEstimate]:
    """Kernel bounds for Q_chi e^{-i tau a/h} Q_chi* restricted to a slice.

    ``restriction`` is ``point`` (restrict to a single point; the kernel
    is the scalar (1/L^d) sum_zeta chi^2 e^{-i tau a(h zeta)/h}) or
    ``line`` (restrict to the first coordinate axis of a 2D model; the
    kernel is a convolution on the line, diagonal in frequency).
    ``taus_for_h`` maps h to the list of tau values for that rung.
    """
    if not sym.x_independent or not window.x_independent:
        raise DomainError("kernel sweeps need frequency-side symbol and window")
    if restriction not in ("point", "line"):
        raise DomainError(f"unknown restriction {restriction!r}")
    if restriction == "line" and grid.dim != 2:
        raise DomainError("line restriction needs a 2D model")
    L = grid.period
    zeta = np.stack([np.asarray(g) for g in grid.frequency_meshgrid()])
    out = []
    for h in hs:
        xi = h * zeta
        chi2 = np.asarray(window.eval(np.zeros_like(xi), xi)) ** 2
        avals = np.asarray(sym.eval(np.zeros_like(xi), xi))
        for tau in taus_for_h(h):
            phase = np.exp(-1j * tau * avals / h)
            if restriction == "point":
                k = np.sum(chi2 * phase) / L ** grid.dim
                sup_v = l2_v = abs(complex(k))
            else:
                # symbol of the convolution kernel on the line: sum out zeta_2
                m = np.sum(chi2 * phase, axis=1) / L
                l2_v = float(np.max(np.abs(m)))
                kvals = np.fft.ifft(m) * grid.points_per_axis / L
                sup_v = float(np.max(np.abs(kvals)))
            out.append(KernelEstimate(h, tau, sup_v, l2_v))
    return out


@dataclass
class KernelFit:
    """Fitted exponents of value ~ C h^{-mu} (h + tau)^{-sigma}."""

    mu: float
    sigma: float
    log_prefactor: float
    max_residual: float


def fit_kernel_exponents(estimates: Sequence[KernelEstimate],
                         which: str = "sup") -> KernelFit:
    """Least-squares fit of log value against -log h and -log(h + tau)."""
    vals = np.array([e.sup_value if which == "sup" else e.l2_value
                     for e in estimates])
    if np.any(vals <= 0):
        raise DomainError("kernel values must be positive to fit exponents")
    hs = np.array([e.h for e in estimates])
    taus = np.array([e.tau for e in estimates])
    design = np.column_stack([-np.log(hs), -np.log(hs + taus), np.ones(len(hs))])
    sv = np.linalg.svd(design, compute_uv=False)
    if sv[-1] < 1e-8 * sv[0]:
        raise CollinearityError("h and h + tau columns are collinear in this sweep")
    coef, *_ = np.linalg.lstsq(design, np.log(vals), rcond=None)
    resid = float(np.max(np.abs(design @ coef - np.log(vals))))
    return KernelFit(float(coef[0]), float(coef[1]), float(coef[2]), resid)
