"""Semiclassical quantization on periodic grids.

Left (Kohn-Nirenberg) and Weyl quantization, localisation and ellipticity
diagnostics, and numerical symbol factorization p = e * (xi_i - a).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import (
    AliasingError,
    BudgetError,
    DegeneracyError,
    DomainError,
    EllipticityError,
)
from .grids import GridFunction, PeriodicGrid
from .symbols import LocalisationCutoff, SymbolField

DENSE_POINT_BUDGET = 4096
WEYL_POINT_BUDGET = 1024

CHAR_SET_TOL = 1e-8
A1_TOL = 1e-6
HESS_TOL = 1e-6


def _check_aliasing(sym: SymbolField, h: float, grid: PeriodicGrid):
    if sym.support_box is None:
        return
    _, xi_box = sym.support_box
    if xi_box is None:
        return
    xi_max = h * grid.max_frequency()
    for lo, hi in xi_box:
        if max(abs(lo), abs(hi)) > xi_max + 1e-12:
            raise AliasingError(
                f"symbol frequency support [{lo}, {hi}] exceeds resolved band "
                f"[-{xi_max:.4g}, {xi_max:.4g}] at h={h}")


def _stack_mesh(grids) -> np.ndarray:
    return np.stack([np.asarray(g, dtype=float) for g in grids])


def quantize_left(sym: SymbolField, h: float, u: GridFunction) -> GridFunction:
    """Kohn-Nirenberg quantization p(x, hD) applied to u.

    Pure multipliers (x- or xi-independent symbols) use exact fast paths;
    general symbols go through the dense double sum.
    """
    grid = u.grid
    if sym.dim != grid.dim:
        raise DomainError(f"symbol dim {sym.dim} != grid dim {grid.dim}")
    _check_aliasing(sym, h, grid)
    x = _stack_mesh(grid.meshgrid())
    if sym.xi_independent:
        vals = sym.eval(x, np.zeros_like(x)) * u.values
        return GridFunction(grid, vals, u.h)
    zeta = _stack_mesh(grid.frequency_meshgrid())
    if sym.x_independent:
        mult = sym.eval(np.zeros_like(zeta), h * zeta)
        return u.from_fft(u.fft() * mult)
    if sym.split is not None:
        kin, pot = sym.split
        vals = np.asarray(pot(x)) * u.values
        out = u.from_fft(u.fft() * np.asarray(kin(h * zeta)))
        return GridFunction(grid, out.values + vals, u.h)
    return _dense_left_apply(sym, h, u)


def _dense_left_apply(sym: SymbolField, h: float, u: GridFunction) -> GridFunction:
    grid = u.grid
    m = grid.points_per_axis ** grid.dim
    if m > DENSE_POINT_BUDGET:
        raise BudgetError(f"dense quantization needs {m} points > {DENSE_POINT_BUDGET}")
    xs = _stack_mesh(grid.meshgrid()).reshape(grid.dim, m)
    zs = _stack_mesh(grid.frequency_meshgrid()).reshape(grid.dim, m)
    coeffs = u.fft().reshape(m)
    out = np.empty(m, dtype=complex)
    block = max(1, (1 << 22) // m)
    for start in range(0, m, block):
        sl = slice(start, min(start + block, m))
        xb = xs[:, sl][:, :, None]                        # (dim, B, 1)
        pvals = sym.eval(xb, h * zs[:, None, :])          # (B, m)
        phase = np.exp(1j * np.einsum("db,dm->bm", xs[:, sl], zs))
        out[sl] = (pvals * phase) @ coeffs / m
    return GridFunction(grid, out.reshape(grid.shape()), u.h)


def left_matrix(sym: SymbolField, h: float, grid: PeriodicGrid) -> np.ndarray:
    """Dense matrix of the Kohn-Nirenberg quantization on the grid."""
    n = grid.points_per_axis
    m = n ** grid.dim
    if m > DENSE_POINT_BUDGET:
        raise BudgetError(f"dense matrix needs {m} points > {DENSE_POINT_BUDGET}")
    x = _stack_mesh(grid.meshgrid())
    zeta = _stack_mesh(grid.frequency_meshgrid())
    # row kernel: g[a, j] = (1/m) sum_zeta p(x_a, h zeta) e^{i j dx zeta}
    pvals = sym.eval(x[:, ..., None, None] if grid.dim == 2 else x[:, :, None],
                     h * (zeta[:, None, None, ...] if grid.dim == 2 else zeta[:, None, :]))
    g = np.fft.ifftn(pvals, axes=tuple(range(-grid.dim, 0)))
    idx = np.arange(n)
    if grid.dim == 1:
        return g[idx[:, None], (idx[:, None] - idx[None, :]) % n]
    if grid.dim == 2:
        a1, a2, b1, b2 = np.ix_(idx, idx, idx, idx)
        mat = g[a1, a2, (a1 - b1) % n, (a2 - b2) % n]
        return mat.reshape(m, m)
    raise BudgetError("dense matrices supported for dim <= 2")


def weyl_matrix(sym: SymbolField, h: float, grid: PeriodicGrid) -> np.ndarray:
    """Dense matrix of the Weyl (midpoint) quantization on the grid."""
    n = grid.points_per_axis
    m = n ** grid.dim
    if m > WEYL_POINT_BUDGET:
        raise BudgetError(f"dense Weyl matrix needs {m} points > {WEYL_POINT_BUDGET}")
    axis_x = grid.axis_points()
    # midpoints (x_a + x_b)/2 live on the half-step lattice, 2n-1 values
    mids = (axis_x[0] + axis_x[-1]) / 2 + (np.arange(2 * n - 1) - (n - 1)) * grid.spacing / 2
    zeta = _stack_mesh(grid.frequency_meshgrid())
    idx = np.arange(n)
    if grid.dim == 1:
        pvals = sym.eval(mids[None, :, None], h * zeta[:, None, :])
        g = np.fft.ifft(pvals, axis=-1)                   # (2n-1, n)
        return g[idx[:, None] + idx[None, :], (idx[:, None] - idx[None, :]) % n]
    if grid.dim == 2:
        mm = np.stack(np.meshgrid(mids, mids, indexing="ij"))
        pvals = sym.eval(mm[:, :, :, None, None], h * zeta[:, None, None, :, :])
        g = np.fft.ifftn(pvals, axes=(-2, -1))            # (2n-1, 2n-1, n, n)
        a1, a2, b1, b2 = np.ix_(idx, idx, idx, idx)
        mat = g[a1 + b1, a2 + b2, (a1 - b1) % n, (a2 - b2) % n]
        return mat.reshape(m, m)
    raise BudgetError("dense Weyl matrices supported for dim <= 2")


def quantize_weyl(sym: SymbolField, h: float, u: GridFunction) -> GridFunction:
    """Weyl quantization p^w(x, hD) applied to u (self-adjoint for real p)."""
    grid = u.grid
    if sym.dim != grid.dim:
        raise DomainError(f"symbol dim {sym.dim} != grid dim {grid.dim}")
    _check_aliasing(sym, h, grid)
    if sym.x_independent or sym.xi_independent or sym.split is not None:
        return quantize_left(sym, h, u)   # midpoint irrelevant term by term
    mat = weyl_matrix(sym, h, grid)
    m = grid.points_per_axis ** grid.dim
    out = mat @ u.values.reshape(m)
    return GridFunction(grid, out.reshape(grid.shape()), u.h)


def localisation_defect(u: GridFunction, chi: LocalisationCutoff) -> float:
    """|| u - chi(x, hD) u ||_{L^2}: how far u is from phase-space localized."""
    chiu = quantize_left(chi.chi, u.h, u)
    return GridFunction(u.grid, u.values - chiu.values, u.h).norm(2)


def sobolev_ratio(u: GridFunction, p, q) -> float:
    """|| u ||_p / (h^{n(1/p - 1/q)} || u ||_q).

    Bounded uniformly in h for localized families (semiclassical Sobolev).
    """
    p = float(p)
    q = float(q)
    if not 1 <= q <= p:
        raise DomainError(f"need 1 <= q <= p, got q={q}, p={p}")
    ip = 0.0 if p == np.inf else 1.0 / p
    iq = 0.0 if q == np.inf else 1.0 / q
    n = u.grid.dim
    return u.norm(p) / (u.h ** (n * (ip - iq)) * u.norm(q))


def elliptic_localize_defect(sym: SymbolField, chi: LocalisationCutoff,
                             u: GridFunction, min_symbol: float = 0.1) -> float:
    """|| chi(x, hD) u ||_{L^2} for chi supported in the elliptic region.

    For a quasimode (||p(x,hD)u|| = O(h)) and chi supported where
    |p| >= min_symbol, elliptic inversion forces this norm to O(h).
    Raises EllipticityError when the symbol dips below min_symbol on the
    cutoff's support box.
    """
    samples = 9
    axes_x = [np.linspace(lo, hi, samples) for lo, hi in chi.x_outer]
    axes_xi = [np.linspace(lo, hi, samples) for lo, hi in chi.xi_outer]
    mesh = np.meshgrid(*axes_x, *axes_xi, indexing="ij")
    x = _stack_mesh(mesh[:sym.dim])
    xi = _stack_mesh(mesh[sym.dim:])
    chivals = chi.chi.eval(x, xi)
    pvals = np.abs(np.asarray(sym.eval(x, xi)))
    active = chivals > 1e-6
    if np.any(active) and pvals[active].min() < min_symbol:
        raise EllipticityError(
            f"symbol reaches {pvals[active].min():.3g} < {min_symbol} on the cutoff support")
    chiu = quantize_left(chi.chi, u.h, u)
    return chiu.norm(2)


# -- symbol factorization ------------------------------------------------

@dataclass
class FactorBranch:
    """The solved branch a(x, xi') of p(x, xi) = 0 along one frequency axis."""

    sym: SymbolField
    axis: int
    seed: float

    def __call__(self, x, xi_prime):
        x = np.asarray(x, dtype=float)
        xi_prime = np.asarray(xi_prime, dtype=float)
        shape = np.broadcast(x[0], xi_prime[0] if self.sym.dim > 1 else np.zeros(())).shape
        s = np.full(shape, self.seed, dtype=float)
        return _newton_branch(self.sym, self.axis, x, xi_prime, s)

    def hessian(self, x0, xi_prime0, step=1e-3) -> np.ndarray:
        """Second-derivative matrix of a in xi' at a single point."""
        x0 = np.asarray(x0, dtype=float).reshape(self.sym.dim, 1)
        xp0 = np.asarray(xi_prime0, dtype=float).reshape(-1)
        d = xp0.size
        hess = np.zeros((max(d, 1), max(d, 1)))
        if d == 0:
            return hess

        def a_at(xp):
            return float(self(x0, xp.reshape(d, 1))[0])

        for i in range(d):
            for j in range(i, d):
                ei = np.zeros(d); ei[i] = step
                ej = np.zeros(d); ej[j] = step
                if i == j:
                    val = (a_at(xp0 + ei) - 2 * a_at(xp0) + a_at(xp0 - ei)) / step ** 2
                else:
                    val = (a_at(xp0 + ei + ej) - a_at(xp0 + ei - ej)
                           - a_at(xp0 - ei + ej) + a_at(xp0 - ei - ej)) / (4 * step ** 2)
                hess[i, j] = hess[j, i] = val
        return hess


def _insert_axis(xi_prime, axis, s, dim):
    parts = []
    k = 0
    for j in range(dim):
        if j == axis:
            parts.append(s)
        else:
            parts.append(np.broadcast_to(xi_prime[k], s.shape))
            k += 1
    return np.stack(parts)


def _newton_branch(sym: SymbolField, axis: int, x, xi_prime, s, max_iter=50,
                   tol=1e-12, bracket_width=2.0):
    s = np.array(s, dtype=float)
    for _ in range(max_iter):
        xi = _insert_axis(xi_prime, axis, s, sym.dim)
        f = np.asarray(sym.eval(x, xi), dtype=float)
        if np.all(np.abs(f) < tol):
            break
        df = np.asarray(sym.dxi(x, xi), dtype=float)[axis]
        df = np.where(np.abs(df) < 1e-14, 1e-14, df)
        step = f / df
        s = s - np.clip(step, -0.5, 0.5)
    xi = _insert_axis(xi_prime, axis, s, sym.dim)
    f = np.asarray(sym.eval(x, xi), dtype=float)
    bad = np.abs(f) >= 1e-9
    if np.any(bad):
        s_flat = s.reshape(-1)
        x_flat = x.reshape(sym.dim, -1) if x.shape[1:] == s.shape else None
        # bisection fallback, element by element
        flat_bad = bad.reshape(-1)
        xp_flat = (np.broadcast_to(xi_prime, (max(sym.dim - 1, 1),) + s.shape)
                   .reshape(max(sym.dim - 1, 1), -1)) if sym.dim > 1 else None
        xb = np.broadcast_to(x, (sym.dim,) + s.shape).reshape(sym.dim, -1)
        for idx in np.nonzero(flat_bad)[0]:
            xi_p = xp_flat[:, idx:idx + 1] if xp_flat is not None else np.zeros((0, 1))
            s_flat[idx] = _bisect_root(sym, axis, xb[:, idx:idx + 1], xi_p,
                                       s_flat[idx], bracket_width)
        s = s_flat.reshape(s.shape)
    return s


def _bisect_root(sym, axis, x, xi_prime, s0, width):
    def f(s):
        xi = _insert_axis(xi_prime, axis, np.full((1,), s), sym.dim)
        return float(np.asarray(sym.eval(x, xi)).reshape(-1)[0])

    lo, hi = None, None
    for w in np.linspace(width / 32, width, 32):
        if f(s0 - w) * f(s0 + w) < 0:
            lo, hi = s0 - w, s0 + w
            break
    if lo is None:
        raise DegeneracyError(f"no sign change along axis {axis} near {s0}")
    flo = f(lo)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0 or hi - lo < 1e-14:
            return mid
        if flo * fm < 0:
            hi = mid
        else:
            lo, flo = mid, fm
    return 0.5 * (lo + hi)


@dataclass
class FactorizationResult:
    """p(x, xi) = elliptic_factor * (xi_axis - a(x, xi')) on valid_box."""

    a: FactorBranch
    elliptic_factor: Callable
    axis: int
    valid_box: tuple
    max_residual: float


def symbol_factor(sym: SymbolField, x0, xi0, axis: int,
                  half_width: float = 0.5) -> FactorizationResult:
    """Factorize p = e * (xi_axis - a) near a characteristic point.

    Requires p(x0, xi0) ~ 0 and d p / d xi_axis nonzero there (condition
    (A1) along the chosen axis).  The branch a is computed by Newton
    iteration with bisection fallback; e = p / (xi_axis - a) with the
    removable singularity filled by the xi_axis-derivative of p.
    """
    x0 = np.asarray(x0, dtype=float).reshape(sym.dim, 1)
    xi0 = np.asarray(xi0, dtype=float).reshape(sym.dim, 1)
    p0 = float(np.asarray(sym.eval(x0, xi0)).reshape(-1)[0])
    dp = np.asarray(sym.dxi(x0, xi0), dtype=float).reshape(sym.dim)
    scale = max(1.0, float(np.max(np.abs(dp))))
    if abs(p0) > CHAR_SET_TOL * scale * 10:
        raise DomainError(f"(x0, xi0) not on the characteristic set: p = {p0:.3g}")
    dp_axis = dp[axis]
    if abs(dp_axis) < A1_TOL * scale:
        raise DegeneracyError(
            f"(A1) fails along axis {axis}: d p/d xi_{axis} = {dp_axis:.3g}")

    seed = float(xi0[axis, 0])
    branch = FactorBranch(sym, axis, seed)
    xi0_prime = np.delete(xi0.reshape(-1), axis)

    def elliptic_factor(x, xi):
        x = np.asarray(x, dtype=float)
        xi = np.asarray(xi, dtype=float)
        xi_prime = np.delete(xi, axis, axis=0)
        avals = branch(x, xi_prime)
        denom = xi[axis] - avals
        pvals = np.asarray(sym.eval(x, xi))
        xi_on = xi.copy()
        xi_on[axis] = avals
        deriv = np.asarray(sym.dxi(x, xi_on))[axis]
        small = np.abs(denom) < 1e-7
        safe = np.where(small, 1.0, denom)
        return np.where(small, deriv, pvals / safe)

    # certify on a sample lattice, shrinking until Newton behaves
    width = half_width
    for _ in range(4):
        try:
            residual = _certify(sym, branch, elliptic_factor, x0, xi0, axis, width,
                                abs(dp_axis))
            break
        except (DegeneracyError, FloatingPointError):
            width /= 2
    else:
        raise DegeneracyError("factorization failed to certify on any shrunk box")

    x_box = [(float(c - width), float(c + width)) for c in x0.reshape(-1)]
    xi_box = [(float(c - width), float(c + width)) for c in xi0.reshape(-1)]
    return FactorizationResult(branch, elliptic_factor, axis, (x_box, xi_box), residual)


def _certify(sym, branch, elliptic_factor, x0, xi0, axis, width, dp0):
    samples = 5
    dim = sym.dim
    axes = [np.linspace(float(x0[j, 0]) - width, float(x0[j, 0]) + width, samples)
            for j in range(dim)]
    axes += [np.linspace(float(xi0[j, 0]) - width, float(xi0[j, 0]) + width, samples)
             for j in range(dim)]
    mesh = np.meshgrid(*axes, indexing="ij")
    x = _stack_mesh(mesh[:dim])
    xi = _stack_mesh(mesh[dim:])
    xi_prime = np.delete(xi, axis, axis=0)
    avals = branch(x, xi_prime)
    xi_on = xi.copy()
    xi_on[axis] = avals
    don = np.asarray(sym.dxi(x, xi_on), dtype=float)[axis]
    if np.min(np.abs(don)) < dp0 / 2:
        raise DegeneracyError("axis derivative halves inside the box")
    evals = np.asarray(elliptic_factor(x, xi))
    pvals = np.asarray(sym.eval(x, xi))
    residual = float(np.max(np.abs(pvals - evals * (xi[axis] - avals))))
    if residual > 1e-8 * max(1.0, float(np.max(np.abs(pvals)))):
        raise DegeneracyError(f"factorization residual {residual:.3g} too large")
    return residual


@dataclass
class AdmissibilityReport:
    """Per-point verdicts of the symbol non-degeneracy conditions."""

    point: tuple
    a1_ok: bool
    a2_class: str              # positive_definite | nondegenerate | degenerate
    eigenvalues: np.ndarray


def admissibility_check(sym: SymbolField, samples) -> list[AdmissibilityReport]:
    """Check (A1) and (A2) at sample points of the characteristic set.

    (A2) is decided from the second fundamental form of the level set
    { p(x0, .) = 0 }, computed as minus the xi'-Hessian of the graph
    branch a obtained from symbol_factor.
    """
    reports = []
    for x0, xi0 in samples:
        x0 = np.asarray(x0, dtype=float).reshape(sym.dim, 1)
        xi0 = np.asarray(xi0, dtype=float).reshape(sym.dim, 1)
        p0 = float(np.asarray(sym.eval(x0, xi0)).reshape(-1)[0])
        dp = np.asarray(sym.dxi(x0, xi0), dtype=float).reshape(sym.dim)
        scale = max(1.0, float(np.max(np.abs(dp))))
        if abs(p0) > CHAR_SET_TOL * scale * 10:
            raise DomainError(f"sample not on characteristic set: p = {p0:.3g}")
        a1_ok = float(np.linalg.norm(dp)) > A1_TOL * scale
        if not a1_ok or sym.dim < 2:
            reports.append(AdmissibilityReport(
                (tuple(x0.reshape(-1)), tuple(xi0.reshape(-1))), a1_ok,
                "degenerate", np.zeros(max(sym.dim - 1, 1))))
            continue
        axis = int(np.argmax(np.abs(dp)))
        fac = symbol_factor(sym, x0, xi0, axis)
        xi_prime0 = np.delete(xi0.reshape(-1), axis)
        second_form = -fac.a.hessian(x0, xi_prime0)
        eigs = np.linalg.eigvalsh(second_form)
        if eigs.min() >= HESS_TOL * scale:
            a2 = "positive_definite"
        elif np.min(np.abs(eigs)) >= HESS_TOL * scale:
            a2 = "nondegenerate"
        else:
            a2 = "degenerate"
        reports.append(AdmissibilityReport(
            (tuple(x0.reshape(-1)), tuple(xi0.reshape(-1))), a1_ok, a2, eigs))
    return reports
