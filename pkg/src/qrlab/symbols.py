"""Phase-space symbols p(x, xi) and smooth cutoffs.

Conventions: a symbol callable receives ``x`` and ``xi`` as arrays whose
leading axis indexes the dimension (so a 1D symbol reads ``x[0]``,
``xi[0]``); the remaining axes broadcast.  Derivative callables are optional
and fall back to central finite differences.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import DomainError

Box = Sequence[tuple[float, float]]

_FD_STEP = 1e-5


def _smooth_step(s):
    """C-infinity step: 0 for s <= 0, 1 for s >= 1."""
    s = np.clip(s, 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        a = np.where(s > 0, np.exp(-1.0 / np.maximum(s, 1e-300)), 0.0)
        b = np.where(s < 1, np.exp(-1.0 / np.maximum(1.0 - s, 1e-300)), 0.0)
    return a / (a + b)


def interval_bump(t, inner: tuple[float, float], outer: tuple[float, float]):
    """Smooth bump: 1 on [inner], 0 outside [outer], monotone between."""
    ilo, ihi = inner
    olo, ohi = outer
    if not olo <= ilo <= ihi <= ohi:
        raise DomainError(f"inner interval {inner} not inside outer {outer}")
    t = np.asarray(t, dtype=float)
    left = np.ones_like(t) if ilo == olo else _smooth_step((t - olo) / (ilo - olo))
    right = np.ones_like(t) if ohi == ihi else _smooth_step((ohi - t) / (ohi - ihi))
    return left * right


@dataclass
class SymbolField:
    """A phase-space symbol with (optionally analytic) derivatives.

    ``support_box`` is a pair (x_box, xi_box) of per-axis intervals, or None
    for an unbounded symbol.  ``split`` optionally names a kinetic/potential
    decomposition a(x, xi) = kin(xi) + pot(x) used by fast propagators.
    """

    dim: int
    eval: Callable
    grad_x: Optional[Callable] = None
    grad_xi: Optional[Callable] = None
    hess_xi: Optional[Callable] = None
    support_box: Optional[tuple[Box, Box]] = None
    is_real: bool = True
    x_independent: bool = False
    xi_independent: bool = False
    split: Optional[tuple[Callable, Callable]] = None
    name: str = ""

    def __call__(self, x, xi):
        return self.eval(np.asarray(x, dtype=float), np.asarray(xi, dtype=float))

    # -- finite-difference fallbacks ------------------------------------

    def dx(self, x, xi):
        if self.grad_x is not None:
            return np.asarray(self.grad_x(np.asarray(x, float), np.asarray(xi, float)))
        return self._fd(x, xi, wrt="x")

    def dxi(self, x, xi):
        if self.grad_xi is not None:
            return np.asarray(self.grad_xi(np.asarray(x, float), np.asarray(xi, float)))
        return self._fd(x, xi, wrt="xi")

    def d2xi(self, x, xi):
        """xi-Hessian, shape (dim, dim) + broadcast shape."""
        if self.hess_xi is not None:
            return np.asarray(self.hess_xi(np.asarray(x, float), np.asarray(xi, float)))
        x = np.asarray(x, float)
        xi = np.asarray(xi, float)
        d = self.dim
        out = np.empty((d, d) + np.broadcast(x[0], xi[0]).shape)
        eps = 1e-4
        for j in range(d):
            step = np.zeros((d,) + (1,) * (xi.ndim - 1))
            step[j] = eps
            gp = self._fd(x, xi + step, wrt="xi")
            gm = self._fd(x, xi - step, wrt="xi")
            if self.grad_xi is not None:
                gp = np.asarray(self.grad_xi(x, xi + step))
                gm = np.asarray(self.grad_xi(x, xi - step))
            out[:, j] = (gp - gm) / (2 * eps)
        return out

    def _fd(self, x, xi, wrt):
        x = np.asarray(x, float)
        xi = np.asarray(xi, float)
        base = x if wrt == "x" else xi
        out = np.empty((self.dim,) + np.broadcast(x[0], xi[0]).shape, dtype=complex)
        for j in range(self.dim):
            step = np.zeros((self.dim,) + (1,) * (base.ndim - 1))
            step[j] = _FD_STEP
            if wrt == "x":
                out[j] = (self.eval(x + step, xi) - self.eval(x - step, xi)) / (2 * _FD_STEP)
            else:
                out[j] = (self.eval(x, xi + step) - self.eval(x, xi - step)) / (2 * _FD_STEP)
        if self.is_real:
            out = out.real
        return out


def fourier_multiplier(f, dim=1, grad=None, hess=None, name="", split_ok=True,
                       is_real=True) -> SymbolField:
    """Symbol depending on xi only."""
    return SymbolField(
        dim=dim,
        eval=lambda x, xi: f(xi) * np.ones_like(x[0]),
        grad_x=lambda x, xi: np.zeros((dim,) + np.broadcast(x[0], xi[0]).shape),
        grad_xi=None if grad is None else (lambda x, xi: grad(xi)),
        hess_xi=None if hess is None else (lambda x, xi: hess(xi)),
        x_independent=True,
        split=(f, lambda x: np.zeros_like(x[0])) if split_ok else None,
        is_real=is_real,
        name=name,
    )


def potential_symbol(V, dim=1, name="") -> SymbolField:
    """Symbol depending on x only (a multiplication operator)."""
    return SymbolField(
        dim=dim,
        eval=lambda x, xi: V(x) * np.ones_like(xi[0]),
        grad_xi=lambda x, xi: np.zeros((dim,) + np.broadcast(x[0], xi[0]).shape),
        hess_xi=lambda x, xi: np.zeros((dim, dim) + np.broadcast(x[0], xi[0]).shape),
        xi_independent=True,
        split=(lambda xi: np.zeros_like(xi[0]), V),
        name=name,
    )


def kinetic_plus_potential(kin, kin_grad, kin_hess, pot, pot_grad, dim=1,
                           name="") -> SymbolField:
    """a(x, xi) = kin(xi) + pot(x) with analytic derivatives and split info."""
    return SymbolField(
        dim=dim,
        eval=lambda x, xi: kin(xi) + pot(x),
        grad_x=lambda x, xi: pot_grad(x) * np.ones((1,) + np.broadcast(x[0], xi[0]).shape)
        if dim == 1 else pot_grad(x),
        grad_xi=lambda x, xi: kin_grad(xi),
        hess_xi=lambda x, xi: kin_hess(xi),
        split=(kin, pot),
        name=name,
    )


@dataclass
class LocalisationCutoff:
    """A compactly supported phase-space cutoff chi(x, xi) in [0, 1].

    Identically 1 on the inner box and 0 outside the outer box.
    """

    chi: SymbolField
    x_inner: Box
    x_outer: Box
    xi_inner: Box
    xi_outer: Box


def box_cutoff(x_inner: Box, x_outer: Box, xi_inner: Box, xi_outer: Box) -> LocalisationCutoff:
    """Product-of-bumps cutoff over a phase-space box."""
    x_inner, x_outer = [list(map(tuple, b)) for b in (x_inner, x_outer)]
    xi_inner, xi_outer = [list(map(tuple, b)) for b in (xi_inner, xi_outer)]
    dim = len(x_inner)
    if not len(x_outer) == len(xi_inner) == len(xi_outer) == dim:
        raise DomainError("cutoff boxes must all have the same dimension")

    def chi_eval(x, xi):
        out = np.ones(np.broadcast(x[0], xi[0]).shape)
        for j in range(dim):
            out = out * interval_bump(x[j], x_inner[j], x_outer[j])
            out = out * interval_bump(xi[j], xi_inner[j], xi_outer[j])
        return out

    sym = SymbolField(dim=dim, eval=chi_eval, support_box=(x_outer, xi_outer),
                      name="box_cutoff")
    return LocalisationCutoff(sym, x_inner, x_outer, xi_inner, xi_outer)


def frequency_window(inner: float, outer: float, dim=1) -> SymbolField:
    """Radial frequency cutoff: 1 for |xi| <= inner, 0 for |xi| >= outer."""

    def f(xi):
        r = np.sqrt(sum(np.asarray(xi[j], float) ** 2 for j in range(dim)))
        return interval_bump(r, (-inner, inner), (-outer, outer))

    return fourier_multiplier(f, dim=dim, name="frequency_window", split_ok=False)


# -- named model symbols (CLI `factor` and kernel sweeps) -----------------

def sphere_symbol(dim=2) -> SymbolField:
    """|xi|^2 - 1: round characteristic variety."""
    return SymbolField(
        dim=dim,
        eval=lambda x, xi: sum(xi[j] ** 2 for j in range(dim)) - 1.0 + 0.0 * x[0],
        grad_x=lambda x, xi: np.zeros((dim,) + np.broadcast(x[0], xi[0]).shape),
        grad_xi=lambda x, xi: 2.0 * xi * np.ones_like(np.asarray(x[0], float)),
        hess_xi=lambda x, xi: 2.0 * np.eye(dim).reshape((dim, dim) + (1,) * (xi.ndim - 1))
        * np.ones(np.broadcast(x[0], xi[0]).shape),
        x_independent=True,
        name="sphere",
    )


def hyperbola_symbol() -> SymbolField:
    """xi1^2 - xi2^2 - 1: non-degenerate but indefinite characteristic variety."""
    return SymbolField(
        dim=2,
        eval=lambda x, xi: xi[0] ** 2 - xi[1] ** 2 - 1.0 + 0.0 * x[0],
        x_independent=True,
        name="hyperbola",
    )


def flat_symbol() -> SymbolField:
    """xi1: totally degenerate (flat) characteristic variety."""
    return SymbolField(
        dim=2,
        eval=lambda x, xi: xi[0] + 0.0 * x[0],
        x_independent=True,
        name="flat",
    )


def degenerate_axis_symbol() -> SymbolField:
    """xi2^2: violates (A1) along axis 2 at xi2 = 0."""
    return SymbolField(
        dim=2,
        eval=lambda x, xi: xi[1] ** 2 + 0.0 * x[0],
        x_independent=True,
        name="degenerate_axis",
    )


def free_hamiltonian(dim=1) -> SymbolField:
    """|xi|^2 / 2: the free dispersive model."""
    return fourier_multiplier(
        lambda xi: 0.5 * sum(np.asarray(xi[j], float) ** 2 for j in range(dim)),
        dim=dim,
        grad=lambda xi: np.asarray(xi, float),
        hess=lambda xi: np.eye(dim).reshape((dim, dim) + (1,) * (np.asarray(xi).ndim - 1))
        * np.ones(np.asarray(xi)[0].shape),
        name="free",
    )


def pendulum_hamiltonian() -> SymbolField:
    """xi^2/2 + cos(x): smooth periodic potential flow (1D)."""
    return kinetic_plus_potential(
        kin=lambda xi: 0.5 * xi[0] ** 2,
        kin_grad=lambda xi: np.asarray(xi, float),
        kin_hess=lambda xi: np.ones((1, 1) + np.asarray(xi)[0].shape),
        pot=lambda x: np.cos(x[0]),
        pot_grad=lambda x: -np.sin(x[0]),
        name="pendulum",
    )


def saddle_hamiltonian() -> SymbolField:
    """xi1*xi2: the indefinite (rotated xi1^2 - xi2^2) dispersive model."""
    return fourier_multiplier(
        lambda xi: np.asarray(xi[0], float) * np.asarray(xi[1], float),
        dim=2,
        name="saddle",
        split_ok=False,
    )


NAMED_SYMBOLS = {
    "sphere": sphere_symbol,
    "hyperbola": hyperbola_symbol,
    "flat": flat_symbol,
    "degenerate": degenerate_axis_symbol,
    "free": free_hamiltonian,
    "pendulum": pendulum_hamiltonian,
    "saddle": saddle_hamiltonian,
}
