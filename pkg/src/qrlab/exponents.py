"""Exact restriction-exponent algebra.

Everything in this module is computed in exact rational arithmetic
(`fractions.Fraction`); ``p = math.inf`` is handled symbolically through
``1/p = 0``.  The central object is the piecewise exponent ``delta(n, k, p)``
giving the growth rate ``h**-delta`` of the L^p norm of a quasimode
restricted to a k-dimensional submanifold of an n-dimensional manifold,
together with the two-bound Strichartz exponent algebra that produces its
interior anchor point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

from .errors import (
    DegenerateAssumptionsError,
    DomainError,
    EndpointError,
    NoSolutionError,
)

INF = math.inf

Rational = Fraction | int


def _as_exponent(p) -> Fraction | float:
    """Coerce a Lebesgue exponent to Fraction, passing through infinity."""
    if p == INF:
        return INF
    if isinstance(p, float):
        if not p.is_integer():
            raise DomainError(f"exponent {p!r} must be rational or inf; "
                              "pass a Fraction for non-integer values")
        p = int(p)
    return Fraction(p)


def inv(p) -> Fraction:
    """1/p as an exact rational, with 1/inf = 0."""
    p = _as_exponent(p)
    if p == INF:
        return Fraction(0)
    if p == 0:
        raise DomainError("exponent p must be nonzero")
    return Fraction(1, 1) / p


@dataclass(frozen=True)
class ExponentQuery:
    """A restriction-exponent query (ambient dim, submanifold dim, L^p)."""

    n: int
    k: int
    p: Fraction | float

    def __post_init__(self):
        if not isinstance(self.n, int) or self.n < 2:
            raise DomainError(f"ambient dimension n={self.n!r} must be an integer >= 2")
        if not isinstance(self.k, int) or not 1 <= self.k <= self.n - 1:
            raise DomainError(
                f"submanifold dimension k={self.k!r} must satisfy 1 <= k <= n-1={self.n - 1}")
        p = _as_exponent(self.p)
        if p != INF and p < 2:
            raise DomainError(f"Lebesgue exponent p={self.p!r} must satisfy p >= 2")
        object.__setattr__(self, "p", p)


@dataclass(frozen=True)
class DeltaResult:
    """A restriction exponent: power of 1/h, plus an optional log^{1/2} factor."""

    power: Fraction
    log_half_power: bool = False

    def __str__(self):
        s = str(self.power)
        if self.log_half_power:
            s += " (x log^{1/2}(1/h))"
        return s


def hypersurface_breakpoint(n: int) -> Fraction:
    """The exponent 2n/(n-1) where the two hypersurface branches meet."""
    return Fraction(2 * n, n - 1)


def delta(q: ExponentQuery) -> DeltaResult:
    """The restriction exponent delta(n, k, p).

    Hypersurfaces (k = n-1) have two branches meeting at p = 2n/(n-1);
    lower-dimensional submanifolds have a single branch (n-1)/2 - k/p,
    except the endpoint (k, p) = (n-2, 2) which carries a half-power
    logarithmic factor on top of h^{-1/2}.
    """
    n, k = q.n, q.k
    ip = inv(q.p)
    if k == n - 1:
        if ip <= inv(hypersurface_breakpoint(n)):
            power = Fraction(n - 1, 2) - (n - 1) * ip
        else:
            power = Fraction(n - 1, 4) - Fraction(n - 2, 2) * ip
        return DeltaResult(power)
    if k == n - 2 and ip == Fraction(1, 2):
        return DeltaResult(Fraction(1, 2), log_half_power=True)
    return DeltaResult(Fraction(n - 1, 2) - k * ip)


def beta(p, sigma_inf, sigma_2) -> Fraction:
    """Interpolated decay power 2(sigma_2 - sigma_inf)/p + sigma_inf."""
    ip = inv(p)
    if p != INF and _as_exponent(p) < 2:
        raise DomainError(f"p={p!r} must satisfy p >= 2")
    return 2 * (Fraction(sigma_2) - Fraction(sigma_inf)) * ip + Fraction(sigma_inf)


@dataclass(frozen=True)
class StrichartzAssumptions:
    """h-powers (mu) and decay powers (sigma) of the two kernel bounds.

    ``*_inf`` refers to the L^1 -> L^inf bound, ``*_2`` to L^2 -> L^2.
    """

    mu_inf: Fraction
    sigma_inf: Fraction
    mu_2: Fraction
    sigma_2: Fraction

    def __post_init__(self):
        for name in ("mu_inf", "sigma_inf", "mu_2", "sigma_2"):
            object.__setattr__(self, name, Fraction(getattr(self, name)))
        if not self.sigma_inf > self.sigma_2 >= 0:
            raise DomainError(
                f"need sigma_inf > sigma_2 >= 0, got ({self.sigma_inf}, {self.sigma_2})")


@dataclass(frozen=True)
class StrichartzPair:
    """An admissible mixed-norm pair (r, p), r the time exponent."""

    r: Fraction | float
    p: Fraction | float


def solve_governing(a: StrichartzAssumptions, p) -> Fraction | float:
    """Solve 2/r + 2(sigma_inf - sigma_2)/p = sigma_inf for r.

    Raises EndpointError when the solution lands at or below r = 2 and
    NoSolutionError when the interpolated decay power is nonpositive.
    """
    b = beta(p, a.sigma_inf, a.sigma_2)
    if b <= 0:
        raise NoSolutionError(
            f"decay power beta={b} <= 0: no admissible r for p={p}")
    r = Fraction(2) / b
    if r <= 2:
        raise EndpointError(
            f"pair (r, p) = ({r}, {p}) is at or past the excluded endpoint r = 2")
    return r


def strichartz_h_exponent(a: StrichartzAssumptions, r) -> Fraction:
    """The h-power of the mixed-norm Strichartz bound for time exponent r."""
    gap = a.sigma_inf - a.sigma_2
    if gap == 0:
        raise DegenerateAssumptionsError("sigma_inf == sigma_2: exponent degenerate")
    ir = inv(r)
    return (a.mu_inf - a.mu_2) * ir / gap + (a.sigma_inf * a.mu_2 - a.sigma_2 * a.mu_inf) / (2 * gap)


class DiagonalPoint(NamedTuple):
    """The diagonal Strichartz pair (p, p), flagged when it is an endpoint."""

    p: Fraction
    endpoint: bool


def diagonal_pair(n: int, k: int) -> DiagonalPoint | None:
    """The diagonal pair p = 2(k+1)/(n-1), or None when p < 2.

    For k = n-2 the pair sits at the excluded endpoint p = 2 and is
    returned with ``endpoint=True``.
    """
    ExponentQuery(n, k, 2)  # validate (n, k)
    p = Fraction(2 * (k + 1), n - 1)
    if p > 2:
        return DiagonalPoint(p, endpoint=False)
    if p == 2:
        return DiagonalPoint(p, endpoint=True)
    return None


class Anchor(NamedTuple):
    """An interpolation anchor: (1/p, delta) with an optional log flag."""

    inv_p: Fraction
    delta: Fraction
    log_half_power: bool = False


def anchor_points(n: int, k: int) -> list[Anchor]:
    """Interpolation anchors for delta(n, k, .) as a function of 1/p.

    Always the L^inf anchor (0, (n-1)/2) and an L^2 anchor at 1/p = 1/2;
    hypersurfaces additionally get the diagonal Strichartz anchor at
    p = 2n/(n-1).  Sorted by increasing 1/p.
    """
    ExponentQuery(n, k, 2)
    anchors = [Anchor(Fraction(0), Fraction(n - 1, 2))]
    if k == n - 1:
        pstar = hypersurface_breakpoint(n)
        anchors.append(Anchor(inv(pstar), inv(pstar)))
        anchors.append(Anchor(Fraction(1, 2), Fraction(1, 4)))
    elif k == n - 2:
        anchors.append(Anchor(Fraction(1, 2), Fraction(1, 2), log_half_power=True))
    else:
        anchors.append(Anchor(Fraction(1, 2), Fraction(n - k - 1, 2)))
    return anchors


def interpolate_delta(anchors: list[Anchor], p) -> Fraction:
    """Piecewise-linear interpolation of delta through the anchors, in 1/p.

    Logarithmic flags on anchors are ignored for p > 2, matching the fact
    that only the (n-2, 2) endpoint itself carries the log factor.
    """
    ip = inv(p)
    if not Fraction(0) <= ip <= Fraction(1, 2):
        raise DomainError(f"p={p!r} outside [2, inf]")
    for (q0, d0, _), (q1, d1, _) in zip(anchors, anchors[1:]):
        if q0 <= ip <= q1:
            if q0 == q1:
                return d0
            return d0 + (d1 - d0) * (ip - q0) / (q1 - q0)
    raise DomainError(f"1/p = {ip} not covered by anchors {anchors!r}")


def full_manifold_delta(n: int, p) -> Fraction:
    """The classical L^p growth exponent over the whole manifold.

    Two branches meeting at p = 2(n+1)/(n-1): the kink of the spectral
    cluster bounds, shown alongside the restricted exponent for contrast.
    """
    if not isinstance(n, int) or n < 2:
        raise DomainError(f"ambient dimension n={n!r} must be an integer >= 2")
    ip = inv(p)
    if p != INF and _as_exponent(p) < 2:
        raise DomainError(f"p={p!r} must satisfy p >= 2")
    if ip <= Fraction(n - 1, 2 * (n + 1)):
        return Fraction(n - 1, 2) - n * ip
    return Fraction(n - 1, 2) * (Fraction(1, 2) - ip)


def weak_a2_region(n: int, k: int, p) -> bool:
    """Whether the full estimate survives weakening (A2) to non-degeneracy.

    Always true for k < (n-1)/2; for k > (n-1)/2 requires p >= 4k/(n-1),
    and for k = (n-1)/2 the strict inequality p > 4k/(n-1).
    """
    ExponentQuery(n, k, p)
    ip = inv(p)
    half = Fraction(n - 1, 2)
    if k < half:
        return True
    threshold = Fraction(4 * k, n - 1)
    it = inv(threshold)
    if k > half:
        return ip <= it
    return ip < it
