"""Sweep the restricted evolution kernel and fit its decay exponents.

For the free Hamiltonian the point-restricted kernel has the closed form
(2 pi h |t-s|)^{-1/2}, so the fitted powers of 1/h and 1/(h + |t-s|) must
both come out near 1/2.  The indefinite saddle model then shows what
breaks without curvature: the sup bound survives but the line-restricted
operator norm stops decaying in time.
"""

import math

import numpy as np

from qrlab.grids import PeriodicGrid
from qrlab.propagate import fit_kernel_exponents, restricted_kernel_decay
from qrlab.symbols import free_hamiltonian, frequency_window, saddle_hamiltonian


def free_sweep():
    print("free Hamiltonian, point restriction (expect mu = sigma = 1/2):")
    grid = PeriodicGrid(1, 4096)
    window = frequency_window(1.5, 3.0, dim=1)
    hs = [2.0 ** -j for j in range(5, 10)]
    ests = restricted_kernel_decay(
        free_hamiltonian(1), window, hs,
        lambda h: list(np.geomspace(8 * h, 0.5, 6)), grid, restriction="point")
    worst = 0.0
    for e in ests:
        closed = (2 * math.pi * e.h * e.tau) ** -0.5
        worst = max(worst, abs(e.sup_value / closed - 1))
    fit = fit_kernel_exponents(ests, "sup")
    print(f"  sup fit: mu = {fit.mu:.4f}, sigma = {fit.sigma:.4f}")
    print(f"  worst deviation from (2 pi h tau)^(-1/2): {worst:.2%}")


def saddle_sweep():
    print("\nsaddle model xi1*xi2, line restriction (curvature necessity):")
    grid = PeriodicGrid(2, 2048)
    window = frequency_window(0.75, 1.5, dim=2)
    hs = [2.0 ** -7, 2.0 ** -8, 2.0 ** -9]
    ests = restricted_kernel_decay(
        saddle_hamiltonian(), window, hs,
        lambda h: list(np.geomspace(0.2, 0.5, 5)), grid, restriction="line")
    for which, label, expect in (("sup", "sup", "~1 (stationary phase)"),
                                 ("l2", "operator norm", "no time decay")):
        fit = fit_kernel_exponents(ests, which)
        print(f"  {label} fit: mu = {fit.mu:.4f}, sigma = {fit.sigma:.4f} "
              f"({expect})")


def main():
    free_sweep()
    saddle_sweep()


if __name__ == "__main__":
    main()
