"""Measure restricted norm growth for the two extremal harmonic families.

Zonal harmonics restricted to a great circle through their poles realize
the large-p branch of the exponent; highest-weight harmonics on the
equator realize the small-p plateau 1/4.  The script fits both slope
families down a degree ladder and locates the crossover where the
extremizers exchange roles (p = 4 on the two-sphere).
"""

import numpy as np

from qrlab.exponents import ExponentQuery, delta
from qrlab.lab import (
    ExperimentSpec,
    estimate_crossover,
    fit_power_law,
    run_experiment,
)

DEGREES = tuple(32 * 2 ** j for j in range(6))


def fit_family(family, target, ps):
    spec = ExperimentSpec(family, target, ps, DEGREES)
    run = run_experiment(spec)
    slopes = []
    print(f"\n{family} harmonics on the {target}:")
    for p in ps:
        pv = np.inf if p == "inf" else float(p)
        fit = fit_power_law(run.table, pv)
        theory = delta(ExponentQuery(2, 1, np.inf if pv == np.inf else int(pv)))
        slopes.append(fit.slope)
        trim = " (coarse rungs trimmed)" if fit.trimmed else ""
        print(f"  p = {p!s:>3}: slope {fit.slope:+.4f}, theory "
              f"{float(theory.power):+.4f}{trim}")
    return slopes


def main():
    zonal_ps = (4, 6, "inf")
    hw_ps = (2, 3, 4)
    z_slopes = fit_family("zonal", "great_circle", zonal_ps)
    h_slopes = fit_family("highest_weight", "equator", hw_ps)

    inv_z = [0.0 if p == "inf" else 1.0 / p for p in zonal_ps]
    inv_h = [1.0 / p for p in hw_ps]
    crossover = estimate_crossover(inv_z, z_slopes, inv_h, h_slopes)
    print(f"\nfitted slope lines cross at p = {crossover:.3f} "
          f"(theory: the breakpoint p = 4)")


if __name__ == "__main__":
    main()
