"""Tabulate restriction exponents and admissible Strichartz pairs.

Prints the piecewise-linear exponent delta(n, k, .) as a function of 1/p
for a few representative geometries, next to the whole-manifold growth
exponent, and lists the diagonal mixed-norm pairs with their h-powers.
Run as a script; everything is exact rational arithmetic.
"""

from fractions import Fraction

from qrlab.exponents import (
    INF,
    ExponentQuery,
    StrichartzAssumptions,
    delta,
    diagonal_pair,
    full_manifold_delta,
    hypersurface_breakpoint,
    inv,
    strichartz_h_exponent,
)

CASES = [(2, 1), (3, 2), (3, 1), (4, 3), (5, 3)]


def exponent_polyline(n, k, samples=8):
    """(1/p, delta, full-manifold delta) rows from p = inf down to p = 2."""
    inv_ps = sorted({Fraction(j, 2 * samples) for j in range(samples + 1)}
                    | {inv(hypersurface_breakpoint(n))})
    rows = []
    for q in inv_ps:
        if q > Fraction(1, 2):
            continue
        p = INF if q == 0 else 1 / q
        d = delta(ExponentQuery(n, k, p))
        rows.append((q, d, full_manifold_delta(n, p)))
    return rows


def main():
    for n, k in CASES:
        print(f"\nn = {n}, k = {k} "
              f"({'hypersurface' if k == n - 1 else f'codimension {n - k}'})")
        print(f"  {'1/p':>8} {'restricted':>12} {'full manifold':>14}")
        for q, d, full in exponent_polyline(n, k):
            tag = "  [log^{1/2}]" if d.log_half_power else ""
            print(f"  {str(q):>8} {str(d.power):>12} {str(full):>14}{tag}")

        dp = diagonal_pair(n, k)
        if dp is None:
            print("  no diagonal Strichartz pair (p would fall below 2)")
        elif dp.endpoint:
            print("  diagonal pair sits at the excluded endpoint p = 2")
        elif k >= 2:
            a = StrichartzAssumptions(Fraction(n - 1, 2), Fraction(n - 1, 2),
                                      Fraction(n - k, 2), Fraction(n - k, 2))
            print(f"  diagonal pair (r, p) = ({dp.p}, {dp.p}), "
                  f"h-exponent {strichartz_h_exponent(a, dp.p)}")
        else:
            print(f"  diagonal pair (r, p) = ({dp.p}, {dp.p}), "
                  f"h-exponent {inv(dp.p)} (single-bound case)")


if __name__ == "__main__":
    main()
