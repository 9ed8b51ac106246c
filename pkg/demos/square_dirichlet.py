"""Exit sampling against known harmonic functions on the unit square.

Fences the unit square with boundary squares at resolution 2^-n, samples
boundary data from functions that happen to be harmonic, and checks that
the walker average at interior points reproduces them.  The error budget
has three visible parts printed per row: the confidence half-width, the
boundary-data tolerance epsilon(n), and the transfer scale 2^-n.

Run:  python3 demos/square_dirichlet.py [--n 5] [--walkers 20000]
"""

import argparse

from bmkit import (
    BoundaryCondition,
    flood_fill_interior,
    solve_at,
    transfer_condition,
    unit_square_domain,
)

HARMONICS = [
    ("x", lambda x, y: x, 1.0),
    ("x*y", lambda x, y: x * y, 1.6),
    ("x^2 - y^2", lambda x, y: x * x - y * y, 2.3),
]

POINTS = [(0.5, 0.5), (0.25, 0.75), (0.8125, 0.3125)]


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=5, help="boundary resolution")
    ap.add_argument("--walkers", type=int, default=20_000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    domain = unit_square_domain(args.n)
    region = flood_fill_interior(domain, POINTS[0])
    print(f"unit square at n={args.n}: {len(region.squares)} interior cells,"
          f" {len(region.boundary_segments)} boundary segments")
    print(f"{args.walkers} walkers per estimate, seed {args.seed}")
    print()
    print(f"{'data':12s} {'point':>18s} {'estimate':>10s} {'truth':>8s}"
          f" {'|err|':>8s} {'budget':>8s}")

    for name, f, lipschitz in HARMONICS:
        bc = BoundaryCondition.from_function(domain, f, lipschitz=lipschitz)
        psi = transfer_condition(region, bc)
        extra = lipschitz * 2.0 ** -args.n + 2.0 ** -args.n
        for pt in POINTS:
            # walks are cached on the region, so the three data sets
            # reuse the same exits at each point
            est = solve_at(region, psi, pt, args.walkers, args.seed)
            err = abs(est.mean - f(*pt))
            budget = est.half_width + extra
            flag = "" if err <= budget else "  <-- outside budget"
            print(f"{name:12s} {str(pt):>18s} {est.mean:10.4f}"
                  f" {f(*pt):8.4f} {err:8.4f} {budget:8.4f}{flag}")
    print()
    print("budget = 99% half-width + epsilon(n) + 2^-n; the harmonic truth"
          " should sit inside it essentially always")


if __name__ == "__main__":
    main()
