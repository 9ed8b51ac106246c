"""Refining a squared disk until the boundary error budget is met.

Approximates the unit circle by grid squares at resolutions 2^-4 .. 2^-7
(from its signed distance function), puts angular data cos(2*theta) on the
fence, and lets the refining solver walk the ladder at a fixed evaluation
point.  The printed rows are plot-ready (n, v_n, err_budget) triples; the
harmonic extension of cos(2*theta) from the unit circle is r^2*cos(2*theta),
so the truth at (0.25, 0) is 0.0625.

Separately prints the slow-log law for hitting a small disk: the scaled
probabilities log(1/eps) * P(hit eps-disk by t=1 from radius 1) against
their limit.

Run:  python3 demos/disk_ladder.py [--walkers 20000]
"""

import argparse
import math

from bmkit import (
    BoundaryCondition,
    SquaredDomain,
    bessel_first_passage,
    solve_refining,
    spitzer_limit,
)


def circle_sdf(x: float, y: float) -> float:
    return math.hypot(x, y) - 1.0


def cos_2theta(x: float, y: float) -> float:
    # angular data sampled where the square sits relative to the origin
    r2 = x * x + y * y
    return (x * x - y * y) / r2


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--walkers", type=int, default=20_000)
    ap.add_argument("--seed", type=int, default=1800)
    ap.add_argument("--target-err", type=float, default=0.15)
    args = ap.parse_args()

    ladder = []
    for n in (4, 5, 6, 7):
        domain = SquaredDomain.from_signed_distance(
            n, circle_sdf, bbox=(-1.4, -1.4, 1.4, 1.4))
        bc = BoundaryCondition.from_function(domain, cos_2theta,
                                             lipschitz=2.7)
        ladder.append((domain, bc))
        print(f"n={n}: fence has {len(domain.boundary_squares)} squares")

    point = (0.25, 0.0)
    est = solve_refining(ladder, point, args.target_err, args.walkers,
                         args.seed)
    print()
    print(f"refining at {point}, truth r^2*cos(2*theta) = 0.0625,"
          f" target error {args.target_err}")
    print("n,v_n,err")
    for step in est.trace:
        print(f"{step.resolution},{step.value!r},{step.err_budget!r}")
    verdict = "met" if est.converged else "not met within the ladder"
    print(f"final: {est.mean:.4f} ± {est.half_width:.4f} (budget {verdict})")

    print()
    print("scaled hitting probabilities vs the slow-log limit:")
    limit = spitzer_limit(1.0)
    for eps in (1e-1, 1e-2, 1e-3):
        scaled = math.log(1.0 / eps) * bessel_first_passage(1.0, eps)
        print(f"  eps={eps:g}: {scaled:.4f}  (limit {limit:.4f},"
              f" gap {abs(scaled - limit) / limit:.1%})")


if __name__ == "__main__":
    main()
