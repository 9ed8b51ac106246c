"""A walking tour of one Brownian path.

Samples a path from a seed, then interrogates the same object at finer and
finer resolution: grid dumps, value enclosures at awkward times, a certified
running maximum, the first zero after 1/4, and a first passage to a level.
Everything printed here is reproducible from the seed alone.

Run:  python3 demos/path_tour.py [SEED]
"""

import sys

from bmkit import (
    PathCoefficients,
    first_hit_level,
    first_zero,
    has_zero,
    path_max,
)


def main(seed: int) -> None:
    p = PathCoefficients.sample(seed, 0)
    print(f"path from seed {seed}, stream 0")
    print()

    # A path is a coefficient table; asking for a coarse grid costs almost
    # nothing, and finer grids reuse everything already drawn.
    for level in (0, 2, 4):
        knots = ", ".join(f"{v:+.3f}" for v in p.grid(level))
        print(f"  level {level}: [{knots}]")
    print()

    # Values at non-dyadic times come back as enclosures: the truncation is
    # exact at the knots, and the tail is bounded by the modulus pad.
    for t in (1.0 / 3.0, 0.7):
        for level in (8, 16, 24):
            e = p.eval(t, level)
            print(f"  B({t:.4f}) at level {level:2d}: "
                  f"[{e.lo:+.6f}, {e.hi:+.6f}]  width {e.width:.2e}")
        print()

    e = path_max(p, eps=1e-4)
    print(f"  max over [0,1] in [{e.lo:.8f}, {e.hi:.8f}]"
          f"  (width {e.hi - e.lo:.1e}, refined to level {e.level},"
          f" confidence {e.confidence:.4f})")

    d = has_zero(p, 0.25, 0.5)
    print(f"  zero in [0.25, 0.50]? {d.decision.value}")
    d = first_zero(p, 0.25, 1.0, eps=1e-8)
    if d.time is not None:
        print(f"  first zero after 0.25 at t = {d.time:.8f} ± {d.slack:.1e}")
    else:
        print("  no zero in [0.25, 1.0]")

    rec = first_hit_level(p, 0.5)
    if rec is None:
        print("  never reaches +0.5 before t = 1")
    else:
        print(f"  first reaches +0.5 at t = {rec.time:.8f} ± {rec.slack:.1e}")


if __name__ == "__main__":
    main(int(sys.argv[1]) if len(sys.argv) > 1 else 7)
