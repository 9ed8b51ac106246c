"""Command-line front end.

Every command writes JSON (default) or CSV, embeds its resolved
configuration and the tool version in the output, and is byte-deterministic
for a fixed configuration.  Exit status: 0 on success (for ``validate``,
all checks passing), 1 when a suite fails or a search exhausts its
refinement budget, 2 on usage errors.

The ``BMKIT_THREADS`` environment variable caps the compiled kernels'
thread pool.  It is an execution detail, not part of the configuration:
results do not depend on it, and it is not echoed.

Example session::

    bmkit sample --seed 7 --level 10 --format csv -o path.csv
    bmkit max --seed 7 --eps 1e-4
    bmkit zeros --seed 7 --from 0.25 --to 0.5 --first
    bmkit validate modulus-of-continuity --c 1.0   # demonstrates failure
    bmkit dirichlet square6.json --at 0.25,0.75 --walkers 100000
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import json
import os
import sys
from dataclasses import dataclass, field

from . import __version__
from .dirichlet import (
    flood_fill_interior,
    load_domain,
    solve_at,
    solve_refining,
    transfer_condition,
)
from .extrema import (
    RefinementBudgetError,
    first_hit_level,
    first_zero,
    has_zero,
    path_max,
)
from .path import PathCoefficients
from .planar import PlanarPath, first_hit_boundary, square_boundary
from .schauder import DEFAULT_C
from .validate import SUITES, resolve_suite_config, run_suite


@dataclass(frozen=True)
class RunConfig:
    """The resolved, serializable settings of one command invocation.

    ``tolerances`` collects the accuracy knobs, ``params`` everything
    else command-specific; ``level`` is None for commands that refine
    adaptively rather than to a requested depth.  Re-running a command
    with an equal config reproduces its output byte for byte.
    """

    command: str
    seed: int = 0
    n_samples: int = 1
    level: int | None = None
    tolerances: dict = field(default_factory=dict)
    output_format: str = "json"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.seed < 0:
            raise ValueError("seed must be nonnegative")
        if self.n_samples < 1:
            raise ValueError("n_samples must be positive")
        if self.level is not None and self.level < 0:
            raise ValueError("level must be nonnegative")
        if self.output_format not in ("json", "csv"):
            raise ValueError("output_format must be 'json' or 'csv'")
        for key, val in self.tolerances.items():
            if not val > 0.0:
                raise ValueError(f"tolerance {key!r} must be positive")

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "seed": self.seed,
            "n_samples": self.n_samples,
            "level": self.level,
            "tolerances": dict(sorted(self.tolerances.items())),
            "output_format": self.output_format,
            "params": dict(sorted(self.params.items())),
        }


# ---------------------------------------------------------------------------
# Output plumbing.


def _open_out(path: str | None):
    if path in (None, "-"):
        return contextlib.nullcontext(sys.stdout)
    return open(path, "w", encoding="utf-8", newline="")


def _emit_json(payload: dict, cfg: RunConfig, out) -> None:
    doc = dict(payload)
    doc["config"] = cfg.to_dict()
    doc["version"] = __version__
    out.write(json.dumps(doc, sort_keys=True, indent=2) + "\n")


def _emit_csv(header, rows, cfg: RunConfig, out) -> None:
    out.write(f"# bmkit {__version__}\n")
    out.write("# config " + json.dumps(cfg.to_dict(), sort_keys=True) + "\n")
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([
            repr(v) if isinstance(v, float) else "" if v is None else v
            for v in row
        ])


def _emit(cfg: RunConfig, out_path: str | None, payload: dict,
          header, rows) -> None:
    with _open_out(out_path) as out:
        if cfg.output_format == "csv":
            _emit_csv(header, rows, cfg, out)
        else:
            _emit_json(payload, cfg, out)


def _apply_thread_env(parser: argparse.ArgumentParser) -> None:
    raw = os.environ.get("BMKIT_THREADS")
    if raw is None:
        return
    try:
        n = int(raw)
    except ValueError:
        n = 0
    if n < 1:
        parser.error(f"BMKIT_THREADS must be a positive integer, got {raw!r}")
    try:
        import warnings

        import numba

        with warnings.catch_warnings():
            # threading-layer probing can warn about TBB versions; the cap
            # itself is what matters here
            warnings.simplefilter("ignore")
            numba.set_num_threads(min(n, numba.config.NUMBA_NUM_THREADS))
    except ImportError:
        pass


def _float_pair(text: str) -> tuple[float, float]:
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected X,Y, got {text!r}")
    return (float(parts[0]), float(parts[1]))


def _float_list(text: str) -> list[float]:
    try:
        return [float(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated floats, got {text!r}")


# ---------------------------------------------------------------------------
# Commands.


def _cmd_sample(args, parser) -> int:
    cfg = RunConfig(command="sample", seed=args.seed, level=args.level,
                    output_format=args.format,
                    params={"stream": args.stream})
    path = PathCoefficients.sample(args.seed, args.stream)
    values = path.grid(args.level)
    scale = 2.0 ** -args.level
    points = [[i * scale, float(v)] for i, v in enumerate(values)]
    _emit(cfg, args.output, {"points": points},
          ("t", "value"), [tuple(p) for p in points])
    return 0


def _cmd_eval(args, parser) -> int:
    for t in args.times:
        if not 0.0 <= t <= 1.0:
            parser.error(f"times must lie in [0, 1], got {t}")
    cfg = RunConfig(command="eval", seed=args.seed, level=args.level,
                    output_format=args.format,
                    params={"stream": args.stream, "times": args.times,
                            "c": args.c})
    path = PathCoefficients.sample(args.seed, args.stream)
    enclosures = []
    for t in args.times:
        e = path.eval(t, args.level, c=args.c)
        enclosures.append({"t": t, "lo": e.lo, "hi": e.hi,
                           "confidence": e.confidence})
    _emit(cfg, args.output, {"enclosures": enclosures},
          ("t", "lo", "hi", "confidence"),
          [(d["t"], d["lo"], d["hi"], d["confidence"]) for d in enclosures])
    return 0


def _cmd_max(args, parser) -> int:
    if not 0.0 <= args.a < args.b <= 1.0:
        parser.error("need 0 <= --from < --to <= 1")
    cfg = RunConfig(command="max", seed=args.seed,
                    tolerances={"eps": args.eps},
                    output_format=args.format,
                    params={"stream": args.stream, "from": args.a,
                            "to": args.b})
    path = PathCoefficients.sample(args.seed, args.stream)
    e = path_max(path, args.a, args.b, eps=args.eps)
    payload = {"lo": e.lo, "hi": e.hi, "mid": 0.5 * (e.lo + e.hi),
               "level": e.level, "confidence": e.confidence}
    _emit(cfg, args.output, payload,
          ("lo", "hi", "level", "confidence"),
          [(e.lo, e.hi, e.level, e.confidence)])
    return 0


def _cmd_zeros(args, parser) -> int:
    if not 0.0 <= args.a < args.b <= 1.0:
        parser.error("need 0 <= --from < --to <= 1")
    cfg = RunConfig(command="zeros", seed=args.seed,
                    tolerances={"eps": args.eps} if args.first else {},
                    output_format=args.format,
                    params={"stream": args.stream, "from": args.a,
                            "to": args.b, "first": args.first})
    path = PathCoefficients.sample(args.seed, args.stream)
    if args.first:
        d = first_zero(path, args.a, args.b, eps=args.eps)
    else:
        d = has_zero(path, args.a, args.b)
    payload = {
        "decision": d.decision.value,
        "witness": list(d.witness) if d.witness is not None else None,
        "time": d.time,
        "slack": d.slack,
        "level": d.level,
        "confidence": d.confidence,
    }
    _emit(cfg, args.output, payload,
          ("decision", "time", "slack", "level", "confidence"),
          [(d.decision.value, d.time, d.slack, d.level, d.confidence)])
    return 0


def _cmd_hit(args, parser) -> int:
    planar = args.square is not None
    if planar == (args.alpha is not None):
        parser.error("give exactly one of --alpha (level hit) or --square "
                     "(planar boundary hit)")
    tolerances = {"eps": args.eps}
    if planar:
        x0, y0, side = args.square
        if side <= 0:
            parser.error("--square side must be positive")
        start = args.start or (x0 + side / 2.0, y0 + side / 2.0)
        params = {"stream": args.stream, "square": [x0, y0, side],
                  "start": list(start)}
        cfg = RunConfig(command="hit", seed=args.seed, tolerances=tolerances,
                        output_format=args.format, params=params)
        pp = PlanarPath(args.seed, base_stream=args.stream, start=start)
        try:
            rec = first_hit_boundary(pp, square_boundary(x0, y0, side),
                                     eps=args.eps)
        except RefinementBudgetError as exc:
            print(f"bmkit hit: {exc}", file=sys.stderr)
            return 1
    else:
        params = {"stream": args.stream, "alpha": args.alpha, "q": args.q,
                  "horizon": args.horizon}
        cfg = RunConfig(command="hit", seed=args.seed, tolerances=tolerances,
                        output_format=args.format, params=params)
        path = PathCoefficients.sample(args.seed, args.stream)
        try:
            rec = first_hit_level(path, args.alpha, q=args.q, eps=args.eps,
                                  horizon=args.horizon)
        except RefinementBudgetError as exc:
            print(f"bmkit hit: {exc}", file=sys.stderr)
            return 1
    if rec is None:
        payload = {"hit": False, "time": None, "slack": None, "level": None,
                   "confidence": None, "point": None, "segment": None}
        rows = [(0, None, None, None, None)]
    else:
        payload = {"hit": True, "time": rec.time, "slack": rec.slack,
                   "level": rec.level, "confidence": rec.confidence,
                   "point": list(rec.point) if rec.point else None,
                   "segment": rec.segment}
        rows = [(1, rec.time, rec.slack, rec.level, rec.confidence)]
    _emit(cfg, args.output, payload,
          ("hit", "time", "slack", "level", "confidence"), rows)
    return 0


def _cmd_validate(args, parser) -> int:
    resolved = resolve_suite_config(args.suite, seed=args.seed,
                                    n_samples=args.samples, level=args.level,
                                    c=args.c)
    params = {"suite": args.suite}
    if "c" in resolved:
        params["c"] = resolved["c"]
    cfg = RunConfig(command="validate", seed=args.seed,
                    n_samples=resolved.get("n_samples", 1),
                    level=resolved.get("level"),
                    output_format=args.format, params=params)
    report = run_suite(args.suite, **resolved)
    _emit(cfg, args.output, report.to_dict(),
          report.CSV_HEADER, report.rows())
    return 0 if report.passed else 1


def _cmd_dirichlet(args, parser) -> int:
    levels = []
    for name in args.domain:
        try:
            levels.append(load_domain(name))
        except (OSError, ValueError, KeyError) as exc:
            parser.error(f"cannot load domain file {name!r}: {exc}")
    refining = len(levels) > 1
    if refining and args.target_err is None:
        parser.error("--target-err is required when several domain files "
                     "form a refinement ladder")
    tolerances = {"eps_hit": args.eps_hit}
    if args.target_err is not None:
        tolerances["target_err"] = args.target_err
    cfg = RunConfig(command="dirichlet", seed=args.seed,
                    n_samples=args.walkers, tolerances=tolerances,
                    output_format=args.format,
                    params={"at": list(args.at), "confidence": args.confidence,
                            "engine": args.engine,
                            "files": list(args.domain)})
    try:
        if refining:
            est = solve_refining(levels, args.at, args.target_err,
                                 args.walkers, args.seed,
                                 eps_hit=args.eps_hit,
                                 confidence=args.confidence,
                                 engine=args.engine)
        else:
            domain, bc = levels[0]
            region = flood_fill_interior(domain, args.at)
            psi = transfer_condition(region, bc)
            est = solve_at(region, psi, args.at, args.walkers, args.seed,
                           eps_hit=args.eps_hit, confidence=args.confidence,
                           engine=args.engine)
    except ValueError as exc:
        parser.error(str(exc))
    trace = [{"n": s.resolution, "v_n": s.value, "err_budget": s.err_budget}
             for s in (est.trace or ())]
    payload = {
        "x": list(args.at),
        "mean": est.mean,
        "half_width": est.half_width,
        "confidence": est.confidence,
        "n_samples": est.n_samples,
        "lost_walkers": est.lost_walkers,
        "trace": trace,
    }
    if est.converged is not None:
        payload["converged"] = est.converged
    if trace:
        rows = [(t["n"], t["v_n"], t["err_budget"]) for t in trace]
    else:
        rows = [(levels[0][0].resolution, est.mean, est.half_width)]
    _emit(cfg, args.output, payload, ("n", "v_n", "err"), rows)
    return 0


# ---------------------------------------------------------------------------
# Parser.


def _add_common(sub, fmt_default="json"):
    sub.add_argument("--seed", type=int, default=0, help="RNG seed")
    sub.add_argument("--format", choices=("json", "csv"), default=fmt_default,
                     help="output format (default %(default)s)")
    sub.add_argument("-o", "--output", default=None, metavar="FILE",
                     help="write to FILE instead of stdout")


def _add_stream(sub):
    sub.add_argument("--stream", type=int, default=0,
                     help="path stream within the seed (default 0)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bmkit",
        description="Sample refinable Brownian paths, query them with "
                    "certified error bounds, and solve Dirichlet problems "
                    "by exit sampling.",
    )
    parser.add_argument("--version", action="version",
                        version=f"bmkit {__version__}")
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("sample", help="dump a path's dyadic grid values")
    _add_common(p)
    _add_stream(p)
    p.add_argument("--level", type=int, default=10,
                   help="grid depth: 2^level + 1 knots (default %(default)s)")
    p.set_defaults(handler=_cmd_sample)

    p = subs.add_parser("eval", help="enclose path values at given times")
    _add_common(p)
    _add_stream(p)
    p.add_argument("--times", type=_float_list, required=True,
                   help="comma-separated times in [0, 1]")
    p.add_argument("--level", type=int, default=20,
                   help="truncation level (default %(default)s)")
    p.add_argument("--c", type=float, default=DEFAULT_C,
                   help="modulus constant for the tail pad "
                        "(default %(default)s)")
    p.set_defaults(handler=_cmd_eval)

    p = subs.add_parser("max", help="enclose the running maximum")
    _add_common(p)
    _add_stream(p)
    p.add_argument("--from", dest="a", type=float, default=0.0,
                   help="window start (default %(default)s)")
    p.add_argument("--to", dest="b", type=float, default=1.0,
                   help="window end (default %(default)s)")
    p.add_argument("--eps", type=float, default=1e-3,
                   help="enclosure width target (default %(default)s)")
    p.set_defaults(handler=_cmd_max)

    p = subs.add_parser("zeros", help="certify or locate zeros in a window")
    _add_common(p)
    _add_stream(p)
    p.add_argument("--from", dest="a", type=float, required=True,
                   help="window start (> 0 for a sampled path)")
    p.add_argument("--to", dest="b", type=float, required=True,
                   help="window end")
    p.add_argument("--first", action="store_true",
                   help="locate the first zero instead of only deciding")
    p.add_argument("--eps", type=float, default=1e-6,
                   help="time slack for --first (default %(default)s)")
    p.set_defaults(handler=_cmd_zeros)

    p = subs.add_parser("hit", help="first passage to a level or a square "
                                    "boundary")
    _add_common(p)
    _add_stream(p)
    p.add_argument("--alpha", type=float, default=None,
                   help="level to hit (1-D search)")
    p.add_argument("--q", type=float, default=0.0,
                   help="search start time for --alpha (default %(default)s)")
    p.add_argument("--horizon", type=float, default=None,
                   help="give up after this time (default: path-dependent)")
    p.add_argument("--square", type=float, nargs=3, default=None,
                   metavar=("X0", "Y0", "SIDE"),
                   help="planar search: square with lower-left corner "
                        "(X0, Y0) and side SIDE")
    p.add_argument("--start", type=_float_pair, default=None,
                   help="planar start point X,Y (default: square center)")
    p.add_argument("--eps", type=float, default=1e-6,
                   help="hit-time slack (default %(default)s)")
    p.set_defaults(handler=_cmd_hit)

    p = subs.add_parser("validate", help="run a statistical suite")
    p.add_argument("suite", choices=sorted(SUITES),
                   help="which suite to run")
    _add_common(p)
    p.add_argument("--samples", type=int, default=None,
                   help="paths/walkers per check (default: suite-specific)")
    p.add_argument("--level", type=int, default=None,
                   help="refinement level where the suite takes one")
    p.add_argument("--c", type=float, default=None,
                   help="modulus constant where the suite takes one")
    p.set_defaults(handler=_cmd_validate)

    p = subs.add_parser("dirichlet", help="solve a Dirichlet problem by "
                                          "exit sampling")
    p.add_argument("domain", nargs="+",
                   help="domain JSON file(s); several files form a "
                        "coarse-to-fine refinement ladder")
    _add_common(p)
    p.add_argument("--at", type=_float_pair, required=True,
                   help="evaluation point X,Y")
    p.add_argument("--walkers", type=int, default=10_000,
                   help="walkers per estimate (default %(default)s)")
    p.add_argument("--eps-hit", type=float, default=1e-4,
                   help="exit-time slack (default %(default)s)")
    p.add_argument("--confidence", type=float, default=0.99,
                   help="confidence level (default %(default)s)")
    p.add_argument("--engine", choices=("compiled", "reference"),
                   default="compiled",
                   help="walker implementation (default %(default)s)")
    p.add_argument("--target-err", type=float, default=None,
                   help="stop a refinement ladder once the error budget "
                        "falls to this")
    p.set_defaults(handler=_cmd_dirichlet)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _apply_thread_env(parser)
    try:
        return args.handler(args, parser)
    except ValueError as exc:
        parser.error(str(exc))


if __name__ == "__main__":
    sys.exit(main())
