"""``ulam`` command-line entry point.

Exit codes: 0 success, 1 usage or configuration error, 2 a checked
property failed.
"""

import argparse
from dataclasses import asdict
import json
import logging
import sys

import numpy as np

from . import experiments
from .interval_maps import (counterexample_map, identity_map, load_map, mp_map,
                            verify_family_T, verify_theorem4_conditions)
from .measures import (check_key_inequality, is_monotonic, project,
                       pushforward, random_monotonic, random_ordered_pair)
from .partitions import quasi_uniform_partition, uniform_partition
from .stationary import stationary_distribution
from .ulam_operator import UlamMatrix, build_matrix

log = logging.getLogger("ulam")

EXIT_OK, EXIT_USAGE, EXIT_PROPERTY = 0, 1, 2


class UsageError(Exception):
    pass


def _map_from_args(args):
    name = args.map
    if name == "mp":
        if args.alpha is None:
            raise UsageError("--map mp needs --alpha")
        return mp_map(args.alpha)
    if name == "doubling":
        return mp_map(0.0)
    if name == "counterexample":
        return counterexample_map()
    if name == "identity":
        return identity_map()
    if name == "file":
        if not args.map_file:
            raise UsageError("--map file needs --map-file PATH")
        return load_map(args.map_file)
    raise UsageError(f"unknown map {name!r}")


def _partition_from_args(args, n=None):
    n = n or args.cells
    if args.partition == "uniform":
        return uniform_partition(n)
    return quasi_uniform_partition(n, args.K, args.seed)


def _config(args):
    return {k: v for k, v in vars(args).items() if k not in ("func", "log")}


def _emit(payload, out):
    text = payload if isinstance(payload, str) else json.dumps(payload, indent=1) + "\n"
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(out, "w") as fh:
            fh.write(text)


def cmd_build(args):
    tmap = _map_from_args(args)
    P = build_matrix(tmap, _partition_from_args(args))
    if args.format == "triplets":
        _emit(P.to_triplets(), args.out)
    else:
        _emit({"config": _config(args), **P.to_json()}, args.out)
    return EXIT_OK


def cmd_stationary(args):
    with open(args.input) as fh:
        P = UlamMatrix.from_json(json.load(fh))
    res = stationary_distribution(P, tol=args.tol, max_iter=args.max_iter,
                                  method=args.method, cesaro=args.cesaro)
    _emit({"config": _config(args), **res.to_json()}, args.out)
    return EXIT_OK if res.residual <= args.tol else EXIT_PROPERTY


def cmd_sweep(args):
    cells = [int(c) for c in args.cells.split(",")]
    records = experiments.run_sweep(args.alpha, cells, args.partition, args.K,
                                    args.seed, args.z, args.tol)
    _emit(experiments.sweep_csv(records, _config(args)), args.out)
    for r in records:
        if r.error:
            log.warning("n=%d: %s", r.n_cells, r.error)
    return EXIT_OK if all(r.ok for r in records) else EXIT_PROPERTY


def cmd_pipeline(args):
    tmap = _map_from_args(args)
    alpha = float(tmap.params.get("alpha", args.alpha or 0.0))
    rec = experiments.sweep_record(alpha, args.cells, args.partition, args.K, args.seed,
                                   args.z, args.tol, tmap=tmap)
    _emit({"config": _config(args), "record": rec.to_json()}, args.out)
    return EXIT_OK if rec.ok else EXIT_PROPERTY


def cmd_counterexample(args):
    cells = [int(c) for c in args.cells.split(",")]
    records = experiments.run_counterexample(cells, args.window, aligned=not args.unaligned)
    _emit(experiments.counterexample_csv(records, _config(args)), args.out)
    return EXIT_OK


def cmd_check_monotone(args):
    """Random monotone measures through projection, pushforward and the key inequality."""
    tmap = _map_from_args(args)
    in_family = verify_family_T(tmap).in_family_T
    if not in_family:
        log.warning("map %s is outside the convex family; pushforward check skipped",
                    tmap.name)
    output = uniform_partition(args.cells)
    rng = np.random.default_rng(args.seed)
    failures = 0
    lines = []
    for t in range(args.trials):
        n_in = int(rng.integers(1, 65))
        part_in = quasi_uniform_partition(n_in, float(rng.uniform(1, 4)), int(rng.integers(2**31)))
        mu = random_monotonic(int(rng.integers(2**31)), n_in, atom_prob=0.5, partition=part_in)
        target = quasi_uniform_partition(int(rng.integers(1, 65)), float(rng.uniform(1, 4)),
                                         int(rng.integers(2**31)))
        pair = random_ordered_pair(rng)
        result = {
            "trial": t,
            "key_inequality": bool(check_key_inequality(mu, pair)),
            "project": _check_json(is_monotonic(project(mu, target), tol=1e-12)),
        }
        ok = result["key_inequality"] and result["project"]["ok"]
        if in_family:
            result["pushforward"] = _check_json(is_monotonic(pushforward(tmap, mu, output), 1e-10))
            ok = ok and result["pushforward"]["ok"]
        result["ok"] = ok
        if not ok:
            result["measure"] = mu.to_json()
            result["pair"] = [list(pair.A), list(pair.B)]
        failures += not ok
        lines.append(json.dumps(result))
    lines.append(json.dumps({"config": _config(args), "trials": args.trials,
                             "passed": args.trials - failures}))
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK if failures == 0 else EXIT_PROPERTY


def _check_json(check):
    # witnesses are reported 1-based, like every file the CLI writes
    ok, witness = check
    return {"ok": bool(ok), "witness": None if witness is None else witness + 1}


def cmd_verify_family(args):
    tmap = _map_from_args(args)
    alpha = args.alpha if args.alpha is not None else float(tmap.params.get("alpha", 0.0))
    report = verify_theorem4_conditions(tmap, alpha, args.C, samples=args.samples,
                                        strict=False)
    payload = {"config": _config(args), **asdict(report),
               "in_family_T": report.in_family_T, "passed": report.passed}
    _emit(payload, args.out)
    return EXIT_OK if report.passed else EXIT_PROPERTY


def _add_map(p):
    p.add_argument("--map", default="mp",
                   choices=["mp", "doubling", "counterexample", "identity", "file"])
    p.add_argument("--alpha", type=float)
    p.add_argument("--map-file")


def _add_partition(p, cells_type=int):
    p.add_argument("--cells", type=cells_type, required=True)
    p.add_argument("--partition", choices=["uniform", "quasi"], default="uniform")
    p.add_argument("--K", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)


def build_parser():
    parser = argparse.ArgumentParser(prog="ulam", description=__doc__.splitlines()[0])
    parser.add_argument("--log", default="WARNING",
                        choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", help="assemble an Ulam matrix")
    _add_map(p)
    _add_partition(p)
    p.add_argument("--format", choices=["json", "triplets"], default="json")
    p.add_argument("--out")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("stationary", help="stationary distribution of a saved matrix")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--tol", type=float, default=1e-13)
    p.add_argument("--max-iter", type=int, default=10**6)
    p.add_argument("--method", choices=["direct", "power"], default="direct")
    p.add_argument("--cesaro", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_stationary)

    p = sub.add_parser("sweep", help="resolution sweep for the Manneville-Pomeau map")
    p.add_argument("--alpha", type=float, required=True)
    _add_partition(p, cells_type=str)
    p.add_argument("--z", type=float, default=0.1)
    p.add_argument("--tol", type=float, default=1e-13)
    p.add_argument("--out")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("pipeline", help="build, solve and summarize one configuration")
    _add_map(p)
    _add_partition(p)
    p.add_argument("--z", type=float, default=0.1)
    p.add_argument("--tol", type=float, default=1e-13)
    p.add_argument("--out")
    p.set_defaults(func=cmd_pipeline)

    p = sub.add_parser("check-monotone", help="random monotone-measure property runs")
    _add_map(p)
    p.add_argument("--cells", type=int, default=1024, help="pushforward output cells")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_check_monotone)

    p = sub.add_parser("counterexample", help="window mass near 1/2 for the counterexample map")
    p.add_argument("--cells", default="12,60,120,240")
    p.add_argument("--window", type=float, default=1 / 24)
    p.add_argument("--unaligned", action="store_true",
                   help="allow cell counts that are not multiples of 12")
    p.add_argument("--out")
    p.set_defaults(func=cmd_counterexample)

    p = sub.add_parser("verify-family", help="check the convex-family and local-form conditions")
    _add_map(p)
    p.add_argument("--C", type=float, default=1.0)
    p.add_argument("--samples", type=int, default=1025)
    p.add_argument("--out")
    p.set_defaults(func=cmd_verify_family)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    logging.basicConfig(level=args.log, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (UsageError, ValueError, OSError) as exc:
        log.error("%s", exc)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
