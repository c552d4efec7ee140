"""Command-line runner: ``nagata-knn <subcommand> [--config FILE] [flags]``.

Exit status: 0 success, 1 a check failed (bound violated, unexpected witness),
2 usage or configuration error.  Data goes to ``--out``; diagnostics to stderr.

Config files are JSON objects whose keys are the long flag names with dashes
replaced by underscores (``{"n": [100, 1000], "k_rule": "sqrt", ...}``); flags
given on the command line win over file values.
"""

import argparse
import json
import logging
import math
import sys

import numpy as np

from . import experiments as ex
from .errors import CapacityError, ConfigError, DomainError, NagataKnnError, ResolutionError
from .knn import TieBreak, cover_hart_curve
from .nagata import nagata_violation_witness
from .spaces import SequenceSpace, UniformBox, build_from_spec

log = logging.getLogger("nagata_knn")

OK, CHECK_FAILED, USAGE = 0, 1, 2

EUCLIDEAN_DEFAULT = {"family": "euclidean", "params": {"mixture": {"class0": [0, 1], "class1": [0.9, 1.9]}}}
ULTRAMETRIC_DEFAULT = {"family": "ultrametric", "params": {"alphabet": [4], "tail": 2, "eta": [0.1, 0.3, 0.8, 0.6]}}


class UsageError(Exception):
    pass


def _ints(text):
    return [int(v) for v in str(text).split(",") if v.strip()]


def _floats(text):
    return [float(v) for v in str(text).split(",") if v.strip()]


def _common(p, out_required=True, seeded=True):
    p.add_argument("--config", help="JSON file with default values for the flags")
    p.add_argument("--out", required=False, help="output path" + (" (required)" if out_required else ""))
    if seeded:
        p.add_argument("--seed", type=int, help="master seed (required)")
    p.add_argument("-v", "--verbose", action="count", default=0)


def build_parser():
    ap = argparse.ArgumentParser(prog="nagata-knn", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", metavar="subcommand")

    p = sub.add_parser("consistency", help="k-NN error curve on a space with known Bayes error")
    _common(p)
    p.add_argument("--space", help="JSON space spec, or 'euclidean' / 'ultrametric' for the built-in examples")
    p.add_argument("--n", type=_ints, help="comma-separated sample sizes")
    p.add_argument("--k-rule", help="sqrt | power:E | fixed:K")
    p.add_argument("--trials", type=int)
    p.add_argument("--test-size", type=int)
    p.add_argument("--policy", help="uniform | index")

    p = sub.add_parser("preiss", help="error curve on the Preiss measure")
    _common(p)
    p.add_argument("--levels", type=int, help="truncation level K")
    p.add_argument("--exponent", type=int, help="cell-count growth exponent")
    p.add_argument("--n", type=_ints)
    p.add_argument("--k-rule")
    p.add_argument("--trials", type=int)
    p.add_argument("--test-size", type=int)
    p.add_argument("--policy")

    p = sub.add_parser("hub", help="hub counts in the harmonic hub space")
    _common(p)
    p.add_argument("--n", type=int, help="largest n")
    p.add_argument("--trials", type=int)

    p = sub.add_parser("stone", help="Stone counts on the real line or the simplex")
    _common(p)
    p.add_argument("--family", choices=ex.STONE_FAMILIES)
    p.add_argument("--n", type=int)
    p.add_argument("--k", type=_ints, help="comma-separated k values")
    p.add_argument("--trials", type=int)
    p.add_argument("--policy")

    p = sub.add_parser("dim-witness", help="search a point file for a Nagata-dimension violation")
    _common(p, out_required=False, seeded=False)
    p.add_argument("--points", help='JSON file {"space": {...}, "points": [...]}')
    p.add_argument("--delta", type=int)
    p.add_argument("--scale", type=float)
    p.add_argument("--cap", type=int)

    p = sub.add_parser("hl-check", help="fuzz the ball-counting bound on ultrametric samples")
    _common(p)
    p.add_argument("--instances", type=int)
    p.add_argument("--alphas", type=_floats)
    p.add_argument("--n-max", type=int)

    p = sub.add_parser("cover-hart", help="max k-NN radius over test points for uniform [0,1]^d samples")
    _common(p)
    p.add_argument("--n", type=_ints)
    p.add_argument("--k-rule")
    p.add_argument("--dim", type=int)
    p.add_argument("--test-points", type=int)
    return ap


DEFAULTS = {
    "consistency": {"space": "euclidean", "n": [100, 1000, 10000], "k_rule": "sqrt", "trials": 10, "test_size": 500, "policy": "uniform"},
    "preiss": {"levels": 12, "exponent": 5, "n": [4096], "k_rule": "fixed:64", "trials": 10, "test_size": 500, "policy": "uniform"},
    "hub": {"n": 100, "trials": 2000},
    "stone": {"family": "real-line", "n": 200, "k": [1, 5, 25], "trials": 1000, "policy": "uniform"},
    "dim-witness": {"delta": 0, "scale": math.inf, "cap": None},
    "hl-check": {"instances": 1000, "alphas": [0.1, 0.3, 0.5, 1.0], "n_max": 50},
    "cover-hart": {"n": [100, 1000, 10000], "k_rule": "sqrt", "dim": 1, "test_points": 100},
}

SEEDED = {"consistency", "preiss", "hub", "stone", "hl-check", "cover-hart"}


def resolve(args):
    """Merge defaults < config file < explicit flags into a plain dict."""
    opts = dict(DEFAULTS[args.command])
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(cfg, dict):
            raise ConfigError("config file must hold a JSON object")
        known = set(opts) | {"out", "seed", "points"}
        unknown = set(cfg) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        opts.update(cfg)
    for key, val in vars(args).items():
        if key in ("command", "config", "verbose") or val is None:
            continue
        opts[key] = val
    if args.command in SEEDED:
        if opts.get("seed") is None:
            raise UsageError(f"{args.command} is stochastic and needs --seed")
        if not opts.get("out"):
            raise UsageError(f"{args.command} needs --out")
    return opts


def _space_spec(value):
    if isinstance(value, dict):
        return value
    if value == "euclidean":
        return EUCLIDEAN_DEFAULT
    if value == "ultrametric":
        return ULTRAMETRIC_DEFAULT
    try:
        return json.loads(value)
    except (TypeError, json.JSONDecodeError):
        raise ConfigError(f"bad space {value!r}") from None


def _config(opts, space):
    return ex.ExperimentConfig(
        space=space,
        n_schedule=list(opts["n"]),
        k_rule=opts["k_rule"],
        trials=int(opts["trials"]),
        test_size=int(opts["test_size"]),
        seed=int(opts["seed"]),
        policy=opts["policy"],
    )


def cmd_consistency(opts):
    rows = ex.run_error_curve(_config(opts, _space_spec(opts["space"])))
    ex.write_csv(rows, opts["out"], ex.ERROR_CURVE_COLUMNS)
    return OK


def cmd_preiss(opts):
    space = {"family": "preiss", "params": {"levels": int(opts["levels"]), "exponent": int(opts["exponent"])}}
    rows = ex.run_preiss_inconsistency(_config(opts, space))
    ex.write_csv(rows, opts["out"], ex.ERROR_CURVE_COLUMNS)
    return OK


def cmd_hub(opts):
    rows = ex.run_hub_growth(int(opts["n"]), int(opts["trials"]), int(opts["seed"]))
    ex.write_csv(rows, opts["out"], ex.HUB_COLUMNS)
    return OK


def cmd_stone(opts):
    k_list = opts["k"] if isinstance(opts["k"], list) else [opts["k"]]
    rows = ex.run_stone_sweep(opts["family"], int(opts["n"]), k_list, int(opts["trials"]), opts["policy"], int(opts["seed"]))
    ex.write_csv(rows, opts["out"], ex.STONE_COLUMNS)
    # the real-line count is bounded by 2k; the simplex sweep is expected to break any such bound
    if opts["family"] == "real-line" and any(r.max_count > 2 * r.k for r in rows):
        log.error("stone count above 2k on the real line")
        return CHECK_FAILED
    return OK


def parse_points(space, raw):
    if isinstance(space, SequenceSpace):
        return space.stack([space.finite_point(p) for p in raw])
    return space.stack(raw)


def cmd_dim_witness(opts):
    if not opts.get("points"):
        raise UsageError("dim-witness needs --points")
    try:
        with open(opts["points"], encoding="utf-8") as fh:
            doc = json.load(fh)
        space, _ = build_from_spec(doc["space"])
        pts = parse_points(space, doc["points"])
    except (OSError, json.JSONDecodeError, KeyError, TypeError) as exc:
        raise ConfigError(f"cannot load points file {opts['points']}: {exc}") from exc
    delta = int(opts["delta"])
    scale = float(opts["scale"]) if opts["scale"] is not None else math.inf
    w = nagata_violation_witness(pts, space, delta, scale, opts.get("cap"))
    if w is None:
        text = f"no witness\ndelta: {delta}\nscale: {scale!r}\npoints: {space.size(pts)}\n"
    else:
        D = space.pairwise(pts)
        text = f"witness\ndelta: {delta}\nscale: {scale!r}\n" + w.report(D) + "\n"
    if opts.get("out"):
        with open(opts["out"], "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return OK if w is None else CHECK_FAILED


def cmd_hl_check(opts):
    rows = ex.run_hl_fuzz(int(opts["instances"]), list(opts["alphas"]), int(opts["seed"]), int(opts["n_max"]))
    ex.write_csv(rows, opts["out"], ex.HL_COLUMNS)
    bad = sum(1 for r in rows if not r.ok)
    if bad:
        log.error("%d of %d checks violated the bound", bad, len(rows))
        return CHECK_FAILED
    return OK


def cmd_cover_hart(opts):
    rule = ex.KRule.parse(opts["k_rule"])
    sampler = UniformBox(int(opts["dim"]))
    m = int(opts["test_points"])
    test = np.linspace(0.0, 1.0, m)[:, None].repeat(sampler.space.dim, axis=1)
    curve = cover_hart_curve(sampler, rule, list(opts["n"]), test, np.random.default_rng(int(opts["seed"])))
    ex.write_csv([(n, rule(n), r) for n, r in curve], opts["out"], ex.COVER_HART_COLUMNS)
    return OK


COMMANDS = {
    "consistency": cmd_consistency,
    "preiss": cmd_preiss,
    "hub": cmd_hub,
    "stone": cmd_stone,
    "dim-witness": cmd_dim_witness,
    "hl-check": cmd_hl_check,
    "cover-hart": cmd_cover_hart,
}


def dispatch(args):
    opts = resolve(args)
    status = COMMANDS[args.command](opts)
    if opts.get("out"):
        log.info("wrote %s", opts["out"])
    return status


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return USAGE if exc.code else OK
    if args.command is None:
        parser.print_usage(sys.stderr)
        return USAGE
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(message)s", stream=sys.stderr
    )
    try:
        return dispatch(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return USAGE
    except (ConfigError, DomainError, CapacityError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE
    except ResolutionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return CHECK_FAILED
    except NagataKnnError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE


if __name__ == "__main__":
    sys.exit(main())
