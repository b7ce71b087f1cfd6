"""
Command-line interface.

    tensorrank rank --input r.csv --method bayes --return-scores
    tensorrank evaluate --input r.csv --rubric 0,0.5,1
    tensorrank recover --seeds 4 --L 11 --M 500 --out reports/
    tensorrank stability --out reports/
    tensorrank runtime --out reports/
    tensorrank generate --L 11 --M 500 --N 8 --seed 0 --output r.csv

Exit codes: 0 success, 1 usage or input error, 2 method or capability error.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .harness import experiments as exp
from .harness.generator import GeneratorConfig, generate
from .harness.report import FORMATS, emit, to_csv
from .methods import METHODS, RUBRIC_METHODS, bayes_evaluate, run_method
from .methods.pairwise import DisconnectedComparisonError
from .methods.voting import CapabilityError
from .priors import Prior
from .ranking import SCHEMES
from .tensor import OutcomeMatrix, read_tensor, write_tensor

EXIT_OK, EXIT_USAGE, EXIT_METHOD = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit with status 2
        raise UsageError(f"{self.prog}: error: {message}")


# -- argument helpers ---------------------------------------------------------


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _name_list(text: str) -> list[str]:
    return [v.strip() for v in text.split(",") if v.strip()]


def _rubric(text: str) -> list[float]:
    try:
        value = json.loads(text) if text.lstrip().startswith("[") else [
            float(v) for v in text.split(",")
        ]
    except ValueError:
        raise argparse.ArgumentTypeError(f"cannot parse rubric {text!r}")
    return [float(v) for v in value]


def _param(text: str) -> tuple[str, object]:
    key, sep, raw = text.partition("=")
    if not sep or not key:
        raise argparse.ArgumentTypeError(f"expected key=value, got {text!r}")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key.strip(), value


def _prior(text: str) -> Prior:
    try:
        return Prior.from_dict(json.loads(text))
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise argparse.ArgumentTypeError(f"invalid prior {text!r}: {exc}")


def _tie_pair(text: str):
    if text.lower() in ("none", "auto"):
        return text.lower()
    pair = _int_list(text)
    if len(pair) != 2:
        raise argparse.ArgumentTypeError("tie pair needs two 1-based indices, e.g. 5,6")
    return (pair[0] - 1, pair[1] - 1)


def _add_generator_args(p, seeds: int, N_max: int) -> None:
    d = GeneratorConfig()
    p.add_argument("--L", type=int, default=d.L, help="systems")
    p.add_argument("--M", type=int, default=d.M, help="tasks")
    p.add_argument("--N-max", type=int, default=N_max, help="trials drawn per dataset")
    p.add_argument("--seeds", type=int, default=seeds, help="number of datasets")
    p.add_argument("--seed", type=int, default=0, help="first dataset seed")
    p.add_argument("--ability-gap", type=float, default=d.ability_gap)
    p.add_argument("--difficulty-spread", type=float, default=d.difficulty_spread)
    p.add_argument(
        "--tie-pair", type=_tie_pair, default="auto",
        help="1-based systems sharing one ability, or 'none' (default 5,6 when L >= 6)",
    )


def _add_report_args(p, methods) -> None:
    p.add_argument("--methods", type=_name_list, default=list(methods))
    p.add_argument("--out", type=Path, help="directory for report files")
    p.add_argument(
        "--formats", type=_name_list, default=list(FORMATS),
        help="report formats written to --out (csv,json,svg)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tensorrank", description=__doc__.split("\n")[1].strip())
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("rank", help="rank the systems of a tensor file")
    p.add_argument("--input", required=True, type=Path, help="tensor file (.csv or .json)")
    p.add_argument("--method", required=True, choices=sorted(METHODS), metavar="METHOD")
    p.add_argument("--rubric", type=_rubric, help="weights per category, e.g. 0,0.5,1")
    p.add_argument("--return-scores", action="store_true")
    p.add_argument("--scheme", choices=SCHEMES, default="competition")
    p.add_argument("--tie-tolerance", type=float)
    p.add_argument("--seed", type=int, default=0, help="seed for randomized methods")
    p.add_argument("--prior", type=_prior, help='JSON, e.g. {"kind":"gaussian","mu":0,"sigma":1}')
    p.add_argument("--param", type=_param, action="append", default=[],
                   help="extra method parameter key=value (repeatable)")

    p = sub.add_parser("evaluate", help="posterior credit of single systems (bayes)")
    p.add_argument("--input", required=True, type=Path)
    p.add_argument("--rubric", type=_rubric)
    p.add_argument("--system", type=int, help="1-based system index (default: all)")
    p.add_argument("--prior-strength", type=float, default=1.0)

    p = sub.add_parser("recover", help="rank recovery on synthetic data")
    _add_generator_args(p, seeds=4, N_max=32)
    p.add_argument("--N", type=_int_list, default=list(exp.RECOVERY_BUDGETS), dest="budgets")
    _add_report_args(p, exp.RECOVERY_METHODS)

    p = sub.add_parser("stability", help="agreement with the full-data bayes ranking")
    _add_generator_args(p, seeds=10, N_max=64)
    p.add_argument("--budgets", type=_int_list, default=list(exp.STABILITY_BUDGETS))
    p.add_argument("--k", type=int, default=4)
    p.add_argument("--tau", type=float, default=0.5)
    _add_report_args(p, exp.STABILITY_METHODS)

    p = sub.add_parser("runtime", help="wall-clock scaling grid")
    p.add_argument("--L", type=_int_list, default=list(exp.RUNTIME_GRID["L"]))
    p.add_argument("--M", type=_int_list, default=list(exp.RUNTIME_GRID["M"]))
    p.add_argument("--N", type=_int_list, default=list(exp.RUNTIME_GRID["N"]))
    p.add_argument("--replicates", type=int, default=2)
    p.add_argument("--seed", type=int, default=0)
    _add_report_args(p, exp.RUNTIME_METHODS)

    p = sub.add_parser("generate", help="write a synthetic tensor")
    _add_generator_args(p, seeds=1, N_max=8)
    p.add_argument("--N", type=int, dest="N_max", default=argparse.SUPPRESS,
                   help="alias for --N-max")
    p.add_argument("--output", required=True, type=Path, help=".csv or .json")
    return parser


# -- commands -----------------------------------------------------------------


def _floats(a) -> list[float]:
    return [float(v) for v in np.asarray(a, dtype=float)]


def _read(path: Path, rubric):
    C = len(rubric) - 1 if rubric is not None else None
    try:
        return read_tensor(path, C)
    except FileNotFoundError:
        raise UsageError(f"input file not found: {path}")
    except (ValueError, KeyError) as exc:
        raise UsageError(f"cannot read {path}: {exc}")


def cmd_rank(args) -> dict:
    R = _read(args.input, args.rubric)
    params = dict(args.param)
    if args.rubric is not None:
        if args.method not in RUBRIC_METHODS:
            raise UsageError(f"--rubric only applies to {', '.join(sorted(RUBRIC_METHODS))}")
        params["w"] = args.rubric
    if args.prior is not None:
        params["prior"] = args.prior
    if args.tie_tolerance is not None:
        params["tie_tolerance"] = args.tie_tolerance
    res = run_method(args.method, R, seed=args.seed, **params)
    out = {
        "method": res.method,
        "L": R.L,
        "scheme": args.scheme,
        "ranks": res.ranks[args.scheme].tolist(),
        "tie_tolerance": res.tie_tolerance,
    }
    if args.return_scores:
        out["scores"] = _floats(res.scores)
    return out


def cmd_evaluate(args) -> dict:
    R = _read(args.input, args.rubric)
    systems = range(R.L) if args.system is None else [args.system - 1]
    rows = []
    for l in systems:
        if not 0 <= l < R.L:
            raise UsageError(f"--system must lie in 1..{R.L}")
        mu, sigma = bayes_evaluate(
            OutcomeMatrix(R.data[l], R.C), args.rubric, args.prior_strength
        )
        rows.append({"system": l + 1, "mu": mu, "sigma": sigma})
    return {"method": "bayes", "systems": rows}


def _config(args) -> GeneratorConfig:
    tie = args.tie_pair
    if tie == "auto":
        tie = GeneratorConfig().tie_pair if args.L >= 6 else None
    elif tie == "none":
        tie = None
    try:
        return GeneratorConfig(
            L=args.L,
            M=args.M,
            N_max=args.N_max,
            seeds=tuple(range(args.seed, args.seed + args.seeds)),
            ability_gap=args.ability_gap,
            difficulty_spread=args.difficulty_spread,
            tie_pair=tie,
        )
    except ValueError as exc:
        raise UsageError(f"invalid generator settings: {exc}")


def _finish_report(report, args) -> str:
    if args.out is not None:
        for path in emit(report, args.out, args.formats):
            print(f"wrote {path}", file=sys.stderr)
    return to_csv(report.records)


def cmd_recover(args) -> str:
    return _finish_report(exp.run_recovery(args.methods, _config(args), args.budgets), args)


def cmd_stability(args) -> str:
    report = exp.run_stability(args.methods, _config(args), args.budgets, args.k, args.tau)
    return _finish_report(report, args)


def cmd_runtime(args) -> str:
    report = exp.run_runtime(args.methods, args.L, args.M, args.N, args.replicates, args.seed)
    return _finish_report(report, args)


def cmd_generate(args) -> dict:
    config = _config(args)
    data = generate(config, args.seed)
    write_tensor(data.tensor, args.output)
    return {
        "output": str(args.output),
        "config": config.to_dict(),
        "seed": args.seed,
        "theta": _floats(data.theta),
        "truth": _floats(data.truth),
    }


COMMANDS = {
    "rank": cmd_rank,
    "evaluate": cmd_evaluate,
    "recover": cmd_recover,
    "stability": cmd_stability,
    "runtime": cmd_runtime,
    "generate": cmd_generate,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "seeds", 1) < 1:
            raise UsageError("--seeds must be >= 1")
        if getattr(args, "out", None) is not None and set(args.formats) - set(FORMATS):
            raise UsageError(f"--formats must be drawn from {','.join(FORMATS)}")
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            result = COMMANDS[args.command](args)
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_USAGE
    except (CapabilityError, DisconnectedComparisonError, KeyError, ValueError, TypeError) as exc:
        print(f"tensorrank: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_METHOD
    text = result if isinstance(result, str) else json.dumps(result, indent=2) + "\n"
    sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
