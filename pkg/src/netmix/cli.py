"""Command-line entry point wiring the modules into reproducible runs.

Exit codes: 0 success, 1 usage error, 2 runtime error.  All randomness flows
from ``--seed`` (fallback: the ``NETMIX_SEED`` environment variable, then 0).
A flat ``key=value`` config file can preset any flag; explicit flags win.
Every run prints its fully resolved configuration as the first output line.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .evaluate import (
    ALL_STRATEGIES,
    ExperimentConfig,
    linkpred_experiment,
    run_experiment,
    write_report_csv,
)
from .graph import dumps_edge_list, load_edge_list, save_prob_matrix
from .mixing import Strategy
from .pipeline import StitchResult, estimate_graph
from .rng import STREAM_ADJACENCY, child_seed
from .simulate import ModelKind, ModelSpec, generate_matrix, sample_adjacency

_MODEL_NAMES = [kind.value for kind in ModelKind]
_MIXER_NAMES = [s.value for s in Strategy]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse default exits with code 2
        raise UsageError(f"{self.prog}: {message}\n{self.format_usage()}")


def _add_common(parser: _Parser) -> None:
    parser.add_argument("--seed", type=int, default=None,
                        help="master seed (default: NETMIX_SEED env var or 0)")
    parser.add_argument("--config", type=str, default=None,
                        help="flat key=value config file; explicit flags win")
    parser.add_argument("--threads", type=int, default=None,
                        help="worker budget; must not change results")


def build_parser() -> tuple[_Parser, dict[str, _Parser]]:
    parser = _Parser(prog="netmix", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="subcommand", required=True)
    subparsers: dict[str, _Parser] = {}

    simulate = sub.add_parser("simulate", parser_class=_Parser,
                              help="generate a ground-truth probability matrix")
    simulate.add_argument("--model", choices=_MODEL_NAMES, required=True)
    simulate.add_argument("--n", type=int, required=True)
    simulate.add_argument("--degree", type=float, required=True,
                          help="target expected average degree")
    simulate.add_argument("--out", required=True,
                          help="matrix output (.csv for text, binary otherwise)")
    simulate.add_argument("--adjacency-out", default=None,
                          help="also sample an adjacency and write its edge list")
    simulate.add_argument("--latent-dim", type=int, default=4)
    simulate.add_argument("--random-latents", action="store_true",
                          help="random graphon latents instead of the fixed grid")
    _add_common(simulate)
    subparsers["simulate"] = simulate

    estimate = sub.add_parser("estimate", parser_class=_Parser,
                              help="estimate edge probabilities for a graph")
    estimate.add_argument("--graph", required=True, help="edge-list file")
    estimate.add_argument("--n", type=int, default=None,
                          help="node count override for the edge list")
    estimate.add_argument("--kmax", type=int, default=15)
    estimate.add_argument("--holdout", type=float, default=0.1)
    estimate.add_argument("--mixer", choices=_MIXER_NAMES, default="nnl")
    estimate.add_argument("--reps", type=int, default=1,
                          help="average validation errors over this many splits")
    estimate.add_argument("--stitch", action="store_true",
                          help="swap the split roles and stitch both estimates")
    estimate.add_argument("--out", required=True, help="result JSON")
    estimate.add_argument("--matrix-out", default=None,
                          help="also write the combined estimate matrix")
    _add_common(estimate)
    subparsers["estimate"] = estimate

    benchmark = sub.add_parser("benchmark", parser_class=_Parser,
                               help="simulation sweep with per-rep error records")
    benchmark.add_argument("--model", choices=_MODEL_NAMES, required=True)
    benchmark.add_argument("--n", type=int, required=True)
    benchmark.add_argument("--degree", default="20",
                           help="comma-separated target degrees to sweep")
    benchmark.add_argument("--kmax", default="15",
                           help="comma-separated kmax values to sweep")
    benchmark.add_argument("--holdout", type=float, default=0.1)
    benchmark.add_argument("--strategies", default="ecv,exp,ols,nnl")
    benchmark.add_argument("--reps", type=int, default=1)
    benchmark.add_argument("--latent-dim", type=int, default=4)
    benchmark.add_argument("--out", required=True, help="report JSON")
    benchmark.add_argument("--csv", default=None, help="flat CSV of per-rep rows")
    benchmark.add_argument("--timing", choices=["real", "none"], default="real",
                           help="'none' blanks wall_ms for byte-stable output")
    _add_common(benchmark)
    subparsers["benchmark"] = benchmark

    linkpred = sub.add_parser("linkpred", parser_class=_Parser,
                              help="held-out link prediction AUC on a graph")
    linkpred.add_argument("--graph", required=True, help="edge-list file")
    linkpred.add_argument("--n", type=int, default=None)
    linkpred.add_argument("--frac", type=float, default=0.1)
    linkpred.add_argument("--cap", type=int, default=20000)
    linkpred.add_argument("--kmax", type=int, default=15)
    linkpred.add_argument("--holdout", type=float, default=0.1)
    linkpred.add_argument("--mixer", choices=_MIXER_NAMES, default="nnl")
    linkpred.add_argument("--reps", type=int, default=1)
    linkpred.add_argument("--out", required=True, help="result JSON")
    _add_common(linkpred)
    subparsers["linkpred"] = linkpred

    return parser, subparsers


def _load_config_file(path: str) -> dict[str, str]:
    values = {}
    with open(path) as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"config line without '=': {raw.strip()!r}")
            key, value = line.split("=", 1)
            values[key.strip().replace("-", "_")] = value.strip()
    return values


def _apply_config_defaults(argv, subparsers) -> None:
    if "--config" not in argv:
        return
    idx = argv.index("--config")
    if idx + 1 >= len(argv):
        return  # the real parse reports the missing value
    raw = _load_config_file(argv[idx + 1])
    for sub in subparsers.values():
        defaults = {}
        for action in sub._actions:
            if action.dest in raw:
                value = raw[action.dest]
                if action.type is not None:
                    value = action.type(value)
                elif isinstance(action, argparse._StoreTrueAction):
                    value = value.lower() in ("1", "true", "yes", "on")
                defaults[action.dest] = value
        sub.set_defaults(**defaults)


def _resolve_seed(seed: int | None) -> int:
    if seed is not None:
        return seed
    env = os.environ.get("NETMIX_SEED")
    return int(env) if env else 0


def _print_config(args: argparse.Namespace) -> dict:
    resolved = {k: v for k, v in sorted(vars(args).items()) if k != "config"}
    print("config " + json.dumps(resolved, sort_keys=True))
    return resolved


def _load_graph(path: str, n_override: int | None):
    with open(path) as fh:
        return load_edge_list(fh, n_override)


def _model_spec(args, seed: int) -> ModelSpec:
    extras = {}
    kind = ModelKind(args.model)
    if kind is ModelKind.LSM:
        extras["latent_dim"] = args.latent_dim
    if getattr(args, "random_latents", False):
        extras["random_latents"] = True
    return ModelSpec(kind, args.n, args.degree, seed=seed, extras=extras)


def _cmd_simulate(args) -> int:
    spec = _model_spec(args, args.seed)
    matrix = generate_matrix(spec)
    save_prob_matrix(matrix, args.out)
    if args.adjacency_out:
        graph = sample_adjacency(matrix, child_seed(args.seed, STREAM_ADJACENCY))
        with open(args.adjacency_out, "w") as fh:
            fh.write(dumps_edge_list(graph))
    return 0


def _cmd_estimate(args) -> int:
    graph = _load_graph(args.graph, args.n)
    result = estimate_graph(
        graph,
        kmax=args.kmax,
        holdout=args.holdout,
        strategy=args.mixer,
        seed=args.seed,
        reps=args.reps,
        stitch=args.stitch,
        workers=args.threads or 1,
    )
    payload = result.to_dict()
    payload["config"] = args.resolved_config
    with open(args.out, "w") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")
    if args.matrix_out:
        estimate = result.estimate if isinstance(result, StitchResult) else result.estimate
        save_prob_matrix(estimate, args.matrix_out)
    return 0


def _parse_list(raw: str, converter):
    return [converter(tok) for tok in str(raw).split(",") if tok != ""]


def _cmd_benchmark(args) -> int:
    degrees = _parse_list(args.degree, float)
    kmaxes = _parse_list(args.kmax, int)
    strategies = tuple(Strategy(tok) for tok in _parse_list(args.strategies, str)) or ALL_STRATEGIES
    include_timing = args.timing == "real"
    reports = []
    for degree in degrees:
        for kmax in kmaxes:
            extras = {}
            if ModelKind(args.model) is ModelKind.LSM:
                extras["latent_dim"] = args.latent_dim
            spec = ModelSpec(ModelKind(args.model), args.n, degree, extras=extras)
            cfg = ExperimentConfig(
                model=spec,
                kmax=kmax,
                p=args.holdout,
                strategies=strategies,
                reps=args.reps,
                seed=args.seed,
            )
            reports.append(run_experiment(cfg, workers=args.threads or 1))
    payload = {
        "config": args.resolved_config,
        "groups": [r.to_dict(include_timing) for r in reports],
    }
    with open(args.out, "w") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")
    if args.csv:
        with open(args.csv, "w") as fh:
            write_report_csv(reports, fh, include_timing)
    return 0


def _cmd_linkpred(args) -> int:
    graph = _load_graph(args.graph, args.n)
    result = linkpred_experiment(
        graph,
        frac=args.frac,
        cap=args.cap,
        kmax=args.kmax,
        p=args.holdout,
        strategy=args.mixer,
        reps=args.reps,
        seed=args.seed,
    )
    payload = {"config": args.resolved_config, **result}
    with open(args.out, "w") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")
    return 0


_COMMANDS = {
    "simulate": _cmd_simulate,
    "estimate": _cmd_estimate,
    "benchmark": _cmd_benchmark,
    "linkpred": _cmd_linkpred,
}


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser, subparsers = build_parser()
    try:
        _apply_config_defaults(argv, subparsers)
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help exits 0 through here
        return int(exc.code or 0)
    args.seed = _resolve_seed(args.seed)
    args.resolved_config = _print_config(args)
    try:
        return _COMMANDS[args.subcommand](args)
    except Exception as exc:
        print(f"netmix: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
