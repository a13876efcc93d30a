"""
Command-line interface for polymerdyn.

Results go to stdout (JSON with ``--json``); logs and a one-line run manifest
go to stderr. Exit codes:
0 success, 1 usage, 2 validation, 3 resource guard, 4 condition violation
or failed verification.
"""

import argparse
import hashlib
import json
import math
import platform
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import pydantic
import scipy
from loguru import logger

from polymerdyn import __version__
from polymerdyn.config_model import (
    expansion_audit,
    read_degree_sequence,
    sample_configuration_multigraph,
    sample_simple_graph,
    validate_degree_sequence,
)
from polymerdyn.counting import estimate_log_Z_potts
from polymerdyn.dynamics import EdgePolymerSampler, sample_potts
from polymerdyn.errors import GraphValidationError, OutOfRegimeError, PolymerDynError, UsageError
from polymerdyn.graph_core import SimpleGraph, format_edge_list, read_graph, write_graph
from polymerdyn.models import CountingConfig, DynamicsConfig, PottsParams, RunManifest
from polymerdyn.oracle import (
    brute_force_connected_subsets,
    detailed_balance_gap,
    empirical_distribution,
    exact_ground_logZ,
    exact_nu_e,
    exact_polymer_logZ,
    exact_potts_logZ,
    exact_restricted_logZ,
    stationarity_gap,
    tv_distance,
)
from polymerdyn.polymer import check_mixing_condition, check_sampling_condition
from polymerdyn.potts import PottsPolymerModel, warn_if_out_of_regime
from polymerdyn.rng import make_rng, resolve_seed, spawn_rngs
from polymerdyn.subset_enum import enum_connected_subsets, lemma_log_bound

SCHEMA_VERSION = 1
VERIFY_FAILED = 4

MODES = {
    "lasvegas": "las_vegas",
    "las_vegas": "las_vegas",
    "strict": "strict_budget",
    "strict_budget": "strict_budget",
}


class _ArgumentParser(argparse.ArgumentParser):
    """Raises UsageError instead of exiting with argparse's own status."""

    def error(self, message: str) -> None:
        raise UsageError(message)


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid integer: {text!r}")
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be at least 1, got {value}")
    return value


class _Run:
    """Per-invocation state shared by the command handlers."""

    def __init__(self, args: argparse.Namespace):
        self.args = args
        self.tainted = False
        self.seed: Optional[int] = None
        self.exit_code = 0


def configure_logging(verbose: int, quiet: bool) -> None:
    logger.remove()
    logger.enable("polymerdyn")
    if quiet:
        level = "ERROR"
    elif verbose >= 2:
        level = "DEBUG"
    elif verbose == 1:
        level = "INFO"
    else:
        level = "WARNING"
    logger.add(sys.stderr, level=level, format="{time:HH:mm:ss} | {level: <8} | {name}:{function} - {message}")


def _parse_pair(text: str, what: str) -> Tuple[int, int]:
    try:
        first, second = (int(token) for token in text.split(","))
    except ValueError:
        raise UsageError(f"{what} must be two comma-separated integers", {"value": text})
    return first, second


def _load_simple_graph(path: str) -> SimpleGraph:
    graph = read_graph(path)
    if not isinstance(graph, SimpleGraph):
        raise GraphValidationError("this command needs a simple graph", {"path": path})
    return graph


def _potts_params(run: _Run, *, check_regime: bool = True) -> PottsParams:
    args = run.args
    params = PottsParams(
        q=args.q,
        beta=args.beta,
        alpha=args.alpha,
        colour=args.colour,
        force_out_of_regime=args.force_out_of_regime,
    )
    if check_regime and not params.in_guaranteed_regime:
        if not args.force_out_of_regime:
            raise OutOfRegimeError(
                "parameters are outside the guaranteed regime; pass --force-out-of-regime to run anyway",
                {"issues": params.regime_issues()},
            )
        warn_if_out_of_regime(params)
        run.tainted = True
    return params


def _dynamics_config(args: argparse.Namespace, seed: int) -> DynamicsConfig:
    return DynamicsConfig(mode=MODES[args.mode], c1=args.c1, c2=args.c2, seed=seed)


def cmd_gen(run: _Run) -> Dict[str, Any]:
    args = run.args
    degrees = read_degree_sequence(args.degseq)
    report = validate_degree_sequence(degrees, args.d)
    for failure in report.failures:
        if failure != "even_sum":
            logger.warning("degree sequence fails the {} condition; generating anyway", failure)
    run.seed = resolve_seed(args.seed)
    if args.simple:
        graph = sample_simple_graph(degrees, run.seed, args.max_attempts)
    else:
        graph = sample_configuration_multigraph(degrees, run.seed)
    payload: Dict[str, Any] = {
        "n": graph.n,
        "m": graph.m,
        "simple": args.simple,
        "seed": run.seed,
        "degree_report": report.model_dump(mode="json"),
    }
    if args.out:
        write_graph(graph, args.out)
        payload["out"] = args.out
    else:
        payload["edge_list"] = format_edge_list(graph)
    return payload


def cmd_audit(run: _Run) -> Dict[str, Any]:
    args = run.args
    graph = read_graph(args.graph)
    small, degree = _parse_pair(args.caps, "--caps") if args.caps else (None, None)
    report = expansion_audit(graph, args.alpha, small, degree)
    payload = report.model_dump(mode="json")
    payload["passed"] = report.passed
    return payload


def _one_sample(graph: SimpleGraph, params: PottsParams, eps: float, config: DynamicsConfig, rng) -> Dict[str, Any]:
    return sample_potts(graph, params, eps, rng, config).model_dump(mode="json")


def cmd_sample(run: _Run) -> Dict[str, Any]:
    args = run.args
    graph = _load_simple_graph(args.graph)
    params = _potts_params(run)
    run.seed = resolve_seed(args.seed)
    config = _dynamics_config(args, run.seed)

    if args.samples == 1:
        payload = _one_sample(graph, params, args.eps, config, make_rng(run.seed))
        payload["seed"] = run.seed
        return payload

    rngs = spawn_rngs(run.seed, args.samples)
    with ThreadPoolExecutor(max_workers=args.threads) as pool:
        samples = list(pool.map(lambda rng: _one_sample(graph, params, args.eps, config, rng), rngs))
    return {"seed": run.seed, "samples": samples}


def cmd_count(run: _Run) -> Dict[str, Any]:
    args = run.args
    graph = _load_simple_graph(args.graph)
    params = _potts_params(run)
    run.seed = resolve_seed(args.seed)
    config = CountingConfig(
        samples_per_ratio=args.samples,
        median_of_three=args.median_of_three,
        threads=args.threads,
        dynamics=_dynamics_config(args, run.seed),
    )
    estimate = estimate_log_Z_potts(graph, params, args.eps, run.seed, config)
    return {
        "log_Z": estimate.log_value,
        "log_Zhat": estimate.log_zhat,
        "K": estimate.K,
        "samples_per_ratio": estimate.samples_per_ratio,
        "aborts": estimate.aborts,
        "exact": estimate.exact,
        "beta_start": estimate.beta_start,
        "seed": run.seed,
    }


def verify_subsets(run: _Run) -> Dict[str, Any]:
    args = run.args
    graph = read_graph(args.graph)
    family = enum_connected_subsets(graph, args.vertex, args.budget)
    expected = brute_force_connected_subsets(graph, args.vertex, args.budget)
    found = set(family.members)
    over_bound = [
        degree
        for degree in sorted(set(family.degrees))
        if degree >= 1 and math.log(len(family.with_exact_degree(degree))) > lemma_log_bound(degree)
    ]
    return {
        "ok": found == expected and len(found) == len(family.members) and not over_bound,
        "count": len(family.members),
        "brute_force_count": len(expected),
        "duplicates": len(family.members) - len(found),
        "missing": [list(s) for s in sorted(expected - found)][:20],
        "unexpected": [list(s) for s in sorted(found - expected)][:20],
        "degrees_over_bound": over_bound,
        "work": family.work,
    }


def verify_conditions(run: _Run) -> Dict[str, Any]:
    args = run.args
    graph = _load_simple_graph(args.graph)
    params = _potts_params(run, check_regime=False)
    model = PottsPolymerModel(graph, params)
    ell_max = args.ell_max if args.ell_max is not None else 2 * graph.m
    sampling = check_sampling_condition(model, params.tau, ell_max)
    mixing = check_mixing_condition(model, args.theta)
    return {
        "ok": sampling.holds and mixing.holds,
        "sampling": sampling.model_dump(mode="json"),
        "mixing": mixing.model_dump(mode="json"),
    }


def verify_stationarity(run: _Run) -> Dict[str, Any]:
    args = run.args
    graph = _load_simple_graph(args.graph)
    model = PottsPolymerModel(graph, _potts_params(run, check_regime=False))
    gap = stationarity_gap(model)
    balance = detailed_balance_gap(model)
    return {
        "ok": gap <= args.tolerance and balance <= args.tolerance,
        "stationarity_gap": gap,
        "detailed_balance_gap": balance,
        "tolerance": args.tolerance,
    }


def verify_nu(run: _Run) -> Dict[str, Any]:
    args = run.args
    graph = _load_simple_graph(args.graph)
    params = _potts_params(run, check_regime=False)
    model = PottsPolymerModel(graph, params)
    edges = [_parse_pair(args.edge, "--edge")] if args.edge else list(graph.edges)
    run.seed = resolve_seed(args.seed)
    rng = make_rng(run.seed)
    sampler = EdgePolymerSampler(model)
    distances = {}
    for edge in edges:
        exact = exact_nu_e(model, edge)
        draws = [sampler.sample(edge, rng)[0] for _ in range(args.draws)]
        distances[f"{edge[0]},{edge[1]}"] = tv_distance(exact, empirical_distribution(draws, exact.outcomes))
    return {
        "ok": all(d <= args.tolerance for d in distances.values()),
        "tv": distances,
        "draws": args.draws,
        "tolerance": args.tolerance,
        "seed": run.seed,
    }


def verify_potts_z(run: _Run) -> Dict[str, Any]:
    args = run.args
    graph = _load_simple_graph(args.graph)
    params = _potts_params(run, check_regime=False)
    model = PottsPolymerModel(graph, params)
    log_z = exact_potts_logZ(graph, params.q, params.beta)
    log_zhat = exact_polymer_logZ(model)
    restricted = exact_restricted_logZ(graph, params.q, params.beta, params.colour)
    ground = exact_ground_logZ(graph, params.q, params.beta, params.colour)
    identity_gap = abs(params.beta * graph.m + log_zhat - restricted)
    return {
        "ok": identity_gap <= args.tolerance,
        "log_Z": log_z,
        "log_Zhat": log_zhat,
        "log_Z_restricted": restricted,
        "log_Z_ground": ground,
        "identity_gap": identity_gap,
        "ground_state_gap": abs(math.log(params.q) + ground - log_z),
        "tolerance": args.tolerance,
    }


VERIFIERS = {
    "subsets": verify_subsets,
    "conditions": verify_conditions,
    "stationarity": verify_stationarity,
    "nu": verify_nu,
    "potts-z": verify_potts_z,
}


def cmd_verify(run: _Run) -> Dict[str, Any]:
    payload = VERIFIERS[run.args.check](run)
    if not payload["ok"]:
        run.exit_code = VERIFY_FAILED
    return payload


def _add_potts_arguments(parser: argparse.ArgumentParser, *, alpha_default: Optional[float] = 1.0) -> None:
    group = parser.add_argument_group("Potts parameters")
    group.add_argument("--q", type=int, required=True, help="Number of colours")
    group.add_argument("--beta", type=float, required=True, help="Inverse temperature")
    group.add_argument("--alpha", type=float, default=alpha_default, help="Total-degree expansion of the host")
    group.add_argument("--colour", type=int, default=0, help="Ground colour of the polymer model")
    group.add_argument(
        "--force-out-of-regime",
        action="store_true",
        help="Run even when the parameters are outside the guaranteed regime",
    )


def _add_dynamics_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--mode", choices=sorted(MODES), default="lasvegas", help="Dynamics run mode")
    parser.add_argument("--c1", type=int, default=64, help="Work-per-update constant (strict mode)")
    parser.add_argument("--c2", type=int, default=4, help="Update-count constant (strict mode)")


def build_parser() -> argparse.ArgumentParser:
    common = _ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="Print results as JSON")
    common.add_argument("-v", "--verbose", action="count", default=0, help="More logging (repeatable)")
    common.add_argument("--quiet", action="store_true", help="Only log errors")
    common.add_argument("--manifest", help="Also write the run manifest to this file")

    parser = _ArgumentParser(prog="polymerdyn", description="Polymer dynamics for the low-temperature Potts model")
    parser.add_argument("--version", action="store_true", help="Show version information")
    subparsers = parser.add_subparsers(dest="command", parser_class=_ArgumentParser)

    gen = subparsers.add_parser("gen", parents=[common], help="Generate a configuration-model graph")
    gen.add_argument("--degseq", required=True, help="Degree-sequence file")
    gen.add_argument("--d", type=float, default=None, help="Sparsity parameter for validation")
    gen.add_argument("--seed", type=int)
    gen.add_argument("--simple", action="store_true", help="Reject until the sample is simple")
    gen.add_argument("--max-attempts", type=_positive_int, default=1000)
    gen.add_argument("--out", help="Edge-list file to write")

    audit = subparsers.add_parser("audit", parents=[common], help="Audit small-set expansion")
    audit.add_argument("--graph", required=True)
    audit.add_argument("--alpha", type=float, required=True)
    audit.add_argument("--caps", help="small_size_cap,degree_cap")

    sample = subparsers.add_parser("sample", parents=[common], help="Sample Potts colourings")
    sample.add_argument("--graph", required=True)
    _add_potts_arguments(sample)
    sample.add_argument("--eps", type=float, required=True)
    sample.add_argument("--seed", type=int)
    sample.add_argument("--samples", type=_positive_int, default=1, help="Independent samples to draw")
    sample.add_argument("--threads", type=_positive_int, default=1)
    _add_dynamics_arguments(sample)

    count = subparsers.add_parser("count", parents=[common], help="Estimate log Z")
    count.add_argument("--graph", required=True)
    _add_potts_arguments(count)
    count.add_argument("--eps", type=float, required=True)
    count.add_argument("--seed", type=int)
    count.add_argument("--samples", type=_positive_int, default=None, help="Samples per annealing ratio")
    count.add_argument("--median-of-three", action="store_true")
    count.add_argument("--threads", type=_positive_int, default=1)
    _add_dynamics_arguments(count)

    verify = subparsers.add_parser("verify", help="Check components against exact enumeration")
    checks = verify.add_subparsers(dest="check", parser_class=_ArgumentParser)

    subsets = checks.add_parser("subsets", parents=[common])
    subsets.add_argument("--graph", required=True)
    subsets.add_argument("--vertex", type=int, default=0)
    subsets.add_argument("--budget", type=int, required=True)

    conditions = checks.add_parser("conditions", parents=[common])
    conditions.add_argument("--graph", required=True)
    _add_potts_arguments(conditions)
    conditions.add_argument("--ell-max", type=int, default=None)
    conditions.add_argument("--theta", type=float, default=1.0 / math.e)

    stationarity = checks.add_parser("stationarity", parents=[common])
    stationarity.add_argument("--graph", required=True)
    _add_potts_arguments(stationarity)
    stationarity.add_argument("--tolerance", type=float, default=1e-12)

    nu = checks.add_parser("nu", parents=[common])
    nu.add_argument("--graph", required=True)
    _add_potts_arguments(nu)
    nu.add_argument("--edge", help="u,v (default: every edge)")
    nu.add_argument("--draws", type=_positive_int, default=100000)
    nu.add_argument("--seed", type=int)
    nu.add_argument("--tolerance", type=float, default=0.02)

    potts_z = checks.add_parser("potts-z", parents=[common])
    potts_z.add_argument("--graph", required=True)
    _add_potts_arguments(potts_z)
    potts_z.add_argument("--tolerance", type=float, default=1e-9)

    return parser


COMMANDS = {
    "gen": cmd_gen,
    "audit": cmd_audit,
    "sample": cmd_sample,
    "count": cmd_count,
    "verify": cmd_verify,
}


def _versions() -> Dict[str, str]:
    return {
        "polymerdyn": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "pydantic": pydantic.VERSION,
    }


def _render(payload: Dict[str, Any], as_json: bool) -> str:
    if as_json:
        return json.dumps({"schema": SCHEMA_VERSION, **payload}, sort_keys=True)
    lines = []
    for key, value in payload.items():
        if isinstance(value, str) and "\n" in value:
            lines.append(value.rstrip("\n"))
        elif isinstance(value, (dict, list)):
            lines.append(f"{key}: {json.dumps(value, sort_keys=True)}")
        else:
            lines.append(f"{key}: {value}")
    return "\n".join(lines)


def _emit_manifest(run: _Run, output: str, wall_time: float) -> None:
    args = run.args
    parameters = {k: v for k, v in vars(args).items() if k not in ("json", "verbose", "quiet", "manifest", "version")}
    manifest = RunManifest(
        command=args.command if args.command != "verify" else f"verify {args.check}",
        parameters=parameters,
        seed=run.seed,
        versions=_versions(),
        wall_time=wall_time,
        outputs_digest=hashlib.sha256(output.encode()).hexdigest(),
        tainted=run.tainted,
    )
    sys.stderr.write(f"run manifest: {manifest.model_dump_json()}\n")
    if args.manifest:
        with open(args.manifest, "w") as f:
            f.write(manifest.model_dump_json(indent=2))


def main(args: Optional[List[str]] = None) -> int:
    """
    Main entry point for the CLI.
    """
    if args is None:
        args = sys.argv[1:]

    configure_logging(0, False)
    try:
        parsed_args = build_parser().parse_args(args)
        if parsed_args.version:
            print(f"polymerdyn version {__version__}")
            return 0
        if parsed_args.command is None or (parsed_args.command == "verify" and parsed_args.check is None):
            raise UsageError("no command given; use --help for usage information")

        configure_logging(parsed_args.verbose, parsed_args.quiet)
        run = _Run(parsed_args)
        started = time.perf_counter()
        payload = COMMANDS[parsed_args.command](run)
        output = _render(payload, parsed_args.json)
        print(output)
        _emit_manifest(run, output, time.perf_counter() - started)
        return run.exit_code
    except PolymerDynError as e:
        logger.error("{}: {}", type(e).__name__, e.message)
        if e.details:
            logger.error("details: {}", json.dumps(e.details, sort_keys=True, default=str))
        return e.exit_code
    except pydantic.ValidationError as e:
        logger.error("invalid parameters: {}", e)
        return 2


if __name__ == "__main__":
    sys.exit(main())
