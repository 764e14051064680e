# morrey_toolkit/main.py
"""
MORREY TOOLKIT CLI
==================
Subcommands: norm, apply, hardy, check, verify, kernel-info.

    python main.py check --config cfg.json --out report.csv

Exit codes: 0 pass, 1 mathematical verdict failure, 2 input/usage error.
Logs go to stderr; the report goes to --out (or stdout).
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Callable, Dict, List, Optional

from core.catalog import central_morrey_weight, sample
from core.config import configure_logging, settings
from core.errors import BadConfigError, ToolkitError
from core.halfline import HalfLineFunction
from core.kernel import ConstantKernel, kernel_info
from core.run_config import Command, RunConfig, load_run_config
from services.condition_service import check_condition
from services.hardy_service import hardy_constant
from services.norm_service import (
    NormResult,
    beurling_algebra_norm,
    beurling_profile,
    cbmo_norm,
    classical_local_morrey_norm,
    global_morrey_norm,
    homogeneous_beurling_algebra_norm,
    local_morrey_norm,
)
from services.operator_service import EvalPoints, OperatorParams, apply_operator
from services.report_service import Report, write_report
from services.verification_service import (
    ExperimentSpec,
    FunctionSweep,
    NamedFunction,
    NormSelector,
    run_boundedness_experiment,
    run_cbmo_log_lemma,
    run_lemma_local_estimate,
    run_pointwise_checks,
    run_resolution_stability,
)

logger = logging.getLogger("morrey_toolkit.main")

EXIT_PASS = 0
EXIT_VERDICT = 1
EXIT_USAGE = 2


# ========================================================================
# HELPERS
# ========================================================================

def _params(config: RunConfig) -> OperatorParams:
    config.require("params")
    block = config.params
    dim = config.params_dim() or 1
    return OperatorParams(
        dim=dim,
        alpha=block.alpha,
        p=block.p,
        q=block.q,
        s=block.s,
        p1=block.p1,
        p2=block.p2,
        q1=block.q1,
        lambda_c=block.lambda_c,
    )


def _points(config: RunConfig) -> EvalPoints:
    grid, block = config.grid, config.points
    if block.kind == "diameter":
        return EvalPoints.diameter(grid, block.count)
    if block.kind == "subgrid":
        return EvalPoints.subgrid(grid, block.per_axis)
    if block.kind == "at":
        if not block.coords:
            raise BadConfigError("points.kind 'at' needs coords")
        return EvalPoints.at(grid, block.coords)
    if block.kind == "ball":
        if block.radius is None:
            raise BadConfigError("points.kind 'ball' needs a radius")
        center = tuple(block.center) if block.center is not None else config.origin()
        return EvalPoints.ball(grid, center, block.radius)
    return EvalPoints.all(grid)


def _emit(report: Report, config: RunConfig, args: argparse.Namespace) -> None:
    fmt = args.format or config.format or "csv"
    out = args.out or config.output
    write_report(report, fmt, Path(out) if out else None)


def _experiment_spec(config: RunConfig) -> ExperimentSpec:
    config.require("experiment", "grid", "kernel", "weight1", "weight2", "radii")
    block = config.experiment
    return ExperimentSpec(
        operator=config.operator or "riesz",
        params=_params(config),
        kernel=config.kernel,
        symbol=config.symbol,
        weight1=config.weight1,
        weight2=config.weight2,
        norm=NormSelector(
            mode=block.norm.mode,
            scope=block.norm.scope,
            x0=config.origin(),
            centers=list(config.centers),
        ),
        functions=[NamedFunction(id=f.id, spec=f.spec) for f in block.functions],
        sweeps=[FunctionSweep(**s.model_dump()) for s in block.sweeps],
        grid=config.grid,
        radii=config.radii,
        t_grid=config.t_grid,
        points_per_axis=block.points_per_axis,
        ratio_cap=block.ratio_cap,
        condition=config.condition,
    )


# ========================================================================
# SUBCOMMANDS
# ========================================================================

def cmd_norm(config: RunConfig, args: argparse.Namespace) -> int:
    config.require("grid", "function")
    f = sample(config.function, config.grid)
    block, x0 = config.norm, config.origin()
    kind = block.kind
    logger.info(f"🧭 Computing {kind} norm")

    report: Report
    if kind in ("beurling", "homogeneous_beurling"):
        if block.k_range is None:
            raise BadConfigError("Beurling norms need norm.k_range")
        report = beurling_profile(f, block.q, kind == "homogeneous_beurling", block.k_range)
    elif kind == "beurling_algebra":
        if block.k_max is None:
            raise BadConfigError("the Beurling algebra needs norm.k_max")
        report = beurling_algebra_norm(f, block.q, block.k_max)
    elif kind == "homogeneous_beurling_algebra":
        if block.k_range is None:
            raise BadConfigError("the homogeneous Beurling algebra needs norm.k_range")
        report = homogeneous_beurling_algebra_norm(f, block.q, block.k_range)
    else:
        config.require("radii")
        if kind == "cbmo":
            report = cbmo_norm(f, block.q, block.lambda_c, x0, config.radii)
        elif kind == "classical_local_morrey":
            if block.lam is None:
                raise BadConfigError("the classical Morrey norm needs norm.lam")
            value = classical_local_morrey_norm(f, block.p, block.lam, x0, config.radii)
            report = NormResult(kind=kind, value=value, per_radius=[])
        elif kind == "central_morrey":
            if block.mu is None:
                raise BadConfigError("the central Morrey norm needs norm.mu")
            weight = central_morrey_weight(block.mu, config.grid.dim)
            report = local_morrey_norm(f, block.p, weight, x0, config.radii)
        else:
            config.require("weight1")
            weak = kind.startswith("weak")
            if kind.endswith("global_morrey"):
                centers = [tuple(c) for c in config.centers] or [x0]
                report = global_morrey_norm(f, block.p, config.weight1, centers, config.radii, weak)
            else:
                report = local_morrey_norm(f, block.p, config.weight1, x0, config.radii, weak)

    _emit(report, config, args)
    return EXIT_PASS


def cmd_apply(config: RunConfig, args: argparse.Namespace) -> int:
    config.require("grid", "function", "operator")
    params = _params(config)
    grid = config.grid
    kernel = config.kernel if config.kernel is not None else ConstantKernel(dim=grid.dim)
    f = sample(config.function, grid)
    b = sample(config.symbol, grid) if config.symbol is not None else None
    result = apply_operator(config.operator, f, kernel, params, _points(config), b, config.t_grid, args.threads)
    _emit(result, config, args)
    return EXIT_PASS


def cmd_hardy(config: RunConfig, args: argparse.Namespace) -> int:
    config.require("hardy")
    block = config.hardy
    t_grid = config.t_grid or config.radii
    if t_grid is None:
        raise BadConfigError("config is missing 't_grid'")
    report = hardy_constant(
        HalfLineFunction(weight=block.v1),
        HalfLineFunction(weight=block.v2),
        HalfLineFunction(weight=block.w),
        t_grid,
    )
    _emit(report, config, args)
    return EXIT_PASS if report.passes else EXIT_VERDICT


def cmd_check(config: RunConfig, args: argparse.Namespace) -> int:
    config.require("condition", "weight1", "radii")
    params = _params(config) if config.params is not None else None
    report = check_condition(config.condition, config.weight1, config.weight2, params, config.origin(), config.radii)
    _emit(report, config, args)
    return EXIT_PASS if report.holds else EXIT_VERDICT


def cmd_verify(config: RunConfig, args: argparse.Namespace) -> int:
    config.require("experiment")
    kind = config.experiment.kind

    if kind == "cbmo_log":
        config.require("grid", "function")
        if not config.radius_pairs:
            raise BadConfigError("the CBMO lemma needs radius_pairs")
        report = run_cbmo_log_lemma(
            config.function,
            config.norm.q,
            config.norm.lambda_c,
            config.origin(),
            config.radius_pairs,
            config.grid,
        )
        _emit(report, config, args)
        return EXIT_PASS if report.passed else EXIT_VERDICT

    spec = _experiment_spec(config)
    if kind == "stability":
        stability = run_resolution_stability(spec, args.threads)
        _emit(stability, config, args)
        return EXIT_PASS if stability.stable else EXIT_VERDICT
    if kind == "lemma":
        config.require("r_list")
        report = run_lemma_local_estimate(spec, config.r_list, args.threads)
    elif kind == "pointwise":
        report = run_pointwise_checks(spec, args.threads)
    else:
        report = run_boundedness_experiment(spec, args.threads)
    _emit(report, config, args)
    return EXIT_PASS if report.passed else EXIT_VERDICT


def cmd_kernel_info(config: RunConfig, args: argparse.Namespace) -> int:
    config.require("kernel")
    s_values = [config.params.s] if config.params is not None and config.params.s is not None else config.s_values
    _emit(kernel_info(config.kernel, s_values), config, args)
    return EXIT_PASS


COMMANDS: Dict[str, Callable[[RunConfig, argparse.Namespace], int]] = {
    "norm": cmd_norm,
    "apply": cmd_apply,
    "hardy": cmd_hardy,
    "check": cmd_check,
    "verify": cmd_verify,
    "kernel-info": cmd_kernel_info,
}


# ========================================================================
# ENTRY POINT
# ========================================================================

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="JSON run configuration")
    common.add_argument("--out", default=None, help="report path (stdout when omitted)")
    common.add_argument("--format", choices=["csv", "json"], default=None)
    common.add_argument("--threads", type=int, default=None, help="worker cap; results do not depend on it")

    parser = argparse.ArgumentParser(
        prog="morrey-toolkit",
        description="Rough-kernel fractional operators on generalized Morrey spaces",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def run(command: Command, args: argparse.Namespace) -> int:
    config = load_run_config(args.config)
    if config.command is not None and config.command != command:
        raise BadConfigError(f"config is for '{config.command}', not '{command}'")
    if args.threads is not None and args.threads < 1:
        raise BadConfigError("--threads must be at least 1")
    return COMMANDS[command](config, args)


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_PASS if e.code == 0 else EXIT_USAGE

    configure_logging()
    logger.info(f"🚀 morrey-toolkit {args.command} (threads={args.threads or settings.THREADS})")
    try:
        return run(args.command, args)
    except ToolkitError as e:
        print(f"error[{e.code}]: {e.message}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as e:
        print(f"error[io]: {e}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as e:
        logger.exception(f"❌ Unexpected failure: {e}")
        print(f"error[internal]: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
