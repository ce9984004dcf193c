"""CLI interface for ambiset."""

import sys
from collections.abc import Callable, Sequence
from enum import StrEnum
from pathlib import Path
from typing import Annotated, Any

import click
import structlog
import typer
from pydantic import ValidationError

from ambiset.adapters.problem_file import ResolvedProblem, load_problem, summarize_validation_error
from ambiset.cli.output import render, to_payload
from ambiset.config.logging import bind_run, configure_logging
from ambiset.core.ambiguity import dual_distance, generalized_wasserstein, hull_equality, hull_membership
from ambiset.core.convergence import (
    all_subsets,
    check_k_grid,
    convexity_counterexample,
    default_k_grid,
    indicator_panel,
    lipschitz_panel,
    metrization_report,
    p_equivalence_check,
    semicontinuity_check,
    tail_transfer_check,
)
from ambiset.core.families import FAMILIES, build_family
from ambiset.core.ground_space import ValidationMode
from ambiset.core.measures import tail_functional
from ambiset.core.transport import kr_dual, truncated_wasserstein, wasserstein
from ambiset.errors import NumericalBreakdown, UnknownCommand, UsageError, ValidationFailure
from ambiset.models.config import AmbisetConfig, ConfigManager, OutputFormat
from ambiset.models.convergence import SetSequence
from ambiset.models.measures import TestFunction
from ambiset.models.space import BasePoint, FiniteMetricSpace

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3
EXIT_USAGE = 64

log = structlog.get_logger(__name__)

app = typer.Typer(
    name="ambiset",
    help="Generalized Wasserstein distances between finitely generated sets of probability measures.",
    no_args_is_help=True,
    add_completion=False,
    pretty_exceptions_enable=False,
)


class PanelKind(StrEnum):
    """Bounded test functions used for the weak-convergence verdict."""

    LIPSCHITZ = "lipschitz"
    INDICATORS = "indicators"


PANELS: dict[PanelKind, Callable[[FiniteMetricSpace, int], list[TestFunction]]] = {
    PanelKind.LIPSCHITZ: lipschitz_panel,
    PanelKind.INDICATORS: indicator_panel,
}

ProblemArg = Annotated[Path, typer.Argument(help="Problem file (JSON, or YAML by suffix)")]
FormatOpt = Annotated[OutputFormat | None, typer.Option("--format", help="Output format: json, table or csv")]
ConfigOpt = Annotated[Path | None, typer.Option("--config", help="Configuration file (default ambiset.yml)")]
TolOpt = Annotated[float | None, typer.Option("--tol", help="Decision tolerance for hull membership and equality")]
SeedOpt = Annotated[int | None, typer.Option("--seed", help="Seed for random panels and families")]
POpt = Annotated[float | None, typer.Option("--p", help="Transport exponent (>= 1)")]
WorkersOpt = Annotated[int | None, typer.Option("--workers", min=1, help="Threads for per-term computations")]
FamilyOpt = Annotated[str | None, typer.Option("--family", help=f"Sequence family: {', '.join(FAMILIES)}")]
TermsOpt = Annotated[int, typer.Option("--n", min=1, help="Number of terms")]
GridOpt = Annotated[int | None, typer.Option("--grid-size", min=1, help="Grid size for families that take one")]
KOpt = Annotated[str | None, typer.Option("--K", help="Comma-separated, increasing tail thresholds")]
BasePointOpt = Annotated[int, typer.Option("--omega0", min=0, help="Base point index")]
SequenceFileOpt = Annotated[Path | None, typer.Option("--problem", help="Problem file holding --sequence")]
SequenceOpt = Annotated[str | None, typer.Option("--sequence", help="Sequence name in --problem")]
LenientTolOpt = Annotated[
    float | None, typer.Option("--lenient-tolerance", min=0.0, help="Relative tolerance of --lenient validation")
]
AbsThresholdOpt = Annotated[
    float | None, typer.Option("--abs-threshold", min=0.0, help="Convergence rule: absolute level counted as zero")
]
RelThresholdOpt = Annotated[
    float | None,
    typer.Option("--rel-threshold", min=0.0, max=1.0, help="Convergence rule: zero level relative to the peak"),
]
WindowOpt = Annotated[
    float | None,
    typer.Option("--window-fraction", min=0.0, max=1.0, help="Convergence rule: share of trailing terms in the window"),
]


@app.callback()
def global_options(
    ctx: typer.Context,
    log_level: Annotated[str | None, typer.Option("--log-level", help="Diagnostics level on stderr")] = None,
    json_logs: Annotated[
        bool | None, typer.Option("--json-logs/--no-json-logs", help="Render diagnostics as JSON lines")
    ] = None,
) -> None:
    """Generalized Wasserstein distances between finitely generated sets of probability measures."""
    ctx.obj = {"log_level": log_level, "json_logs": json_logs}


def _global_flags() -> dict[str, Any]:
    context = click.get_current_context(silent=True)
    options = context.find_root().obj if context is not None else None
    return dict(options or {})


def _rule_flags(abs_threshold: float | None, rel_threshold: float | None, window: float | None) -> dict[str, Any]:
    return {"abs_threshold": abs_threshold, "rel_threshold": rel_threshold, "window_fraction": window}


def _start(command: str, config_path: Path | None, flags: dict[str, Any]) -> tuple[ConfigManager, AmbisetConfig]:
    # global options travel with the command flags into every later resolve
    flags.update(_global_flags())
    manager = ConfigManager(config_path)
    config = manager.resolve(flags=flags)
    configure_logging(config.log_level, config.json_logs)
    bind_run(command)
    for issue in manager.validate_config(config):
        log.warning("config_issue", issue=issue)
    return manager, config


def _load(
    path: Path,
    manager: ConfigManager,
    config: AmbisetConfig,
    flags: dict[str, Any],
    mode: ValidationMode = ValidationMode.STRICT,
) -> tuple[ResolvedProblem, AmbisetConfig]:
    """Load a problem file and fold its options block into the configuration."""
    problem = load_problem(path, mode, config.lenient_tolerance)
    return problem, manager.resolve(problem.options.model_dump(), flags)


def _emit(result: Any, config: AmbisetConfig) -> None:
    typer.echo(render(to_payload(result), config.format))


def _parse_k_grid(text: str | None) -> list[float] | None:
    if text is None:
        return None
    try:
        values = [float(part) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise UsageError(f"--K expects comma-separated numbers, got {text!r}") from exc
    return check_k_grid(values)


def _parse_subset(text: str) -> list[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise UsageError(f"--subset expects comma-separated indices, got {text!r}") from exc


def _sequence(
    family: str | None,
    n_terms: int,
    grid_size: int | None,
    problem_path: Path | None,
    name: str | None,
    manager: ConfigManager,
    config: AmbisetConfig,
    flags: dict[str, Any],
) -> tuple[SetSequence, AmbisetConfig]:
    """A named family, or a sequence defined in a problem file; exactly one of the two."""
    if family is not None and (problem_path is not None or name is not None):
        raise UsageError("use either --family or --problem/--sequence, not both")
    if family is not None:
        return build_family(family, n_terms, grid_size, config.seed), config
    if problem_path is None or name is None:
        raise UsageError("pass --family, or both --problem and --sequence")
    problem, config = _load(problem_path, manager, config, flags)
    return problem.sequence(name), config


def _require_p1(dual: bool, config: AmbisetConfig) -> None:
    if dual and config.p != 1.0:
        raise UsageError(f"--dual needs p = 1, got p = {config.p:g}")


@app.command()
def validate(
    problem_path: ProblemArg,
    lenient: Annotated[bool, typer.Option("--lenient", help="Symmetrize and accept violations within tolerance")] = False,
    lenient_tolerance: LenientTolOpt = None,
    fmt: FormatOpt = None,
    config_path: ConfigOpt = None,
) -> int:
    """Validate a ground space (or a whole problem file) and print PASS."""
    flags = {"format": fmt, "lenient_tolerance": lenient_tolerance}
    manager, config = _start("validate", config_path, flags)
    mode = ValidationMode.LENIENT if lenient else ValidationMode.STRICT
    problem, config = _load(problem_path, manager, config, flags, mode)
    log.info("problem_validated", points=problem.space.size, mode=mode.value)
    _emit(
        {
            "status": "PASS",
            "mode": mode.value,
            "points": problem.space.size,
            "diameter": problem.space.diameter,
            "measures": len(problem.measures),
            "sets": len(problem.sets),
            "functions": len(problem.functions),
            "sequences": len(problem.sequences),
        },
        config,
    )
    return EXIT_OK


@app.command()
def classical(
    problem_path: ProblemArg,
    mu: Annotated[str, typer.Option("--mu", help="Name of the first measure")],
    nu: Annotated[str, typer.Option("--nu", help="Name of the second measure")],
    p: POpt = None,
    plan: Annotated[bool, typer.Option("--plan", help="Include the optimal coupling")] = False,
    dual: Annotated[bool, typer.Option("--dual", help="Include the Kantorovich potential (p = 1)")] = False,
    cap: Annotated[float | None, typer.Option("--cap", help="Also report W_p under min(d, cap)")] = None,
    fmt: FormatOpt = None,
    config_path: ConfigOpt = None,
) -> int:
    """Classical W_p between two measures, optionally with plan and dual witness."""
    flags = {"format": fmt, "p": p}
    manager, config = _start("classical", config_path, flags)
    problem, config = _load(problem_path, manager, config, flags)
    _require_p1(dual, config)
    source, target = problem.measure(mu), problem.measure(nu)

    value, coupling = wasserstein(source, target, config.p)
    result: dict[str, Any] = {"p": config.p, "value": value}
    if plan:
        result["plan"] = coupling.plan.tolist()
    if dual:
        dual_value, potential = kr_dual(source, target)
        result["dual_value"] = dual_value
        result["potential"] = potential.phi.values.tolist()
    if cap is not None:
        result["cap"] = cap
        result["truncated_value"] = truncated_wasserstein(source, target, config.p, cap)[0]
    _emit(result, config)
    return EXIT_OK


@app.command()
def dist(
    problem_path: ProblemArg,
    first: Annotated[str, typer.Option("--P1", help="First set (or measure) name")],
    second: Annotated[str, typer.Option("--P2", help="Second set (or measure) name")],
    p: POpt = None,
    raw: Annotated[bool, typer.Option("--raw", help="Use the generators only, not their hulls")] = False,
    dual: Annotated[bool, typer.Option("--dual", help="Include the Lipschitz-dual value (p = 1)")] = False,
    fmt: FormatOpt = None,
    config_path: ConfigOpt = None,
) -> int:
    """Generalized W_p between two ambiguity sets."""
    flags = {"format": fmt, "p": p}
    manager, config = _start("dist", config_path, flags)
    problem, config = _load(problem_path, manager, config, flags)
    _require_p1(dual, config)
    sets = problem.ambiguity_set(first), problem.ambiguity_set(second)
    if raw:
        sets = sets[0].with_convexify(False), sets[1].with_convexify(False)
    _emit(generalized_wasserstein(*sets, p=config.p, with_dual=dual), config)
    return EXIT_OK


@app.command(name="dual")
def dual_command(
    problem_path: ProblemArg,
    first: Annotated[str, typer.Option("--P1", help="First set (or measure) name")],
    second: Annotated[str, typer.Option("--P2", help="Second set (or measure) name")],
    fmt: FormatOpt = None,
    config_path: ConfigOpt = None,
) -> int:
    """Supremum of |E^P1[phi] - E^P2[phi]| over 1-Lipschitz phi, with its witness."""
    flags = {"format": fmt}
    manager, config = _start("dual", config_path, flags)
    problem, config = _load(problem_path, manager, config, flags)
    _emit(dual_distance(problem.ambiguity_set(first), problem.ambiguity_set(second)), config)
    return EXIT_OK


@app.command()
def member(
    problem_path: ProblemArg,
    mu: Annotated[str, typer.Option("--mu", help="Measure name")],
    ambiguity: Annotated[str, typer.Option("--P", help="Set name")],
    tol: TolOpt = None,
    fmt: FormatOpt = None,
    config_path: ConfigOpt = None,
) -> int:
    """Whether a measure lies in the hull of a set, with both sides of the minimax identity."""
    flags = {"format": fmt, "tol": tol}
    manager, config = _start("member", config_path, flags)
    problem, config = _load(problem_path, manager, config, flags)
    _emit(hull_membership(problem.measure(mu), problem.ambiguity_set(ambiguity), config.tol), config)
    return EXIT_OK


@app.command(name="hull-eq")
def hull_eq(
    problem_path: ProblemArg,
    first: Annotated[str, typer.Option("--P1", help="First set name")],
    second: Annotated[str, typer.Option("--P2", help="Second set name")],
    tol: TolOpt = None,
    fmt: FormatOpt = None,
    config_path: ConfigOpt = None,
) -> int:
    """Whether two sets generate the same convex hull."""
    flags = {"format": fmt, "tol": tol}
    manager, config = _start("hull-eq", config_path, flags)
    problem, config = _load(problem_path, manager, config, flags)
    equal = hull_equality(problem.ambiguity_set(first), problem.ambiguity_set(second), config.tol)
    _emit({"equal": equal, "tol": config.tol}, config)
    return EXIT_OK


@app.command()
def converge(
    family: FamilyOpt = None,
    n_terms: TermsOpt = 50,
    p: POpt = None,
    q: Annotated[float | None, typer.Option("--q", help="Second exponent for the p-equivalence check")] = None,
    seed: SeedOpt = None,
    k_grid: KOpt = None,
    grid_size: GridOpt = None,
    panel: Annotated[PanelKind, typer.Option("--panel", help="Bounded test panel")] = PanelKind.LIPSCHITZ,
    omega0: BasePointOpt = 0,
    workers: WorkersOpt = None,
    problem_path: SequenceFileOpt = None,
    sequence: SequenceOpt = None,
    abs_threshold: AbsThresholdOpt = None,
    rel_threshold: RelThresholdOpt = None,
    window: WindowOpt = None,
    fmt: FormatOpt = None,
    config_path: ConfigOpt = None,
) -> int:
    """Metrization report for a sequence of sets; with --q, also the p-equivalence check."""
    flags = {
        "format": fmt,
        "p": p,
        "seed": seed,
        "workers": workers,
        "rule": _rule_flags(abs_threshold, rel_threshold, window),
    }
    manager, config = _start("converge", config_path, flags)
    seq, config = _sequence(family, n_terms, grid_size, problem_path, sequence, manager, config, flags)
    grid = _parse_k_grid(k_grid)
    base = BasePoint(index=omega0)

    report = metrization_report(
        seq,
        config.p,
        k_grid=grid,
        omega0=base,
        panel=PANELS[panel](seq.space, config.seed),
        rule=config.rule,
        seed=config.seed,
        workers=config.workers,
    )
    if q is None:
        _emit(report, config)
    else:
        equivalence = p_equivalence_check(seq, config.p, q, base, grid, config.rule, config.workers)
        _emit({"metrization": report, "p_equivalence": equivalence}, config)
    return EXIT_OK


@app.command()
def tail(
    family: FamilyOpt = None,
    n_terms: TermsOpt = 50,
    p: POpt = None,
    k_grid: KOpt = None,
    grid_size: GridOpt = None,
    omega0: BasePointOpt = 0,
    seed: SeedOpt = None,
    transfer: Annotated[
        bool, typer.Option("--transfer", help="Check the tail-transfer inequality at the largest K instead")
    ] = False,
    problem_path: SequenceFileOpt = None,
    sequence: SequenceOpt = None,
    fmt: FormatOpt = None,
    config_path: ConfigOpt = None,
) -> int:
    """Tail functional per term and threshold K, the limit's last."""
    flags = {"format": fmt, "p": p, "seed": seed}
    manager, config = _start("tail", config_path, flags)
    seq, config = _sequence(family, n_terms, grid_size, problem_path, sequence, manager, config, flags)
    base = BasePoint(index=omega0)
    base.resolve(seq.space)
    grid = _parse_k_grid(k_grid) or default_k_grid(seq.space, base)

    if transfer:
        _emit(tail_transfer_check(seq, config.p, grid[-1], base), config)
        return EXIT_OK
    labelled = [(f"P_{n}", term) for n, term in enumerate(seq.terms, start=1)] + [("P", seq.limit)]
    rows = [
        {"set": label, "K": level, "tail": tail_functional(term, base, config.p, level)}
        for label, term in labelled
        for level in grid
    ]
    _emit(rows, config)
    return EXIT_OK


@app.command()
def semicontinuity(
    family: FamilyOpt = None,
    n_terms: TermsOpt = 50,
    grid_size: GridOpt = None,
    seed: SeedOpt = None,
    subset: Annotated[
        list[str] | None, typer.Option("--subset", help="Comma-separated closed set; repeatable (default: all)")
    ] = None,
    problem_path: SequenceFileOpt = None,
    sequence: SequenceOpt = None,
    window: WindowOpt = None,
    fmt: FormatOpt = None,
    config_path: ConfigOpt = None,
) -> int:
    """Upper-probability semicontinuity on closed sets (and lower on their complements)."""
    flags = {"format": fmt, "seed": seed, "rule": _rule_flags(None, None, window)}
    manager, config = _start("semicontinuity", config_path, flags)
    seq, config = _sequence(family, n_terms, grid_size, problem_path, sequence, manager, config, flags)
    subsets = [_parse_subset(text) for text in subset] if subset else all_subsets(seq.space)
    _emit(semicontinuity_check(seq, subsets, config.rule), config)
    return EXIT_OK


@app.command()
def counterexample(
    distance: Annotated[float, typer.Option("--distance", help="Distance between the two points")] = 1.0,
    convexify_both: Annotated[bool, typer.Option("--convexify-both", help="Convexify the first set too")] = False,
    fmt: FormatOpt = None,
    config_path: ConfigOpt = None,
) -> int:
    """Two Diracs against their hull: W_1 = d/2 while the Lipschitz dual is 0."""
    _, config = _start("counterexample", config_path, {"format": fmt})
    _emit(convexity_counterexample(distance, convexify_both), config)
    return EXIT_OK


def _fail(code: int, message: str) -> int:
    typer.echo(f"ambiset: error: {message}", err=True)
    log.debug("command_failed", exit_code=code)
    return code


def run(argv: Sequence[str] | None = None) -> int:
    """Run one command and map failures to exit codes: 2 validation, 3 numerical, 64 usage."""
    try:
        result = app(args=list(argv) if argv is not None else None, prog_name="ambiset", standalone_mode=False)
    except ValidationFailure as exc:
        return _fail(EXIT_VALIDATION, str(exc))
    except ValidationError as exc:
        return _fail(EXIT_VALIDATION, summarize_validation_error(exc))
    except NumericalBreakdown as exc:
        return _fail(EXIT_NUMERICAL, str(exc))
    except (UsageError, FileNotFoundError) as exc:
        return _fail(EXIT_USAGE, str(exc))
    except click.UsageError as exc:
        if exc.message.startswith("No such command"):
            return _fail(EXIT_USAGE, str(UnknownCommand(exc.message)))
        return _fail(EXIT_USAGE, exc.format_message())
    except click.ClickException as exc:
        return _fail(EXIT_USAGE, exc.format_message())
    except click.exceptions.Abort:
        return _fail(EXIT_USAGE, "aborted")
    return result if isinstance(result, int) else EXIT_OK


def main() -> None:
    sys.exit(run(sys.argv[1:]))
