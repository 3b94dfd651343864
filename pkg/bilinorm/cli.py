"""Command-line interface: norms, orthogonality, operator norms and the
verification suites. Every report is printed as JSON lines."""

import functools
import json
from pathlib import Path
from typing import Any, Callable, Iterable, Optional

import click
import structlog

from bilinorm.bilinear import bilinear_norm, norm_attainment_set
from bilinorm.config import RunConfig, get_settings
from bilinorm.decision import Verdict, to_jsonable
from bilinorm.logging_config import setup_logging
from bilinorm.metrics import get_metrics
from bilinorm.orthogonality import (
    bj_oracle,
    in_negative_part,
    in_positive_part,
    is_bj_orthogonal,
    one_sided_derivatives,
)
from bilinorm.schemas import parse_operator, parse_space, parse_vector
from bilinorm.services.verification_service import (
    ALL_SUITES,
    SUITES,
    SUITE_ALIASES,
    VerificationService,
)
from bilinorm.spaces import SpaceError
from bilinorm.theorems import smooth_example_report

logger = structlog.get_logger()


@click.group()
@click.option("--log-level", default=None, help="Override BB_LOG_LEVEL")
def cli(log_level: Optional[str]):
    """Banach-space geometry of bilinear operators."""
    settings = get_settings()
    setup_logging(log_level or settings.log_level, settings.log_dir)


# ============================================================================
# Helpers
# ============================================================================


def run_options(fn: Callable) -> Callable:
    """Seed, multi-start and tolerance flags; unset flags fall back to BB_* settings."""
    options = [
        click.option("--seed", type=click.IntRange(min=0), default=None,
                     help="Seed for all randomness (default BB_SEED)"),
        click.option("--starts", type=click.IntRange(min=1), default=None,
                     help="Multi-start count for ascent on smooth domains"),
        click.option("--workers", type=click.IntRange(min=1), default=None,
                     help="Threads for multi-start ascent"),
        click.option("--eps-zero", type=float, default=None),
        click.option("--eps-eq", type=float, default=None),
        click.option("--eps-band", type=float, default=None),
        click.option("--eps-attain", type=float, default=None),
    ]
    for option in reversed(options):
        fn = option(fn)
    return fn


def build_config(**overrides: Any) -> RunConfig:
    try:
        return RunConfig.from_settings(get_settings(), **overrides)
    except ValueError as e:
        raise click.UsageError(f"Invalid configuration: {e}")


def _parsed(parse: Callable[..., Any], hint: str, *args: Any) -> Any:
    try:
        return parse(*args)
    except ValueError as e:
        raise click.BadParameter(str(e), param_hint=hint)


def emit(lines: Iterable[str], output: Optional[Path] = None) -> None:
    """Write JSON lines to ``output`` or stdout."""
    lines = list(lines)
    if output is None:
        for line in lines:
            click.echo(line)
    else:
        output.write_text("".join(f"{line}\n" for line in lines))


def _json(data: dict[str, Any]) -> str:
    return json.dumps(to_jsonable(data))


def domain_errors(fn: Callable) -> Callable:
    """Report domain errors as a JSON error line and exit 1."""

    @functools.wraps(fn)
    def wrapper(*args: Any, **kwargs: Any) -> Any:
        try:
            return fn(*args, **kwargs)
        except SpaceError as e:
            logger.error("command_failed", error=str(e), error_type=type(e).__name__)
            click.echo(_json({"error": type(e).__name__, "message": str(e)}))
            raise SystemExit(1)

    return wrapper


# ============================================================================
# Commands
# ============================================================================


@cli.command()
@click.option("--space", "space_text", required=True,
              help="lp:<p>:<dim>, cube:<dim>, cross:<dim>, product(a,b) or JSON")
@click.option("--x", "x_text", required=True, help="Comma-separated coordinates")
@click.option("--dual", is_flag=True, help="Evaluate the dual norm of a functional")
def norm(space_text: str, x_text: str, dual: bool):
    """Print the norm of a vector."""
    space = _parsed(parse_space, "--space", space_text)
    x = _parsed(parse_vector, "--x", x_text, space.dim)
    value = space.dual_norm(x) if dual else space.norm(x)
    click.echo(format(value, ".17g"))


@cli.command()
@click.option("--space", "space_text", required=True)
@click.option("--x", "x_text", required=True, help="Anchor vector")
@click.option("--y", "y_text", required=True, help="Direction vector")
@click.option("--oracle", is_flag=True,
              help="Cross-check with golden-section minimisation of ||x + t y||")
@domain_errors
def orth(space_text: str, x_text: str, y_text: str, oracle: bool):
    """Decide whether x is Birkhoff-James orthogonal to y."""
    settings = get_settings()
    tol = settings.tolerances
    space = _parsed(parse_space, "--space", space_text)
    x = _parsed(parse_vector, "--x", x_text, space.dim)
    y = _parsed(parse_vector, "--y", y_text, space.dim)

    decision = is_bj_orthogonal(space, x, y, tol)
    report: dict[str, Any] = {
        "verdict": decision.verdict.value,
        **one_sided_derivatives(space, x, y, tol).to_dict(),
        "positive_part": in_positive_part(space, x, y, tol).verdict.value,
        "negative_part": in_negative_part(space, x, y, tol).verdict.value,
    }
    disagree = False
    if oracle:
        check = bj_oracle(space, x, y, tol)
        report["oracle"] = check.to_dict()
        verdicts = {decision.verdict, check.verdict}
        disagree = Verdict.INCONCLUSIVE not in verdicts and len(verdicts) > 1
        report["agree"] = not disagree
    click.echo(_json(report))
    if disagree:
        raise SystemExit(1)


@cli.command()
@click.option("--operator", "operator_text", required=True,
              help="Builtin name, JSON operator, or path to a JSON file")
@run_options
@domain_errors
def opnorm(operator_text: str, **overrides: Any):
    """Print ||T|| with the attaining pairs found."""
    config = build_config(**overrides)
    T = _parsed(parse_operator, "--operator", operator_text)
    result = bilinear_norm(T, config.tolerances, config.starts, config.seed,
                           config.workers)
    click.echo(_json({
        "value": result.value,
        "exact": result.exact,
        "certificate": [[x, y] for x, y in result.certificate],
    }))


@cli.command()
@click.option("--operator", "operator_text", required=True)
@run_options
@domain_errors
def attain(operator_text: str, **overrides: Any):
    """Print the sign orbits of the norm attainment set M_T."""
    config = build_config(**overrides)
    T = _parsed(parse_operator, "--operator", operator_text)
    M = norm_attainment_set(T, config.tolerances, config.starts, config.seed,
                            config.workers)
    click.echo(_json(M.to_dict()))


@cli.command()
@click.argument("suite", type=click.Choice(SUITES + tuple(SUITE_ALIASES) + (ALL_SUITES,)))
@run_options
@click.option("--strict", is_flag=True,
              help="Treat inconclusive checks as failures (default BB_STRICT)")
@click.option("--no-timestamp", "no_timestamp", is_flag=True,
              help="Omit timestamps and runtimes so reports are reproducible")
@click.option("--output", type=click.Path(dir_okay=False, path_type=Path),
              default=None, help="Write the report here instead of stdout")
@click.option("--metrics-file", type=click.Path(dir_okay=False, path_type=Path),
              default=None, help="Write Prometheus metrics after the run")
def verify(suite: str, strict: bool, no_timestamp: bool,
           metrics_file: Optional[Path], **overrides: Any):
    """Run an invariant suite and report one JSON line per check."""
    config = build_config(
        timestamps=not no_timestamp, strict=True if strict else None, **overrides
    )
    service = VerificationService(config)
    results = service.run(suite)

    lines = [r.to_json_line(config.timestamps) for res in results for r in res.records]
    passed = all(res.passed(config.strict) for res in results)
    summary = []
    for res in results:
        entry = res.to_dict()
        if not config.timestamps:
            entry.pop("duration_s")
        summary.append(entry)
    lines.append(json.dumps({"summary": summary, "passed": passed}))
    emit(lines, config.output)

    if metrics_file is not None:
        metrics, _ = get_metrics()
        metrics_file.write_bytes(metrics)

    logger.info("verify_finished", suite=suite, passed=passed)
    if not passed:
        raise SystemExit(1)


@cli.command()
@click.option("--no-timestamp", "no_timestamp", is_flag=True)
def example(no_timestamp: bool):
    """Report the five checks on the smooth example operator."""
    records = smooth_example_report(get_settings().tolerances)
    emit(r.to_json_line(not no_timestamp) for r in records)
    if any(r.verdict is not Verdict.HOLDS for r in records):
        raise SystemExit(1)


if __name__ == "__main__":
    cli()
