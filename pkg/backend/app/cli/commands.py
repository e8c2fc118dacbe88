from __future__ import annotations

import logging
import sys
from typing import Any, Callable, Sequence

import click
from pydantic import ValidationError

from ..core.config import settings
from ..core.errors import InvariantViolation, JNLabError
from ..services.exactmath import Verdict
from ..services.spaces import parse_test_function
from ..services.verifier import ClaimVerifier, SuiteResult
from .reports import exit_code, render, write_report
from .schemas import RunConfig

logger = logging.getLogger(__name__)

Suite = Callable[[ClaimVerifier, RunConfig], SuiteResult]


def _parse_subseq(ctx: click.Context, param: click.Parameter, value: str | None) -> tuple[int, ...] | None:
    if value is None:
        return None
    try:
        return tuple(int(item) for item in value.split(",") if item.strip())
    except ValueError as exc:
        raise click.BadParameter(f"expected comma-separated integers, got {value!r}") from exc


_RUN_OPTIONS = [
    click.option("--n", "n", type=int, default=None, help="Single measure index n."),
    click.option("--n-max", "n_max", type=int, default=None, help="Run n = 1..N."),
    click.option("--k-max", "k_max", type=int, default=None, help="Range of the binomial identities."),
    click.option("--m-max", "m_max", type=int, default=None, help="Range of the Wallis and central-binomial checks."),
    click.option("--digits", type=int, default=None, help="Decimal places of the pi interval (1..120)."),
    click.option("--seed", type=int, default=0, show_default=True, help="64-bit seed for randomized suites."),
    click.option("--format", "format_", type=click.Choice(["csv", "json", "text"]), default="json", show_default=True),
    click.option("--out", type=click.Path(dir_okay=False), default=None, help="Write the report here instead of stdout."),
    click.option("--fn", default=None, help="Test function on K: pow:p, affine:a,b, indicator:t, table:@file.csv"),
    click.option("--gn", default=None, help="Test function on L, same grammar as --fn."),
    click.option("--sizes", default=None, help="linear, dyadic or pairs:AxB,..."),
    click.option("--trials", type=int, default=None, help="Random trials per n."),
    click.option("--subseq", callback=_parse_subseq, default=None, help="Increasing indices, e.g. 1,4,9,16."),
]


def run_options(command: Callable[..., Any]) -> Callable[..., Any]:
    for option in reversed(_RUN_OPTIONS):
        command = option(command)
    return command


def _usage_message(exc: ValidationError) -> str:
    parts = []
    for error in exc.errors():
        location = ".".join(str(item) for item in error["loc"])
        parts.append(f"{location}: {error['msg']}" if location else error["msg"])
    return "; ".join(parts)


def _config(options: dict[str, Any]) -> RunConfig:
    values = {key: value for key, value in options.items() if key in RunConfig.model_fields}
    values["format"] = options["format_"]
    values["digits"] = settings.DEFAULT_DIGITS if options["digits"] is None else options["digits"]
    try:
        return RunConfig(**values)
    except ValidationError as exc:
        raise click.UsageError(_usage_message(exc)) from exc


def _execute(command: str, options: dict[str, Any], suite: Suite) -> None:
    config = _config(options)
    try:
        verifier = ClaimVerifier(digits=config.digits, seed=config.seed)
        result = suite(verifier, config)
    except InvariantViolation as exc:
        logger.error("%s: claim %s violated: %s", command, exc.claim or "?", exc)
        result = SuiteResult(command, Verdict.PROVEN_FALSE, {"error": str(exc), "claim": exc.claim})
    except JNLabError as exc:
        raise click.UsageError(str(exc)) from exc
    logger.info("%s finished: %s", command, result.verdict.value)
    write_report(render(result, config), config.out)
    click.get_current_context().exit(exit_code(result.verdict))


def _functions(config: RunConfig, default: str | None = None) -> tuple[Any, Any]:
    fn = config.fn or default
    gn = config.gn or default
    if fn is None or gn is None:
        return None, None
    return parse_test_function(fn), parse_test_function(gn)


@click.group(name="jn-lab")
def cli() -> None:
    """Exact checks of the JN measure construction, its bounds and the complemented c0 machinery."""
    settings.reload()
    logging.basicConfig(
        level=getattr(logging, settings.LOG_LEVEL, logging.WARNING),
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
        force=True,
    )


@cli.command()
@run_options
@click.option("--inject-fault", is_flag=True, hidden=True)
def construct(inject_fault: bool, **options: Any) -> None:
    """Build mu_n and check norm, mass, support and the positive part."""
    _execute("construct", options, lambda v, c: v.construct(c.n_values(8), fault=inject_fault))


@cli.command()
@run_options
@click.option("--closed", is_flag=True, help="Closed form only (the default when no oracle is chosen).")
@click.option("--oracle", type=click.Choice(["b", "full"]), default=None, help="b: optimal-A over every B; full: double enumeration.")
@click.option("--witness", is_flag=True, help="Include the majority witness rectangle.")
def sup(closed: bool, oracle: str | None, witness: bool, **options: Any) -> None:
    """Rectangle supremum of mu_n, by closed form and independent oracles."""

    def suite(verifier: ClaimVerifier, config: RunConfig) -> SuiteResult:
        n = config.n or config.n_max or 4
        return verifier.sup(n, oracle=None if closed and oracle is None else oracle, witness=witness)

    _execute("sup", options, suite)


@cli.command()
@run_options
def bounds(**options: Any) -> None:
    """Strict two-sided bounds on the supremum, certified with a pi interval."""
    _execute("bounds", options, lambda v, c: v.bounds(c.n or c.n_max or 200))


@cli.command("verify-identities")
@run_options
def verify_identities(**options: Any) -> None:
    """S_k closed form, monotone g, Pascal and absorption rules, Wallis products, central binomials."""
    _execute("verify-identities", options, lambda v, c: v.identities(c.k_max or 1000, c.m_max or 10_000))


@cli.command("tensor-test")
@run_options
def tensor_test(**options: Any) -> None:
    """|mu_n(f (x) g)| <= 8/sqrt(pi n) max|f| max|g| on random or given factors."""

    def suite(verifier: ClaimVerifier, config: RunConfig) -> SuiteResult:
        f, g = _functions(config)
        return verifier.decay("tensor", config.n_values(10), config.trials or 1000, f, g)

    _execute("tensor-test", options, suite)


@cli.command("sum-test")
@run_options
def sum_test(**options: Any) -> None:
    """|mu_n(f (+) g)| <= 8/sqrt(pi n) (max|f| + max|g|), plus the grid-norm form."""

    def suite(verifier: ClaimVerifier, config: RunConfig) -> SuiteResult:
        f, g = _functions(config)
        return verifier.decay("sum", config.n_values(10), config.trials or 1000, f, g)

    _execute("sum-test", options, suite)


@cli.command()
@run_options
@click.option("--combine", "combine_kind", type=click.Choice(["tensor", "sum"]), default="tensor", show_default=True)
def converge(combine_kind: str, **options: Any) -> None:
    """mu_n(f (x) g) or mu_n(f (+) g) along n, exact and decimal."""

    def suite(verifier: ClaimVerifier, config: RunConfig) -> SuiteResult:
        f, g = _functions(config, default="pow:1")
        return verifier.converge(f, g, config.n_values(12), combine_kind)

    _execute("converge", options, suite)


@cli.command("strongly-normal")
@run_options
def strongly_normal(**options: Any) -> None:
    """Partial sums of |mu_s(f (x) g)| along a subsequence against their envelope."""

    def suite(verifier: ClaimVerifier, config: RunConfig) -> SuiteResult:
        f, g = _functions(config)
        return verifier.strongly_normal(config.subseq or (1, 4, 9, 16), config.trials or 100, f, g)

    _execute("strongly-normal", options, suite)


@cli.command()
@run_options
def generalized(**options: Any) -> None:
    """Measures on grids of prescribed sizes a_n x b_n."""

    def suite(verifier: ClaimVerifier, config: RunConfig) -> SuiteResult:
        sizes = config.sizes or "linear"
        # Dyadic stage n is mu_n itself, so its default length stops at the size cap.
        default = settings.N_MAX if sizes.strip().lower() == "dyadic" else 50
        return verifier.generalized(sizes, config.n or config.n_max or default)

    _execute("generalized", options, suite)


@cli.command()
@run_options
def complemented(**options: Any) -> None:
    """Bump family, orthogonality matrix, ST = id and P^2 = P."""
    _execute("complemented", options, lambda v, c: v.complemented(c.n or c.n_max or 12))


@cli.command()
@run_options
@click.option("--inject-fault", is_flag=True, hidden=True)
def selftest(inject_fault: bool, **options: Any) -> None:
    """Every suite at small n."""
    _execute("selftest", options, lambda v, c: v.selftest(fault=inject_fault))


def dispatch(argv: Sequence[str] | None = None) -> int:
    try:
        cli.main(args=list(argv) if argv is not None else None, prog_name="jn-lab")
    except SystemExit as exc:
        if exc.code is None:
            return 0
        return exc.code if isinstance(exc.code, int) else 1
    return 0
