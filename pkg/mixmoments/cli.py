"""
Command line: fit, forward maps, membership tests, density curves and simulated data.

Exit codes: 0 success or member, 1 input error, 2 no valid candidate, 3 non-member.
Payloads go to stdout (or --output); logs and error messages go to stderr.
"""
from __future__ import annotations

import functools
import io
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple

import click
import numpy as np
import yaml

from .config import Settings, load_env_from_root, load_settings
from .cumulants import CumulantVector, cumulants_to_moments, moments_to_cumulants
from .datasets import sample_mixture, special_data
from .em import compare_mom_em, em_fit, mixture_density, quantile_init
from .errors import DomainError, MomentError
from .models import (
    CommandConfig,
    EMOptions,
    FitOutput,
    MembershipVerdict,
    MixtureModel,
    SelectionRule,
)
from .moments import Dataset, MomentVector, mixture_moments, sample_moments
from .pearson import fit_mom
from .validator import MIXTURE, UNIVARIATE_MIXTURE, VECTOR, DocumentValidator
from . import varieties

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_NO_CANDIDATE = 2
EXIT_NON_MEMBER = 3

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


class ExitCodeGroup(click.Group):
    """Click group whose usage errors exit with the input-error code instead of click's 2."""

    def main(self, args=None, prog_name=None, complete_var=None, standalone_mode=True, **extra):
        try:
            code = super().main(args, prog_name, complete_var, standalone_mode=False, **extra)
        except click.ClickException as e:
            e.show()
            sys.exit(EXIT_INPUT)
        except click.Abort:
            click.echo("Aborted!", err=True)
            sys.exit(EXIT_INPUT)
        if not standalone_mode:
            return code
        sys.exit(code if isinstance(code, int) else EXIT_OK)


def _input_errors(func: Callable) -> Callable:
    """Report library and parsing failures as a one-line message and exit code 1."""

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except (MomentError, ValueError, OSError, yaml.YAMLError) as e:
            message = "; ".join(line.strip() for line in str(e).splitlines() if line.strip())
            click.echo(f"error: {message}", err=True)
            click.get_current_context().exit(EXIT_INPUT)

    return wrapper


def _emit(text: str, output: Optional[Path]) -> None:
    if output is None:
        click.echo(text, nl=not text.endswith("\n"))
        return
    output.write_text(text if text.endswith("\n") else text + "\n", encoding="utf-8")
    logger.info(f"Wrote {output}")


def _settings() -> Settings:
    return click.get_current_context().find_root().obj


def _load_model(path: Path) -> MixtureModel:
    document, definition = DocumentValidator().load(path, [MIXTURE, UNIVARIATE_MIXTURE])
    if definition == UNIVARIATE_MIXTURE:
        return MixtureModel.univariate(
            document["lambda"], document["mu"], document["nu"], document["sigma2"], document["tau2"]
        )
    return MixtureModel.model_validate(document)


def _load_vector(path: Path) -> dict:
    document, _ = DocumentValidator().load(path, [VECTOR])
    return document


def _em_options(settings: Settings) -> EMOptions:
    return EMOptions(
        max_iters=settings.EM_MAX_ITERS,
        loglik_tol=settings.EM_LOGLIK_TOL,
        variance_floor=settings.EM_VARIANCE_FLOOR,
    )


@click.group(cls=ExitCodeGroup)
@click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None,
              help="YAML file overriding settings.")
@click.option("--log-level", default=None,
              type=click.Choice(["DEBUG", "INFO", "WARNING", "ERROR"], case_sensitive=False),
              help="Log level for stderr diagnostics.")
@click.pass_context
@_input_errors
def cli(ctx: click.Context, config_path: Optional[str], log_level: Optional[str]):
    """Gaussian mixtures from moments."""
    load_env_from_root()
    settings = load_settings(config_path)
    level = (log_level or settings.LOG_LEVEL).upper()
    logging.basicConfig(level=getattr(logging, level, logging.INFO), format=LOG_FORMAT, stream=sys.stderr, force=True)
    ctx.obj = settings


# ------------------------------------------------------------------
# fit
# ------------------------------------------------------------------
def _fit_one(
    source: str,
    m: MomentVector,
    data: Optional[Dataset],
    method: str,
    rule: SelectionRule,
    settings: Settings,
) -> FitOutput:
    mom = em = mom_loglik = None
    code = EXIT_OK
    if method in ("mom", "mom+em"):
        mom = fit_mom(
            m,
            select=rule,
            data=data,
            root_tol=settings.ROOT_CLUSTER_TOL,
            p_zero_tol=settings.P_ZERO_TOL,
            snap_tol=settings.CUMULANT_SNAP_TOL,
        )
        if mom.selected is None:
            code = EXIT_NO_CANDIDATE
    if method == "mom+em":
        em, mom_loglik = compare_mom_em(data, mom, _em_options(settings))
    elif method == "em":
        em = em_fit(data, quantile_init(data), _em_options(settings))
    return FitOutput(source=source, mom=mom, em=em, mom_log_likelihood=mom_loglik, exit_code=code)


def _fit_csv(path: Path, order: int, method: str, rule: SelectionRule, settings: Settings) -> FitOutput:
    try:
        data = Dataset.from_csv(path)
        return _fit_one(str(path), sample_moments(data, order), data, method, rule, settings)
    except (MomentError, ValueError) as e:
        logger.error(f"{path}: {e}")
        return FitOutput(source=str(path), exit_code=EXIT_INPUT, error=str(e))


@cli.command()
@click.option("--data", "data_path", default=None, help="CSV sample, or a directory of CSV samples.")
@click.option("--moments", "moments_path", default=None, help="Moment vector JSON.")
@click.option("--order", default=6, show_default=True, type=int, help="Highest moment order used.")
@click.option("--method", default="mom", show_default=True, type=click.Choice(["mom", "em", "mom+em"]))
@click.option("--select", "select", default="m6", show_default=True, type=click.Choice(["m6", "likelihood"]))
@click.option("--output", default=None, help="Report file (or directory for batch input).")
@click.pass_context
@_input_errors
def fit(ctx, data_path, moments_path, order, method, select, output):
    """Fit a two-component mixture by moments, EM, or both."""
    settings = _settings()
    if (data_path is None) == (moments_path is None):
        raise DomainError("give exactly one of --data or --moments")
    rule = SelectionRule.LIKELIHOOD if select == "likelihood" else SelectionRule.M6_GAP
    config = CommandConfig(
        subcommand="fit",
        input_path=data_path or moments_path,
        output_path=output,
        selection=rule,
        options={"order": order, "method": method},
    )
    logger.debug(f"Running {config.model_dump_json()}")

    if moments_path is not None:
        if method != "mom" or rule == SelectionRule.LIKELIHOOD:
            raise DomainError("EM and likelihood selection need --data")
        m = MomentVector.from_document(_load_vector(config.input_path))
        if m.d > order:
            m = m.truncate(order)
        result = _fit_one(str(config.input_path), m, None, method, rule, settings)
        _emit(result.model_dump_json(by_alias=True, indent=2), config.output_path)
        ctx.exit(result.exit_code)

    if config.input_path.is_dir():
        files = sorted(config.input_path.glob("*.csv"))
        if not files:
            raise DomainError(f"no CSV files in {config.input_path}")
        with ThreadPoolExecutor(max_workers=settings.MAX_WORKERS) as pool:
            results: List[FitOutput] = list(
                pool.map(lambda path: _fit_csv(path, order, method, rule, settings), files)
            )
        if config.output_path is not None:
            config.output_path.mkdir(parents=True, exist_ok=True)
            for path, result in zip(files, results):
                _emit(result.model_dump_json(by_alias=True, indent=2), config.output_path / f"{path.stem}.json")
        else:
            payload = "[\n" + ",\n".join(r.model_dump_json(by_alias=True, indent=2) for r in results) + "\n]"
            _emit(payload, None)
        codes = {r.exit_code for r in results}
        ctx.exit(EXIT_INPUT if EXIT_INPUT in codes else EXIT_NO_CANDIDATE if EXIT_NO_CANDIDATE in codes else EXIT_OK)

    data = Dataset.from_csv(config.input_path)
    result = _fit_one(str(config.input_path), sample_moments(data, order), data, method, rule, settings)
    _emit(result.model_dump_json(by_alias=True, indent=2), config.output_path)
    ctx.exit(result.exit_code)


# ------------------------------------------------------------------
# forward maps
# ------------------------------------------------------------------
@cli.command()
@click.argument("params")
@click.option("--order", default=6, show_default=True, type=int)
@click.option("--output", default=None)
@_input_errors
def moments(params, order, output):
    """Moments of a mixture up to --order."""
    config = CommandConfig(subcommand="moments", input_path=params, output_path=output, options={"order": order})
    logger.debug(f"Running {config.model_dump_json()}")
    if order < 0:
        raise DomainError(f"order must be non-negative, got {order}")
    model = _load_model(config.input_path)
    vector = mixture_moments(model, order)
    _emit(vector.to_document().model_dump_json(indent=2), config.output_path)


@cli.command()
@click.argument("vector")
@click.option("--invert", is_flag=True, help="Read cumulants and write moments.")
@click.option("--output", default=None)
@_input_errors
def cumulants(vector, invert, output):
    """Convert moments to cumulants (or back with --invert)."""
    config = CommandConfig(subcommand="cumulants", input_path=vector, output_path=output, options={"invert": invert})
    logger.debug(f"Running {config.model_dump_json()}")
    document = _load_vector(config.input_path)
    if invert:
        result = cumulants_to_moments(CumulantVector.from_document(document))
    else:
        result = moments_to_cumulants(MomentVector.from_document(document))
    _emit(result.to_document().model_dump_json(indent=2), config.output_path)


# ------------------------------------------------------------------
# verify
# ------------------------------------------------------------------
def _verifiers(settings: Settings, tol: Optional[float]) -> Dict[str, Callable[[MomentVector], MembershipVerdict]]:
    moment_tol = tol or settings.MOMENT_TOL
    rank_tol = tol or settings.RANK_TOL
    secant_tol = tol or settings.SECANT_TOL
    return {
        "g1d": lambda m: varieties.residual_G1d(m, threshold=moment_tol),
        "hankel": lambda m: varieties.hankel_rank(m, tol=rank_tol),
        "veronese24": lambda m: varieties.veronese_residual(m, tol=rank_tol),
        "hb23": lambda m: varieties.hilbert_burch_residual(m, threshold=moment_tol),
        "secant2-residuals": lambda m: varieties.secant2_residual_membership(m, threshold=secant_tol),
        "secant2-g16": lambda m: varieties.secant2_g16_membership(m, threshold=secant_tol),
        "zeromean-quartic": lambda m: varieties.zero_mean_quartic(m, threshold=moment_tol),
        "gaussian-cumulants": lambda m: varieties.gaussian_cumulant_residual(m, threshold=moment_tol),
    }


VARIETIES = (
    "g1d", "hankel", "veronese24", "hb23", "secant2-residuals",
    "secant2-g16", "zeromean-quartic", "gaussian-cumulants",
)


@cli.command()
@click.argument("vector")
@click.option("--variety", required=True, type=click.Choice(VARIETIES))
@click.option("--tol", default=None, type=float, help="Membership threshold override.")
@click.option("--output", default=None)
@click.pass_context
@_input_errors
def verify(ctx, vector, variety, tol, output):
    """Test a moment vector for membership in a moment variety."""
    config = CommandConfig(
        subcommand="verify", input_path=vector, output_path=output, tolerance=tol, options={"variety": variety}
    )
    logger.debug(f"Running {config.model_dump_json()}")
    m = MomentVector.from_document(_load_vector(config.input_path))
    verdict = _verifiers(_settings(), config.tolerance)[variety](m)
    _emit(verdict.model_dump_json(indent=2), config.output_path)
    ctx.exit(EXIT_OK if verdict.member else EXIT_NON_MEMBER)


# ------------------------------------------------------------------
# density and simulation
# ------------------------------------------------------------------
@cli.command()
@click.argument("params")
@click.option("--range", "bounds", nargs=2, type=float, required=True, help="Interval a b.")
@click.option("--steps", default=400, show_default=True, type=int)
@click.option("--output", default=None)
@_input_errors
def density(params, bounds: Tuple[float, float], steps, output):
    """CSV of x, total density and each weighted component density."""
    config = CommandConfig(
        subcommand="density", input_path=params, output_path=output, options={"range": bounds, "steps": steps}
    )
    logger.debug(f"Running {config.model_dump_json()}")
    a, b = bounds
    if not a < b or steps < 2:
        raise DomainError(f"need a < b and steps >= 2, got range ({a}, {b}) and {steps} steps")
    model = _load_model(config.input_path)
    xs = np.linspace(a, b, steps)
    total, parts = mixture_density(model, xs)
    header = ",".join(["x", "total"] + [f"component_{j + 1}" for j in range(model.k)])
    buffer = io.StringIO()
    np.savetxt(buffer, np.column_stack([xs, total, parts]), delimiter=",", fmt="%.17g", header=header, comments="")
    _emit(buffer.getvalue(), config.output_path)


@cli.command()
@click.option("--special", "K", default=None, type=int, help="Evenly spaced pair design with 2K points.")
@click.option("--model", "model_path", default=None, help="Mixture JSON to sample from.")
@click.option("--n", "N", default=1000, show_default=True, type=int)
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--output", default=None)
@_input_errors
def simulate(K, model_path, N, seed, output):
    """Write the special design or a seeded mixture sample as CSV."""
    if (K is None) == (model_path is None):
        raise DomainError("give exactly one of --special or --model")
    config = CommandConfig(
        subcommand="simulate", input_path=model_path, output_path=output, seed=seed, options={"K": K, "N": N}
    )
    logger.debug(f"Running {config.model_dump_json()}")
    if K is not None:
        data = special_data(K)
    else:
        data = sample_mixture(_load_model(config.input_path), N, config.seed)
    buffer = io.StringIO()
    data.to_csv(buffer)
    _emit(buffer.getvalue(), config.output_path)


def main() -> None:
    cli()
