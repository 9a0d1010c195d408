import json
import logging
import sys
from contextlib import nullcontext

import click

from redent.config import PROFILES, SuiteConfig, default_output_dir
from redent.errors import ConfigError, RedentError
from redent.suite import REGISTRY, SuiteRunner, describe_checks, regenerate
from redent.utils import Utils

EXIT_FAILURES = 1
EXIT_ERROR = 2


class RedentClickError(click.ClickException):
    exit_code = EXIT_ERROR

    def format_message(self):
        return f"[redent] {self.message}"


def configure_logging(verbose: bool) -> None:
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
        force=True,
    )


def _list_option(cast):
    def convert(ctx, param, value):
        if value is None:
            return None
        try:
            return [cast(item) for item in value.split(",") if item.strip()]
        except ValueError as exc:
            raise click.BadParameter(f"expected a comma-separated list ({exc})") from exc

    return convert


@click.group()
@click.version_option()
def cli():
    """Reduced relative entropy toolkit and trace-inequality checker"""


@cli.command(name="run")
@click.option("--config", "config_file", type=click.Path(exists=True, dir_okay=False), help="JSON config file.")
@click.option("--profile", type=click.Choice(sorted(PROFILES)), default=None, help="Preset number of trials per cell.")
@click.option("--dims", callback=_list_option(int), help="Comma-separated dimensions, e.g. 2,3,5.")
@click.option("--trials", type=int, default=None, help="Trials per grid cell.")
@click.option("--q-grid", callback=_list_option(float), help="Comma-separated q values.")
@click.option("--p-grid", callback=_list_option(float), help="Comma-separated p values.")
@click.option("--lambda-grid", callback=_list_option(float), help="Comma-separated mixing weights in (0, 1).")
@click.option("--seed", type=int, default=None, help="Campaign seed.")
@click.option("--tol", type=float, default=None, help="Relative margin tolerance.")
@click.option("--checks", default=None, help="Comma-separated check ids or 'all'.")
@click.option("--format", "fmt", type=click.Choice(["json", "csv", "xlsx"]), default=None, help="Report format.")
@click.option("--out", type=click.Path(), default=None, help="Report file or directory.")
@click.option("--field", type=click.Choice(["real", "complex"]), default=None, help="Matrix entries.")
@click.option("--spectrum", callback=_list_option(float), help="Eigenvalue range lo,hi of positive samples.")
@click.option("--jobs", type=int, default=None, help="Worker processes.")
@click.option("--verbose-trials", is_flag=True, help="Keep every trial record in the report.")
@click.option("--verbose", "-v", is_flag=True, help="Debug logging on stderr.")
def run_checks(
    config_file,
    profile,
    dims,
    trials,
    q_grid,
    p_grid,
    lambda_grid,
    seed,
    tol,
    checks,
    fmt,
    out,
    field,
    spectrum,
    jobs,
    verbose_trials,
    verbose,
):
    """Runs the randomized inequality campaign and writes a report"""
    configure_logging(verbose)
    if checks is not None and checks != "all":
        checks = [c.strip() for c in checks.split(",") if c.strip()]
    overrides = {
        "profile": profile,
        "dims": dims,
        "trials_per_cell": trials,
        "q_grid": q_grid,
        "p_grid": p_grid,
        "lambda_grid": lambda_grid,
        "seed": seed,
        "margin_tol": tol,
        "checks": checks,
        "format": fmt,
        "output_path": out,
        "field": field,
        "spectrum": spectrum,
        "jobs": jobs,
        "verbose_trials": verbose_trials or None,
    }
    try:
        if config_file:
            config = SuiteConfig.from_json(config_file, **overrides)
        else:
            config = SuiteConfig(**{k: v for k, v in overrides.items() if v is not None})
        runner = SuiteRunner(config)
    except ConfigError as exc:
        raise RedentClickError(str(exc)) from exc

    def progress_factory(total: int):
        if total <= 0:
            return nullcontext()
        return click.progressbar(length=total, label="Running checks", show_pos=True, file=sys.stderr)

    util = Utils(config)
    try:
        report = runner.run(progress_factory=progress_factory)
        out_file = util.write_report(report)
    except RedentError as exc:
        raise RedentClickError(str(exc)) from exc

    for warning in runner.warnings + util.warnings:
        click.echo(warning, err=True)
    click.echo(
        f"Ran {report.total_trials} trials over {len(report.checks)} checks and saved results to {out_file}"
    )
    if not report.passed:
        util.echo_failures(report)
        click.echo(f"{report.total_failures} failing trials", err=True)
        sys.exit(EXIT_FAILURES)


@cli.command(name="regen")
@click.argument("fingerprint", required=False)
@click.option("--latest", "-l", is_flag=True, help="Regenerate the worst trial of every check in the latest JSON report.")
@click.option("--show-matrices", is_flag=True, help="Print every sampled matrix.")
@click.option("--precision", type=click.IntRange(1, 17), default=17, help="Digits for printed matrices.")
@click.option("--tol", type=float, default=1e-8, help="Relative margin tolerance.")
@click.option("--verbose", "-v", is_flag=True, help="Debug logging on stderr.")
def regen_trial(fingerprint, latest, show_matrices, precision, tol, verbose):
    """Reproduces a trial from its fingerprint"""
    configure_logging(verbose)
    if not (fingerprint or latest):
        raise click.UsageError("Provide a fingerprint or --latest.")

    fingerprints = [fingerprint] if fingerprint else []
    if latest:
        path = Utils.get_latest_report(default_output_dir())
        if not path:
            raise RedentClickError(f"no JSON report found in {default_output_dir()}")
        click.echo(f"Using latest report: {path}", err=True)
        with open(path, "r") as file:
            data = json.load(file)
        fingerprints += [
            agg["min_margin_fingerprint"] for agg in data.get("checks", {}).values() if agg.get("min_margin_fingerprint")
        ]

    failed = False
    for fp in fingerprints:
        try:
            trial = regenerate(fp, margin_tol=tol)
        except RedentError as exc:
            raise RedentClickError(str(exc)) from exc
        click.echo(Utils.format_trial(trial, show_matrices=show_matrices, precision=precision))
        failed = failed or not trial.report.all_hold
    if failed:
        sys.exit(EXIT_FAILURES)


@cli.command(name="list-checks")
def list_checks():
    """Lists every registered check with its parameter axes"""
    for check_id, axes, description in describe_checks():
        styled = click.style(check_id, fg="cyan", bold=True)
        axes_text = ", ".join(axes) if axes else "-"
        click.echo(f"{styled} [{axes_text}]")
        click.echo(f"    {description}")
    click.echo(f"{len(REGISTRY)} checks")
