import asyncio
import json
import os
from pathlib import Path
from typing import List, NoReturn, Optional

import typer

from .agents.models import Hypothesis
from .config import load_config
from .errors import (
    AgentError,
    ConfigurationError,
    ContextBudgetError,
    DocumentError,
    ScoreFormatError,
    StageFailedError,
    TableParseError,
    TemplateError,
    UnknownHypothesisError,
)
from .evaluation import aggregate, build_report, classify, format_aggregate, ingest_scores, report_counts, resolve_cards
from .evaluation.report import sort_key
from .logging_utils import LOG_LEVEL_ENV, set_log_level
from .orchestrator import RunRecord, RunStore, collect_hypotheses, pipeline
from .specdata import ground_hypothesis, load_presence_table

cli_app = typer.Typer(help="Iterative multi-agent hypothesis generation over mass-spectrometry presence tables")

# input problems the user fixes by editing files; everything else is a run failure
_INPUT_ERRORS = (
    ConfigurationError,
    DocumentError,
    TableParseError,
    ContextBudgetError,
    TemplateError,
    ScoreFormatError,
    UnknownHypothesisError,
)


def exit_code_for(error: AgentError) -> int:
    return 1 if isinstance(error, _INPUT_ERRORS) else 2


def _fail(error: AgentError) -> NoReturn:
    if isinstance(error, StageFailedError):
        typer.echo(f"error: iteration {error.iteration} failed at stage '{error.stage}'", err=True)
    typer.echo(f"error: {error.message}", err=True)
    raise typer.Exit(code=exit_code_for(error))


def _summary(record: RunRecord) -> None:
    typer.echo(f"run_id: {record.run_id}")
    typer.echo(f"status: {record.status.value}")
    typer.echo(f"iterations completed: {len(record.iterations)}")
    typer.echo(f"hypotheses: {len(collect_hypotheses(record))}")
    typer.echo(f"total cost: {record.total_cost:.4f} USD")


def _load_run(run_dir: Path) -> RunRecord:
    return RunStore(run_dir).load_record()


def _ordered(record: RunRecord) -> List[Hypothesis]:
    return sorted(collect_hypotheses(record), key=sort_key)


@cli_app.callback()
def main(
    log_level: Optional[str] = typer.Option(None, "--log-level", help="DEBUG, INFO, WARNING or ERROR (stderr)"),
) -> None:
    set_log_level(log_level or os.getenv(LOG_LEVEL_ENV, "WARNING"))


@cli_app.command("run")
def run_command(
    config: Path = typer.Option(..., "--config", help="TOML run configuration"),
    iterations: Optional[int] = typer.Option(None, "--iterations", min=1, help="Override [run] iterations"),
    provider: Optional[str] = typer.Option(None, "--provider", help="Provider profile id"),
    out: Optional[Path] = typer.Option(None, "--out", help="Directory that receives the run directory"),
) -> None:
    """Start a new run."""
    try:
        run_config = load_config(
            config,
            iterations=iterations,
            provider_id=provider,
            output_dir=str(out) if out is not None else None,
        )
        record = asyncio.run(pipeline.run(run_config))
    except AgentError as exc:
        _fail(exc)
    except KeyboardInterrupt:
        typer.echo("interrupted; continue with: hypoagents resume <run_dir>", err=True)
        raise typer.Exit(code=130)
    _summary(record)


@cli_app.command("resume")
def resume_command(run_dir: Path = typer.Argument(..., help="Existing run directory")) -> None:
    """Continue an interrupted or failed run."""
    try:
        record = asyncio.run(pipeline.resume(run_dir))
    except AgentError as exc:
        _fail(exc)
    except KeyboardInterrupt:
        typer.echo(f"interrupted; continue with: hypoagents resume {run_dir}", err=True)
        raise typer.Exit(code=130)
    _summary(record)


@cli_app.command("verify")
def verify_command(
    run_dir: Path = typer.Argument(..., help="Run directory"),
    data: Path = typer.Option(..., "--data", help="Presence table to check claims against"),
) -> None:
    """Check every hypothesis' key datapoints against the presence table."""
    try:
        record = _load_run(run_dir)
        matrix, _ = load_presence_table(data, record.config.sample_classes or None)
    except AgentError as exc:
        _fail(exc)

    violations = 0
    for hypothesis in _ordered(record):
        report = ground_hypothesis(hypothesis.key_datapoints, matrix)
        typer.echo(f"{hypothesis.key}: {report.summary()}")
        for assertion in report.violated:
            typer.echo(f"  violated: {assertion.describe()}")
        for token in report.unresolved:
            typer.echo(f"  unresolved: {token}")
        violations += len(report.violated)

    if violations:
        typer.echo(f"error: {violations} violated assertions", err=True)
        raise typer.Exit(code=2)


@cli_app.command("eval")
def eval_command(
    run_dir: Path = typer.Argument(..., help="Run directory"),
    scores: Path = typer.Option(..., "--scores", help="Score CSV"),
) -> None:
    """Classify scored hypotheses and print the aggregate block."""
    try:
        record = _load_run(run_dir)
        by_key = resolve_cards(ingest_scores(scores), collect_hypotheses(record))
        summary = aggregate(list(by_key.values())) if by_key else None
    except AgentError as exc:
        _fail(exc)

    for hypothesis in _ordered(record):
        card = by_key.get(hypothesis.key)
        if card is None:
            continue
        values = ",".join(str(value) for value in card.scores())
        typer.echo(f"{hypothesis.key}\t{values}\t{classify(card).label()}")
    typer.echo("")
    typer.echo(format_aggregate(summary) if summary is not None else "No scores recorded.")


@cli_app.command("report")
def report_command(
    run_dir: Path = typer.Argument(..., help="Run directory"),
    scores: Path = typer.Option(..., "--scores", help="Score CSV"),
    out: Path = typer.Option(..., "--out", help="Markdown report path; counts go next to it as .json"),
) -> None:
    """Write the Markdown report and its counts JSON."""
    try:
        record = _load_run(run_dir)
        cards = ingest_scores(scores)
        matrix, _ = load_presence_table(Path(record.config.data_path), record.config.sample_classes or None)
        text = build_report(record, cards, matrix)
        counts = report_counts(record, resolve_cards(cards, collect_hypotheses(record)))
    except AgentError as exc:
        _fail(exc)

    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(text, encoding="utf-8")
    counts_path = out.with_suffix(".json")
    counts_path.write_text(json.dumps(counts, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    typer.echo(f"report: {out}")
    typer.echo(f"counts: {counts_path}")


if __name__ == "__main__":
    cli_app()
