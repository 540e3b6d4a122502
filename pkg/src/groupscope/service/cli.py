"""Command-line entry points.

Verbs: ingest (validate sessions), annotate (warm the annotation cache),
compute / run (full pipeline to a snapshot), serve (read-only API over a
snapshot), export (json-bundle or csv-metrics). Exit codes: 0 success,
1 validation error, 2 backend failure.
"""

from __future__ import annotations

import sys
from pathlib import Path

import click

from groupscope.annotate.backends import AnnotationError, BackendError
from groupscope.annotate.cache import AnnotationCache
from groupscope.annotate.tasks import TaskRunner
from groupscope.corpus import CorpusError, load_session
from groupscope.service.config import ConfigError, PipelineConfig, load_config
from groupscope.service.pipeline import (
    PipelineError,
    annotate_session,
    discover_sessions,
    load_cohort_scheme,
    load_questions,
    make_backend,
    run_pipeline,
)
from groupscope.service.snapshot import (
    SnapshotError,
    SnapshotStore,
    export_csv_metrics,
    export_json_bundle,
)

EXIT_VALIDATION = 1
EXIT_BACKEND = 2

_VALIDATION_ERRORS = (ConfigError, CorpusError, PipelineError, SnapshotError, ValueError)
_BACKEND_ERRORS = (BackendError, AnnotationError)


def _load_config(config_path: str | None) -> PipelineConfig:
    if config_path is None:
        return PipelineConfig()
    return load_config(config_path)


def _fail(exc: Exception, code: int) -> None:
    click.echo(f"error: {exc}", err=True)
    sys.exit(code)


@click.group()
def cli() -> None:
    """Collaborative-programming session analytics."""


@cli.command()
@click.argument("sessions", type=click.Path(exists=True, file_okay=False))
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
def ingest(sessions: str, config_path: str | None) -> None:
    """Parse and validate every session directory under SESSIONS."""
    try:
        config = _load_config(config_path)
        for directory in discover_sessions(Path(sessions)):
            session = load_session(directory, instructor=config.instructor_id)
            click.echo(
                f"{session.group_id}: {len(session.segments)} questions, "
                f"{sum(len(s.utterances) for s in session.segments)} utterances, "
                f"{len(session.code_submissions)} submissions"
            )
    except _VALIDATION_ERRORS as exc:
        _fail(exc, EXIT_VALIDATION)


@cli.command()
@click.argument("sessions", type=click.Path(exists=True, file_okay=False))
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
def annotate(sessions: str, config_path: str | None) -> None:
    """Run the annotation tasks, populating the completion cache."""
    try:
        config = _load_config(config_path)
        sessions_dir = Path(sessions)
        scheme = load_cohort_scheme(sessions_dir, config)
        questions = load_questions(sessions_dir)
        backend = make_backend(config)
        cache = AnnotationCache(config.cache_path)
        runner = TaskRunner(
            backend=backend,
            cache=cache,
            temperature=config.backend.temperature,
            seed=config.seed,
        )
        for directory in discover_sessions(sessions_dir):
            session = load_session(directory, instructor=config.instructor_id)
            ann = annotate_session(session, scheme, runner, config, questions)
            click.echo(
                f"{session.group_id}: behaviors={sum(len(v) for v in ann.behaviors.values())} "
                f"roles={sum(len(v) for v in ann.roles.values())} "
                f"scaffolds={sum(len(v) for v in ann.scaffolds.values())} "
                f"scores={len(ann.code_scores)}"
            )
        click.echo(f"cache: {cache.hits} hits, {cache.misses} misses")
    except _BACKEND_ERRORS as exc:
        _fail(exc, EXIT_BACKEND)
    except _VALIDATION_ERRORS as exc:
        _fail(exc, EXIT_VALIDATION)


def _run(sessions: str, config_path: str | None) -> None:
    try:
        config = _load_config(config_path)
        run = run_pipeline(Path(sessions), config)
    except _BACKEND_ERRORS as exc:
        _fail(exc, EXIT_BACKEND)
        return
    except _VALIDATION_ERRORS as exc:
        _fail(exc, EXIT_VALIDATION)
        return
    for warning in run.warnings:
        click.echo(f"warning: {warning}", err=True)
    ok = sum(1 for g in run.groups if g.status == "ok")
    click.echo(f"groups: {ok} ok, {len(run.groups) - ok} failed")
    click.echo(f"backend calls: {run.backend_calls}, cache misses: {run.cache_misses}")
    click.echo(f"snapshot: {run.snapshot_dir}")


@cli.command()
@click.argument("sessions", type=click.Path(exists=True, file_okay=False))
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
def compute(sessions: str, config_path: str | None) -> None:
    """Compute all analytics into an immutable snapshot."""
    _run(sessions, config_path)


@cli.command()
@click.argument("sessions", type=click.Path(exists=True, file_okay=False))
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
def run(sessions: str, config_path: str | None) -> None:
    """Ingest, annotate and compute in one go."""
    _run(sessions, config_path)


@cli.command()
@click.argument("snapshot", type=click.Path(exists=True, file_okay=False))
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True, type=int)
@click.option("--sessions", type=click.Path(exists=True, file_okay=False), default=None,
              help="Override the sessions directory used for media files.")
@click.option("--ui", "ui_dir", type=click.Path(exists=True, file_okay=False), default=None,
              help="Static dashboard bundle to serve at /.")
def serve(snapshot: str, host: str, port: int, sessions: str | None, ui_dir: str | None) -> None:
    """Serve a snapshot over the read-only HTTP API."""
    try:
        import uvicorn

        from groupscope.service.api import create_app

        app = create_app(snapshot, sessions_dir=sessions, ui_dir=ui_dir)
    except _VALIDATION_ERRORS as exc:
        _fail(exc, EXIT_VALIDATION)
        return
    uvicorn.run(app, host=host, port=port, log_level="info")


@cli.command()
@click.argument("snapshot", type=click.Path(exists=True, file_okay=False))
@click.option("--format", "fmt", type=click.Choice(["json-bundle", "csv-metrics"]),
              required=True)
@click.option("--out", type=click.Path(), required=True)
def export(snapshot: str, fmt: str, out: str) -> None:
    """Export a snapshot as a JSON bundle or a per-group metrics CSV."""
    try:
        store = SnapshotStore(snapshot)
        store.verify()
        if fmt == "json-bundle":
            target = export_json_bundle(store, out)
        else:
            target = export_csv_metrics(store, Path(out))
        click.echo(str(target))
    except _VALIDATION_ERRORS as exc:
        _fail(exc, EXIT_VALIDATION)


def main() -> None:
    cli()


if __name__ == "__main__":
    main()
