"""Command-line entry points for the pipeline and the review service."""

from __future__ import annotations

import dataclasses
import logging
import sys
from pathlib import Path

import click

from .config import PipelineConfig
from .errors import EgoavuError
from .pipeline import FORMAT_VIDEOS, STAGES, run_stage
from .records import read_records
from .review import serve_review_api

logger = logging.getLogger(__name__)

_OVERRIDABLE = {
    "work_dir": str,
    "narrations_path": str,
    "manifest_path": str,
    "responses_path": str,
    "backend": str,
    "endpoint_url": str,
    "api_key_env": str,
    "seed": int,
    "split_ratio": float,
    "min_clip_s": float,
    "max_clip_s": float,
    "mattr_window": int,
    "mattr_tau": float,
    "drop_fraction": float,
    "temperature": float,
    "max_tokens": int,
    "max_in_flight": int,
    "max_attempts": int,
}


def _config_options(fn):
    fn = click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
                      default=None, help="Pipeline config file (JSON).")(fn)
    for name, caster in reversed(_OVERRIDABLE.items()):
        flag = "--" + name.replace("_", "-")
        fn = click.option(flag, name, type=caster, default=None,
                          help=f"Override config field {name}.")(fn)
    return fn


def _load_config(config_path: str | None, overrides: dict) -> PipelineConfig:
    config = PipelineConfig.from_file(config_path) if config_path else PipelineConfig()
    updates = {k: v for k, v in overrides.items() if v is not None}
    if updates:
        config = dataclasses.replace(config, **updates)
    return config.validate()


@click.group()
@click.option("-v", "--verbose", is_flag=True, help="Debug logging.")
def main(verbose: bool) -> None:
    """Egocentric audio-visual data engine."""
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(asctime)s %(name)s %(levelname)s %(message)s",
    )


def _make_stage_command(stage: str) -> None:
    @main.command(name=stage, help=f"Run the {stage} stage.")
    @_config_options
    def _cmd(config_path: str | None, **overrides) -> None:
        config = _load_config(config_path, overrides)
        try:
            checkpoint = run_stage(stage, config)
        except EgoavuError as exc:
            raise click.ClickException(str(exc))
        click.echo(f"{stage}: complete ({checkpoint.item_count} items)")


for _stage in STAGES:
    _make_stage_command(_stage)


@main.command("review-serve")
@click.option("--bench", "bench_path", type=click.Path(exists=True, dir_okay=False), required=True,
              help="Exported bench.jsonl to review.")
@click.option("--videos", "videos_path", type=click.Path(exists=True, dir_okay=False), default=None,
              help="videos.records for media locators.")
@click.option("--ui-dir", type=click.Path(exists=True, file_okay=False), default=None,
              help="Static UI bundle to serve under /ui.")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8777, show_default=True, type=int)
def review_serve(bench_path: str, videos_path: str | None, ui_dir: str | None,
                 host: str, port: int) -> None:
    """Serve the verification API (and optionally the UI bundle)."""
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(levelname)s %(message)s")
    videos = None
    if videos_path:
        videos = {row["video_id"]: row for row in read_records(videos_path, FORMAT_VIDEOS)}
    serve_review_api(bench_path, host, port, videos=videos, ui_dir=ui_dir)


@main.command("report")
@_config_options
def report(config_path: str | None, **overrides) -> None:
    """Print the latest evaluation report table."""
    config = _load_config(config_path, overrides)
    table = Path(config.work_dir) / "report.txt"
    if not table.exists():
        raise click.ClickException(f"no report at {table}; run the eval stage first")
    click.echo(table.read_text(encoding="utf-8").rstrip())


if __name__ == "__main__":
    sys.exit(main())
