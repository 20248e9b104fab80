"""Command-line entry points for the pipeline stages and the ballot service."""

from __future__ import annotations

import sys
from pathlib import Path

import click

from .config import load_config, write_default_config
from .errors import DependencyError, TrendVoteError
from .fixtures import FixtureSpec, generate_fixture, write_roster
from .pipeline import STAGES, Layout, run_stage


def _get_config(ctx: click.Context):
    opts = ctx.obj
    overrides = {}
    if opts["domain"]:
        overrides["domains"] = tuple(opts["domain"])
    if opts["year"] is not None:
        overrides["curr_year"] = opts["year"]
    if opts["seed"] is not None:
        overrides["rng_seed"] = opts["seed"]
    if opts["mock"] is not None:
        overrides["mock"] = opts["mock"]
    return load_config(opts["config_path"], **overrides)


def _run(ctx: click.Context, stage: str) -> None:
    try:
        result = run_stage(stage, _get_config(ctx))
    except DependencyError as exc:
        raise click.ClickException(str(exc))
    except TrendVoteError as exc:
        raise click.ClickException(f"{stage}: {exc}")
    if result.status == "up-to-date":
        click.echo(f"{stage}: up-to-date (skipped)")
    else:
        click.echo(f"{stage}: done in {result.manifest['duration_s']}s")


@click.group()
@click.option("--config", "config_path", default="config.toml", show_default=True,
              help="Pipeline TOML config.")
@click.option("--domain", multiple=True, help="Restrict to these domains.")
@click.option("--year", type=int, default=None, help="Override the current year.")
@click.option("--seed", type=int, default=None, help="Override the global seed.")
@click.option("--mock/--live", "mock", default=None,
              help="Force mock or live endpoints.")
@click.pass_context
def main(ctx, config_path, domain, year, seed, mock):
    """Trend mining and hybrid candidate selection pipeline."""
    ctx.obj = {
        "config_path": config_path,
        "domain": domain,
        "year": year,
        "seed": seed,
        "mock": mock,
    }


def _stage_command(stage: str):
    @main.command(name=stage, help=f"Run the {stage} stage.")
    @click.pass_context
    def _cmd(ctx):
        _run(ctx, stage)

    return _cmd


for _stage in STAGES:
    if _stage != "vote-tally":
        _stage_command(_stage)


@main.command(name="run")
@click.pass_context
def run_all_cmd(ctx):
    """Run every pipeline stage in order."""
    for stage in STAGES:
        _run(ctx, stage)


@main.group()
def vote():
    """Ballot sessions: serve the HTTP API, close sessions, tally."""


@vote.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8400, show_default=True)
@click.option("--static-dir", default=None, help="Optional UI bundle to serve.")
@click.pass_context
def serve(ctx, host, port, static_dir):
    """Serve the ballot HTTP API over the session store."""
    import uvicorn

    from .ballot import SessionStore
    from .service import create_app, load_roster

    config = _get_config(ctx)
    if config.roster_file is None:
        raise click.ClickException("config needs paths.roster to serve ballots")
    layout = Layout(config)
    store = (
        SessionStore.load(layout.sessions_dir)
        if layout.sessions_dir.is_dir()
        else SessionStore(layout.sessions_dir)
    )
    app = create_app(store, load_roster(config.roster_file), static_dir=static_dir)
    uvicorn.run(app, host=host, port=port)


@vote.command()
@click.argument("session_id")
@click.pass_context
def close(ctx, session_id):
    """Close one session in the store."""
    from .ballot import SessionStore

    config = _get_config(ctx)
    store = SessionStore.load(Layout(config).sessions_dir)
    try:
        store.close(session_id)
    except KeyError as exc:
        raise click.ClickException(str(exc))
    click.echo(f"closed {session_id}")


@vote.command(name="tally")
@click.pass_context
def vote_tally(ctx):
    """Run the vote-tally stage (sessions, tallies, advancement)."""
    _run(ctx, "vote-tally")


@main.group()
def fixture():
    """Synthetic corpus tooling."""


@fixture.command()
@click.option("--out", "out_dir", default="fixture", show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--works-per-domain", type=int, default=200, show_default=True)
@click.option("--full-scale", is_flag=True,
              help="Write a config with full-scale training defaults.")
def gen(out_dir, seed, works_per_domain, full_scale):
    """Write a synthetic corpus, roster, manifest, and starter config."""
    from .agents import PanelSpec

    out = Path(out_dir)
    spec = FixtureSpec(seed=seed, works_per_domain=works_per_domain)
    manifest = generate_fixture(out, spec)
    write_roster(
        out / "roster.json",
        [PanelSpec.defaults("screening"), PanelSpec.defaults("refinement")],
    )
    write_default_config(
        out / "config.toml",
        works="works.ndjson",
        domain_map="domain_map.csv",
        roster="roster.json",
        rng_seed=seed,
        desk_scale=not full_scale,
    )
    click.echo(
        f"fixture: {manifest['total_works']} works, "
        f"{sum(manifest['keywords_per_domain'].values())} keywords -> {out}"
    )


if __name__ == "__main__":
    sys.exit(main())
