"""castle-dda command line.

Exit codes: 0 success, 1 data error (bad config or results, unwritable
output), 2 usage error (unknown option values, missing arguments).
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from castle_dda.agents import PlayerAgent, get_profile, sample_agent
from castle_dda.engine import CombatParams, play_game
from castle_dda.experiments import (
    GameRecord,
    compare_conditions,
    difficulty_proxy,
    run_cohort,
    summarize,
)
from castle_dda.seeding import MAX_SEED, agent_rng, game_rng
from castle_dda.serialize import (
    FormatError,
    config_from_dict,
    default_config_path,
    dumps_config,
    dumps_record,
    load_config,
    read_cohort,
    summary_csv,
    summary_text,
    tier_grid_csv,
    tier_grid_text,
    trace_record,
    write_cohort,
)
from castle_dda.tiers import POLICY_NAMES, get_policy, get_scheme

SEED = click.IntRange(0, MAX_SEED)


def _fail(message: str) -> None:
    raise click.ClickException(message)


def _load_params(path: str | None) -> CombatParams:
    if path is None:
        return CombatParams()
    try:
        return CombatParams.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
    except (OSError, ValueError, TypeError) as exc:
        _fail(f"{path}: {exc}")


def _emit(text: str, out: str | None) -> None:
    if out is None or out == "-":
        click.echo(text, nl=False)
        return
    try:
        Path(out).write_text(text, encoding="utf-8")
    except OSError as exc:
        _fail(f"cannot write {out}: {exc.strerror or exc}")


@click.group()
@click.version_option(package_name="artifact")
def main() -> None:
    """Tier-based dynamic difficulty adjustment laboratory."""


@main.command()
@click.option("--skill", type=click.FloatRange(0.0, 1.0), help="Fixed agent skill in [0, 1].")
@click.option("--profile", help="Draw skill from a profile: Weak, Average or Strong.")
@click.option("--policy", type=click.Choice(POLICY_NAMES, case_sensitive=False), default="fixed",
              show_default=True)
@click.option("--games", type=click.IntRange(min=1), default=1, show_default=True)
@click.option("--seed", type=SEED, default=0, show_default=True)
@click.option("--params", "params_path", type=click.Path(dir_okay=False),
              help="JSON file of combat parameters.")
@click.option("--out", default="-", show_default=True, help="Output JSONL path, '-' for stdout.")
def simulate(skill, profile, policy, games, seed, params_path, out):
    """Play GAMES games for one agent and write one trace record per line."""
    if (skill is None) == (profile is None):
        raise click.UsageError("give exactly one of --skill or --profile")
    params = _load_params(params_path)
    if profile is not None:
        try:
            prof = get_profile(profile)
        except ValueError as exc:
            raise click.BadParameter(str(exc), param_hint="--profile")
        agent = sample_agent(prof, agent_rng(seed, 0), agent_id="A00")
    else:
        agent = PlayerAgent("A00", skill, "Custom")
    pol = get_policy(policy)
    lines = []
    for g in range(games):
        trace = play_game(agent.skill, pol, params, game_rng(seed, 0, 0, g))
        rec = GameRecord(
            game_id=f"{agent.agent_id}-c0-g{g}",
            agent_id=agent.agent_id,
            agent_index=0,
            profile=agent.profile,
            skill=agent.skill,
            condition=pol.name,
            condition_index=0,
            game_index=g,
            levels_reached=trace.levels_reached,
            duration_min=trace.total_duration_s / 60,
            difficulty_proxy=difficulty_proxy(trace),
            trace=trace,
        )
        lines.append(dumps_record(trace_record(rec)) + "\n")
    _emit("".join(lines), out)


@main.command()
@click.argument("config_path", required=False, type=click.Path(dir_okay=False))
@click.option("--out", "out_dir", type=click.Path(file_okay=False), help="Results directory.")
@click.option("--seed", type=SEED, help="Override the config's master_seed.")
@click.option("--workers", type=click.IntRange(min=1), default=1, show_default=True)
@click.option("--print-config", is_flag=True, help="Print the config with defaults filled in and exit.")
def cohort(config_path, out_dir, seed, workers, print_config):
    """Run the cohort study described by CONFIG_PATH (default: bundled config)."""
    path = Path(config_path) if config_path else default_config_path()
    try:
        config = load_config(path)
    except OSError as exc:
        _fail(f"cannot read {path}: {exc.strerror or exc}")
    except FormatError as exc:
        _fail(f"{path}: {exc}")
    if seed is not None:
        data = json.loads(dumps_config(config))
        data["master_seed"] = seed
        config = config_from_dict(data)
    if print_config:
        click.echo(dumps_config(config), nl=False)
        return
    if out_dir is None:
        raise click.UsageError("--out is required unless --print-config is given")
    results = run_cohort(config, workers=workers)
    try:
        write_cohort(results, out_dir)
    except OSError as exc:
        _fail(f"cannot write results to {out_dir}: {exc.strerror or exc}")
    click.echo(f"{len(results.records)} games written to {out_dir}", err=True)


@main.command(name="summarize")
@click.argument("results_dir", type=click.Path(file_okay=False))
@click.option("--format", "fmt", type=click.Choice(["csv", "text"]), default="text", show_default=True)
@click.option("--out", default="-", show_default=True)
def summarize_cmd(results_dir, fmt, out):
    """Averaged results table (Weak/Strong x Level/Time/Difficulty) for a cohort run."""
    try:
        _, records = read_cohort(results_dir)
        table = summarize(records)
    except (OSError, ValueError) as exc:
        _fail(str(exc))
    if fmt == "csv":
        _emit(summary_csv(table), out)
        return
    text = summary_text(table)
    report = compare_conditions(table)
    notes = [
        f"{c.group} {c.metric}: expected {'+' if c.expected > 0 else '-'}, "
        f"got {c.difference:+.4f}"
        for c in report.flagged
    ]
    if notes:
        text += "Sign disagreements:\n" + "".join(f"  {n}\n" for n in notes)
    _emit(text, out)


@main.command(name="enumerate-tiers")
@click.argument("scheme", type=click.Choice(["v1", "v2"], case_sensitive=False))
@click.option("--format", "fmt", type=click.Choice(["csv", "text"]), default="text", show_default=True)
@click.option("--out", default="-", show_default=True)
def enumerate_tiers(scheme, fmt, out):
    """Score and tier for every (gate, player) health pair under SCHEME."""
    sch = get_scheme(scheme)
    _emit(tier_grid_csv(sch) if fmt == "csv" else tier_grid_text(sch), out)


if __name__ == "__main__":
    sys.exit(main())
