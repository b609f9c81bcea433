"""File formats: JSON Lines traces, JSON cohort config, summary CSV/text, tier grids.

Trace record (one JSON object per line)::

    {"format_version": 1, "game_id": "A00-c0-g0", "agent_id": "A00",
     "profile": "Weak", "skill": 0.21, "condition": "fixed",
     "levels": [{"level": 1, "tankers": 6, "zombies": 4, "end_gh": 90,
                 "end_ph": 60, "score": null, "tier": null, "next_size": 13,
                 "enemies_remaining": 0, "duration_s": 39.2}, ...],
     "outcome": "PlayerDeath", "levels_reached": 3,
     "total_duration_s": 190.4, "difficulty_proxy": 2.6}

``score`` and ``tier`` are null under the fixed policy and on the level
that ended the game; ``next_size`` is null on that last level.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from pathlib import Path
from typing import Any, Iterable

from castle_dda.agents import SkillProfile
from castle_dda.engine import CombatParams
from castle_dda.experiments import (
    METRICS,
    CohortConfig,
    CohortResults,
    GameRecord,
    SummaryRow,
    SummaryTable,
)
from castle_dda.tiers import VALID_HEALTHS, TierScheme, tier_table

FORMAT_VERSION = 1
INDEX_NAME = "index.json"
SUMMARY_HEADER = ("group", "metric", "without", "with", "difference")

_RECORD_KEYS = (
    "format_version", "game_id", "agent_id", "profile", "skill", "condition",
    "levels", "outcome", "levels_reached", "total_duration_s", "difficulty_proxy",
)
_LEVEL_KEYS = (
    "level", "tankers", "zombies", "end_gh", "end_ph", "score", "tier",
    "next_size", "enemies_remaining", "duration_s",
)


class FormatError(ValueError):
    """A file does not match the expected schema."""


def _number(value):
    # Scores are multiples of 2.5, so float() is exact.
    return None if value is None else float(value)


def trace_record(rec: GameRecord) -> dict[str, Any]:
    if rec.trace is None:
        raise ValueError(f"game {rec.game_id} carries no trace")
    trace = rec.trace
    levels = []
    for lvl in trace.levels:
        levels.append({
            "level": lvl.level,
            "tankers": lvl.wave.tankers,
            "zombies": lvl.wave.zombies,
            "end_gh": lvl.outcome.end_gate,
            "end_ph": lvl.outcome.end_player,
            "score": _number(lvl.score),
            "tier": None if lvl.tier is None else int(lvl.tier),
            "next_size": lvl.next_size,
            "enemies_remaining": lvl.outcome.enemies_remaining,
            "duration_s": lvl.outcome.duration_s,
        })
    return {
        "format_version": FORMAT_VERSION,
        "game_id": rec.game_id,
        "agent_id": rec.agent_id,
        "profile": rec.profile,
        "skill": rec.skill,
        "condition": rec.condition,
        "levels": levels,
        "outcome": trace.outcome.value,
        "levels_reached": trace.levels_reached,
        "total_duration_s": trace.total_duration_s,
        "difficulty_proxy": rec.difficulty_proxy,
    }


def _check_finite(obj, where: str) -> None:
    if isinstance(obj, float) and not math.isfinite(obj):
        raise FormatError(f"{where}: non-finite number")
    if isinstance(obj, dict):
        for key, value in obj.items():
            _check_finite(value, f"{where}.{key}")
    elif isinstance(obj, list):
        for i, value in enumerate(obj):
            _check_finite(value, f"{where}[{i}]")


def dumps_record(record: dict[str, Any]) -> str:
    _check_finite(record, "record")
    return json.dumps(record, separators=(",", ":"), allow_nan=False)


def loads_record(line: str) -> dict[str, Any]:
    try:
        record = json.loads(line)
    except json.JSONDecodeError as exc:
        raise FormatError(f"invalid JSON: {exc}") from None
    if not isinstance(record, dict):
        raise FormatError("trace record must be a JSON object")
    missing = [k for k in _RECORD_KEYS if k not in record]
    if missing:
        raise FormatError(f"trace record missing field(s): {', '.join(missing)}")
    for i, lvl in enumerate(record["levels"]):
        absent = [k for k in _LEVEL_KEYS if k not in lvl]
        if absent:
            raise FormatError(f"levels[{i}] missing field(s): {', '.join(absent)}")
    _check_finite(record, "record")
    return record


def write_traces(path: str | os.PathLike, records: Iterable[dict[str, Any]]) -> int:
    n = 0
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for record in records:
            fh.write(dumps_record(record))
            fh.write("\n")
            n += 1
    return n


def read_traces(path: str | os.PathLike) -> list[dict[str, Any]]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                out.append(loads_record(line))
            except FormatError as exc:
                raise FormatError(f"{path}:{lineno}: {exc}") from None
    return out


def game_record_from_dict(record: dict[str, Any]) -> GameRecord:
    """Scalar view of a parsed trace record (no in-memory trace)."""
    game_id = record["game_id"]
    try:
        agent_part, cond_part, game_part = game_id.split("-")
        cond_index, game_index = int(cond_part[1:]), int(game_part[1:])
        agent_index = int(agent_part[1:])
    except ValueError:
        cond_index = game_index = agent_index = -1
    return GameRecord(
        game_id=game_id,
        agent_id=record["agent_id"],
        agent_index=agent_index,
        profile=record["profile"],
        skill=record["skill"],
        condition=record["condition"],
        condition_index=cond_index,
        game_index=game_index,
        levels_reached=record["levels_reached"],
        duration_min=record["total_duration_s"] / 60.0,
        difficulty_proxy=record["difficulty_proxy"],
    )


# -- config -----------------------------------------------------------------

_CONFIG_KEYS = (
    "format_version", "master_seed", "counts", "games_per_condition", "conditions",
    "learning_rate", "custom_profiles", "combat",
)


def config_to_dict(config: CohortConfig) -> dict[str, Any]:
    return {
        "format_version": FORMAT_VERSION,
        "master_seed": config.master_seed,
        "counts": dict(config.counts),
        "games_per_condition": config.games_per_condition,
        "conditions": list(config.conditions),
        "learning_rate": config.learning_rate,
        "custom_profiles": {k: [p.low, p.high] for k, p in config.custom_profiles.items()},
        "combat": config.params.to_dict(),
    }


def config_from_dict(data: Any) -> CohortConfig:
    """Build a config, naming the offending field on any problem.

    ``counts`` is required; everything else falls back to the defaults.
    """
    if not isinstance(data, dict):
        raise FormatError("config must be a JSON object")
    unknown = set(data) - set(_CONFIG_KEYS)
    if unknown:
        raise FormatError(f"unknown config field(s): {', '.join(sorted(unknown))}")
    if "counts" not in data:
        raise FormatError("config field 'counts' is required")
    version = data.get("format_version", FORMAT_VERSION)
    if version != FORMAT_VERSION:
        raise FormatError(f"config field 'format_version': unsupported version {version!r}")

    kwargs: dict[str, Any] = {}
    counts = data["counts"]
    if not isinstance(counts, dict):
        raise FormatError("config field 'counts' must be an object of profile -> count")
    kwargs["counts"] = dict(counts)
    for key in ("master_seed", "games_per_condition"):
        if key in data:
            if isinstance(data[key], bool) or not isinstance(data[key], int):
                raise FormatError(f"config field {key!r} must be an integer")
            kwargs[key] = data[key]
    if "learning_rate" in data:
        if not isinstance(data["learning_rate"], (int, float)) or isinstance(data["learning_rate"], bool):
            raise FormatError("config field 'learning_rate' must be a number")
        kwargs["learning_rate"] = float(data["learning_rate"])
    if "conditions" in data:
        conds = data["conditions"]
        if not isinstance(conds, list) or not all(isinstance(c, str) for c in conds):
            raise FormatError("config field 'conditions' must be a list of policy names")
        kwargs["conditions"] = tuple(conds)
    if "custom_profiles" in data:
        custom = {}
        for name, rng in dict(data["custom_profiles"]).items():
            try:
                low, high = rng
                custom[name] = SkillProfile(name, float(low), float(high))
            except (TypeError, ValueError) as exc:
                raise FormatError(f"config field 'custom_profiles.{name}': {exc}") from None
        kwargs["custom_profiles"] = custom
    if "combat" in data:
        try:
            kwargs["params"] = CombatParams.from_dict(dict(data["combat"]))
        except (TypeError, ValueError) as exc:
            raise FormatError(f"config field 'combat': {exc}") from None
    try:
        return CohortConfig(**kwargs)
    except (TypeError, ValueError) as exc:
        raise FormatError(f"config: {exc}") from None


def dumps_config(config: CohortConfig) -> str:
    return json.dumps(config_to_dict(config), indent=2) + "\n"


def load_config(path: str | os.PathLike) -> CohortConfig:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON: {exc}") from None
    return config_from_dict(data)


def default_config_path() -> Path:
    return Path(__file__).with_name("data") / "default_cohort.json"


# -- cohort directories -------------------------------------------------------

def trace_filename(condition: str) -> str:
    return f"traces-{condition}.jsonl"


def write_cohort(results: CohortResults, out_dir: str | os.PathLike) -> Path:
    """Write one JSONL file per condition, then the index."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files = {}
    for condition in results.config.conditions:
        name = trace_filename(condition)
        n = write_traces(
            out / name,
            (trace_record(r) for r in results.records if r.condition == condition),
        )
        files[condition] = {"file": name, "records": n}
    index = {
        "format_version": FORMAT_VERSION,
        "config": config_to_dict(results.config),
        "conditions": list(results.config.conditions),
        "files": files,
        "records": len(results.records),
    }
    (out / INDEX_NAME).write_text(json.dumps(index, indent=2) + "\n", encoding="utf-8")
    return out


def read_cohort(results_dir: str | os.PathLike) -> tuple[dict[str, Any], list[GameRecord]]:
    base = Path(results_dir)
    index_path = base / INDEX_NAME
    if not index_path.is_file():
        raise FormatError(f"{base}: no {INDEX_NAME}; not a cohort results directory")
    try:
        index = json.loads(index_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise FormatError(f"{index_path}: invalid JSON: {exc}") from None
    if index.get("format_version") != FORMAT_VERSION:
        raise FormatError(f"{index_path}: unsupported format_version {index.get('format_version')!r}")
    records: list[GameRecord] = []
    for condition, entry in index.get("files", {}).items():
        for raw in read_traces(base / entry["file"]):
            if raw["format_version"] != FORMAT_VERSION:
                raise FormatError(
                    f"{entry['file']}: mixed-version directory "
                    f"(record {raw['game_id']} has format_version {raw['format_version']!r})"
                )
            if raw["condition"] != condition:
                raise FormatError(f"{entry['file']}: record {raw['game_id']} is not {condition!r}")
            records.append(game_record_from_dict(raw))
    if not records:
        raise FormatError(f"{base}: results directory holds no trace records")
    return index, records


# -- summaries ---------------------------------------------------------------

def summary_csv(table: SummaryTable) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SUMMARY_HEADER)
    for row in table.rows:
        writer.writerow([row.group, row.metric, repr(row.without), repr(row.with_), repr(row.difference)])
    return buf.getvalue()


def parse_summary_csv(text: str) -> SummaryTable:
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if tuple(header or ()) != SUMMARY_HEADER:
        raise FormatError(f"summary CSV header must be {','.join(SUMMARY_HEADER)}")
    rows = []
    for line in reader:
        group, metric, without, with_, diff = line
        rows.append(SummaryRow(group, metric, float(without), float(with_), float(diff)))
    return SummaryTable("", "", tuple(rows))


def _fmt(value: float, precision: int, signed: bool = False) -> str:
    text = f"{value:+.{precision}f}" if signed else f"{value:.{precision}f}"
    return text


def summary_text(table: SummaryTable, precision: int = 4) -> str:
    """Aligned table laid out like the study's averaged-results overview."""
    head = ["", f"Without ({table.baseline})", f"With ({table.treatment})", "Difference"]
    lines = []
    for metric in METRICS:
        first = True
        for row in table.rows:
            if row.metric != metric:
                continue
            lines.append([
                metric if first else "",
                f"{row.group}: {_fmt(row.without, precision)}",
                f"{row.group}: {_fmt(row.with_, precision)}",
                f"{row.group}: {_fmt(row.difference, precision, signed=True)}",
            ])
            first = False
    widths = [max(len(r[i]) for r in [head] + lines) for i in range(4)]
    out = ["  ".join(cell.ljust(w) for cell, w in zip(head, widths)).rstrip()]
    for r in lines:
        out.append("  ".join(cell.ljust(w) for cell, w in zip(r, widths)).rstrip())
    out.append("Enjoyment is a self-report and is not simulated.")
    return "\n".join(out) + "\n"


def parse_summary_text(text: str) -> list[tuple[str, str, float, float, float]]:
    """Recover (group, metric, without, with, difference) from :func:`summary_text` output."""
    rows = []
    metric = None
    for line in text.splitlines()[1:]:
        if not line.strip() or line.startswith("Enjoyment"):
            continue
        if not line.startswith(" "):
            metric = next(m for m in METRICS if line.startswith(m))
        cells = [c for c in line.split("  ") if ":" in c]
        values = []
        group = None
        for cell in cells:
            group, number = cell.strip().split(": ")
            values.append(float(number))
        rows.append((group, metric, *values))
    return rows


# -- tier grids --------------------------------------------------------------

def tier_grid_text(scheme: TierScheme) -> str:
    """10x10 grid of "score Tn" cells; rows are gate health, columns player health."""
    table = tier_table(scheme)
    cells = {k: f"{_score_str(s)} T{int(t)}" for k, (s, t) in table.items()}
    width = max(len(c) for c in cells.values())
    header = "GH\\PH".ljust(6) + " ".join(str(ph).rjust(width) for ph in VALID_HEALTHS)
    lines = [f"scheme {scheme.name}", header]
    for gh in reversed(VALID_HEALTHS):
        lines.append(str(gh).ljust(6) + " ".join(cells[gh, ph].rjust(width) for ph in VALID_HEALTHS))
    return "\n".join(lines) + "\n"


def tier_grid_csv(scheme: TierScheme) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(("scheme", "gate_health", "player_health", "score", "tier"))
    for (gh, ph), (score, tier) in tier_table(scheme).items():
        writer.writerow((scheme.name, gh, ph, _score_str(score), int(tier)))
    return buf.getvalue()


def _score_str(score) -> str:
    value = float(score)
    return str(int(value)) if value.is_integer() else str(value)


__all__ = [
    "FORMAT_VERSION",
    "FormatError",
    "trace_record",
    "dumps_record",
    "loads_record",
    "write_traces",
    "read_traces",
    "config_to_dict",
    "config_from_dict",
    "load_config",
    "write_cohort",
    "read_cohort",
    "summary_csv",
    "summary_text",
    "tier_grid_text",
    "tier_grid_csv",
]
