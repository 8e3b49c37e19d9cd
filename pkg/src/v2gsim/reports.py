"""Tidy CSV/JSON writers for study outputs. UTF-8, LF line endings, fixed column order."""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path
from typing import Iterable, Sequence

from .engine import RESULT_COLUMNS, Mode, result_row
from .montecarlo import CostYear, StudyResult, SweepCell, summarize

SCHEDULE_COLUMNS = ("t_w", "commute_time", "savings")
HOURS_COLUMNS = ("mode", "weekly_hours", "ev_capacity_kwh", "savings")
TRACE_COLUMNS = ("user_id", "iteration", "p", "objective")
SWEEP_COLUMNS = ("eta", "r_ch", "mean_savings", "q25", "q50", "q75")
COST_COLUMNS = ("year", "c_b", "mean_savings")


def csv_text(columns: Sequence[str], rows: Iterable[dict | Sequence]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([row[c] for c in columns] if isinstance(row, dict) else row)
    return buf.getvalue()


def _write(path: Path, text: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(text.encode("utf-8"))
    return path


def result_rows(study: StudyResult) -> list[dict]:
    """One row per user per scenario, user-major."""
    rows = []
    per_mode = [study.distributions[m].rows for m in study.config.scenarios]
    for outcomes in zip(*per_mode):
        for o in outcomes:
            rows.append(result_row(o.user_id, o.mode, o.p_star, o.result, o.savings))
    return rows


def study_summary(study: StudyResult, config_echo: dict) -> dict:
    return {
        "city_id": study.config.city_id,
        "config": config_echo,
        "master_seed": study.config.master_seed,
        "user_seeds": [u.rng_seed for u in study.population],
        "scenarios": {m.value: study.distributions[m].aggregates for m in study.config.scenarios},
    }


def write_study(study: StudyResult, out_dir: Path, config_echo: dict) -> list[Path]:
    out_dir = Path(out_dir)
    written = [_write(out_dir / "results.csv", csv_text(RESULT_COLUMNS, result_rows(study)))]
    summary = json.dumps(study_summary(study, config_echo), sort_keys=True, indent=2) + "\n"
    written.append(_write(out_dir / "summary.json", summary))

    schedule_mode = Mode.OSP if Mode.OSP in study.distributions else study.config.scenarios[0]
    schedule = [(o.profile.weekly_hours, o.profile.commute_time, o.savings)
                for o in study.distributions[schedule_mode].rows]
    written.append(_write(out_dir / "savings_vs_schedule.csv", csv_text(SCHEDULE_COLUMNS, schedule)))

    hours = [(m.value, o.profile.weekly_hours, o.profile.ev_capacity, o.savings)
             for m in study.config.scenarios for o in study.distributions[m].rows]
    written.append(_write(out_dir / "savings_vs_hours.csv", csv_text(HOURS_COLUMNS, hours)))

    if Mode.OSP in study.distributions:
        trace = [(o.user_id, r.iteration, r.p, r.objective)
                 for o in study.distributions[Mode.OSP].rows for r in o.trace]
        written.append(_write(out_dir / "osp_trace.csv", csv_text(TRACE_COLUMNS, trace)))
    return written


def write_sweep(cells: Sequence[SweepCell], out_dir: Path) -> Path:
    rows = []
    for c in cells:
        s = summarize(c.savings)
        rows.append((c.eta, c.r_ch, s["mean"], s["q25"], s["q50"], s["q75"]))
    return _write(Path(out_dir) / "sweep.csv", csv_text(SWEEP_COLUMNS, rows))


def write_cost_study(years: Sequence[CostYear], out_dir: Path) -> Path:
    rows = [(y.year, y.c_b, y.mean) for y in years]
    return _write(Path(out_dir) / "cost_study.csv", csv_text(COST_COLUMNS, rows))
