"""Run summaries, the aggregation-change diagnostic and result files.

CSV files carry one row per evaluated round; floats are written with
``repr`` (shortest round-tripping form) so reading a file back gives the exact
values. JSON summaries deliberately exclude wall-clock time, which goes to a
separate timing file, so that repeated runs produce byte-identical output.
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .engine import abs_change_stats

CSV_COLUMNS = (
    "round",
    "preset",
    "party_count",
    "avg_test_acc",
    "avg_train_loss",
    "agg_change_mean",
    "agg_change_std",
    "agg_change_max",
)


def aggregation_change(x_before, x_after):
    """``{"mean", "std", "max"}`` of ``|x_after - x_before|`` over parties and coordinates."""
    return abs_change_stats(x_before, x_after)


def _plain(obj):
    """Convert dataclasses / numpy values / tuples into JSON-ready builtins."""
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: _plain(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, np.generic):
        obj = obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


def canonical_json(obj):
    return json.dumps(_plain(obj), sort_keys=True, separators=(",", ":"), allow_nan=False)


def fingerprint(config):
    """SHA-256 of the canonical JSON encoding of a config (dataclass or dict)."""
    return hashlib.sha256(canonical_json(config).encode()).hexdigest()


@dataclass
class RunSummary:
    preset: str
    rounds: list
    avg_test_acc: list
    avg_train_loss: list
    agg_change_mean: list
    agg_change_std: list
    agg_change_max: list
    party_count: list
    final_avg_test_acc: float | None
    fingerprint: str
    config: dict = field(default_factory=dict)
    wall_clock: float | None = None

    def to_json(self):
        """Canonical JSON text (no wall-clock)."""
        data = _plain(self)
        data.pop("wall_clock")
        return json.dumps(data, sort_keys=True, indent=2, allow_nan=False) + "\n"


def _mean_or_nan(a):
    return float(np.mean(a)) if a is not None else float("nan")


def summarize(records, config=None, preset=None, wall_clock=None):
    """Fold a record stream into a :class:`RunSummary`.

    Party metrics are averaged uniformly over parties; rounds the evaluation
    cadence skipped are left out of every series.
    """
    if not records:
        raise ValueError("no records to summarize")
    cfg = _plain(config) if config is not None else {}
    if preset is None:
        preset = cfg.get("name", "custom") if isinstance(cfg, dict) else "custom"
    evaluated = [r for r in records if r.evaluated]
    acc = [_mean_or_nan(r.test_acc) for r in evaluated]
    final = acc[-1] if acc and math.isfinite(acc[-1]) else None
    return RunSummary(
        preset=preset,
        rounds=[r.round for r in evaluated],
        avg_test_acc=acc,
        avg_train_loss=[_mean_or_nan(r.train_loss) for r in evaluated],
        agg_change_mean=[r.change["mean"] for r in evaluated],
        agg_change_std=[r.change["std"] for r in evaluated],
        agg_change_max=[r.change["max"] for r in evaluated],
        party_count=[len(r.active) for r in evaluated],
        final_avg_test_acc=final,
        fingerprint=fingerprint(cfg),
        config=cfg,
        wall_clock=wall_clock,
    )


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return str(v)


def csv_rows(summary):
    for i, k in enumerate(summary.rounds):
        yield [
            _fmt(k),
            summary.preset,
            _fmt(summary.party_count[i]),
            _fmt(summary.avg_test_acc[i]),
            _fmt(summary.avg_train_loss[i]),
            _fmt(summary.agg_change_mean[i]),
            _fmt(summary.agg_change_std[i]),
            _fmt(summary.agg_change_max[i]),
        ]


def write_csv(summaries, path):
    """Write one summary, or several one after another, as a results CSV."""
    if isinstance(summaries, RunSummary):
        summaries = [summaries]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for summary in summaries:
            writer.writerows(csv_rows(summary))


def read_csv(path):
    """Rows of a results CSV as dicts with numeric fields parsed."""
    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            parsed = {}
            for key, value in row.items():
                if key == "preset":
                    parsed[key] = value
                elif key in ("round", "party_count"):
                    parsed[key] = int(value)
                else:
                    parsed[key] = float(value)
            out.append(parsed)
    return out


def write_json(summary, path):
    with open(path, "w") as fh:
        fh.write(summary.to_json())


def relative_gain(acc, reference):
    """Relative accuracy improvement ``(acc - reference) / reference``."""
    return (acc - reference) / reference
