"""Structured results file: one row per (scene, detector, kind, step)."""

from __future__ import annotations

import csv
from pathlib import Path

from .core import RepeatabilityRecord

FIELDS = ("scene", "detector", "kind", "step", "rate", "n_ref", "n_rep")


def record_key(rec: RepeatabilityRecord) -> tuple:
    return (rec.detector, rec.kind, rec.step, rec.scene)


def save_records(records: list[RepeatabilityRecord], path: str | Path) -> None:
    """Write records as CSV, sorted by key; undefined rates have an empty cell."""
    rows = sorted(records, key=record_key)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(FIELDS)
        for rec in rows:
            rate = "" if rec.rate is None else repr(rec.rate)
            writer.writerow([rec.scene, rec.detector, rec.kind, rec.step,
                             rate, rec.n_ref, rec.n_rep])


def load_records(path: str | Path) -> list[RepeatabilityRecord]:
    records = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            rate = float(row["rate"]) if row["rate"] != "" else None
            records.append(RepeatabilityRecord(
                scene=int(row["scene"]),
                detector=row["detector"],
                kind=row["kind"],
                step=int(row["step"]),
                rate=rate,
                n_ref=int(row["n_ref"]),
                n_rep=int(row["n_rep"]),
            ))
    return records
