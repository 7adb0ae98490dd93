"""Evaluation pipeline: run detectors over a generated database and stream
repeatability records, with resumable, embarrassingly parallel jobs."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import DatasetManifest, RepeatabilityRecord
from .detectors import DetectorConfig, format_keypoint_file, run_detector
from .records import load_records, record_key, save_records
from .repeatability import MatchParams, compute_repeatability
from .transforms import load_image


@dataclass(frozen=True)
class EvalJob:
    """One (scene, transform kind, detector) dataset evaluation."""

    root: str
    scene: int
    kind: str
    detector: DetectorConfig
    steps: tuple  # ((step, amount, rel_path, homography), ...) sorted by step
    params: MatchParams


def _dims(image) -> tuple[int, int]:
    return (image.shape[1], image.shape[0])


def run_eval_job(job: EvalJob) -> list[RepeatabilityRecord]:
    """Compute records for every transformed step of one dataset.

    Step 1 is the reference and produces no record.
    """
    root = Path(job.root)
    ref_step = job.steps[0]
    if ref_step[0] != 1:
        raise ValueError(f"dataset for scene {job.scene}/{job.kind} lacks step 1")
    ref_image = load_image(root / ref_step[2])
    ref_kps = run_detector(ref_image, job.detector, ref_step[2])

    records = []
    for step, _amount, rel_path, hom in job.steps[1:]:
        image = load_image(root / rel_path)
        kps = run_detector(image, job.detector, rel_path)
        h = np.array(hom, dtype=float).reshape(3, 3)
        rec = compute_repeatability(
            ref_kps, kps, h, job.params,
            scene=job.scene, detector=job.detector.id, kind=job.kind, step=step,
            ref_dims=_dims(ref_image), test_dims=_dims(image),
        )
        records.append(rec)
    return records


def build_jobs(manifest: DatasetManifest, detectors: list[DetectorConfig],
               params: MatchParams) -> list[EvalJob]:
    jobs = []
    root = str(manifest.root if manifest.root is not None else Path("."))
    for detector in detectors:
        for scene in sorted(manifest.scenes):
            for spec in manifest.specs:
                entries = manifest.entries_for(scene, spec.kind)
                steps = tuple(
                    (e.step, e.amount, e.path, e.homography) for e in entries
                )
                jobs.append(EvalJob(root=root, scene=scene, kind=spec.kind,
                                    detector=detector, steps=steps, params=params))
    return jobs


def evaluate(manifest: DatasetManifest, detectors: list[DetectorConfig],
             records_path: str | Path, params: MatchParams = MatchParams(),
             jobs: int = 1, resume: bool = True) -> list[RepeatabilityRecord]:
    """Run the whole evaluation; completed (scene, kind, detector) datasets
    found in an existing records file are skipped when resuming."""
    records_path = Path(records_path)
    all_jobs = build_jobs(manifest, detectors, params)

    done: dict[tuple, list[RepeatabilityRecord]] = {}
    if resume and records_path.is_file():
        for rec in load_records(records_path):
            done.setdefault((rec.scene, rec.kind, rec.detector), []).append(rec)

    pending = []
    kept: list[RepeatabilityRecord] = []
    for job in all_jobs:
        key = (job.scene, job.kind, job.detector.id)
        existing = done.get(key, [])
        if len(existing) == len(job.steps) - 1:
            kept.extend(existing)
        else:
            pending.append(job)

    if jobs > 1 and pending:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(run_eval_job, pending))
    else:
        results = [run_eval_job(job) for job in pending]

    records = kept + [rec for chunk in results for rec in chunk]
    records.sort(key=record_key)
    save_records(records, records_path)
    return records


@dataclass(frozen=True)
class DetectJob:
    root: str
    rel_path: str
    detector: DetectorConfig
    out_path: str


def run_detect_job(job: DetectJob) -> str:
    image = load_image(Path(job.root) / job.rel_path)
    kps = run_detector(image, job.detector, job.rel_path)
    out = Path(job.out_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(format_keypoint_file(kps))
    return job.out_path


def detect_all(manifest: DatasetManifest, detectors: list[DetectorConfig],
               out_dir: str | Path, jobs: int = 1) -> list[Path]:
    """Materialize keypoint files for every image and detector."""
    out_dir = Path(out_dir)
    root = str(manifest.root if manifest.root is not None else Path("."))
    detect_jobs = []
    for detector in detectors:
        for entry in manifest.images:
            out_path = out_dir / detector.id / (entry.path + ".kp")
            detect_jobs.append(DetectJob(root=root, rel_path=entry.path,
                                         detector=detector,
                                         out_path=str(out_path)))
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            written = list(pool.map(run_detect_job, detect_jobs))
    else:
        written = [run_detect_job(job) for job in detect_jobs]
    return [Path(p) for p in written]
