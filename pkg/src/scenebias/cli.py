"""Command-line pipeline: generate, detect, evaluate, rank, report, all."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .core import DatasetManifest, ManifestError, SceneLabels, validate_manifest
from .detectors import DetectorConfig
from .pipeline import detect_all, evaluate
from .ranking import RankingError, trait_index_table
from .records import load_records
from .repeatability import MatchParams
from .report import ReportError, emit_report
from .transforms import default_schedules, generate_database, load_schedule_config

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_IO = 3

IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg")
BUILTIN_DETECTORS = {
    "harris": "harris-corner",
    "hessian": "hessian-blob",
    "fast": "fast-segment",
}


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def parse_detector_arg(value: str) -> DetectorConfig:
    """'harris' | 'hessian' | 'fast' | 'external:<id>:<keypoint dir>'."""
    if value in BUILTIN_DETECTORS:
        return DetectorConfig(id=value, kind=BUILTIN_DETECTORS[value])
    if value.startswith("external:"):
        parts = value.split(":", 2)
        if len(parts) != 3 or not parts[1] or not parts[2]:
            raise UsageError(f"external detector spec must be external:<id>:<dir>, got {value!r}")
        return DetectorConfig(id=parts[1], kind="external", external_dir=parts[2])
    raise UsageError(f"unknown detector {value!r} (choose from "
                     f"{', '.join(BUILTIN_DETECTORS)}, or external:<id>:<dir>)")


def _load_scene_dir(scene_dir: Path):
    if not scene_dir.is_dir():
        raise DataError(f"scene directory not found: {scene_dir}")
    files = sorted(p for p in scene_dir.iterdir()
                   if p.suffix.lower() in IMAGE_SUFFIXES)
    if not files:
        raise DataError(f"no scenes in {scene_dir}")

    labels_path = scene_dir / "labels.json"
    label_map = {}
    if labels_path.is_file():
        raw = json.loads(labels_path.read_text())
        label_map = {
            name: SceneLabels(int(v["f"]), int(v["g"]), int(v["h"]))
            for name, v in raw.items()
        }
    default = SceneLabels(0, 0, 0)
    return [
        (i, path, label_map.get(path.name, default))
        for i, path in enumerate(files, start=1)
    ]


def _load_manifest(path: str) -> DatasetManifest:
    try:
        manifest = DatasetManifest.load(path)
    except ManifestError as exc:
        raise DataError(str(exc)) from exc
    violations = validate_manifest(manifest)
    if violations:
        raise DataError(f"manifest invalid: {violations[0]} "
                        f"({len(violations)} violations total)")
    return manifest


def cmd_generate(args) -> int:
    out = Path(args.out)
    if (out / "manifest.json").exists() and not args.force:
        raise DataError(f"{out / 'manifest.json'} already exists; use --force to regenerate")
    scenes = _load_scene_dir(Path(args.scenes))
    if args.schedule_config:
        specs = load_schedule_config(args.schedule_config)
    else:
        specs = default_schedules()
    manifest = generate_database(scenes, specs, out)
    print(f"generated {len(manifest.images)} images for "
          f"{manifest.num_scenes} scenes -> {out / 'manifest.json'}")
    return EXIT_OK


def cmd_detect(args) -> int:
    manifest = _load_manifest(args.manifest)
    detectors = [parse_detector_arg(d) for d in args.detector]
    written = detect_all(manifest, detectors, args.out, jobs=args.jobs)
    print(f"wrote {len(written)} keypoint files under {args.out}")
    return EXIT_OK


def _match_params(args) -> MatchParams:
    return MatchParams(epsilon=args.epsilon,
                       overlap_max_error=args.overlap_max_error,
                       use_overlap=args.overlap)


def cmd_evaluate(args) -> int:
    manifest = _load_manifest(args.manifest)
    detectors = [parse_detector_arg(d) for d in args.detector]
    records_path = Path(args.out)
    if records_path.exists() and args.force:
        records_path.unlink()
    records_path.parent.mkdir(parents=True, exist_ok=True)
    try:
        records = evaluate(manifest, detectors, records_path,
                           params=_match_params(args), jobs=args.jobs,
                           resume=not args.force)
    except FileNotFoundError as exc:
        raise DataError(str(exc)) from exc
    print(f"wrote {len(records)} repeatability records -> {records_path}")
    return EXIT_OK


def _amounts_map(manifest: DatasetManifest) -> dict:
    return {(spec.kind, step): amount
            for spec in manifest.specs
            for step, amount in enumerate(spec.amounts, start=1)}


def _vectors(args):
    manifest = _load_manifest(args.manifest)
    records = load_records(args.records)
    if not records:
        raise DataError(f"no records in {args.records}")
    try:
        return trait_index_table(records, manifest.labels(), args.j,
                                 amounts=_amounts_map(manifest))
    except RankingError as exc:
        raise DataError(str(exc)) from exc


def cmd_rank(args) -> int:
    from .report import emit_trait_tables
    vectors = _vectors(args)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    emit_trait_tables(vectors, out)
    print(f"wrote {len(vectors)} trait-index rows -> {out}")
    return EXIT_OK


def cmd_report(args) -> int:
    vectors = _vectors(args)
    try:
        written = emit_report(vectors, args.out)
    except ReportError as exc:
        raise DataError(str(exc)) from exc
    print(f"wrote {len(written)} report files under {args.out}")
    return EXIT_OK


def cmd_all(args) -> int:
    out = Path(args.out)
    args_gen = argparse.Namespace(scenes=args.scenes, out=out / "database",
                                  schedule_config=args.schedule_config,
                                  force=args.force)
    cmd_generate(args_gen)
    args_eval = argparse.Namespace(manifest=out / "database" / "manifest.json",
                                   detector=args.detector,
                                   out=out / "records.csv",
                                   epsilon=args.epsilon,
                                   overlap=args.overlap,
                                   overlap_max_error=args.overlap_max_error,
                                   jobs=args.jobs, force=args.force)
    cmd_evaluate(args_eval)
    args_rep = argparse.Namespace(manifest=out / "database" / "manifest.json",
                                  records=out / "records.csv",
                                  j=args.j, out=out / "report")
    return cmd_report(args_rep)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="scenebias",
                     description="Scene-content bias evaluation for feature detectors")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common_eval(p):
        p.add_argument("--detector", action="append",
                       default=None,
                       help="harris | hessian | fast | external:<id>:<dir> (repeatable)")
        p.add_argument("--epsilon", type=float, default=1.5,
                       help="match distance tolerance in pixels")
        p.add_argument("--overlap", action="store_true",
                       help="also require ellipse overlap for matches")
        p.add_argument("--overlap-max-error", type=float, default=0.4)
        p.add_argument("--jobs", type=int, default=1, help="worker count")

    p = sub.add_parser("generate", help="materialize the transformed image database")
    p.add_argument("--scenes", required=True, help="directory of reference images")
    p.add_argument("--out", required=True)
    p.add_argument("--schedule-config", default=None,
                   help="JSON file {kind: [amounts...]} overriding default schedules")
    p.add_argument("--force", action="store_true")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("detect", help="write keypoint files for every image")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)
    add_common_eval(p)
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("evaluate", help="compute repeatability records")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True, help="records CSV path")
    p.add_argument("--force", action="store_true",
                   help="discard any existing records instead of resuming")
    add_common_eval(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("rank", help="export trait-index rows")
    p.add_argument("--manifest", required=True)
    p.add_argument("--records", required=True)
    p.add_argument("--j", type=int, default=20, help="ranking length")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("report", help="emit trait tables and radar charts")
    p.add_argument("--manifest", required=True)
    p.add_argument("--records", required=True)
    p.add_argument("--j", type=int, default=20)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("all", help="generate + evaluate + report")
    p.add_argument("--scenes", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--schedule-config", default=None)
    p.add_argument("--j", type=int, default=20)
    p.add_argument("--force", action="store_true")
    add_common_eval(p)
    p.set_defaults(func=cmd_all)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "detector", None) is None and hasattr(args, "epsilon"):
            args.detector = list(BUILTIN_DETECTORS)
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, RankingError, ReportError, ManifestError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
