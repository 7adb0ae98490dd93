"""Domain types and the dataset manifest shared by the whole pipeline."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

TRANSFORM_KINDS = ("gaussian-blur", "jpeg-compression", "light-reduction")

# Luminance weights used whenever detection needs a single channel.
LUMA_WEIGHTS = (0.299, 0.587, 0.114)


class ManifestError(Exception):
    """Raised when a manifest file cannot be parsed."""


@dataclass(frozen=True)
class SceneLabels:
    """Binary scene attributes: outdoor/indoor, human-made/natural, simple/complex.

    The 1-polarity is fixed as (outdoor, human-made, simple) so trait indices
    reduce to plain means over ranking members.
    """

    outdoor: int
    human_made: int
    simple: int

    def __post_init__(self):
        for name in ("outdoor", "human_made", "simple"):
            v = getattr(self, name)
            if v not in (0, 1):
                raise ValueError(f"label {name} must be 0 or 1, got {v!r}")

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.outdoor, self.human_made, self.simple)


@dataclass(frozen=True)
class Keypoint:
    """Interest point with sub-pixel position, scale and optional elliptical region.

    The region (a, b, c) describes a(x-x0)^2 + 2b(x-x0)(y-y0) + c(y-y0)^2 = 1.
    """

    x: float
    y: float
    scale: float = 1.0
    region: tuple[float, float, float] | None = None

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"keypoint position must be finite, got ({self.x}, {self.y})")
        if not (math.isfinite(self.scale) and self.scale > 0):
            raise ValueError(f"keypoint scale must be > 0, got {self.scale}")
        if self.region is not None:
            a, b, c = self.region
            if not (a > 0 and c > 0 and a * c - b * b > 0):
                raise ValueError(f"ellipse ({a}, {b}, {c}) is not positive-definite")


def identity_homography() -> np.ndarray:
    return np.eye(3)


def check_homography(h: np.ndarray) -> np.ndarray:
    h = np.asarray(h, dtype=float)
    if h.shape != (3, 3):
        raise ValueError(f"homography must be 3x3, got shape {h.shape}")
    if abs(np.linalg.det(h)) < 1e-12:
        raise ValueError("homography is singular")
    return h


@dataclass(frozen=True)
class TransformSpec:
    """One transformation kind with its ordered schedule of amounts.

    amounts[0] is always 0 and denotes the untransformed reference (step 1).
    """

    kind: str
    amounts: tuple[float, ...]

    def __post_init__(self):
        if self.kind not in TRANSFORM_KINDS:
            raise ValueError(f"unknown transform kind {self.kind!r}")
        if not self.amounts or self.amounts[0] != 0:
            raise ValueError("schedule must start with amount 0 (reference step)")
        if any(b <= a for a, b in zip(self.amounts, self.amounts[1:])):
            raise ValueError("schedule amounts must be strictly increasing")

    @property
    def num_steps(self) -> int:
        return len(self.amounts)


@dataclass(frozen=True)
class ImageEntry:
    """One materialized image of the database."""

    scene: int
    kind: str
    step: int  # 1-based; 1 is the reference
    amount: float
    path: str
    homography: tuple[float, ...] = (1, 0, 0, 0, 1, 0, 0, 0, 1)

    def homography_matrix(self) -> np.ndarray:
        return np.array(self.homography, dtype=float).reshape(3, 3)


@dataclass(frozen=True)
class RepeatabilityRecord:
    """One (scene, detector, transform, step) measurement.

    rate is None when the rate is undefined (no reference keypoints in the
    common part); this is distinct from a genuine 0% score.
    """

    scene: int
    detector: str
    kind: str
    step: int
    rate: float | None
    n_ref: int
    n_rep: int

    def __post_init__(self):
        if not 0 <= self.n_rep <= max(self.n_ref, 0):
            raise ValueError(f"n_rep={self.n_rep} out of range for n_ref={self.n_ref}")
        if self.n_ref > 0:
            expected = self.n_rep / self.n_ref
            if self.rate is None or abs(self.rate - expected) > 1e-12:
                raise ValueError(f"rate {self.rate} inconsistent with {self.n_rep}/{self.n_ref}")
        elif self.rate is not None:
            raise ValueError("rate must be None (undefined) when n_ref == 0")

    @property
    def defined(self) -> bool:
        return self.rate is not None


@dataclass
class DatasetManifest:
    """Full description of a generated image database.

    scenes maps scene id -> (reference path, labels); images holds every
    materialized file with its schedule position and ground-truth homography.
    """

    scenes: dict[int, tuple[str, SceneLabels]] = field(default_factory=dict)
    specs: list[TransformSpec] = field(default_factory=list)
    images: list[ImageEntry] = field(default_factory=list)
    root: Path | None = None

    @property
    def num_scenes(self) -> int:
        return len(self.scenes)

    def expected_image_count(self) -> int:
        return self.num_scenes * sum(s.num_steps for s in self.specs)

    def labels(self) -> dict[int, SceneLabels]:
        return {sid: lab for sid, (_, lab) in self.scenes.items()}

    def image_path(self, entry: ImageEntry) -> Path:
        base = self.root if self.root is not None else Path(".")
        return base / entry.path

    def entries_for(self, scene: int, kind: str) -> list[ImageEntry]:
        out = [e for e in self.images if e.scene == scene and e.kind == kind]
        out.sort(key=lambda e: e.step)
        return out

    def to_dict(self) -> dict:
        return {
            "scenes": [
                {
                    "id": sid,
                    "path": path,
                    "labels": {"f": lab.outdoor, "g": lab.human_made, "h": lab.simple},
                }
                for sid, (path, lab) in sorted(self.scenes.items())
            ],
            "transforms": [
                {"kind": s.kind, "amounts": list(s.amounts)} for s in self.specs
            ],
            "images": [
                {
                    "scene": e.scene,
                    "kind": e.kind,
                    "step": e.step,
                    "amount": e.amount,
                    "path": e.path,
                    "homography": list(e.homography),
                }
                for e in self.images
            ],
        }

    def save(self, path: str | Path) -> None:
        path = Path(path)
        path.write_text(json.dumps(self.to_dict(), indent=1) + "\n")

    @classmethod
    def from_dict(cls, data: dict, root: Path | None = None) -> "DatasetManifest":
        try:
            scenes = {}
            for s in data["scenes"]:
                lab = s["labels"]
                scenes[int(s["id"])] = (
                    s["path"],
                    SceneLabels(int(lab["f"]), int(lab["g"]), int(lab["h"])),
                )
            specs = [
                TransformSpec(t["kind"], tuple(float(a) for a in t["amounts"]))
                for t in data["transforms"]
            ]
            images = [
                ImageEntry(
                    scene=int(e["scene"]),
                    kind=e["kind"],
                    step=int(e["step"]),
                    amount=float(e["amount"]),
                    path=e["path"],
                    homography=tuple(float(v) for v in e["homography"]),
                )
                for e in data["images"]
            ]
        except (KeyError, TypeError, ValueError) as exc:
            raise ManifestError(f"malformed manifest: {exc}") from exc
        return cls(scenes=scenes, specs=specs, images=images, root=root)

    @classmethod
    def load(cls, path: str | Path) -> "DatasetManifest":
        path = Path(path)
        try:
            data = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ManifestError(f"{path}: line {exc.lineno}: {exc.msg}") from exc
        except OSError as exc:
            raise ManifestError(f"{path}: {exc}") from exc
        return cls.from_dict(data, root=path.parent)


def validate_manifest(manifest: DatasetManifest) -> list[str]:
    """Check all manifest invariants; returns a list of violation messages."""
    violations: list[str] = []
    n = manifest.num_scenes

    for sid in manifest.scenes:
        if not 1 <= sid <= n:
            violations.append(f"scene id {sid} outside 1..{n}")

    kinds = [s.kind for s in manifest.specs]
    if len(set(kinds)) != len(kinds):
        violations.append("duplicate transform kind in specs")

    expected = manifest.expected_image_count()
    if len(manifest.images) != expected:
        violations.append(
            f"image count {len(manifest.images)} != expected {expected}"
        )

    spec_by_kind = {s.kind: s for s in manifest.specs}
    seen = set()
    for e in manifest.images:
        key = (e.scene, e.kind, e.step)
        if key in seen:
            violations.append(f"duplicate image entry for {key}")
        seen.add(key)
        if e.scene not in manifest.scenes:
            violations.append(f"image references unknown scene {e.scene}")
        spec = spec_by_kind.get(e.kind)
        if spec is None:
            violations.append(f"image references unknown transform kind {e.kind!r}")
        elif not 1 <= e.step <= spec.num_steps:
            violations.append(f"step {e.step} outside schedule for {e.kind}")
        elif e.amount != spec.amounts[e.step - 1]:
            violations.append(
                f"amount {e.amount} != schedule value for ({e.kind}, step {e.step})"
            )
        try:
            check_homography(e.homography_matrix())
        except ValueError as exc:
            violations.append(f"image {e.path}: {exc}")
        if not manifest.image_path(e).is_file():
            violations.append(f"missing image file: {e.path}")

    for sid, (path, _) in manifest.scenes.items():
        base = manifest.root if manifest.root is not None else Path(".")
        if not (base / path).is_file():
            violations.append(f"missing reference file for scene {sid}: {path}")

    return violations
