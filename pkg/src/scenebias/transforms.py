"""Image transformations (blur, JPEG round-trip, light reduction) and
database generation over scheduled amounts."""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image
from scipy.ndimage import correlate1d

from .core import (
    TRANSFORM_KINDS,
    DatasetManifest,
    ImageEntry,
    SceneLabels,
    TransformSpec,
    validate_manifest,
)

# Default schedules. Blur sigmas come straight from the 0..4.5 sweep in 10
# steps; JPEG and light interior values live here (and in optional schedule
# config files) because only their endpoints and a handful of interior points
# are pinned down.
DEFAULT_SCHEDULES = {
    "gaussian-blur": tuple(i * 0.5 for i in range(10)),
    "jpeg-compression": (0, 10, 20, 30, 40, 50, 60, 70, 80, 90, 92, 95, 96, 98),
    "light-reduction": (0, 10, 20, 30, 40, 50, 55, 60, 65, 70, 75, 80, 85, 90),
}


class TransformParamError(ValueError):
    """Raised for out-of-range transformation parameters."""


@dataclass(frozen=True)
class BlurParams:
    sigma: float

    def __post_init__(self):
        if not (math.isfinite(self.sigma) and self.sigma >= 0):
            raise TransformParamError(f"sigma must be finite and >= 0, got {self.sigma}")


@dataclass(frozen=True)
class JpegParams:
    compression_rate: float

    def __post_init__(self):
        if not (math.isfinite(self.compression_rate) and 0 <= self.compression_rate <= 98):
            raise TransformParamError(
                f"compression rate must be in [0, 98], got {self.compression_rate}"
            )


@dataclass(frozen=True)
class LightParams:
    reduction: float

    def __post_init__(self):
        if not (math.isfinite(self.reduction) and 0 <= self.reduction <= 90):
            raise TransformParamError(
                f"light reduction must be in [0, 90], got {self.reduction}"
            )


def gaussian_kernel_1d(sigma: float) -> np.ndarray:
    """Normalized 1-D Gaussian sampled on [-r, r] with r = ceil(3*sigma)."""
    radius = math.ceil(3.0 * sigma)
    xs = np.arange(-radius, radius + 1, dtype=float)
    k = np.exp(-(xs ** 2) / (2.0 * sigma ** 2))
    return k / k.sum()


def apply_gaussian_blur(image: np.ndarray, params: BlurParams) -> np.ndarray:
    """Separable Gaussian blur with reflect borders; sigma 0 is an exact copy."""
    if params.sigma == 0:
        return image.copy()
    kernel = gaussian_kernel_1d(params.sigma)
    out = image.astype(float)
    # Per-channel for color inputs; axis order does not matter (separable).
    out = correlate1d(out, kernel, axis=0, mode="reflect")
    out = correlate1d(out, kernel, axis=1, mode="reflect")
    if np.issubdtype(image.dtype, np.integer):
        out = np.clip(np.rint(out), 0, 255).astype(image.dtype)
    return out


def apply_jpeg_roundtrip(image: np.ndarray, params: JpegParams) -> np.ndarray:
    """Encode at quality 100 - rate and decode back; rate 0 is an exact copy."""
    if params.compression_rate == 0:
        return image.copy()
    quality = int(round(100 - params.compression_rate))
    pil = Image.fromarray(np.ascontiguousarray(image.astype(np.uint8)))
    buf = io.BytesIO()
    pil.save(buf, format="JPEG", quality=quality, subsampling=0)
    buf.seek(0)
    decoded = Image.open(buf)
    if image.ndim == 2:
        decoded = decoded.convert("L")
    else:
        decoded = decoded.convert("RGB")
    return np.asarray(decoded)


def apply_light_reduction(image: np.ndarray, params: LightParams) -> np.ndarray:
    """Scale every channel by 1 - reduction/100 and round; reduction 0 copies."""
    if params.reduction == 0:
        return image.copy()
    factor = 1.0 - params.reduction / 100.0
    out = np.rint(image.astype(float) * factor)
    return np.clip(out, 0, 255).astype(np.uint8)


def apply_transform(image: np.ndarray, kind: str, amount: float) -> np.ndarray:
    if kind == "gaussian-blur":
        return apply_gaussian_blur(image, BlurParams(amount))
    if kind == "jpeg-compression":
        return apply_jpeg_roundtrip(image, JpegParams(amount))
    if kind == "light-reduction":
        return apply_light_reduction(image, LightParams(amount))
    raise TransformParamError(f"unknown transform kind {kind!r}")


def build_schedule(kind: str, amounts=None) -> TransformSpec:
    """Schedule for one transform kind; amounts override the default sweep."""
    if kind not in TRANSFORM_KINDS:
        raise TransformParamError(f"unknown transform kind {kind!r}")
    if amounts is None:
        amounts = DEFAULT_SCHEDULES[kind]
    return TransformSpec(kind, tuple(float(a) for a in amounts))


def load_schedule_config(path: str | Path) -> list[TransformSpec]:
    """Read a JSON schedule config {kind: [amounts...]} into specs."""
    data = json.loads(Path(path).read_text())
    return [build_schedule(kind, amounts) for kind, amounts in data.items()]


def default_schedules() -> list[TransformSpec]:
    return [build_schedule(kind) for kind in TRANSFORM_KINDS]


def load_image(path: str | Path) -> np.ndarray:
    img = Image.open(path)
    if img.mode not in ("L", "RGB"):
        img = img.convert("RGB")
    return np.asarray(img)


def save_image(path: str | Path, image: np.ndarray) -> None:
    Image.fromarray(np.asarray(image, dtype=np.uint8)).save(path)


def save_jpeg(path: str | Path, image: np.ndarray, quality: int) -> None:
    Image.fromarray(np.asarray(image, dtype=np.uint8)).save(
        path, format="JPEG", quality=quality, subsampling=0
    )


def generate_database(
    scene_images: list[tuple[int, str | Path, SceneLabels]],
    specs: list[TransformSpec],
    output_dir: str | Path,
) -> DatasetManifest:
    """Materialize one dataset per (scene, spec) under output_dir.

    Step 1 of every dataset is a lossless copy of the reference. Blur and
    light steps are written as PNG; transformed JPEG steps carry the actual
    compression so the stored file *is* the transformed image.
    """
    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    manifest = DatasetManifest(specs=list(specs), root=output_dir)
    identity = (1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0)

    written: list[Path] = []
    try:
        for scene_id, src_path, labels in scene_images:
            image = load_image(src_path)
            scene_dir = output_dir / f"scene{scene_id:04d}"
            scene_dir.mkdir(exist_ok=True)
            ref_rel = f"scene{scene_id:04d}/reference.png"
            save_image(output_dir / ref_rel, image)
            written.append(output_dir / ref_rel)
            manifest.scenes[scene_id] = (ref_rel, labels)

            for spec in specs:
                for step, amount in enumerate(spec.amounts, start=1):
                    if spec.kind == "jpeg-compression" and step > 1:
                        rel = f"scene{scene_id:04d}/{spec.kind}_{step:02d}.jpg"
                        quality = int(round(100 - amount))
                        save_jpeg(output_dir / rel, image, quality)
                    else:
                        rel = f"scene{scene_id:04d}/{spec.kind}_{step:02d}.png"
                        out = apply_transform(image, spec.kind, amount)
                        save_image(output_dir / rel, out)
                    written.append(output_dir / rel)
                    manifest.images.append(
                        ImageEntry(
                            scene=scene_id,
                            kind=spec.kind,
                            step=step,
                            amount=amount,
                            path=rel,
                            homography=identity,
                        )
                    )
    except OSError as exc:
        raise OSError(
            f"database generation aborted after {len(written)} files: {exc}"
        ) from exc

    manifest.save(output_dir / "manifest.json")
    violations = validate_manifest(manifest)
    if violations:
        raise RuntimeError(f"generated manifest failed validation: {violations[:5]}")
    return manifest
