"""Built-in keypoint detectors (corner, blob, segment-test) and the text
interchange format for external detector output."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.ndimage import gaussian_filter, maximum_filter

from .core import LUMA_WEIGHTS, Keypoint

MIN_IMAGE_SIDE = 7


class KeypointFormatError(ValueError):
    """Raised for malformed keypoint interchange files."""


@dataclass(frozen=True)
class DetectorConfig:
    """One detector instance; parameters stay fixed across a whole run."""

    id: str
    kind: str  # harris-corner | hessian-blob | fast-segment | external
    parameters: dict = field(default_factory=dict)
    external_dir: str | None = None

    def __post_init__(self):
        if self.kind not in ("harris-corner", "hessian-blob", "fast-segment", "external"):
            raise ValueError(f"unknown detector kind {self.kind!r}")
        if self.kind == "external" and not self.external_dir:
            raise ValueError("external detector requires a keypoint-file directory")


def to_luminance(image: np.ndarray) -> np.ndarray:
    """Collapse an RGB image to the standard luminance channel."""
    if image.ndim == 2:
        return image.astype(float)
    w = np.array(LUMA_WEIGHTS)
    return image[..., :3].astype(float) @ w


def _too_small(image: np.ndarray, detector: str) -> bool:
    if min(image.shape[:2]) < MIN_IMAGE_SIDE:
        warnings.warn(f"{detector}: image smaller than {MIN_IMAGE_SIDE}x{MIN_IMAGE_SIDE}, "
                      "returning no keypoints")
        return True
    return False


def _quadratic_refine_2d(resp: np.ndarray, y: int, x: int) -> tuple[float, float]:
    """Sub-pixel offset of a 3x3 quadratic fit around a response maximum."""
    h, w = resp.shape
    if not (1 <= y < h - 1 and 1 <= x < w - 1):
        return float(x), float(y)
    dx = 0.5 * (resp[y, x + 1] - resp[y, x - 1])
    dy = 0.5 * (resp[y + 1, x] - resp[y - 1, x])
    dxx = resp[y, x + 1] - 2 * resp[y, x] + resp[y, x - 1]
    dyy = resp[y + 1, x] - 2 * resp[y, x] + resp[y - 1, x]
    ox = -dx / dxx if dxx < 0 else 0.0
    oy = -dy / dyy if dyy < 0 else 0.0
    # A maximum's refined position stays within its own pixel cell.
    ox = float(np.clip(ox, -0.5, 0.5))
    oy = float(np.clip(oy, -0.5, 0.5))
    return x + ox, y + oy


def _local_maxima_2d(resp: np.ndarray, threshold: float) -> list[tuple[int, int]]:
    """3x3 non-maximum suppression; returns (y, x) of surviving maxima."""
    peak = maximum_filter(resp, size=3, mode="constant", cval=-np.inf)
    ys, xs = np.nonzero((resp >= peak) & (resp > threshold))
    return list(zip(ys.tolist(), xs.tolist()))


def detect_harris(image: np.ndarray, config: DetectorConfig | None = None) -> list[Keypoint]:
    """Harris corners: k=0.04, integration sigma 2.0, 3x3 NMS, sub-pixel refined."""
    params = config.parameters if config else {}
    k = params.get("k", 0.04)
    sigma_i = params.get("sigma", 2.0)
    rel_threshold = params.get("rel_threshold", 0.005)

    gray = to_luminance(image)
    if _too_small(gray, "harris"):
        return []
    if np.ptp(gray) == 0:
        return []

    gy, gx = np.gradient(gray)
    sxx = gaussian_filter(gx * gx, sigma_i, mode="reflect")
    syy = gaussian_filter(gy * gy, sigma_i, mode="reflect")
    sxy = gaussian_filter(gx * gy, sigma_i, mode="reflect")
    resp = (sxx * syy - sxy * sxy) - k * (sxx + syy) ** 2

    # Absolute floor rejects the numerical noise a flat image produces.
    max_resp = float(resp.max(initial=0.0))
    if max_resp <= 1e-6:
        return []
    threshold = rel_threshold * max_resp

    kps = []
    for y, x in _local_maxima_2d(resp, threshold):
        rx, ry = _quadratic_refine_2d(resp, y, x)
        kps.append(Keypoint(x=rx, y=ry, scale=sigma_i))
    kps.sort(key=lambda p: (p.y, p.x))
    return kps


HESSIAN_SIGMAS = tuple(1.2 * 1.4 ** i for i in range(9))


def detect_hessian_blob(image: np.ndarray, config: DetectorConfig | None = None) -> list[Keypoint]:
    """Scale-space blobs: 3-D maxima of the scale-normalized Hessian determinant."""
    params = config.parameters if config else {}
    sigmas = params.get("sigmas", HESSIAN_SIGMAS)
    rel_threshold = params.get("rel_threshold", 0.01)

    gray = to_luminance(image)
    if _too_small(gray, "hessian-blob"):
        return []
    if np.ptp(gray) == 0:
        # Flat image: derivative kernels are not exactly zero-sum, so the
        # response would be pure numerical noise.
        return []

    stack = np.empty((len(sigmas),) + gray.shape)
    for i, s in enumerate(sigmas):
        lxx = gaussian_filter(gray, s, order=(0, 2), mode="reflect")
        lyy = gaussian_filter(gray, s, order=(2, 0), mode="reflect")
        lxy = gaussian_filter(gray, s, order=(1, 1), mode="reflect")
        stack[i] = (s ** 4) * (lxx * lyy - lxy * lxy)

    # Absolute floor rejects the numerical noise a flat image produces.
    max_resp = float(stack.max(initial=0.0))
    if max_resp <= 1e-6:
        return []
    threshold = rel_threshold * max_resp

    peak = maximum_filter(stack, size=3, mode="constant", cval=-np.inf)
    si, ys, xs = np.nonzero((stack >= peak) & (stack > threshold))

    kps = []
    for i, y, x in zip(si.tolist(), ys.tolist(), xs.tolist()):
        rx, ry = _quadratic_refine_2d(stack[i], y, x)
        kps.append(Keypoint(x=rx, y=ry, scale=float(sigmas[i])))
    kps.sort(key=lambda p: (p.y, p.x, p.scale))
    return kps


# Offsets of the 16-pixel Bresenham circle of radius 3, clockwise from 12 o'clock.
FAST_CIRCLE = (
    (0, -3), (1, -3), (2, -2), (3, -1), (3, 0), (3, 1), (2, 2), (1, 3),
    (0, 3), (-1, 3), (-2, 2), (-3, 1), (-3, 0), (-3, -1), (-2, -2), (-1, -3),
)


def detect_fast_segment(image: np.ndarray, config: DetectorConfig | None = None) -> list[Keypoint]:
    """Segment-test corners: arc of >= 9 contiguous circle pixels all brighter
    or all darker than the center by t; NMS on the corner score."""
    params = config.parameters if config else {}
    t = params.get("threshold", 20)
    arc = params.get("arc_length", 9)

    gray = to_luminance(image)
    if _too_small(gray, "fast-segment"):
        return []

    h, w = gray.shape
    center = gray[3:h - 3, 3:w - 3]
    diffs = np.empty((16,) + center.shape)
    for i, (dx, dy) in enumerate(FAST_CIRCLE):
        diffs[i] = gray[3 + dy:h - 3 + dy, 3 + dx:w - 3 + dx] - center

    brighter = diffs > t
    darker = diffs < -t

    def has_arc(mask: np.ndarray) -> np.ndarray:
        # Contiguity on a circle: wrap the 16 flags and AND over each window.
        wrapped = np.concatenate([mask, mask[: arc - 1]], axis=0)
        ok = np.zeros(mask.shape[1:], dtype=bool)
        for start in range(16):
            ok |= wrapped[start:start + arc].all(axis=0)
        return ok

    is_corner = has_arc(brighter) | has_arc(darker)
    if not is_corner.any():
        return []

    # Symmetric corner score: total excess contrast beyond t on either side.
    score_b = np.where(brighter, diffs - t, 0.0).sum(axis=0)
    score_d = np.where(darker, -diffs - t, 0.0).sum(axis=0)
    score = np.where(is_corner, np.maximum(score_b, score_d), 0.0)

    full = np.zeros_like(gray)
    full[3:h - 3, 3:w - 3] = score

    kps = []
    for y, x in _local_maxima_2d(full, 0.0):
        rx, ry = _quadratic_refine_2d(full, y, x)
        kps.append(Keypoint(x=rx, y=ry, scale=1.0))
    kps.sort(key=lambda p: (p.y, p.x))
    return kps


def parse_keypoint_file(text: str) -> list[Keypoint]:
    """Parse the affine-region interchange format.

    Line 1: format version ("1.0"); line 2: point count N; then N lines of
    "x y a b c" where (a, b, c) are the ellipse coefficients. Scale is
    recovered as (a*c - b^2)^(-1/4).
    """
    lines = text.splitlines()
    if len(lines) < 2:
        raise KeypointFormatError("file too short: need version and count lines")
    try:
        count = int(float(lines[1].strip()))
    except ValueError as exc:
        raise KeypointFormatError(f"line 2: invalid point count {lines[1]!r}") from exc
    if count < 0:
        raise KeypointFormatError(f"line 2: negative point count {count}")

    data_lines = [ln for ln in lines[2:] if ln.strip()]
    if len(data_lines) != count:
        raise KeypointFormatError(
            f"point count {count} does not match {len(data_lines)} data lines"
        )

    kps = []
    for lineno, line in enumerate(data_lines, start=3):
        fields = line.split()
        if len(fields) != 5:
            raise KeypointFormatError(f"line {lineno}: expected 5 fields, got {len(fields)}")
        try:
            x, y, a, b, c = (float(f) for f in fields)
        except ValueError as exc:
            raise KeypointFormatError(f"line {lineno}: non-numeric field") from exc
        det = a * c - b * b
        if not (a > 0 and c > 0 and det > 0):
            raise KeypointFormatError(
                f"line {lineno}: ellipse ({a}, {b}, {c}) is not positive-definite"
            )
        kps.append(Keypoint(x=x, y=y, scale=det ** -0.25, region=(a, b, c)))
    return kps


def format_keypoint_file(kps: list[Keypoint]) -> str:
    """Serialize keypoints into the interchange format (inverse of parse)."""
    lines = ["1.0", str(len(kps))]
    for kp in kps:
        if kp.region is not None:
            a, b, c = kp.region
        else:
            inv = 1.0 / (kp.scale * kp.scale)
            a, b, c = inv, 0.0, inv
        lines.append(f"{kp.x:.6f} {kp.y:.6f} {a:.10g} {b:.10g} {c:.10g}")
    return "\n".join(lines) + "\n"


def load_keypoint_file(path: str | Path) -> list[Keypoint]:
    return parse_keypoint_file(Path(path).read_text())


def run_detector(image: np.ndarray, config: DetectorConfig,
                 image_rel_path: str | None = None) -> list[Keypoint]:
    """Dispatch one detection job; external detectors read pre-computed files."""
    if config.kind == "harris-corner":
        return detect_harris(image, config)
    if config.kind == "hessian-blob":
        return detect_hessian_blob(image, config)
    if config.kind == "fast-segment":
        return detect_fast_segment(image, config)
    if config.kind == "external":
        if image_rel_path is None:
            raise ValueError("external detector needs the image path to locate its file")
        kp_path = Path(config.external_dir) / (Path(image_rel_path).as_posix() + ".kp")
        if not kp_path.is_file():
            raise FileNotFoundError(
                f"missing external detector output for image {image_rel_path}: {kp_path}"
            )
        return load_keypoint_file(kp_path)
    raise ValueError(f"unknown detector kind {config.kind!r}")
