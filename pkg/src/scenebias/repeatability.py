"""Repeatability of keypoint sets across a (reference, transformed) image
pair under a ground-truth homography."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .core import Keypoint, RepeatabilityRecord, check_homography


@dataclass(frozen=True)
class MatchParams:
    epsilon: float = 1.5
    overlap_max_error: float = 0.4
    use_overlap: bool = False

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be > 0, got {self.epsilon}")
        if not 0 < self.overlap_max_error < 1:
            raise ValueError(
                f"overlap_max_error must be in (0, 1), got {self.overlap_max_error}"
            )


def project_points(homography: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Apply a homography to an (N, 2) array of (x, y) points."""
    h = check_homography(homography)
    if len(points) == 0:
        return np.zeros((0, 2))
    pts = np.hstack([points, np.ones((len(points), 1))])
    mapped = pts @ h.T
    return mapped[:, :2] / mapped[:, 2:3]


def common_part(homography: np.ndarray, ref_dims: tuple[int, int],
                test_dims: tuple[int, int]):
    """Predicate over reference (x, y): true when the mapped position lands
    inside the test image. Dims are (width, height)."""
    h = check_homography(homography)
    tw, th = test_dims

    def predicate(x: float, y: float) -> bool:
        mapped = project_points(h, np.array([[x, y]]))[0]
        return bool(0 <= mapped[0] <= tw - 1 and 0 <= mapped[1] <= th - 1)

    return predicate


def _ellipse_matrix(kp: Keypoint) -> np.ndarray:
    if kp.region is not None:
        a, b, c = kp.region
    else:
        a = c = 1.0 / (kp.scale * kp.scale)
        b = 0.0
    return np.array([[a, b], [b, c]])


def ellipse_overlap_error(center_a, mat_a, center_b, mat_b, samples: int = 96) -> float:
    """1 - IoU of two ellipses, estimated on a regular grid over the joint
    bounding box. Deterministic; accuracy is bounded by the grid pitch."""

    def bbox(center, mat):
        inv = np.linalg.inv(mat)
        rx = float(np.sqrt(inv[0, 0]))
        ry = float(np.sqrt(inv[1, 1]))
        return (center[0] - rx, center[0] + rx, center[1] - ry, center[1] + ry)

    ax0, ax1, ay0, ay1 = bbox(center_a, mat_a)
    bx0, bx1, by0, by1 = bbox(center_b, mat_b)
    x0, x1 = min(ax0, bx0), max(ax1, bx1)
    y0, y1 = min(ay0, by0), max(ay1, by1)

    xs = np.linspace(x0, x1, samples)
    ys = np.linspace(y0, y1, samples)
    gx, gy = np.meshgrid(xs, ys)

    def inside(center, mat):
        dx = gx - center[0]
        dy = gy - center[1]
        return mat[0, 0] * dx * dx + 2 * mat[0, 1] * dx * dy + mat[1, 1] * dy * dy <= 1.0

    in_a = inside(center_a, mat_a)
    in_b = inside(center_b, mat_b)
    union = int(np.count_nonzero(in_a | in_b))
    if union == 0:
        return 1.0
    inter = int(np.count_nonzero(in_a & in_b))
    return 1.0 - inter / union


def _mapped_ellipse(kp: Keypoint, homography: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Map a keypoint's ellipse through H using the local affine approximation."""
    center = project_points(homography, np.array([[kp.x, kp.y]]))[0]
    h = np.asarray(homography, dtype=float)
    x, y = kp.x, kp.y
    w = h[2, 0] * x + h[2, 1] * y + h[2, 2]
    u = h[0, 0] * x + h[0, 1] * y + h[0, 2]
    v = h[1, 0] * x + h[1, 1] * y + h[1, 2]
    # Jacobian of (u/w, v/w) wrt (x, y).
    jac = np.array([
        [(h[0, 0] * w - u * h[2, 0]) / w ** 2, (h[0, 1] * w - u * h[2, 1]) / w ** 2],
        [(h[1, 0] * w - v * h[2, 0]) / w ** 2, (h[1, 1] * w - v * h[2, 1]) / w ** 2],
    ])
    jinv = np.linalg.inv(jac)
    mat = jinv.T @ _ellipse_matrix(kp) @ jinv
    return center, mat


def match_keypoints(ref_kps: list[Keypoint], test_kps: list[Keypoint],
                    homography: np.ndarray,
                    params: MatchParams = MatchParams()) -> list[tuple[int, int]]:
    """Greedy one-to-one matching of mapped reference points to test points.

    Candidate pairs within epsilon are taken in ascending distance order,
    ties broken on (ref index, test index); each keypoint is used once.
    Returns (ref index, test index) pairs.
    """
    if not ref_kps or not test_kps:
        return []

    ref_xy = np.array([[kp.x, kp.y] for kp in ref_kps])
    mapped = project_points(homography, ref_xy)
    test_xy = np.array([[kp.x, kp.y] for kp in test_kps])

    tree = cKDTree(test_xy)
    neighbor_lists = tree.query_ball_point(mapped, r=params.epsilon)

    candidates = []
    for i, neighbors in enumerate(neighbor_lists):
        for j in neighbors:
            dist = float(np.hypot(*(mapped[i] - test_xy[j])))
            candidates.append((dist, i, j))
    candidates.sort()

    overlap_cache: dict[int, tuple[np.ndarray, np.ndarray]] = {}

    def overlap_ok(i: int, j: int) -> bool:
        if i not in overlap_cache:
            overlap_cache[i] = _mapped_ellipse(ref_kps[i], homography)
        ca, ma = overlap_cache[i]
        cb = test_xy[j]
        mb = _ellipse_matrix(test_kps[j])
        return ellipse_overlap_error(ca, ma, cb, mb) <= params.overlap_max_error

    matches = []
    used_ref: set[int] = set()
    used_test: set[int] = set()
    for dist, i, j in candidates:
        if i in used_ref or j in used_test:
            continue
        if params.use_overlap and not overlap_ok(i, j):
            continue
        used_ref.add(i)
        used_test.add(j)
        matches.append((i, j))
    return matches


def compute_repeatability(ref_kps: list[Keypoint], test_kps: list[Keypoint],
                          homography: np.ndarray,
                          params: MatchParams = MatchParams(),
                          *,
                          scene: int = 0, detector: str = "", kind: str = "",
                          step: int = 0,
                          ref_dims: tuple[int, int] | None = None,
                          test_dims: tuple[int, int] | None = None) -> RepeatabilityRecord:
    """Repeatability rate n_rep / n_ref over the common image part.

    n_ref counts reference keypoints whose mapped position lies inside the
    test image; with no dims given every keypoint is considered common.
    A record with n_ref == 0 carries rate None (undefined), never 0.
    """
    if test_dims is not None:
        rd = ref_dims if ref_dims is not None else test_dims
        predicate = common_part(homography, rd, test_dims)
        common_idx = [i for i, kp in enumerate(ref_kps) if predicate(kp.x, kp.y)]
    else:
        common_idx = list(range(len(ref_kps)))

    common_set = [ref_kps[i] for i in common_idx]
    n_ref = len(common_set)
    if n_ref == 0:
        return RepeatabilityRecord(scene=scene, detector=detector, kind=kind,
                                   step=step, rate=None, n_ref=0, n_rep=0)

    matches = match_keypoints(common_set, test_kps, homography, params)
    n_rep = len(matches)
    return RepeatabilityRecord(scene=scene, detector=detector, kind=kind,
                               step=step, rate=n_rep / n_ref,
                               n_ref=n_ref, n_rep=n_rep)
