"""Shared synthetic fixtures: textured scenes with planted corners and blobs
so every built-in detector has something to find."""

import json

import numpy as np
import pytest
from scipy.ndimage import gaussian_filter

from scenebias.core import SceneLabels
from scenebias.transforms import save_image

SCENE_SHAPE = (80, 100)


def natural_texture(seed, shape=SCENE_SHAPE):
    """Band-limited noise stretched to full contrast; no flat regions."""
    rng = np.random.default_rng(seed)
    img = gaussian_filter(rng.uniform(0, 255, shape), 1.5)
    img = (img - img.min()) / np.ptp(img) * 255
    return np.clip(np.rint(img), 0, 255).astype(np.uint8)


def make_scene(seed, shape=SCENE_SHAPE):
    """Texture plus a few high-contrast squares and discs."""
    rng = np.random.default_rng(seed)
    img = natural_texture(seed, shape).astype(float)
    for _ in range(3):
        y = int(rng.integers(5, shape[0] - 20))
        x = int(rng.integers(5, shape[1] - 20))
        img[y:y + 14, x:x + 14] = float(rng.choice([0, 255]))
    yy, xx = np.mgrid[:shape[0], :shape[1]]
    for _ in range(2):
        cy = int(rng.integers(12, shape[0] - 12))
        cx = int(rng.integers(12, shape[1] - 12))
        img[(yy - cy) ** 2 + (xx - cx) ** 2 <= 36] = float(rng.choice([0, 255]))
    return np.clip(np.rint(img), 0, 255).astype(np.uint8)


def desk_labels(n=12):
    """Deterministic label assignment roughly balancing each attribute."""
    return {
        i: SceneLabels(outdoor=i % 2, human_made=(i // 2) % 2, simple=(i // 4) % 2)
        for i in range(1, n + 1)
    }


def write_scene_dir(path, n=12, shape=SCENE_SHAPE):
    """Materialize n scenes plus a labels.json keyed by file name."""
    path.mkdir(parents=True, exist_ok=True)
    labels = desk_labels(n)
    label_json = {}
    for i in range(1, n + 1):
        name = f"scene_{i:02d}.png"
        save_image(path / name, make_scene(seed=100 + i, shape=shape))
        lab = labels[i]
        label_json[name] = {"f": lab.outdoor, "g": lab.human_made, "h": lab.simple}
    (path / "labels.json").write_text(json.dumps(label_json, indent=1))
    return path


@pytest.fixture(scope="session")
def scene_dir(tmp_path_factory):
    return write_scene_dir(tmp_path_factory.mktemp("scenes"), n=12)


@pytest.fixture(scope="session")
def desk_scene_images(scene_dir):
    labels = desk_labels(12)
    return [
        (i, scene_dir / f"scene_{i:02d}.png", labels[i])
        for i in range(1, 13)
    ]
