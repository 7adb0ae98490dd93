"""Run the three builtin detectors on a synthetic scene and compare their
repeatability as the scene is blurred.

Run: python3 demos/demo_detectors.py
"""

import numpy as np
from scipy.ndimage import gaussian_filter

from scenebias.core import identity_homography
from scenebias.detectors import detect_fast_segment, detect_harris, detect_hessian_blob
from scenebias.repeatability import compute_repeatability
from scenebias.transforms import BlurParams, apply_gaussian_blur


def make_scene(seed=7, shape=(120, 160)):
    rng = np.random.default_rng(seed)
    img = gaussian_filter(rng.uniform(0, 1, shape), sigma=2.0)
    img = ((img - img.min()) / (img.max() - img.min()) * 255).round().astype(np.uint8)
    for _ in range(4):
        y, x = rng.integers(10, shape[0] - 26), rng.integers(10, shape[1] - 26)
        img[y:y + 16, x:x + 16] = rng.choice([0, 255])
    return img


def main():
    img = make_scene()
    detectors = {
        "harris": detect_harris,
        "hessian": detect_hessian_blob,
        "fast": detect_fast_segment,
    }
    dims = (img.shape[1], img.shape[0])
    refs = {name: det(img) for name, det in detectors.items()}
    for name, kps in refs.items():
        print(f"{name}: {len(kps)} reference keypoints")

    print("\nrepeatability under increasing blur")
    print("sigma   " + "  ".join(f"{n:>7s}" for n in detectors))
    for sigma in (0.5, 1.5, 2.5, 3.5, 4.5):
        blurred = apply_gaussian_blur(img, BlurParams(sigma))
        rates = []
        for name, det in detectors.items():
            rec = compute_repeatability(refs[name], det(blurred),
                                        identity_homography(), test_dims=dims)
            rates.append("   n/a " if rec.rate is None else f"  {rec.rate:5.3f}")
        print(f"{sigma:4.1f}  " + "  ".join(rates))


if __name__ == "__main__":
    main()
