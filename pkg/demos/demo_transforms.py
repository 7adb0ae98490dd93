"""Walk through the three image degradations and their default schedules.

Builds one synthetic textured scene, applies every step of each default
schedule, and prints how far each step drifts from the reference.

Run: python3 demos/demo_transforms.py
"""

import numpy as np
from scipy.ndimage import gaussian_filter

from scenebias.transforms import apply_transform, default_schedules


def make_texture(seed=0, shape=(120, 160)):
    rng = np.random.default_rng(seed)
    img = gaussian_filter(rng.uniform(0, 1, shape), sigma=2.0)
    img = (img - img.min()) / (img.max() - img.min())
    return (img * 255).round().astype(np.uint8)


def main():
    img = make_texture()
    for spec in default_schedules():
        print(f"\n{spec.kind} ({spec.num_steps} steps)")
        for step, amount in enumerate(spec.amounts, start=1):
            out = apply_transform(img, spec.kind, amount)
            mae = np.abs(out.astype(int) - img.astype(int)).mean()
            print(f"  step {step:2d}  amount {amount:5.1f}  mean abs diff {mae:6.2f}")
        # Step 1 is always the untouched reference.
        assert np.array_equal(apply_transform(img, spec.kind, spec.amounts[0]), img)


if __name__ == "__main__":
    main()
