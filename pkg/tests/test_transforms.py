import math

import numpy as np
import pytest

from scenebias.transforms import (
    BlurParams,
    JpegParams,
    LightParams,
    TransformParamError,
    apply_gaussian_blur,
    apply_jpeg_roundtrip,
    apply_light_reduction,
    build_schedule,
    default_schedules,
    gaussian_kernel_1d,
    generate_database,
    load_schedule_config,
)

from conftest import natural_texture


class TestGaussianBlur:
    def test_sigma_zero_is_identity(self):
        img = natural_texture(3)
        out = apply_gaussian_blur(img, BlurParams(0.0))
        assert np.array_equal(out, img)
        assert out is not img

    def test_constant_stays_constant(self):
        img = np.full((40, 40), 117, dtype=np.uint8)
        out = apply_gaussian_blur(img, BlurParams(2.0))
        assert np.all(out == 117)

    def test_impulse_matches_direct_convolution_oracle(self):
        # Independent oracle: explicit 2-D kernel applied by hand.
        img = np.zeros((33, 33), dtype=np.uint8)
        img[16, 16] = 255
        sigma = 1.0
        radius = math.ceil(3 * sigma)
        xs = np.arange(-radius, radius + 1)
        k1 = np.exp(-(xs ** 2) / (2 * sigma ** 2))
        k1 /= k1.sum()
        k2d = np.outer(k1, k1)
        expected_center = int(np.clip(np.rint(255 * k2d[radius, radius]), 0, 255))

        out = apply_gaussian_blur(img, BlurParams(sigma))
        assert out[16, 16] == expected_center

        # Full-patch agreement with the oracle, away from borders.
        oracle = np.zeros((33, 33))
        oracle[16 - radius:16 + radius + 1, 16 - radius:16 + radius + 1] = 255 * k2d
        oracle = np.clip(np.rint(oracle), 0, 255).astype(np.uint8)
        assert np.array_equal(out, oracle)

    def test_kernel_radius_is_ceil_3_sigma(self):
        assert len(gaussian_kernel_1d(1.1)) == 2 * 4 + 1
        assert len(gaussian_kernel_1d(1.0)) == 2 * 3 + 1

    def test_nonfinite_sigma_rejected(self):
        with pytest.raises(TransformParamError):
            BlurParams(float("nan"))


class TestJpegRoundtrip:
    def test_rate_zero_is_identity(self):
        img = natural_texture(4)
        out = apply_jpeg_roundtrip(img, JpegParams(0))
        assert np.array_equal(out, img)

    def test_high_rate_degrades_more_than_low(self):
        img = natural_texture(5)
        err60 = np.abs(apply_jpeg_roundtrip(img, JpegParams(60)).astype(int) - img).mean()
        err98 = np.abs(apply_jpeg_roundtrip(img, JpegParams(98)).astype(int) - img).mean()
        assert err98 > err60

    def test_constant_gray_survives(self):
        img = np.full((48, 48), 90, dtype=np.uint8)
        for rate in (10, 30, 50):
            out = apply_jpeg_roundtrip(img, JpegParams(rate))
            assert np.abs(out.astype(int) - 90).max() <= 1
        # Extreme rates can shift the flat level (DC quantization), but the
        # output stays perfectly flat.
        for rate in (90, 96, 98):
            assert apply_jpeg_roundtrip(img, JpegParams(rate)).std() == 0

    @pytest.mark.parametrize("rate", [-1, 99, float("inf")])
    def test_rate_out_of_range(self, rate):
        with pytest.raises(TransformParamError):
            JpegParams(rate)


class TestLightReduction:
    def test_reduction_zero_is_identity(self):
        img = natural_texture(6)
        assert np.array_equal(apply_light_reduction(img, LightParams(0)), img)

    def test_scalar_value(self):
        img = np.full((8, 8), 200, dtype=np.uint8)
        out = apply_light_reduction(img, LightParams(60))
        assert np.all(out == 80)

    def test_black_fixed_point(self):
        img = np.zeros((8, 8), dtype=np.uint8)
        assert np.array_equal(apply_light_reduction(img, LightParams(90)), img)

    @pytest.mark.parametrize("reduction", [-5, 91])
    def test_out_of_range(self, reduction):
        with pytest.raises(TransformParamError):
            LightParams(reduction)


class TestSchedules:
    def test_blur_schedule(self):
        spec = build_schedule("gaussian-blur")
        assert spec.num_steps == 10
        assert spec.amounts[0] == 0
        assert spec.amounts[-1] == 4.5

    def test_jpeg_schedule(self):
        spec = build_schedule("jpeg-compression")
        assert spec.num_steps == 14
        assert spec.amounts[0] == 0
        assert spec.amounts[-1] == 98

    def test_light_schedule(self):
        spec = build_schedule("light-reduction")
        assert spec.num_steps == 14
        assert spec.amounts[0] == 0
        assert spec.amounts[-1] == 90

    def test_schedule_lengths_match_database_arithmetic(self):
        lengths = sorted(s.num_steps for s in default_schedules())
        assert lengths == [10, 14, 14]
        assert 539 * 10 == 5390
        assert 539 * 14 == 7546

    def test_config_override(self, tmp_path):
        cfg = tmp_path / "schedules.json"
        cfg.write_text('{"gaussian-blur": [0, 1.0, 2.0]}')
        specs = load_schedule_config(cfg)
        assert len(specs) == 1
        assert specs[0].amounts == (0.0, 1.0, 2.0)


class TestGenerateDatabase:
    def test_counts_single_schedule(self, tmp_path, desk_scene_images):
        spec = build_schedule("gaussian-blur")
        manifest = generate_database(desk_scene_images[:1], [spec], tmp_path / "db")
        assert len(manifest.images) == 10

    def test_determinism(self, tmp_path, desk_scene_images):
        spec = build_schedule("gaussian-blur", [0, 1.5])
        m1 = generate_database(desk_scene_images[:2], [spec], tmp_path / "a")
        m2 = generate_database(desk_scene_images[:2], [spec], tmp_path / "b")
        for e1, e2 in zip(m1.images, m2.images):
            b1 = m1.image_path(e1).read_bytes()
            b2 = m2.image_path(e2).read_bytes()
            assert b1 == b2

    def test_step_one_is_reference_copy(self, tmp_path, desk_scene_images):
        from scenebias.transforms import load_image
        specs = default_schedules()
        manifest = generate_database(desk_scene_images[:1], specs, tmp_path / "db")
        ref = load_image(desk_scene_images[0][1])
        for entry in manifest.images:
            if entry.step == 1:
                assert np.array_equal(load_image(manifest.image_path(entry)), ref)


def test_monotonic_degradation_property():
    # Mean absolute error vs reference never decreases along the schedule.
    for seed in range(3):
        img = natural_texture(40 + seed)
        for kind, params_cls, apply_fn in (
            ("gaussian-blur", BlurParams, apply_gaussian_blur),
            ("light-reduction", LightParams, apply_light_reduction),
        ):
            spec = build_schedule(kind)
            maes = [
                np.abs(apply_fn(img, params_cls(a)).astype(int) - img).mean()
                for a in spec.amounts
            ]
            assert all(b >= a for a, b in zip(maes, maes[1:])), (kind, maes)
