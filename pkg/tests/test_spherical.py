"""Color model tests: transform conventions, round trips, and the
Lambertian renderer checked against independent scalar evaluation."""

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, assume, settings
from hypothesis import strategies as st

from signseg import (
    EPS_BLACK,
    RgbPixel,
    SphericalColor,
    SyntheticSceneSpec,
    render_lambertian,
    rgb_to_spherical,
    spherical_to_rgb,
    transform_image,
)
from signseg.spherical import DEFAULT_WAVELENGTHS, K2_RADIATION, lambertian_channels

from conftest import random_pixels


class TestRgbToSpherical:
    def test_axis_red(self):
        s = rgb_to_spherical(RgbPixel(1, 0, 0))
        assert s == SphericalColor(1.0, 0.0, 0.0, achromatic=False)

    def test_zero_vector_convention(self):
        s = rgb_to_spherical(RgbPixel(0, 0, 0))
        assert s == SphericalColor(0.0, 0.0, 0.0, achromatic=True)

    def test_white_high_precision(self):
        # Scalar evaluation: l = sqrt(3), theta = atan2(1,1) = pi/4,
        # phi = acos(sqrt(2)/sqrt(3)).
        s = rgb_to_spherical(RgbPixel(1, 1, 1))
        assert s.l == pytest.approx(math.sqrt(3.0), abs=1e-12)
        assert s.l == pytest.approx(1.7320508, abs=1e-7)
        assert s.theta == pytest.approx(math.pi / 4, abs=1e-12)
        assert s.theta == pytest.approx(0.7853982, abs=1e-7)
        assert s.phi == pytest.approx(math.acos(math.sqrt(2.0) / math.sqrt(3.0)), abs=1e-12)
        assert s.phi == pytest.approx(0.6154797, abs=1e-7)
        assert not s.achromatic

    def test_pure_blue_convention(self):
        s = rgb_to_spherical(RgbPixel(0, 0, 1))
        assert s.theta == 0.0
        assert s.phi == pytest.approx(math.pi / 2, abs=1e-12)

    def test_homogeneity_pair(self):
        a = rgb_to_spherical(RgbPixel(0.2, 0.4, 0.6))
        b = rgb_to_spherical(RgbPixel(0.3, 0.6, 0.9))
        assert b.theta == pytest.approx(a.theta, abs=1e-12)
        assert b.phi == pytest.approx(a.phi, abs=1e-12)
        assert b.l == pytest.approx(1.5 * a.l, rel=1e-12)

    def test_achromatic_cutoff(self):
        below = rgb_to_spherical(RgbPixel(EPS_BLACK - 1e-6, 0, 0))
        above = rgb_to_spherical(RgbPixel(EPS_BLACK + 1e-6, 0, 0))
        assert below.achromatic and below.theta == below.phi == 0.0
        assert below.l == pytest.approx(EPS_BLACK - 1e-6, abs=1e-15)
        assert not above.achromatic

    def test_input_validation(self):
        with pytest.raises(ValueError):
            RgbPixel(1.2, 0, 0)
        with pytest.raises(ValueError):
            RgbPixel(-0.1, 0, 0)
        assert RgbPixel.from_8bit(255, 0, 128).g == 0.0

    @given(st.floats(0, 1), st.floats(0, 1), st.floats(0, 1))
    def test_norm_identity(self, r, g, b):
        s = rgb_to_spherical(RgbPixel(r, g, b))
        assert s.l * s.l == pytest.approx(r * r + g * g + b * b, abs=1e-12)

    @given(
        st.floats(0.02, 1), st.floats(0.02, 1), st.floats(0.02, 1),
        st.floats(0.05, 10),
    )
    def test_homogeneity_property(self, r, g, b, scale):
        assume(scale * max(r, g, b) <= 1.0)
        p = RgbPixel(r, g, b)
        q = p.scaled(scale)
        sp, sq = rgb_to_spherical(p), rgb_to_spherical(q)
        assume(not sp.achromatic and not sq.achromatic)
        assert sq.theta == pytest.approx(sp.theta, abs=1e-9)
        assert sq.phi == pytest.approx(sp.phi, abs=1e-9)

    def test_angle_ranges(self):
        for p in random_pixels(11, 500):
            s = rgb_to_spherical(p)
            if not s.achromatic:
                assert 0.0 <= s.theta <= math.pi / 2
                assert 0.0 <= s.phi <= math.pi / 2


class TestSphericalToRgb:
    def test_axis_inverse(self):
        assert spherical_to_rgb(SphericalColor(1.0, 0.0, 0.0)) == RgbPixel(1, 0, 0)

    def test_pure_blue_inverse(self):
        p = spherical_to_rgb(SphericalColor(1.0, 0.0, math.pi / 2))
        assert p.r == pytest.approx(0.0, abs=1e-12)
        assert p.g == pytest.approx(0.0, abs=1e-12)
        assert p.b == pytest.approx(1.0, abs=1e-12)

    def test_round_trip_example(self):
        p = RgbPixel(0.37, 0.21, 0.88)
        q = spherical_to_rgb(rgb_to_spherical(p))
        assert q.r == pytest.approx(p.r, abs=1e-9)
        assert q.g == pytest.approx(p.g, abs=1e-9)
        assert q.b == pytest.approx(p.b, abs=1e-9)

    def test_rejects_achromatic(self):
        with pytest.raises(ValueError):
            spherical_to_rgb(SphericalColor(0.0, 0.0, 0.0, achromatic=True))

    def test_round_trip_random(self):
        for p in random_pixels(23, 300, low=0.02):
            s = rgb_to_spherical(p)
            if s.achromatic:
                continue
            q = spherical_to_rgb(s)
            assert abs(q.r - p.r) <= 1e-9
            assert abs(q.g - p.g) <= 1e-9
            assert abs(q.b - p.b) <= 1e-9


def _blackbody_channel_oracle(spec: SyntheticSceneSpec, k: int) -> float:
    """Term-by-term evaluation with naive arithmetic, independent of the
    implementation's formula layout."""
    lam = spec.wavelengths[k]
    lam5 = lam * lam * lam * lam * lam
    planck = (1.0 / lam5) * math.exp(-spec.k2 / (spec.temperature * lam))
    return (spec.sigma * spec.intensity * spec.k1 * planck
            * spec.reflectance[k] * spec.sensitivity[k])


class TestRenderLambertian:
    def test_zero_shading(self):
        px, exposure = render_lambertian(
            SyntheticSceneSpec(sigma=0, intensity=5, temperature=4000)
        )
        assert px == RgbPixel(0, 0, 0)
        assert exposure == 1.0

    def test_depends_only_on_product(self):
        a, _ = render_lambertian(SyntheticSceneSpec(1.3, 0.6, 6500.0))
        b, _ = render_lambertian(SyntheticSceneSpec(2.6, 0.3, 6500.0))
        assert b.r == pytest.approx(a.r, abs=1e-12)
        assert b.g == pytest.approx(a.g, abs=1e-12)
        assert b.b == pytest.approx(a.b, abs=1e-12)

    def test_against_term_by_term_oracle(self):
        spec = SyntheticSceneSpec(sigma=1.0, intensity=1.0, temperature=6500.0)
        raw = [_blackbody_channel_oracle(spec, k) for k in range(3)]
        expected = tuple(c / max(raw) for c in raw)
        px, exposure = render_lambertian(spec)
        assert px.r == pytest.approx(expected[0], rel=1e-12)
        assert px.g == pytest.approx(expected[1], rel=1e-12)
        assert px.b == pytest.approx(expected[2], rel=1e-12)
        assert exposure == pytest.approx(1.0 / max(raw), rel=1e-12)

    def test_warm_light_shifts_red(self):
        cool, _ = render_lambertian(SyntheticSceneSpec(1, 1, 10000.0))
        warm, _ = render_lambertian(SyntheticSceneSpec(1, 1, 3000.0))
        assert warm.r / warm.b > cool.r / cool.b

    def test_explicit_exposure(self):
        spec = SyntheticSceneSpec(1, 1, 6500.0)
        raw = lambertian_channels(spec)
        px, exposure = render_lambertian(spec, exposure=0.5 / max(raw))
        assert max(px.r, px.g, px.b) == pytest.approx(0.5, rel=1e-12)
        assert exposure == 0.5 / max(raw)
        with pytest.raises(ValueError):
            render_lambertian(spec, exposure=2.0 / max(raw))

    def test_overflow_rejected(self):
        spec = SyntheticSceneSpec(
            1, 1, temperature=1e30, wavelengths=(3e-62, 2e-62, 1e-62)
        )
        with pytest.raises(ValueError):
            render_lambertian(spec)

    def test_spec_validation(self):
        with pytest.raises(ValueError):
            SyntheticSceneSpec(-1, 1, 6500)
        with pytest.raises(ValueError):
            SyntheticSceneSpec(1, 1, 0)
        with pytest.raises(ValueError):
            SyntheticSceneSpec(1, 1, 6500, wavelengths=(460e-9, 550e-9, 800e-9))

    def test_shading_grid_angle_invariance(self):
        # Angles of the rendered pixel cannot depend on shading or
        # intensity; the spectral terms contain neither.
        angles = set()
        for sigma in np.linspace(0.2, 2.0, 10):
            for intensity in np.linspace(0.2, 2.0, 10):
                px, _ = render_lambertian(
                    SyntheticSceneSpec(float(sigma), float(intensity), 6500.0)
                )
                s = rgb_to_spherical(px)
                angles.add((round(s.theta, 9), round(s.phi, 9)))
        assert len(angles) == 1

    def test_temperature_response_finite(self):
        previous = None
        for temp in np.linspace(2000.0, 12000.0, 101):
            px, _ = render_lambertian(SyntheticSceneSpec(1, 1, float(temp)))
            s = rgb_to_spherical(px)
            assert math.isfinite(s.theta) and math.isfinite(s.phi)
            previous = s
        cold = rgb_to_spherical(render_lambertian(SyntheticSceneSpec(1, 1, 2000.0))[0])
        assert abs(previous.theta - cold.theta) > 1e-3


class TestTransformImage:
    def test_single_pixel(self):
        si = transform_image(np.array([[[1.0, 0.0, 0.0]]]))
        assert si.shape == (1, 1)
        assert si.l[0, 0] == 1.0
        assert si.theta[0, 0] == 0.0
        assert si.phi[0, 0] == 0.0
        assert not si.achromatic[0, 0]

    def test_uniform_image(self):
        img = np.full((4, 4, 3), 0.5)
        si = transform_image(img)
        assert np.all(si.theta == si.theta[0, 0])
        assert np.all(si.phi == si.phi[0, 0])
        assert np.all(si.l == si.l[0, 0])

    def test_matches_pixel_loop(self):
        rng = np.random.default_rng(7)
        img = rng.uniform(0, 1, (32, 32, 3))
        img[0, :4] = 0.0  # force some achromatic pixels
        si = transform_image(img)
        for y in range(32):
            for x in range(32):
                s = rgb_to_spherical(RgbPixel(*img[y, x]))
                assert abs(s.l - si.l[y, x]) <= 1e-12
                assert abs(s.theta - si.theta[y, x]) <= 1e-12
                assert abs(s.phi - si.phi[y, x]) <= 1e-12
                assert s.achromatic == bool(si.achromatic[y, x])

    def test_rejects_empty_or_misshapen(self):
        with pytest.raises(ValueError):
            transform_image(np.zeros((0, 4, 3)))
        with pytest.raises(ValueError):
            transform_image(np.zeros((4, 4)))
