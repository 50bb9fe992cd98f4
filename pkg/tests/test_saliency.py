import io
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from PIL import Image

from gazesal.saliency import (
    DegenerateMapError,
    KernelConfig,
    SaliencyMap,
    center_bias,
    downsample,
    load_map,
    map_from_bytes,
    map_to_bytes,
    normalize_map,
    png_bytes,
    render_heatmap,
    save_map,
)


def _render_oracle(points, W, H, sigma, radius=3.0):
    out = [[0.0] * W for _ in range(H)]
    for gx, gy in points:
        px, py = gx * W / 1000, gy * H / 1000
        for r in range(H):
            for c in range(W):
                d2 = (c - px) ** 2 + (r - py) ** 2
                if d2 <= (radius * sigma) ** 2:
                    out[r][c] += math.exp(-d2 / (2 * sigma * sigma))
    return np.array(out)


def test_single_point_peaks_at_centre():
    m = render_heatmap([[500, 500]], 448, 448)
    assert np.unravel_index(np.argmax(m.values), m.shape) == (224, 224)
    assert m.values.max() == pytest.approx(1.0)


def test_empty_points_zero_map():
    m = render_heatmap(np.zeros((0, 2)), 30, 20)
    assert m.shape == (20, 30) and not m.values.any()


def test_matches_pixel_loop_oracle():
    pts = [[0, 0], [130, 870], [512.5, 333.3], [1000, 1000]]
    got = render_heatmap(pts, 37, 23, KernelConfig(sigma=3.1)).values
    np.testing.assert_allclose(got, _render_oracle(pts, 37, 23, 3.1), rtol=0, atol=1e-12)


def test_mirror_symmetry():
    # pixel centres sit at 0..W-1, so the centreline is x = (W - 1) / 2 = 49.5 px
    W, H = 100, 61
    m = render_heatmap([[200, 300], [790, 300]], W, H).values  # 20 px and 79 px
    np.testing.assert_allclose(m, m[:, ::-1], atol=1e-9)


_pts = st.lists(st.tuples(st.floats(0, 1000), st.floats(0, 1000)), min_size=1, max_size=8)


@given(_pts, _pts)
def test_rendering_is_additive(a, b):
    cfg = KernelConfig(sigma=4.0)
    ab = render_heatmap(a + b, 60, 40, cfg).values
    np.testing.assert_allclose(ab, render_heatmap(a, 60, 40, cfg).values + render_heatmap(b, 60, 40, cfg).values, atol=1e-12)


@given(st.integers(-10, 10), st.integers(-10, 10))
def test_translation_equivariance(dx, dy):
    W = H = 100  # grid unit = 0.1 px, so 10 grid units = 1 px
    cfg = KernelConfig(sigma=3.0)
    base = render_heatmap([[500, 500]], W, H, cfg).values
    moved = render_heatmap([[500 + 10 * dx, 500 + 10 * dy]], W, H, cfg).values
    np.testing.assert_allclose(np.roll(base, (dy, dx), axis=(0, 1)), moved, atol=1e-12)


def test_interior_mass_is_constant():
    cfg = KernelConfig(sigma=3.0)
    masses = [render_heatmap([[x, y]], 200, 200, cfg).values.sum() for x, y in ((300, 300), (500, 620), (700, 410))]
    assert max(masses) - min(masses) < 1e-9
    two = render_heatmap([[300, 300], [700, 700]], 200, 200, cfg).values.sum()
    assert two == pytest.approx(2 * masses[0], abs=1e-9)


def test_default_sigma_scales_with_width():
    assert KernelConfig().sigma_for(960) == pytest.approx(38.4)
    with pytest.raises(ValueError):
        KernelConfig(sigma=0)


def test_normalize_examples():
    np.testing.assert_allclose(normalize_map(np.ones((2, 2))).values, 0.25)
    already = np.array([[0.1, 0.2], [0.3, 0.4]])
    np.testing.assert_allclose(normalize_map(already).values, already, atol=1e-12)
    rnd = np.random.default_rng(0).uniform(0.01, 5, (3, 3))
    assert normalize_map(rnd).values.sum() == pytest.approx(1.0, abs=1e-12)


def test_normalize_degenerate_and_negative():
    with pytest.raises(DegenerateMapError, match="degenerate map"):
        normalize_map(np.zeros((3, 3)))
    with pytest.raises(ValueError):
        normalize_map(np.array([[1.0, -1.0]]))


def test_binary_round_trip(tmp_path):
    m = render_heatmap([[100, 900], [620, 40]], 31, 17)
    blob = map_to_bytes(m)
    assert blob[:8] == b"GZSALMAP" and len(blob) == 16 + 8 * 31 * 17
    assert int.from_bytes(blob[8:12], "little") == 31 and int.from_bytes(blob[12:16], "little") == 17
    np.testing.assert_array_equal(map_from_bytes(blob).values, m.values)
    save_map(tmp_path / "m.salmap", m)
    np.testing.assert_array_equal(load_map(tmp_path / "m.salmap").values, m.values)
    with pytest.raises(ValueError):
        map_from_bytes(blob[:-8])
    with pytest.raises(ValueError):
        map_from_bytes(b"NOTAMAP!" + blob[8:])


def test_png_export_gray_and_colour():
    m = render_heatmap([[500, 500]], 40, 30)
    gray = Image.open(io.BytesIO(png_bytes(m)))
    assert gray.mode == "L" and gray.size == (40, 30)
    assert np.asarray(gray).max() == 255
    rgb = Image.open(io.BytesIO(png_bytes(m, cmap="viridis")))
    assert rgb.mode == "RGB"
    assert png_bytes(m, cmap="viridis") == png_bytes(m, cmap="viridis")


def test_downsample_preserves_mass():
    m = render_heatmap([[300, 600]], 40, 30)
    d = downsample(m, 4)
    assert d.shape == (7, 10)
    assert d.values.sum() == pytest.approx(m.values[:28, :40].sum())
    assert downsample(m, 1) is m


def test_center_bias_peaks_in_middle():
    cb = center_bias(41, 21)
    assert np.unravel_index(np.argmax(cb.values), cb.shape) == (10, 20)
    np.testing.assert_allclose(cb.values, cb.values[::-1, ::-1])
