import numpy as np
import pytest

from ortholearn import colorspaces as cs
from ortholearn.errors import InvalidColorspace
from ortholearn.projection import ColorImage


def test_yuv_matrix_pinned_verbatim():
    expected = [[0.299, 0.587, 0.114],
                [-0.168, -0.331, 0.500],
                [0.500, -0.418, -0.0813]]
    assert cs.YUV_MATRIX.tolist() == expected
    assert cs.YUV_OFFSET.tolist() == [0.0, 128.0, 128.0]


def test_yuv_black_maps_to_chroma_offset():
    assert cs.rgb_to_yuv([0.0, 0.0, 0.0]).tolist() == [0.0, 128.0, 128.0]


def test_hsv_pure_red():
    h, s, v = cs.rgb_to_hsv([255.0, 0.0, 0.0])
    assert (h, s, v) == (0.0, 1.0, 1.0)


def test_hsv_known_values():
    assert cs.rgb_to_hsv([0.0, 255.0, 0.0]).tolist() == [120.0, 1.0, 1.0]
    assert cs.rgb_to_hsv([0.0, 0.0, 255.0]).tolist() == [240.0, 1.0, 1.0]
    h, s, v = cs.rgb_to_hsv([128.0, 128.0, 128.0])
    assert (h, s) == (0.0, 0.0)
    assert v == pytest.approx(128 / 255)


def test_lab_white_point():
    lab = cs.rgb_to_lab([255.0, 255.0, 255.0])
    assert lab[0] == pytest.approx(100.0, abs=0.01)
    assert abs(lab[1]) < 0.01
    assert abs(lab[2]) < 0.01


def test_lab_black():
    lab = cs.rgb_to_lab([0.0, 0.0, 0.0])
    assert lab[0] == pytest.approx(0.0, abs=1e-9)


def test_yiq_matches_independent_multiply():
    rgb = np.array([10.0, 200.0, 30.0])
    matrix = np.array([[0.299, 0.587, 0.114],
                       [0.5959, -0.2746, -0.3213],
                       [0.2115, -0.5227, 0.3112]])
    expected = matrix @ rgb  # independent 3x3 multiply
    assert np.allclose(cs.rgb_to_yiq(rgb), expected, atol=1e-12)


@pytest.mark.parametrize("fn,matrix", [
    (cs.rgb_to_yuv, cs.YUV_MATRIX),
    (cs.rgb_to_ycbcr, cs.YCBCR_MATRIX),
    (cs.rgb_to_yiq, cs.YIQ_MATRIX),
])
def test_affine_offsets_cancel(fn, matrix, rng):
    for _ in range(50):
        a = rng.uniform(0, 255, size=3)
        b = rng.uniform(0, 255, size=3)
        lhs = fn(a) - fn(b)
        rhs = matrix @ (a - b)
        assert np.max(np.abs(lhs - rhs)) < 1e-9


def test_hsv_round_trip_within_one_step(rng):
    samples = rng.integers(0, 256, size=(100_000, 3)).astype(np.float64)
    grays = np.repeat(np.arange(256, dtype=np.float64)[:, None], 3, axis=1)
    rgb = np.vstack([samples, grays])
    back = np.round(cs.hsv_to_rgb(cs.rgb_to_hsv(rgb)))
    assert np.max(np.abs(back - rgb)) <= 1.0


def test_gray_depends_on_luma_only():
    # same BT.601 luma, different hue -> identical gray output
    a = np.array([200.0, 0.0, 0.0])
    luma = 0.299 * 200.0
    b = np.array([0.0, luma / 0.587, 0.0])
    assert np.allclose(cs.rgb_to_gray(a), cs.rgb_to_gray(b), atol=1e-12)
    out = cs.rgb_to_gray(a)
    assert out[0] == out[1] == out[2]


def test_rgb_identity(rng):
    arr = rng.integers(0, 256, size=(5, 5, 3)).astype(np.float64)
    assert np.array_equal(cs.convert_array(arr, "RGB"), arr)


def test_hed_matches_linear_solve_oracle(rng):
    rgb = rng.uniform(0, 255, size=(10, 3))
    got = cs.rgb_to_hed(rgb)
    od = -np.log10((rgb + 1.0) / 256.0)
    for i in range(len(rgb)):
        # concentrations c solve c @ S = od  (independent solver)
        expected = np.linalg.solve(cs.HED_STAINS.T, od[i])
        assert np.allclose(got[i], expected, atol=1e-9)


def test_native_ranges_contain_outputs(rng):
    rgb = rng.integers(0, 256, size=(50, 3)).astype(np.float64)
    extremes = np.array([[0.0, 0.0, 0.0], [255.0, 255.0, 255.0],
                         [255.0, 0.0, 0.0], [0.0, 255.0, 0.0], [0.0, 0.0, 255.0]])
    inputs = np.vstack([rgb, extremes])
    for space in cs.COLORSPACES:
        out = cs.convert_array(inputs, space)
        for c, (lo, hi) in enumerate(cs.NATIVE_RANGES[space]):
            assert out[..., c].min() >= lo - 1e-9, space
            assert out[..., c].max() <= hi + 1e-9, space


def test_convert_view_carries_mask(rng):
    pixels = rng.integers(0, 256, size=(6, 6, 3)).astype(np.uint8)
    mask = rng.uniform(size=(6, 6)) < 0.5
    pixels[~mask] = 0  # renderers force background to black
    img = ColorImage(pixels=pixels, mask=mask, view_id="front")
    view = cs.convert(img, "yuv")
    assert view.space == "YUV"
    assert np.array_equal(view.mask, mask)
    # background (0,0,0) maps to the transform of black
    black = cs.rgb_to_yuv([0.0, 0.0, 0.0])
    background = view.pixels[~mask]
    if background.size:
        assert np.allclose(background, black)


def test_gray_replicates_channels(rng):
    arr = rng.integers(0, 256, size=(4, 4, 3)).astype(np.float64)
    out = cs.convert_array(arr, "GRAY")
    assert np.array_equal(out[..., 0], out[..., 1])
    assert np.array_equal(out[..., 0], out[..., 2])


def test_unknown_space_rejected():
    with pytest.raises(InvalidColorspace):
        cs.convert_array(np.zeros((2, 2, 3)), "CMYK")


def test_colorspace_list_is_eightfold():
    assert set(cs.COLORSPACES) == {"RGB", "HED", "HSV", "LAB", "YCbCr", "YIQ",
                                   "YUV", "GRAY"}
