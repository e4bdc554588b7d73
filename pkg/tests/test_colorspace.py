import numpy as np
import pytest

from chromapulse import colorspace as cs


def test_srgb_to_linear_endpoints():
    assert np.allclose(cs.srgb_to_linear([0, 0, 0]), [0, 0, 0])
    assert np.allclose(cs.srgb_to_linear([255, 255, 255]), [1, 1, 1])


def test_srgb_to_linear_reference_value():
    # ((188/255 + 0.055)/1.055)**2.4 evaluated at 30 digits
    expected = 0.502886458032568385
    got = cs.srgb_to_linear([188, 188, 188])
    assert np.allclose(got, expected, atol=1e-12)


def test_srgb_roundtrip_all_codes():
    codes = np.arange(256)
    rgb = np.stack([codes, codes, codes], axis=-1)
    back = cs.linear_to_srgb(cs.srgb_to_linear(rgb))
    assert np.array_equal(back, rgb)


def test_lab_white_black():
    lab_w = cs.linear_to_lab([1.0, 1.0, 1.0])
    assert np.allclose(lab_w, [100.0, 0.0, 0.0], atol=1e-9)
    lab_k = cs.linear_to_lab([0.0, 0.0, 0.0])
    assert np.allclose(lab_k, [0.0, 0.0, 0.0], atol=1e-12)


def test_lab_mid_gray_reference_value():
    # L = 116 * 0.5**(1/3) - 16 evaluated at 30 digits
    lab = cs.linear_to_lab([0.5, 0.5, 0.5])
    assert abs(lab[0] - 76.0692610141555695) < 1e-10
    assert abs(lab[1]) < 1e-9 and abs(lab[2]) < 1e-9


def test_lab_to_linear_white():
    rgb = cs.lab_to_linear([100.0, 0.0, 0.0])
    assert np.allclose(rgb, [1.0, 1.0, 1.0], atol=1e-9)


def test_lab_roundtrip_random_in_gamut():
    rng = np.random.default_rng(42)
    rgb = rng.uniform(0, 1, size=(1000, 3))
    back = cs.lab_to_linear(cs.linear_to_lab(rgb))
    assert np.max(np.abs(back - rgb)) < 1e-9


def test_out_of_gamut_raises():
    with pytest.raises(cs.OutOfGamutError):
        cs.lab_to_linear([100.0, 120.0, 0.0])


def test_gamut_boundary_dense_sample():
    # For a grid of (L, hue), bisect the maximum in-gamut chroma; just inside
    # must invert, just outside must raise.
    for L in (20.0, 40.0, 60.0, 80.0):
        for hue in np.linspace(0, 2 * np.pi, 24, endpoint=False):
            u = np.array([np.cos(hue), np.sin(hue)])
            lo, hi = 0.0, 200.0
            assert cs.in_gamut([L, 0.0, 0.0])
            for _ in range(40):
                mid = 0.5 * (lo + hi)
                if cs.in_gamut([L, mid * u[0], mid * u[1]]):
                    lo = mid
                else:
                    hi = mid
            c_max = lo
            assert cs.in_gamut([L, 0.999 * c_max * u[0], 0.999 * c_max * u[1]])
            assert not cs.in_gamut([L, 1.001 * c_max * u[0] + 1e-6, 1.001 * c_max * u[1]])


def test_lab_monotone_in_gray_scale():
    grays = np.linspace(0.0, 1.0, 64)
    labs = cs.linear_to_lab(np.stack([grays] * 3, axis=-1))
    assert np.all(np.diff(labs[:, 0]) > 0)


def test_srgb_to_lab_matches_two_step():
    rng = np.random.default_rng(3)
    codes = rng.integers(0, 256, size=(50, 3))
    a = cs.srgb_to_lab(codes)
    b = cs.linear_to_lab(cs.srgb_to_linear(codes))
    assert np.allclose(a, b)
