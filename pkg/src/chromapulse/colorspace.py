"""Color conversions between 8-bit display RGB, linear RGB, XYZ (D65) and CIELAB.

All functions accept either a length-3 sequence or an array of shape (..., 3)
and return the same shape. The display transfer function is the standard sRGB
piecewise curve; the Lab conversion uses the D65 / 2-degree white point taken
from the row sums of the RGB->XYZ matrix so that pure white maps to exactly
L*=100, a*=b*=0.

Out-of-gamut Lab inputs raise instead of clamping: the pair search needs to
reject infeasible amplitudes, not silently distort luminance.
"""

from __future__ import annotations

import numpy as np

# sRGB primaries, D65 illuminant (Bruce Lindbloom's 7-digit matrix)
M_RGB_TO_XYZ = np.array([
    [0.4124564, 0.3575761, 0.1804375],
    [0.2126729, 0.7151522, 0.0721750],
    [0.0193339, 0.1191920, 0.9503041],
])
M_XYZ_TO_RGB = np.linalg.inv(M_RGB_TO_XYZ)

# White point from the matrix row sums keeps white exactly neutral.
WHITEPOINT_D65 = M_RGB_TO_XYZ.sum(axis=1)

# CIE Lab cube-root / linear split
_EPSILON = (6.0 / 29.0) ** 3
_KAPPA = (29.0 / 6.0) ** 2 / 3.0 * 116.0            # slope of the linear branch * 116
_GAMUT_TOL = 1e-9


class OutOfGamutError(ValueError):
    """Lab color maps outside the unit RGB cube by more than the tolerance."""

    def __init__(self, rgb):
        self.rgb = np.asarray(rgb, dtype=float)
        super().__init__(f"linear RGB {self.rgb.tolist()} outside [0, 1]")


def srgb_to_linear(c):
    """Display-encoded 8-bit RGB (0..255) to linear RGB in [0, 1]."""
    v = np.asarray(c, dtype=float) / 255.0
    return np.where(v <= 0.04045, v / 12.92, ((v + 0.055) / 1.055) ** 2.4)


def linear_to_srgb(c):
    """Linear RGB in [0, 1] to display-encoded 8-bit RGB (rounded)."""
    v = np.clip(np.asarray(c, dtype=float), 0.0, 1.0)
    enc = np.where(v <= 0.0031308, v * 12.92, 1.055 * v ** (1.0 / 2.4) - 0.055)
    return np.rint(enc * 255.0).astype(np.int64)


def _lab_f(t):
    t = np.asarray(t, dtype=float)
    return np.where(t > _EPSILON, np.cbrt(t), (_KAPPA * t + 16.0) / 116.0)


def _lab_f_inv(ft):
    ft = np.asarray(ft, dtype=float)
    return np.where(ft > 6.0 / 29.0, ft ** 3, (116.0 * ft - 16.0) / _KAPPA)


def linear_to_xyz(c):
    return np.asarray(c, dtype=float) @ M_RGB_TO_XYZ.T


def xyz_to_lab(xyz):
    t = np.asarray(xyz, dtype=float) / WHITEPOINT_D65
    fx, fy, fz = _lab_f(t[..., 0]), _lab_f(t[..., 1]), _lab_f(t[..., 2])
    return np.stack([116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)], axis=-1)


def linear_to_lab(c):
    """Linear RGB to CIELAB (D65, 2-degree observer)."""
    return xyz_to_lab(linear_to_xyz(c))


def lab_to_linear(c):
    """CIELAB to linear RGB; raises OutOfGamutError when outside the RGB cube.

    Values within 1e-9 of the cube faces are snapped onto them, so round
    trips through linear_to_lab are exact up to floating point.
    """
    lab = np.asarray(c, dtype=float)
    fy = (lab[..., 0] + 16.0) / 116.0
    fx = fy + lab[..., 1] / 500.0
    fz = fy - lab[..., 2] / 200.0
    xyz = np.stack([_lab_f_inv(fx), _lab_f_inv(fy), _lab_f_inv(fz)], axis=-1)
    xyz = xyz * WHITEPOINT_D65
    rgb = xyz @ M_XYZ_TO_RGB.T
    if np.any(rgb < -_GAMUT_TOL) or np.any(rgb > 1.0 + _GAMUT_TOL):
        raise OutOfGamutError(rgb)
    return np.clip(rgb, 0.0, 1.0)


def srgb_to_lab(c):
    return linear_to_lab(srgb_to_linear(c))


def in_gamut(lab):
    """True when the Lab color inverts into the unit RGB cube."""
    try:
        lab_to_linear(lab)
    except OutOfGamutError:
        return False
    return True


def luminance_y(c):
    """Relative luminance Y of a linear RGB color (Yn = 1)."""
    c = np.asarray(c, dtype=float)
    return c @ M_RGB_TO_XYZ[1]
