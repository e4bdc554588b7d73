"""Search for constant-luminance color pairs that encode one haptic symbol.

A pair alternates two display colors around a target color. The two colors
share the same luminance (equal Y, hence equal L*) and sit point-symmetric
about the target in (a*, b*), so a viewer fuses them into the target color
while a photodiode sees a square-wave modulation on the channels the symbol
marks ON.

Channel roles: R and B carry the symbol alphabet; G is reserved as the
luminance compensator and therefore also moves (anti-phase) in every
non-degenerate pair. Off-alphabet channels are held at exactly the same code
in both colors, which keeps their modulation depth at zero.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, asdict
from enum import Enum

import numpy as np

from . import colorspace as cs

_Y_WEIGHTS = cs.M_RGB_TO_XYZ[1]
_CHANNEL_INDEX = {"R": 0, "G": 1, "B": 2}


class Symbol(Enum):
    NONE = "NONE"
    R = "R"
    B = "B"
    RB = "RB"

    @property
    def on_channels(self):
        """Indices of linear-RGB channels carrying 30 Hz modulation."""
        return {"NONE": (), "R": (0,), "B": (2,), "RB": (0, 2)}[self.value]

    @property
    def off_channels(self):
        """Alphabet channels (R, B) the symbol marks OFF."""
        return tuple(k for k in (0, 2) if k not in self.on_channels)


class InfeasiblePairError(ValueError):
    """No amplitude of at least theta_on fits the constraints at this target."""


@dataclass(frozen=True)
class PairConstraints:
    eps_l: float = 0.1          # max |L*(c1) - L*(c2)|
    eps_ab: float = 0.5         # max (a*, b*) midpoint error vs. target
    theta_on: float = 0.05      # min linear-RGB depth on ON channels
    theta_off: float = 0.005    # max linear-RGB depth on OFF alphabet channels
    delta_e_max: float = 10.0   # max CIE76 distance of each color from target


# Trusts 30 Hz chromatic fusion: luminance stays constant (eps_l unchanged)
# but the static chroma proxies open up so gamut-corner colors can carry
# detectable modulation. Under the default proxies a color with a near-zero
# channel can never take the minimum detectable depth on that channel (the
# CIE76 step is ~13-26), so only interior colors pass. This set yields all
# three modulated symbols on all nine representative colors.
FUSION_CONSTRAINTS = PairConstraints(eps_ab=15.0, delta_e_max=40.0)


@dataclass(frozen=True)
class ColorPair:
    target: tuple
    c1: tuple
    c2: tuple
    symbol: Symbol
    amplitude: float                 # realized min ON-channel depth, linear units
    search_amplitude: float = 0.0    # continuous-search depth before quantization
    center_shifted: bool = False     # operating point moved off the target


def delta_e(lab1, lab2):
    """CIE76 Euclidean distance in L*a*b*."""
    d = np.asarray(lab1, dtype=float) - np.asarray(lab2, dtype=float)
    return float(np.sqrt(np.sum(d * d, axis=-1)))


def _compensate(r, b, y_common):
    """Solve the G value putting (r, g, b) at luminance y_common."""
    return (y_common - _Y_WEIGHTS[0] * r - _Y_WEIGHTS[2] * b) / _Y_WEIGHTS[1]


def _swing(m_rb, a, on_idx):
    """Alphabet-channel values of both colors: (..., 2) arrays for c1 and c2."""
    m_rb = np.asarray(m_rb, dtype=float)
    delta = np.array([a if 0 in on_idx else 0.0, a if 2 in on_idx else 0.0])
    return m_rb + delta, m_rb - delta


def _y_bounds(m_rb, a, on_idx):
    """Common-luminance interval keeping the G compensator inside [0, 1]."""
    rb1, rb2 = _swing(m_rb, a, on_idx)
    w = np.array([_Y_WEIGHTS[0], _Y_WEIGHTS[2]])
    fixed1 = rb1 @ w
    fixed2 = rb2 @ w
    return np.maximum(fixed1, fixed2), np.minimum(fixed1, fixed2) + _Y_WEIGHTS[1]


def _build_colors(m_rb, y_common, a, on_idx):
    """Colors for alphabet centers (m_r, m_b), shared luminance and excursion a.

    ON channels swing m +/- a, OFF channels stay at m; G is solved per color
    so both colors sit at exactly y_common. Returns (c1, c2) with shape
    (..., 3), or None when the excursion or the compensator leaves the cube.
    """
    rb1, rb2 = _swing(m_rb, a, on_idx)
    for vals in (rb1, rb2):
        if np.any(vals < -1e-12) or np.any(vals > 1 + 1e-12):
            return None
    y_lo, y_hi = _y_bounds(m_rb, a, on_idx)
    if np.any(y_common < y_lo - 1e-12) or np.any(y_common > y_hi + 1e-12):
        return None
    c1 = np.stack([rb1[..., 0], _compensate(rb1[..., 0], rb1[..., 1], y_common),
                   rb1[..., 1]], axis=-1)
    c2 = np.stack([rb2[..., 0], _compensate(rb2[..., 0], rb2[..., 1], y_common),
                   rb2[..., 1]], axis=-1)
    return np.clip(c1, 0.0, 1.0), np.clip(c2, 0.0, 1.0)


def _mid_ab_errors(xs, a, on_idx, target_ab):
    """Midpoint (a*, b*) error for a batch of (m_r, m_b, Y) rows; NaN if infeasible."""
    xs = np.atleast_2d(xs)
    rb1, rb2 = _swing(xs[:, :2], a, on_idx)
    y = xs[:, 2]
    y_lo, y_hi = _y_bounds(xs[:, :2], a, on_idx)
    bad = ((rb1 < -1e-12) | (rb1 > 1 + 1e-12)).any(axis=1)
    bad |= ((rb2 < -1e-12) | (rb2 > 1 + 1e-12)).any(axis=1)
    bad |= (y < y_lo - 1e-12) | (y > y_hi + 1e-12)
    c1 = np.stack([rb1[:, 0], _compensate(rb1[:, 0], rb1[:, 1], y), rb1[:, 1]], axis=-1)
    c2 = np.stack([rb2[:, 0], _compensate(rb2[:, 0], rb2[:, 1], y), rb2[:, 1]], axis=-1)
    lab = cs.linear_to_lab(np.clip(np.stack([c1, c2]), 0.0, 1.0))
    err = 0.5 * (lab[0, :, 1:] + lab[1, :, 1:]) - target_ab
    err[bad] = np.nan
    return err


def _center_box(a, on_idx):
    lo = np.array([a if 0 in on_idx else 0.0, a if 2 in on_idx else 0.0])
    hi = np.array([1.0 - a if 0 in on_idx else 1.0, 1.0 - a if 2 in on_idx else 1.0])
    return lo, hi


def _clip_vars(x, a, on_idx):
    lo, hi = _center_box(a, on_idx)
    m = np.clip(x[:2], lo, hi)
    y_lo, y_hi = _y_bounds(m, a, on_idx)
    if y_lo > y_hi:
        return None
    return np.array([m[0], m[1], min(max(x[2], y_lo), y_hi)])


def construct_at_amplitude(target, symbol, a, constraints=PairConstraints()):
    """Continuous pair colors at half-excursion ``a`` (depth 2a), or None.

    Solves for the alphabet-channel centers and the pair's shared luminance
    (three variables, Gauss-Newton with a minimum-norm step) so the (a*, b*)
    midpoint lands back on the target, then validates every pair constraint.
    Shared by the bisection search and by brute-force sweep oracles.
    """
    if symbol == Symbol.NONE:
        raise ValueError("NONE has no modulated construction")
    if a <= 0 or a > 0.5:
        return None
    t_lin = cs.srgb_to_linear(target)
    t_lab = cs.linear_to_lab(t_lin)
    y_target = cs.luminance_y(t_lin)
    on_idx = symbol.on_channels

    lo, hi = _center_box(a, on_idx)
    if np.any(lo > hi):
        return None
    x = _clip_vars(np.array([t_lin[0], t_lin[2], y_target]), a, on_idx)
    if x is None:
        return None

    step = 1e-5
    for _ in range(12):
        probes = np.tile(x, (4, 1))
        for j in range(3):
            probes[j + 1, j] += step
            clipped = _clip_vars(probes[j + 1], a, on_idx)
            if clipped is None or clipped[j] == x[j]:
                probes[j + 1] = x
                probes[j + 1, j] -= step
                clipped = _clip_vars(probes[j + 1], a, on_idx)
            probes[j + 1] = x if clipped is None else clipped
        errs = _mid_ab_errors(probes, a, on_idx, t_lab[1:])
        err = errs[0]
        if np.any(np.isnan(err)):
            return None
        if np.max(np.abs(err)) < 1e-4:
            break
        jac = np.zeros((2, 3))
        for j in range(3):
            h = probes[j + 1, j] - x[j]
            if h != 0 and not np.any(np.isnan(errs[j + 1])):
                jac[:, j] = (errs[j + 1] - err) / h
        if not np.any(jac):
            break
        delta, *_ = np.linalg.lstsq(jac, -err, rcond=None)
        nrm = np.max(np.abs(delta))
        if nrm > 0.1:
            delta *= 0.1 / nrm
        x_new = _clip_vars(x + delta, a, on_idx)
        if x_new is None or np.allclose(x_new, x, atol=1e-14):
            break
        x = x_new

    built = _build_colors(x[:2], x[2], a, on_idx)
    if built is None:
        return None
    c1, c2 = built
    ok, _ = validate_pair_linear(c1, c2, target, symbol, constraints)
    return (c1, c2) if ok else None


def validate_pair_linear(c1, c2, target, symbol, constraints=PairConstraints(),
                         require_depth=True):
    """Check every pair constraint on linear-RGB colors; returns (ok, details)."""
    c1 = np.asarray(c1, dtype=float)
    c2 = np.asarray(c2, dtype=float)
    t_lab = cs.srgb_to_lab(target)
    lab = cs.linear_to_lab(np.stack([c1, c2]))
    depth = np.abs(c1 - c2)
    details = {
        "dl": abs(float(lab[0, 0] - lab[1, 0])),
        "mid_ab_err": float(np.max(np.abs(0.5 * (lab[0, 1:] + lab[1, 1:]) - t_lab[1:]))),
        "de1": delta_e(lab[0], t_lab),
        "de2": delta_e(lab[1], t_lab),
        "on_depth": float(min((depth[k] for k in symbol.on_channels), default=0.0)),
        "off_depth": float(max((depth[k] for k in symbol.off_channels), default=0.0)),
    }
    ok = (
        details["dl"] <= constraints.eps_l
        and details["mid_ab_err"] <= constraints.eps_ab
        and details["de1"] <= constraints.delta_e_max
        and details["de2"] <= constraints.delta_e_max
        and details["off_depth"] <= constraints.theta_off
        and (not require_depth or details["on_depth"] >= constraints.theta_on - 1e-12)
    )
    return ok, details


def _quantize_with_repair(c1_lin, c2_lin, target, symbol, constraints):
    """Round to 8-bit codes, then nudge codes so invariants survive rounding.

    The compensator (G) and the ON channels get a small neighborhood search;
    OFF alphabet channels stay locked to one shared code (shifted together at
    most) so their depth is exactly zero.
    """
    q1 = cs.linear_to_srgb(c1_lin)
    q2 = cs.linear_to_srgb(c2_lin)
    on_idx = symbol.on_channels
    off_idx = symbol.off_channels
    for k in off_idx:
        shared = int(round(0.5 * (q1[k] + q2[k])))
        q1[k] = q2[k] = shared

    dg = np.arange(-2, 3)
    d1 = np.arange(-1, 2)
    if len(on_idx) == 1:
        grids = np.meshgrid(dg, dg, d1, d1, d1, indexing="ij")
    else:
        grids = np.meshgrid(dg, dg, d1, d1, d1, d1, indexing="ij")
    tweaks = np.stack([g.ravel() for g in grids], axis=-1)

    n = len(tweaks)
    t1 = np.tile(q1, (n, 1))
    t2 = np.tile(q2, (n, 1))
    t1[:, 1] += tweaks[:, 0]
    t2[:, 1] += tweaks[:, 1]
    t1[:, on_idx[0]] += tweaks[:, 2]
    t2[:, on_idx[0]] += tweaks[:, 3]
    if len(on_idx) == 1:
        if off_idx:
            t1[:, off_idx[0]] += tweaks[:, 4]
            t2[:, off_idx[0]] += tweaks[:, 4]
    else:
        t1[:, on_idx[1]] += tweaks[:, 4]
        t2[:, on_idx[1]] += tweaks[:, 5]

    in_range = ((t1 >= 0) & (t1 <= 255) & (t2 >= 0) & (t2 <= 255)).all(axis=1)
    t1, t2, tweaks = t1[in_range], t2[in_range], tweaks[in_range]
    if len(t1) == 0:
        return None

    l1 = cs.srgb_to_linear(t1)
    l2 = cs.srgb_to_linear(t2)
    t_lab = cs.srgb_to_lab(target)
    lab1 = cs.linear_to_lab(l1)
    lab2 = cs.linear_to_lab(l2)
    depth = np.abs(l1 - l2)
    dl = np.abs(lab1[:, 0] - lab2[:, 0])
    mid_err = np.max(np.abs(0.5 * (lab1[:, 1:] + lab2[:, 1:]) - t_lab[1:]), axis=1)
    de1 = np.sqrt(np.sum((lab1 - t_lab) ** 2, axis=1))
    de2 = np.sqrt(np.sum((lab2 - t_lab) ** 2, axis=1))
    on_depth = np.min(depth[:, list(on_idx)], axis=1)
    off_depth = (np.max(depth[:, list(off_idx)], axis=1) if off_idx
                 else np.zeros(len(t1)))
    ok = ((dl <= constraints.eps_l) & (mid_err <= constraints.eps_ab)
          & (de1 <= constraints.delta_e_max) & (de2 <= constraints.delta_e_max)
          & (on_depth >= constraints.theta_on - 1e-12) & (off_depth <= constraints.theta_off))
    if not np.any(ok):
        return None
    cost = np.abs(tweaks).sum(axis=1) + dl / max(constraints.eps_l, 1e-9) \
        + mid_err / max(constraints.eps_ab, 1e-9)
    cost[~ok] = np.inf
    best = int(np.argmin(cost))
    details = {"dl": float(dl[best]), "mid_ab_err": float(mid_err[best]),
               "de1": float(de1[best]), "de2": float(de2[best]),
               "on_depth": float(on_depth[best]), "off_depth": float(off_depth[best])}
    return t1[best], t2[best], details


def find_pair(target, symbol, constraints=PairConstraints()):
    """Maximum-amplitude pair for (target, symbol) under the constraints.

    Bisects the half-excursion between the smallest detectable value and the
    largest feasible one, quantizes to 8-bit codes and backs the amplitude
    off if rounding breaks an invariant. Raises InfeasiblePairError when not
    even the minimum depth fits.
    """
    target = tuple(int(v) for v in np.asarray(target).reshape(3))
    if any(v < 0 or v > 255 for v in target):
        raise ValueError(f"target {target} outside 8-bit range")
    if symbol == Symbol.NONE:
        return ColorPair(target=target, c1=target, c2=target, symbol=symbol,
                         amplitude=0.0, search_amplitude=0.0)

    a_min = constraints.theta_on / 2.0
    if construct_at_amplitude(target, symbol, a_min, constraints) is None:
        raise InfeasiblePairError(f"{target} / {symbol.value}: no feasible amplitude "
                                  f">= {constraints.theta_on}")
    a_lo, a_hi = a_min, 0.5
    if construct_at_amplitude(target, symbol, a_hi, constraints) is None:
        for _ in range(26):
            a_mid = 0.5 * (a_lo + a_hi)
            if construct_at_amplitude(target, symbol, a_mid, constraints) is not None:
                a_lo = a_mid
            else:
                a_hi = a_mid
            if a_hi - a_lo <= 0.5e-4:
                break
    else:
        a_lo = a_hi

    a = a_lo
    backoff = max(0.5e-3, (a_lo - a_min) / 40.0)
    while a >= a_min:
        built = construct_at_amplitude(target, symbol, a, constraints)
        if built is not None:
            repaired = _quantize_with_repair(built[0], built[1], target, symbol, constraints)
            if repaired is not None:
                q1, q2, det = repaired
                t_lin = cs.srgb_to_linear(target)
                shifted = bool(np.max(np.abs(
                    0.5 * (cs.srgb_to_linear(q1) + cs.srgb_to_linear(q2)) - t_lin)) > 2.5 / 255.0)
                return ColorPair(
                    target=target,
                    c1=tuple(int(v) for v in q1),
                    c2=tuple(int(v) for v in q2),
                    symbol=symbol,
                    amplitude=det["on_depth"],
                    search_amplitude=2.0 * a_lo,
                    center_shifted=shifted,
                )
        a -= backoff
    raise InfeasiblePairError(f"{target} / {symbol.value}: quantization leaves no "
                              f"feasible amplitude >= {constraints.theta_on}")


REPRESENTATIVE_COLORS = {
    "black": (0, 0, 0),
    "gray": (128, 128, 128),
    "white": (255, 255, 255),
    "red": (255, 0, 0),
    "green": (0, 255, 0),
    "blue": (0, 0, 255),
    "cyan": (0, 255, 255),
    "yellow": (255, 255, 0),
    "magenta": (255, 0, 255),
}


@dataclass
class Palette:
    colors: list
    constraints: PairConstraints = field(default_factory=PairConstraints)
    pairs: dict = field(default_factory=dict)      # (color_idx, Symbol) -> ColorPair|None

    def get(self, color_idx, symbol):
        return self.pairs.get((color_idx, Symbol(symbol)))

    def feasible(self, color_idx, symbol):
        return self.pairs.get((color_idx, Symbol(symbol))) is not None

    def feasible_count(self):
        return sum(1 for s in self.pairs.values() if s is not None and s.symbol != Symbol.NONE)

    def feasible_symbols(self, color_idx):
        return [sym for sym in (Symbol.R, Symbol.B, Symbol.RB)
                if self.feasible(color_idx, sym)]

    def to_json(self):
        doc = []
        for (idx, sym), pair in sorted(self.pairs.items(), key=lambda kv: (kv[0][0], kv[0][1].value)):
            entry = {"target": list(self.colors[idx]), "symbol": sym.value}
            if pair is None:
                entry.update({"c1": None, "c2": None, "amplitude": None})
            else:
                entry.update({"c1": list(pair.c1), "c2": list(pair.c2),
                              "amplitude": pair.amplitude})
            doc.append(entry)
        return json.dumps(doc, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text, constraints=PairConstraints()):
        doc = json.loads(text)
        colors = []
        pairs = {}
        for entry in doc:
            target = tuple(entry["target"])
            if target not in colors:
                colors.append(target)
            idx = colors.index(target)
            sym = Symbol(entry["symbol"])
            if entry["c1"] is None:
                pairs[(idx, sym)] = None
            else:
                pairs[(idx, sym)] = ColorPair(
                    target=target, c1=tuple(entry["c1"]), c2=tuple(entry["c2"]),
                    symbol=sym, amplitude=float(entry["amplitude"]))
        return cls(colors=colors, constraints=constraints, pairs=pairs)


def build_palette(colors, constraints=PairConstraints()):
    """find_pair for every (color, symbol); infeasible combinations stay None."""
    colors = [tuple(int(v) for v in c) for c in colors]
    palette = Palette(colors=colors, constraints=constraints)
    for idx, color in enumerate(colors):
        palette.pairs[(idx, Symbol.NONE)] = find_pair(color, Symbol.NONE, constraints)
        for sym in (Symbol.R, Symbol.B, Symbol.RB):
            try:
                palette.pairs[(idx, sym)] = find_pair(color, sym, constraints)
            except InfeasiblePairError:
                palette.pairs[(idx, sym)] = None
    return palette


def classify_pair(c1, c2, constraints=PairConstraints()):
    """Ideal-sensor symbol decision from per-channel linear depths."""
    depth = np.abs(cs.srgb_to_linear(c1) - cs.srgb_to_linear(c2))
    gate = 0.5 * (constraints.theta_on + constraints.theta_off)
    r_on = depth[0] >= gate
    b_on = depth[2] >= gate
    return {(False, False): Symbol.NONE, (True, False): Symbol.R,
            (False, True): Symbol.B, (True, True): Symbol.RB}[(r_on, b_on)]
