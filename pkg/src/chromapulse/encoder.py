"""Turn a base image plus a spatial symbol map into a 60 fps frame stream.

Every cell of a RegionMap names a palette color and a symbol; the encoder
emits frames that alternate between the cell's pair colors, producing a
30 Hz color vibration. All pixels share one global phase: even frames show
c1, odd frames show c2.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field

import numpy as np

from . import colorspace as cs
from .pairgen import Palette, Symbol

FPS = 60
CVF1_MAGIC = b"CVF1"

# code -> linear value lookup, shared by the receiver-side fast paths
LINEAR_LUT = cs.srgb_to_linear(np.stack([np.arange(256)] * 3, axis=-1))[:, 0].copy()

_SYMBOL_ORDER = (Symbol.NONE, Symbol.R, Symbol.B, Symbol.RB)
_SYMBOL_TO_IDX = {sym: i for i, sym in enumerate(_SYMBOL_ORDER)}


class InfeasibleCellError(ValueError):
    """A map cell references a palette entry with no feasible pair."""


class OutOfRangeError(ValueError):
    """Requested time lies outside the stream."""


@dataclass
class RegionMap:
    """Per-pixel (symbol, palette color index) grid with physical scale."""

    width: int
    height: int
    mm_per_px: float
    symbol_idx: np.ndarray = field(repr=False)     # (height, width) uint8
    color_idx: np.ndarray = field(repr=False)      # (height, width) int32

    def __init__(self, width, height, mm_per_px, symbol_idx=None, color_idx=None):
        if mm_per_px <= 0:
            raise ValueError("mm_per_px must be positive")
        self.width = int(width)
        self.height = int(height)
        self.mm_per_px = float(mm_per_px)
        self.symbol_idx = (np.zeros((self.height, self.width), dtype=np.uint8)
                           if symbol_idx is None else np.asarray(symbol_idx, dtype=np.uint8))
        self.color_idx = (np.zeros((self.height, self.width), dtype=np.int32)
                          if color_idx is None else np.asarray(color_idx, dtype=np.int32))
        if self.symbol_idx.shape != (self.height, self.width):
            raise ValueError("symbol grid shape mismatch")
        if self.color_idx.shape != (self.height, self.width):
            raise ValueError("color grid shape mismatch")

    def set_region(self, x0, x1, y0, y1, symbol, color_idx):
        self.symbol_idx[y0:y1, x0:x1] = _SYMBOL_TO_IDX[Symbol(symbol)]
        self.color_idx[y0:y1, x0:x1] = color_idx

    def symbol_at(self, x_px, y_px):
        return _SYMBOL_ORDER[self.symbol_idx[y_px, x_px]]

    def size_mm(self):
        return self.width * self.mm_per_px, self.height * self.mm_per_px

    def to_json(self):
        cells = [[_SYMBOL_ORDER[s].value, int(c)]
                 for s, c in zip(self.symbol_idx.ravel(), self.color_idx.ravel())]
        return json.dumps({"width": self.width, "height": self.height,
                           "mm_per_px": self.mm_per_px, "cells": cells})

    @classmethod
    def from_json(cls, text):
        doc = json.loads(text)
        w, h = doc["width"], doc["height"]
        cells = doc["cells"]
        if len(cells) != w * h:
            raise ValueError(f"expected {w * h} cells, got {len(cells)}")
        sym = np.array([_SYMBOL_TO_IDX[Symbol(s)] for s, _ in cells],
                       dtype=np.uint8).reshape(h, w)
        col = np.array([c for _, c in cells], dtype=np.int32).reshape(h, w)
        return cls(w, h, doc["mm_per_px"], sym, col)


@dataclass
class FrameStream:
    """Ordered 60 fps frames; zero-order hold between frame boundaries."""

    width: int
    height: int
    fps: int
    frames: np.ndarray = field(repr=False)          # (n, height, width, 3) uint8

    @property
    def frame_count(self):
        return self.frames.shape[0]

    @property
    def duration_s(self):
        return self.frame_count / self.fps

    def frame_index_at(self, t_s):
        idx = np.floor(np.asarray(t_s, dtype=float) * self.fps).astype(np.int64)
        if np.any(idx < 0) or np.any(idx >= self.frame_count):
            raise OutOfRangeError(f"t={t_s} outside [0, {self.duration_s})")
        return idx

    def frame_at(self, t_s):
        return self.frames[int(self.frame_index_at(t_s))]

    def linear_series(self, x_px, y_px, t_s):
        """Linear RGB of pixel (x, y) sampled at times t_s; shape (len(t), 3)."""
        idx = self.frame_index_at(t_s)
        codes = self.frames[idx, y_px, x_px]
        return LINEAR_LUT[codes]


def encode(region_map: RegionMap, palette: Palette, duration_s: float) -> FrameStream:
    """Encode the map into an even number of alternating frames."""
    if duration_s <= 0:
        raise ValueError("duration must be positive")
    n_frames = int(np.ceil(duration_s * FPS))
    if n_frames % 2:
        n_frames += 1

    even = np.zeros((region_map.height, region_map.width, 3), dtype=np.uint8)
    odd = np.zeros_like(even)
    keys = set(zip(region_map.color_idx.ravel().tolist(),
                   region_map.symbol_idx.ravel().tolist()))
    for color_idx, sym_i in keys:
        sym = _SYMBOL_ORDER[sym_i]
        pair = palette.get(color_idx, sym)
        if pair is None:
            target = palette.colors[color_idx] if color_idx < len(palette.colors) else "?"
            raise InfeasibleCellError(f"no pair for color {target} symbol {sym.value}")
        mask = (region_map.color_idx == color_idx) & (region_map.symbol_idx == sym_i)
        even[mask] = pair.c1
        odd[mask] = pair.c2

    frames = np.empty((n_frames, region_map.height, region_map.width, 3), dtype=np.uint8)
    frames[0::2] = even
    frames[1::2] = odd
    return FrameStream(width=region_map.width, height=region_map.height,
                       fps=FPS, frames=frames)


def classify_stream(stream: FrameStream, palette: Palette) -> RegionMap:
    """Recover the RegionMap from the first two frames (pair classification)."""
    lookup = {}
    for (idx, sym), pair in palette.pairs.items():
        if pair is not None:
            lookup[(pair.c1, pair.c2)] = (idx, sym)
    sym_grid = np.zeros((stream.height, stream.width), dtype=np.uint8)
    col_grid = np.zeros((stream.height, stream.width), dtype=np.int32)
    f0, f1 = stream.frames[0], stream.frames[1]
    for y in range(stream.height):
        for x in range(stream.width):
            key = (tuple(int(v) for v in f0[y, x]), tuple(int(v) for v in f1[y, x]))
            if key not in lookup:
                raise ValueError(f"pixel ({x},{y}) matches no palette pair")
            idx, sym = lookup[key]
            sym_grid[y, x] = _SYMBOL_TO_IDX[sym]
            col_grid[y, x] = idx
    return RegionMap(stream.width, stream.height, 1.0, sym_grid, col_grid)


def two_region_map(palette, left_color_idx, left_symbol, right_color_idx,
                   right_symbol, width_mm=150.0, height_mm=70.0, mm_per_px=1.0):
    """Two side-by-side regions split down the middle (stimulus geometry)."""
    w = int(round(width_mm / mm_per_px))
    h = int(round(height_mm / mm_per_px))
    m = RegionMap(w, h, mm_per_px)
    m.set_region(0, w // 2, 0, h, left_symbol, left_color_idx)
    m.set_region(w // 2, w, 0, h, right_symbol, right_color_idx)
    return m


def write_cvf1(stream: FrameStream, path):
    with open(path, "wb") as fh:
        fh.write(CVF1_MAGIC)
        fh.write(struct.pack("<IIIIB", stream.width, stream.height,
                             stream.fps, stream.frame_count, 0))
        fh.write(stream.frames.tobytes())


def read_cvf1(path) -> FrameStream:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != CVF1_MAGIC:
            raise ValueError(f"bad magic {magic!r}")
        width, height, fps, n, colortype = struct.unpack("<IIIIB", fh.read(17))
        if colortype != 0:
            raise ValueError(f"unsupported colortype {colortype}")
        raw = fh.read(n * height * width * 3)
        frames = np.frombuffer(raw, dtype=np.uint8).reshape(n, height, width, 3)
    return FrameStream(width=width, height=height, fps=fps, frames=frames.copy())
