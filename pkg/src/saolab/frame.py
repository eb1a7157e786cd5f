"""Planar YUV 4:2:0 frame model.

Planes are immutable-by-convention numpy int32 arrays of shape
(height, width) holding samples in [0, 2**bit_depth - 1]. Frames are
Y/U/V plane triples with chroma at half resolution (ceiling division so
odd luma sizes stay representable). A CtuGrid tiles the luma plane into
raster-order rectangles; interior CTUs are ctu_size square and the
right/bottom edge ones are clipped.

File I/O is raw planar 4:2:0 without a header: one byte per sample at
8-bit, two bytes little-endian per sample at 10-bit.

PSNR of identical planes is reported as math.inf (the lossless marker)
rather than a finite sentinel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


class FrameError(ValueError):
    """Raised for malformed frame data or mismatched plane geometry."""


def _ceil_div(a: int, b: int) -> int:
    return -(-a // b)


@dataclass(frozen=True)
class Plane:
    samples: np.ndarray  # int32, shape (height, width)
    bit_depth: int

    def __post_init__(self):
        s = np.ascontiguousarray(np.asarray(self.samples, dtype=np.int32))
        object.__setattr__(self, "samples", s)
        if s.ndim != 2 or s.shape[0] < 1 or s.shape[1] < 1:
            raise FrameError(f"plane must be 2-D and non-empty, got shape {s.shape}")
        if self.bit_depth not in (8, 10):
            raise FrameError(f"unsupported bit depth {self.bit_depth}")
        if s.min() < 0 or s.max() > self.max_value:
            raise FrameError("sample out of range for bit depth")

    @property
    def width(self) -> int:
        return self.samples.shape[1]

    @property
    def height(self) -> int:
        return self.samples.shape[0]

    @property
    def max_value(self) -> int:
        return (1 << self.bit_depth) - 1


@dataclass(frozen=True)
class Frame:
    y: Plane
    u: Plane
    v: Plane

    def __post_init__(self):
        cw = _ceil_div(self.y.width, 2)
        ch = _ceil_div(self.y.height, 2)
        for name, p in (("u", self.u), ("v", self.v)):
            if (p.width, p.height) != (cw, ch):
                raise FrameError(f"{name} plane is {p.width}x{p.height}, "
                                 f"expected {cw}x{ch} for 4:2:0")
            if p.bit_depth != self.y.bit_depth:
                raise FrameError("planes disagree on bit depth")

    @property
    def bit_depth(self) -> int:
        return self.y.bit_depth

    @property
    def width(self) -> int:
        return self.y.width

    @property
    def height(self) -> int:
        return self.y.height


@dataclass(frozen=True)
class Rect:
    x: int
    y: int
    w: int
    h: int


@dataclass(frozen=True)
class CtuGrid:
    ctu_size: int
    width: int
    height: int
    rects: tuple[Rect, ...] = field(init=False)
    cols: int = field(init=False)
    rows: int = field(init=False)

    def __post_init__(self):
        if self.ctu_size < 1:
            raise FrameError("ctu_size must be >= 1")
        cols = _ceil_div(self.width, self.ctu_size)
        rows = _ceil_div(self.height, self.ctu_size)
        rects = []
        for r in range(rows):
            for c in range(cols):
                x = c * self.ctu_size
                y = r * self.ctu_size
                rects.append(Rect(x, y,
                                  min(self.ctu_size, self.width - x),
                                  min(self.ctu_size, self.height - y)))
        object.__setattr__(self, "rects", tuple(rects))
        object.__setattr__(self, "cols", cols)
        object.__setattr__(self, "rows", rows)

    def __len__(self) -> int:
        return len(self.rects)


def ctu_partition(width: int, height: int, ctu_size: int = 128) -> CtuGrid:
    """Tile a width x height luma plane into raster-order CTU rectangles."""
    return CtuGrid(ctu_size=ctu_size, width=width, height=height)


def chroma_rect(rect: Rect) -> Rect:
    """Chroma-plane rectangle covered by a luma CTU rectangle (4:2:0).

    CTU x/y origins are multiples of the CTU size, hence even, so the
    mapping is exact on the left/top and rounds the extent up on the
    right/bottom edge.
    """
    cx = rect.x // 2
    cy = rect.y // 2
    return Rect(cx, cy,
                _ceil_div(rect.x + rect.w, 2) - cx,
                _ceil_div(rect.y + rect.h, 2) - cy)


def crop(a: np.ndarray, rect: Rect) -> np.ndarray:
    return a[rect.y:rect.y + rect.h, rect.x:rect.x + rect.w]


# -- raw YUV I/O --------------------------------------------------------------

def _frame_bytes(width: int, height: int, bit_depth: int) -> int:
    cw, ch = _ceil_div(width, 2), _ceil_div(height, 2)
    n = width * height + 2 * cw * ch
    return n * (1 if bit_depth == 8 else 2)


def load_yuv(path, width: int, height: int, bit_depth: int,
             frame_index: int = 0) -> Frame:
    """Read the frame_index-th frame of a raw planar 4:2:0 file."""
    nbytes = _frame_bytes(width, height, bit_depth)
    with open(path, "rb") as f:
        f.seek(frame_index * nbytes)
        raw = f.read(nbytes)
    if len(raw) < nbytes:
        raise FrameError(f"file too short for frame {frame_index} "
                         f"({len(raw)} of {nbytes} bytes)")
    dtype = np.uint8 if bit_depth == 8 else np.dtype("<u2")
    data = np.frombuffer(raw, dtype=dtype)
    if bit_depth == 10 and data.max(initial=0) > 1023:
        raise FrameError("sample out of range for 10-bit input")
    cw, ch = _ceil_div(width, 2), _ceil_div(height, 2)
    ny, nc = width * height, cw * ch
    y = data[:ny].reshape(height, width)
    u = data[ny:ny + nc].reshape(ch, cw)
    v = data[ny + nc:].reshape(ch, cw)
    return Frame(Plane(y, bit_depth), Plane(u, bit_depth), Plane(v, bit_depth))


def save_yuv(frame: Frame, path, append: bool = False) -> None:
    """Write a frame as raw planar 4:2:0; round-trips bit-exactly."""
    dtype = np.uint8 if frame.bit_depth == 8 else np.dtype("<u2")
    with open(path, "ab" if append else "wb") as f:
        for p in (frame.y, frame.u, frame.v):
            f.write(np.ascontiguousarray(p.samples, dtype=dtype).tobytes())


def count_frames(path, width: int, height: int, bit_depth: int) -> int:
    import os
    return os.path.getsize(path) // _frame_bytes(width, height, bit_depth)


# -- metrics ------------------------------------------------------------------

def sse(a: np.ndarray, b: np.ndarray) -> int:
    """Sum of squared sample differences, exact in integer arithmetic."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise FrameError(f"shape mismatch {a.shape} vs {b.shape}")
    d = a.astype(np.int64) - b.astype(np.int64)
    return int(np.sum(d * d))


def psnr(a: Plane, b: Plane) -> float:
    """Peak SNR in dB; math.inf marks a lossless (bit-identical) pair."""
    if (a.width, a.height) != (b.width, b.height):
        raise FrameError("plane dimensions differ")
    if a.bit_depth != b.bit_depth:
        raise FrameError("plane bit depths differ")
    err = sse(a.samples, b.samples)
    if err == 0:
        return math.inf
    mse = err / (a.width * a.height)
    return 10.0 * math.log10(a.max_value ** 2 / mse)


# -- 4:2:0 <-> 4:4:4 resampling ----------------------------------------------

def upsample_chroma_nn(frame: Frame) -> np.ndarray:
    """Y plus nearest-neighbour upsampled U/V as an int32 (3, H, W) block.

    Chroma samples are replicated 2x2; odd luma sizes clamp replication
    at the right/bottom edge.
    """
    h, w = frame.height, frame.width
    out = np.empty((3, h, w), dtype=np.int32)
    out[0] = frame.y.samples
    for k, p in ((1, frame.u), (2, frame.v)):
        up = np.repeat(np.repeat(p.samples, 2, axis=0), 2, axis=1)
        out[k] = up[:h, :w]
    return out


def downsample_mean(full: np.ndarray) -> np.ndarray:
    """Rounded 2x2 mean from luma resolution down to chroma resolution.

    Edge rows/columns of odd-sized input are handled by replication,
    which equals the mean over the edge-clipped source block. Halves
    round up (toward +inf), so the result is integer-exact. Works on
    signed values (used for correction maps) as well as samples.
    """
    full = np.asarray(full, dtype=np.int64)
    h, w = full.shape
    if h % 2:
        full = np.vstack([full, full[-1:]])
    if w % 2:
        full = np.hstack([full, full[:, -1:]])
    s = full[0::2, 0::2] + full[0::2, 1::2] + full[1::2, 0::2] + full[1::2, 1::2]
    return ((s + 2) >> 2).astype(np.int32)


def clip_to_range(a: np.ndarray, bit_depth: int) -> np.ndarray:
    return np.clip(a, 0, (1 << bit_depth) - 1).astype(np.int32)
