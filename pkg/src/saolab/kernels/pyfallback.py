"""Pure-numpy 3x3 convolution kernels.

Bit-identical twin of the compiled extension. The integer path follows
fixed-point rules that both backends must reproduce exactly:

- products are int16*int16 (always representable in int32);
- the accumulator is int32 with saturation after every add, terms
  ordered (in_channel, ky, kx);
- the bias add saturates in int32;
- the right shift rounds half up, computed in 64-bit so the rounding
  add cannot overflow, then saturates to int16;
- ReLU clamps negatives to zero when requested.

Spatial padding is width-1 edge replication, so output size equals
input size.
"""

from __future__ import annotations

import numpy as np

INT32_MIN = -(1 << 31)
INT32_MAX = (1 << 31) - 1
INT16_MIN = -(1 << 15)
INT16_MAX = (1 << 15) - 1


def conv3x3_int(inp: np.ndarray, weights: np.ndarray, bias: np.ndarray,
                shift: int, relu: bool) -> np.ndarray:
    """One quantized layer: int16 (C,H,W) -> int16 (O,H,W)."""
    inp = np.asarray(inp, dtype=np.int16)
    weights = np.asarray(weights, dtype=np.int16)
    bias = np.asarray(bias, dtype=np.int32)
    cin, h, w = inp.shape
    cout = weights.shape[0]
    padded = np.pad(inp, ((0, 0), (1, 1), (1, 1)), mode="edge").astype(np.int64)
    out = np.empty((cout, h, w), dtype=np.int16)
    for o in range(cout):
        acc = np.zeros((h, w), dtype=np.int64)
        for ci in range(cin):
            for ky in range(3):
                for kx in range(3):
                    wv = int(weights[o, ci, ky, kx])
                    if wv == 0:
                        continue
                    acc += wv * padded[ci, ky:ky + h, kx:kx + w]
                    np.clip(acc, INT32_MIN, INT32_MAX, out=acc)
        acc += int(bias[o])
        np.clip(acc, INT32_MIN, INT32_MAX, out=acc)
        if shift > 0:
            acc = (acc + (1 << (shift - 1))) >> shift
        np.clip(acc, INT16_MIN, INT16_MAX, out=acc)
        if relu:
            np.clip(acc, 0, None, out=acc)
        out[o] = acc.astype(np.int16)
    return out


def conv3x3_float(inp: np.ndarray, weights: np.ndarray, bias: np.ndarray,
                  relu: bool) -> np.ndarray:
    """One reference layer: float64 (C,H,W) -> float64 (O,H,W)."""
    inp = np.asarray(inp, dtype=np.float64)
    weights = np.asarray(weights, dtype=np.float64)
    bias = np.asarray(bias, dtype=np.float64)
    cin, h, w = inp.shape
    cout = weights.shape[0]
    padded = np.pad(inp, ((0, 0), (1, 1), (1, 1)), mode="edge")
    out = np.empty((cout, h, w), dtype=np.float64)
    for o in range(cout):
        acc = np.zeros((h, w), dtype=np.float64)
        for ci in range(cin):
            for ky in range(3):
                for kx in range(3):
                    acc += weights[o, ci, ky, kx] * padded[ci, ky:ky + h, kx:kx + w]
        acc += bias[o]
        if relu:
            np.maximum(acc, 0.0, out=acc)
        out[o] = acc
    return out
