# cython: language_level=3
"""Compiled 3x3 convolution kernels.

Must stay bit-identical to pyfallback: int32 accumulator saturated
after every add with terms ordered (in_channel, ky, kx), saturating
bias add, round-half-up shift computed in 64-bit, int16 saturation,
optional ReLU. Padding is width-1 edge replication.
"""

from libc.stdint cimport int16_t, int32_t, int64_t

import numpy as np

cdef int64_t I32_MIN = -(<int64_t>1 << 31)
cdef int64_t I32_MAX = (<int64_t>1 << 31) - 1
cdef int64_t I16_MIN = -(<int64_t>1 << 15)
cdef int64_t I16_MAX = (<int64_t>1 << 15) - 1


cdef inline int64_t sat(int64_t v, int64_t lo, int64_t hi) nogil:
    if v < lo:
        return lo
    if v > hi:
        return hi
    return v


def conv3x3_int(inp, weights, bias, int shift, bint relu):
    """One quantized layer: int16 (C,H,W) -> int16 (O,H,W)."""
    cdef const int16_t[:, :, ::1] x = np.ascontiguousarray(inp, dtype=np.int16)
    cdef const int16_t[:, :, :, ::1] w = np.ascontiguousarray(weights, dtype=np.int16)
    cdef const int32_t[::1] b = np.ascontiguousarray(bias, dtype=np.int32)
    cdef Py_ssize_t cin = x.shape[0], h = x.shape[1], wd = x.shape[2]
    cdef Py_ssize_t cout = w.shape[0]

    pad_arr = np.pad(np.asarray(inp, dtype=np.int16),
                     ((0, 0), (1, 1), (1, 1)), mode="edge")
    cdef const int16_t[:, :, ::1] p = pad_arr
    out_arr = np.empty((cout, h, wd), dtype=np.int16)
    cdef int16_t[:, :, ::1] out = out_arr
    acc_arr = np.zeros((h, wd), dtype=np.int32)
    cdef int32_t[:, ::1] acc = acc_arr

    cdef Py_ssize_t o, ci, ky, kx, yy, xx
    cdef int32_t wv
    cdef int64_t t, half
    with nogil:
        for o in range(cout):
            for yy in range(h):
                for xx in range(wd):
                    acc[yy, xx] = 0
            for ci in range(cin):
                for ky in range(3):
                    for kx in range(3):
                        wv = w[o, ci, ky, kx]
                        if wv == 0:
                            continue
                        for yy in range(h):
                            for xx in range(wd):
                                t = <int64_t>acc[yy, xx] + <int64_t>wv * p[ci, yy + ky, xx + kx]
                                acc[yy, xx] = <int32_t>sat(t, I32_MIN, I32_MAX)
            half = (<int64_t>1 << (shift - 1)) if shift > 0 else 0
            for yy in range(h):
                for xx in range(wd):
                    t = sat(<int64_t>acc[yy, xx] + b[o], I32_MIN, I32_MAX)
                    if shift > 0:
                        t = (t + half) >> shift
                    t = sat(t, I16_MIN, I16_MAX)
                    if relu and t < 0:
                        t = 0
                    out[o, yy, xx] = <int16_t>t
    return out_arr


def conv3x3_float(inp, weights, bias, bint relu):
    """One reference layer: float64 (C,H,W) -> float64 (O,H,W)."""
    cdef const double[:, :, ::1] x = np.ascontiguousarray(inp, dtype=np.float64)
    cdef const double[:, :, :, ::1] w = np.ascontiguousarray(weights, dtype=np.float64)
    cdef const double[::1] b = np.ascontiguousarray(bias, dtype=np.float64)
    cdef Py_ssize_t cin = x.shape[0], h = x.shape[1], wd = x.shape[2]
    cdef Py_ssize_t cout = w.shape[0]

    pad_arr = np.pad(np.asarray(inp, dtype=np.float64),
                     ((0, 0), (1, 1), (1, 1)), mode="edge")
    cdef const double[:, :, ::1] p = pad_arr
    out_arr = np.empty((cout, h, wd), dtype=np.float64)
    cdef double[:, :, ::1] out = out_arr
    acc_arr = np.zeros((h, wd), dtype=np.float64)
    cdef double[:, ::1] acc = acc_arr

    cdef Py_ssize_t o, ci, ky, kx, yy, xx
    cdef double wv, t
    with nogil:
        for o in range(cout):
            for yy in range(h):
                for xx in range(wd):
                    acc[yy, xx] = 0.0
            for ci in range(cin):
                for ky in range(3):
                    for kx in range(3):
                        wv = w[o, ci, ky, kx]
                        for yy in range(h):
                            for xx in range(wd):
                                acc[yy, xx] = acc[yy, xx] + wv * p[ci, yy + ky, xx + kx]
            for yy in range(h):
                for xx in range(wd):
                    t = acc[yy, xx] + b[o]
                    if relu and t < 0.0:
                        t = 0.0
                    out[o, yy, xx] = t
    return out_arr
