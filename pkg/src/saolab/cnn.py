"""Small per-CTU networks: reference float path, 16-bit integer path.

Both architectures are plain stacks of six 3x3 convolutions with ReLU
on the hidden layers and a linear final layer:

    v1: {ni, 16, 32, 64, 32, 16, no}
    v2: {ni, 16, 16, 32, 16, 16, no}

where a luma network maps 1 channel (Y) to 1 weight map and a chroma
network maps 3 channels (4:4:4 YUV) to 2 maps (U, V).

Tensors are numpy arrays shaped (channels, height, width): float64 in
[0, 1] on the reference path, int16 with A fraction bits (default 12)
on the integer path. The integer path accumulates in saturating int32
and is deterministic across platforms and backends; see saolab.kernels
for the exact fixed-point rules.

Weight containers:

    "SAOW" float:     magic, version u16=1, arch u8 (1=v1, 2=v2),
                      role u8 (0=luma, 1=chroma), layer count u8, then
                      per layer: in_ch u16, out_ch u16, kernel u8=3,
                      float64 weights in [out][in][ky][kx] order,
                      float64 biases [out]. Little-endian throughout.
    "SAOQ" quantized: magic, version u16=1, A u8, arch u8, role u8,
                      layer count u8, then per layer: shift u8,
                      int16 weights (same order), int32 biases.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass

import numpy as np

from . import kernels

KERNEL = 3
NUM_LAYERS = 6
DEFAULT_FRACTION_BITS = 12

_HIDDEN = {"v1": (16, 32, 64, 32, 16), "v2": (16, 16, 32, 16, 16)}
_IO_CHANNELS = {"luma": (1, 1), "chroma": (3, 2)}
_ARCH_ID = {"v1": 1, "v2": 2}
_ROLE_ID = {"luma": 0, "chroma": 1}

INT16_MAX = 32767
INT32_MAX = 2**31 - 1


class NetworkError(ValueError):
    """Raised for malformed network specs or weight containers."""


def channel_ladder(arch: str, role: str) -> tuple[int, ...]:
    """Channel counts n(0)..n(6) for an architecture/role pair."""
    if arch not in _HIDDEN:
        raise NetworkError(f"unknown architecture {arch!r}")
    if role not in _IO_CHANNELS:
        raise NetworkError(f"unknown role {role!r}")
    ni, no = _IO_CHANNELS[role]
    return (ni, *_HIDDEN[arch], no)


def mac_per_pel(arch: str, role: str, m: int = 1) -> int:
    """Multiply-accumulates per pixel for m combined networks."""
    ladder = channel_ladder(arch, role)
    return m * KERNEL * KERNEL * sum(a * b for a, b in zip(ladder, ladder[1:]))


@dataclass(frozen=True)
class LayerSpec:
    weights: np.ndarray  # float64 (out_ch, in_ch, 3, 3)
    bias: np.ndarray     # float64 (out_ch,)

    def __post_init__(self):
        w = np.ascontiguousarray(np.asarray(self.weights, dtype=np.float64))
        b = np.ascontiguousarray(np.asarray(self.bias, dtype=np.float64))
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "bias", b)
        if w.ndim != 4 or w.shape[2:] != (KERNEL, KERNEL):
            raise NetworkError(f"weights must be (out, in, 3, 3), got {w.shape}")
        if b.shape != (w.shape[0],):
            raise NetworkError("bias length must match output channels")
        if not (np.isfinite(w).all() and np.isfinite(b).all()):
            raise NetworkError("non-finite weight or bias")

    @property
    def out_ch(self) -> int:
        return self.weights.shape[0]

    @property
    def in_ch(self) -> int:
        return self.weights.shape[1]


@dataclass(frozen=True)
class NetworkSpec:
    arch: str  # "v1" | "v2"
    role: str  # "luma" | "chroma"
    layers: tuple[LayerSpec, ...]

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))
        ladder = channel_ladder(self.arch, self.role)
        if len(self.layers) != NUM_LAYERS:
            raise NetworkError(f"expected {NUM_LAYERS} layers, got {len(self.layers)}")
        for i, layer in enumerate(self.layers):
            if (layer.in_ch, layer.out_ch) != (ladder[i], ladder[i + 1]):
                raise NetworkError(
                    f"layer {i} is {layer.in_ch}->{layer.out_ch}, "
                    f"ladder requires {ladder[i]}->{ladder[i + 1]}")

    def mac_per_pel(self, m: int = 1) -> int:
        return mac_per_pel(self.arch, self.role, m)


@dataclass(frozen=True)
class QuantLayer:
    shift: int
    weights: np.ndarray  # int16 (out_ch, in_ch, 3, 3)
    bias: np.ndarray     # int32 (out_ch,), at 2**(A + shift) scale


@dataclass(frozen=True)
class QuantizedNetwork:
    arch: str
    role: str
    fraction_bits: int  # A: fraction bits of activations and outputs
    layers: tuple[QuantLayer, ...]


def _round_half_away(x: np.ndarray) -> np.ndarray:
    return np.where(x >= 0, np.floor(x + 0.5), np.ceil(x - 0.5))


def quantize(net: NetworkSpec, fraction_bits: int = DEFAULT_FRACTION_BITS) -> QuantizedNetwork:
    """Convert float weights to the int16 form used by infer_int.

    Per layer, the shift is the largest value in [0, 15] for which the
    rounded scaled max-magnitude weight still fits int16; weights round
    half away from zero and biases are stored pre-scaled to the
    accumulator scale 2**(A + shift), saturated to int32.
    """
    qlayers = []
    for layer in net.layers:
        maxabs = float(np.max(np.abs(layer.weights))) if layer.weights.size else 0.0
        shift = 0
        for s in range(15, -1, -1):
            if math.floor(maxabs * (1 << s) + 0.5) <= INT16_MAX:
                shift = s
                break
        qw = _round_half_away(layer.weights * (1 << shift))
        qw = np.clip(qw, -INT16_MAX - 1, INT16_MAX).astype(np.int16)
        qb = _round_half_away(layer.bias * float(1 << (fraction_bits + shift)))
        qb = np.clip(qb, -INT32_MAX - 1, INT32_MAX).astype(np.int32)
        qlayers.append(QuantLayer(shift, qw, qb))
    return QuantizedNetwork(net.arch, net.role, fraction_bits, tuple(qlayers))


def infer_float(net: NetworkSpec, inp: np.ndarray) -> np.ndarray:
    """Reference inference: float64 (ni, H, W) in [0,1] -> (no, H, W)."""
    x = np.asarray(inp, dtype=np.float64)
    if x.ndim != 3 or x.shape[0] != net.layers[0].in_ch:
        raise NetworkError(f"input shape {x.shape} does not match "
                           f"{net.layers[0].in_ch} input channels")
    for i, layer in enumerate(net.layers):
        x = kernels.conv3x3_float(x, layer.weights, layer.bias,
                                  relu=(i < len(net.layers) - 1))
    return x


def infer_int(qnet: QuantizedNetwork, inp: np.ndarray) -> np.ndarray:
    """Integer inference: int16 (ni, H, W) at A fraction bits -> (no, H, W).

    Saturation absorbs any overflow; the result depends only on the
    quantized weights and input values.
    """
    x = np.asarray(inp, dtype=np.int16)
    if x.ndim != 3 or x.shape[0] != qnet.layers[0].weights.shape[1]:
        raise NetworkError(f"input shape {x.shape} does not match network")
    for i, layer in enumerate(qnet.layers):
        x = kernels.conv3x3_int(x, layer.weights, layer.bias, layer.shift,
                                relu=(i < len(qnet.layers) - 1))
    return x


# -- sample <-> tensor conversion ---------------------------------------------

def samples_to_float(samples: np.ndarray, bit_depth: int) -> np.ndarray:
    """Normalize integer samples to [0, 1] float64."""
    return np.asarray(samples, dtype=np.float64) / ((1 << bit_depth) - 1)


def samples_to_q(samples: np.ndarray, bit_depth: int,
                 fraction_bits: int = DEFAULT_FRACTION_BITS) -> np.ndarray:
    """Normalize integer samples to int16 fixed point at A fraction bits.

    Integer-exact round-half-up of s / (2**bit_depth - 1) * 2**A, so
    encoder and decoder agree on every platform.
    """
    maxval = (1 << bit_depth) - 1
    s = np.asarray(samples, dtype=np.int64)
    q = (s * (1 << (fraction_bits + 1)) + maxval) // (2 * maxval)
    return q.astype(np.int16)


# -- constructed networks ------------------------------------------------------

def random_network(arch: str, role: str, rng: np.random.Generator,
                   weight_scale: float | None = None) -> NetworkSpec:
    """Seeded random network with fan-in scaled weights in [-1, 1].

    The default scale sqrt(1 / fan_in) keeps activations within the
    integer path's +-8.0 headroom for inputs in [0, 1].
    """
    ladder = channel_ladder(arch, role)
    layers = []
    for cin, cout in zip(ladder, ladder[1:]):
        a = weight_scale if weight_scale is not None else min(
            1.0, math.sqrt(1.0 / (cin * KERNEL * KERNEL)))
        w = rng.uniform(-a, a, size=(cout, cin, KERNEL, KERNEL))
        b = rng.uniform(-a / 4, a / 4, size=cout)
        layers.append(LayerSpec(w, b))
    return NetworkSpec(arch, role, tuple(layers))


def constant_map_network(arch: str, role: str, value: float = 1.0) -> NetworkSpec:
    """Network whose weight maps are identically `value` (zero weights,
    final bias = value)."""
    ladder = channel_ladder(arch, role)
    layers = []
    for i, (cin, cout) in enumerate(zip(ladder, ladder[1:])):
        w = np.zeros((cout, cin, KERNEL, KERNEL))
        b = np.full(cout, value) if i == NUM_LAYERS - 1 else np.zeros(cout)
        layers.append(LayerSpec(w, b))
    return NetworkSpec(arch, role, tuple(layers))


def passthrough_network(arch: str, role: str) -> NetworkSpec:
    """Network whose every output map equals input channel 0.

    Unit centre taps on a single channel path; exact under quantization
    because 1.0 scales to a power of two.
    """
    ladder = channel_ladder(arch, role)
    layers = []
    for i, (cin, cout) in enumerate(zip(ladder, ladder[1:])):
        w = np.zeros((cout, cin, KERNEL, KERNEL))
        if i == NUM_LAYERS - 1:
            w[:, 0, 1, 1] = 1.0  # fan channel 0 out to every output map
        else:
            w[0, 0, 1, 1] = 1.0
        layers.append(LayerSpec(w, np.zeros(cout)))
    return NetworkSpec(arch, role, tuple(layers))


# -- weight containers ---------------------------------------------------------

_SAOW_MAGIC = b"SAOW"
_SAOQ_MAGIC = b"SAOQ"


def _ids_to_names(arch_id: int, role_id: int) -> tuple[str, str]:
    archs = {v: k for k, v in _ARCH_ID.items()}
    roles = {v: k for k, v in _ROLE_ID.items()}
    if arch_id not in archs:
        raise NetworkError(f"unknown arch id {arch_id}")
    if role_id not in roles:
        raise NetworkError(f"unknown role id {role_id}")
    return archs[arch_id], roles[role_id]


def save_saow(net: NetworkSpec, path) -> None:
    with open(path, "wb") as f:
        f.write(_SAOW_MAGIC)
        f.write(struct.pack("<HBBB", 1, _ARCH_ID[net.arch], _ROLE_ID[net.role],
                            len(net.layers)))
        for layer in net.layers:
            f.write(struct.pack("<HHB", layer.in_ch, layer.out_ch, KERNEL))
            f.write(layer.weights.astype("<f8").tobytes())
            f.write(layer.bias.astype("<f8").tobytes())


def load_saow(path) -> NetworkSpec:
    with open(path, "rb") as f:
        data = f.read()
    if data[:4] != _SAOW_MAGIC:
        raise NetworkError("bad magic, not a SAOW container")
    version, arch_id, role_id, n_layers = struct.unpack_from("<HBBB", data, 4)
    if version != 1:
        raise NetworkError(f"unsupported SAOW version {version}")
    arch, role = _ids_to_names(arch_id, role_id)
    off = 9
    layers = []
    for _ in range(n_layers):
        if off + 5 > len(data):
            raise NetworkError("truncated SAOW container")
        cin, cout, kern = struct.unpack_from("<HHB", data, off)
        off += 5
        if kern != KERNEL:
            raise NetworkError(f"unsupported kernel size {kern}")
        nw, nb = cout * cin * KERNEL * KERNEL, cout
        need = (nw + nb) * 8
        if off + need > len(data):
            raise NetworkError("truncated SAOW container")
        w = np.frombuffer(data, dtype="<f8", count=nw, offset=off)
        off += nw * 8
        b = np.frombuffer(data, dtype="<f8", count=nb, offset=off)
        off += nb * 8
        layers.append(LayerSpec(w.reshape(cout, cin, KERNEL, KERNEL), b))
    return NetworkSpec(arch, role, tuple(layers))


def save_saoq(qnet: QuantizedNetwork, path) -> None:
    with open(path, "wb") as f:
        f.write(_SAOQ_MAGIC)
        f.write(struct.pack("<HBBBB", 1, qnet.fraction_bits,
                            _ARCH_ID[qnet.arch], _ROLE_ID[qnet.role],
                            len(qnet.layers)))
        for layer in qnet.layers:
            f.write(struct.pack("<B", layer.shift))
            f.write(layer.weights.astype("<i2").tobytes())
            f.write(layer.bias.astype("<i4").tobytes())


def load_saoq(path) -> QuantizedNetwork:
    with open(path, "rb") as f:
        data = f.read()
    if data[:4] != _SAOQ_MAGIC:
        raise NetworkError("bad magic, not a SAOQ container")
    version, a_bits, arch_id, role_id, n_layers = struct.unpack_from("<HBBBB", data, 4)
    if version != 1:
        raise NetworkError(f"unsupported SAOQ version {version}")
    arch, role = _ids_to_names(arch_id, role_id)
    ladder = channel_ladder(arch, role)
    if n_layers != NUM_LAYERS:
        raise NetworkError(f"expected {NUM_LAYERS} layers, got {n_layers}")
    off = 10
    layers = []
    for cin, cout in zip(ladder, ladder[1:]):
        nw = cout * cin * KERNEL * KERNEL
        need = 1 + nw * 2 + cout * 4
        if off + need > len(data):
            raise NetworkError("truncated SAOQ container")
        shift = data[off]
        off += 1
        w = np.frombuffer(data, dtype="<i2", count=nw, offset=off)
        off += nw * 2
        b = np.frombuffer(data, dtype="<i4", count=cout, offset=off)
        off += cout * 4
        layers.append(QuantLayer(shift, w.reshape(cout, cin, KERNEL, KERNEL).astype(np.int16),
                                 b.astype(np.int32)))
    return QuantizedNetwork(arch, role, a_bits, tuple(layers))
