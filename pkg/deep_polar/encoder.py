"""
Successive deep polar encoding and its inverse.

Message layout: the K message bits (plus CRC when configured) are split in
layer order 1..L, each chunk filling its layer's I in ascending index order.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np

from deep_polar.construction import DeepPolarCode
from deep_polar.crc import crc_append, crc_append_rows
from deep_polar.errors import InvalidArgument
from deep_polar.gf2 import (
    BitVector,
    Gf2Matrix,
    polar_transform,
    polar_transform_rows,
    transpose_transform,
    transpose_transform_rows,
)


def _scatter(bits: BitVector | None, positions: tuple[int, ...], value: int = 0) -> int:
    """Place `bits` (in order) at 1-based positions of a packed int."""
    if bits is None:
        return value
    for element, position in zip(bits, positions):
        if element:
            value |= 1 << (position - 1)
    return value


def _gather(vector: BitVector, positions: tuple[int, ...]) -> list[int]:
    return [vector[p - 1] for p in positions]


def extend_message(code: DeepPolarCode, d: BitVector) -> BitVector:
    if len(d) != code.k:
        raise InvalidArgument(f"message has {len(d)} bits, code expects K={code.k}")
    return crc_append(d, code.crc) if code.crc else d


def split_message(d: BitVector, code: DeepPolarCode) -> list[BitVector | None]:
    """Contiguous split in layer order; None for a layer with K_l = 0."""
    if len(d) != code.k_total:
        raise InvalidArgument(f"extended message has {len(d)} bits, layers hold {code.k_total}")
    bits = d.to_bits()
    chunks: list[BitVector | None] = []
    start = 0
    for layer in code.layers:
        chunk = bits[start : start + layer.k]
        chunks.append(BitVector.from_bits(chunk) if chunk else None)
        start += layer.k
    return chunks


def layer_inputs(code: DeepPolarCode, d_ext: BitVector) -> list[BitVector]:
    """Input vector u_l of every layer for an extended message."""
    chunks = split_message(d_ext, code)
    inputs: list[BitVector] = []
    previous_output: BitVector | None = None
    for layer, chunk in zip(code.layers, chunks):
        value = _scatter(chunk, layer.info)
        value = _scatter(previous_output, layer.connection, value)
        u = BitVector(value, layer.n)
        inputs.append(u)
        if layer.direction == "transpose":
            previous_output = transpose_transform(u)
    return inputs


def encode(code: DeepPolarCode, d: BitVector) -> BitVector:
    return polar_transform(layer_inputs(code, extend_message(code, d))[-1])


def encode_rows(code: DeepPolarCode, messages: np.ndarray) -> np.ndarray:
    """Batched encode over rows of a (B, K) 0/1 array; returns (B, N)."""
    messages = np.asarray(messages, dtype=np.uint8)
    if messages.ndim != 2 or messages.shape[1] != code.k:
        raise InvalidArgument(f"expected messages of shape (B, {code.k}), got {messages.shape}")
    extended = crc_append_rows(messages, code.crc) if code.crc else messages
    batch = extended.shape[0]
    start = 0
    previous: np.ndarray | None = None
    for layer in code.layers:
        u = np.zeros((batch, layer.n), dtype=np.uint8)
        u[:, np.asarray(layer.info, dtype=int) - 1] = extended[:, start : start + layer.k]
        start += layer.k
        if previous is not None:
            u[:, np.asarray(layer.connection) - 1] = previous
        if layer.direction == "transpose":
            previous = transpose_transform_rows(u)
        else:
            return polar_transform_rows(u)
    raise AssertionError("outer layer must be forward")


def inner_connection_rows(code: DeepPolarCode, inner: np.ndarray) -> np.ndarray:
    """Output of layer L-1 for rows of inner-layer information bits; shape (H, N_{L-1})."""
    inner = np.asarray(inner, dtype=np.uint8)
    if len(code.layers) < 2 or inner.shape[-1] != code.inner_bits:
        raise InvalidArgument(f"expected rows of {code.inner_bits} inner bits on a multi-layer code")
    start = 0
    previous: np.ndarray | None = None
    for layer in code.layers[:-1]:
        u = np.zeros((inner.shape[0], layer.n), dtype=np.uint8)
        u[:, np.asarray(layer.info, dtype=int) - 1] = inner[:, start : start + layer.k]
        start += layer.k
        if previous is not None:
            u[:, np.asarray(layer.connection) - 1] = previous
        previous = transpose_transform_rows(u)
    return previous


def extract_message_rows(code: DeepPolarCode, u_outer: np.ndarray) -> np.ndarray:
    """Peel the layers off outer input rows: returns (P, K_total) extended messages."""
    u = np.asarray(u_outer, dtype=np.uint8)
    pieces: list[np.ndarray] = []
    for position in range(len(code.layers) - 1, -1, -1):
        layer = code.layers[position]
        pieces.append(u[:, np.asarray(layer.info, dtype=int) - 1])
        if position > 0:
            u = transpose_transform_rows(u[:, np.asarray(layer.connection) - 1])
    return np.concatenate(pieces[::-1], axis=1)


def decode_message_bits(code: DeepPolarCode, u_outer: BitVector) -> BitVector:
    """Information bits (CRC included) from a decoded outer input vector."""
    if len(u_outer) != code.n:
        raise InvalidArgument(f"outer input has {len(u_outer)} bits, code has N={code.n}")
    bits: list[list[int]] = []
    u = u_outer
    for position in range(len(code.layers) - 1, -1, -1):
        layer = code.layers[position]
        bits.append(_gather(u, layer.info))
        if position > 0:
            u = transpose_transform(BitVector.from_bits(_gather(u, layer.connection)))
    return BitVector.from_bits([b for chunk in bits[::-1] for b in chunk])


def superposition_split(code: DeepPolarCode, d: BitVector) -> tuple[BitVector, BitVector]:
    """(x_P, x_TP): plain polar part from I_L and pre-transformed part from A_L."""
    u = layer_inputs(code, extend_message(code, d))[-1]
    info_mask = sum(1 << (i - 1) for i in code.outer.info)
    plain = BitVector(u.value & info_mask, code.n)
    connected = u ^ plain
    return polar_transform(plain), polar_transform(connected)


@lru_cache(maxsize=64)
def generator_matrix(code: DeepPolarCode) -> Gf2Matrix:
    """K x N generator; row j is the codeword of the j-th unit message (CRC included)."""
    return Gf2Matrix(encode_rows(code, np.eye(code.k, dtype=np.uint8)))
