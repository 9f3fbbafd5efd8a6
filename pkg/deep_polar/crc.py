"""Systematic CRC: message bits enter high-order first, the remainder is appended last."""
from __future__ import annotations

from functools import lru_cache

import numpy as np

from deep_polar.construction import CrcSpec
from deep_polar.gf2 import BitVector


def crc_remainder(bits: BitVector, spec: CrcSpec) -> BitVector:
    """Remainder of d(x) x^deg mod g(x) by long division, high-order bit first."""
    deg = spec.degree
    register = int(bits.to_string(), 2) << deg
    for shift in range(bits.length - 1, -1, -1):
        if register >> (shift + deg) & 1:
            register ^= spec.poly << shift
    return BitVector.from_string(format(register, f"0{deg}b"))


def crc_append(bits: BitVector, spec: CrcSpec) -> BitVector:
    return bits.concat(crc_remainder(bits, spec))


def crc_check(extended: BitVector, spec: CrcSpec) -> bool:
    if extended.length <= spec.degree:
        return False
    k = extended.length - spec.degree
    message = extended.prefix(k)
    return crc_append(message, spec) == extended


@lru_cache(maxsize=64)
def crc_matrix(k: int, spec: CrcSpec) -> np.ndarray:
    """K x deg parity matrix; row j is the remainder of the j-th unit message."""
    rows = [crc_remainder(BitVector.unit(k, j), spec).to_array() for j in range(1, k + 1)]
    out = np.array(rows, dtype=np.uint8)
    out.setflags(write=False)
    return out


def crc_append_rows(messages: np.ndarray, spec: CrcSpec) -> np.ndarray:
    """Batched crc_append over rows of a (B, K) 0/1 array."""
    messages = np.asarray(messages, dtype=np.uint8)
    parity = (messages.astype(np.int64) @ crc_matrix(messages.shape[-1], spec)) & 1
    return np.concatenate([messages, parity.astype(np.uint8)], axis=-1)


def crc_check_rows(extended: np.ndarray, spec: CrcSpec) -> np.ndarray:
    """Boolean mask of rows whose trailing bits match the CRC of the leading ones."""
    extended = np.asarray(extended, dtype=np.uint8)
    k = extended.shape[-1] - spec.degree
    if k < 1:
        return np.zeros(extended.shape[:-1], dtype=bool)
    recomputed = crc_append_rows(extended[..., :k], spec)
    return np.all(recomputed == extended, axis=-1)
