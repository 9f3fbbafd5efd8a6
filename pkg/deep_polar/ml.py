"""
Exhaustive maximum-likelihood reference decoders.

AWGN: the codeword with the largest correlation <1 - 2c, y> (equivalently
the smallest Euclidean distance to y; any positive multiple of y such as
the channel LLRs gives the same decision). Messages are scanned in
lexicographic order with d_1 as the most significant bit and the first
maximum wins.

BEC: erasures are zero LLRs. The unerased coordinates give a GF(2) system
for the message; anything but a unique solution is a failure.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np

from deep_polar.config import settings
from deep_polar.construction import DeepPolarCode
from deep_polar.encoder import generator_matrix
from deep_polar.errors import InvalidArgument
from deep_polar.gf2 import BitVector, Gf2Matrix, gf2_solve
from deep_polar.models import DecodeResult

CACHED_CODEBOOK_K = 16
CHUNK_BITS = 14


def _message_rows(start: int, stop: int, k: int) -> np.ndarray:
    numbers = np.arange(start, stop, dtype=np.int64)
    return ((numbers[:, None] >> np.arange(k - 1, -1, -1)) & 1).astype(np.uint8)


def _bpsk_codewords(generator: np.ndarray, messages: np.ndarray) -> np.ndarray:
    codewords = (messages.astype(np.int64) @ generator.astype(np.int64)) & 1
    return (1 - 2 * codewords).astype(np.int8)


@lru_cache(maxsize=8)
def bpsk_codebook(code: DeepPolarCode) -> np.ndarray:
    """(2^K, N) int8 BPSK codebook in lexicographic message order."""
    if code.k > CACHED_CODEBOOK_K:
        raise InvalidArgument(f"codebook cache holds K <= {CACHED_CODEBOOK_K}, got {code.k}")
    book = _bpsk_codewords(generator_matrix(code).entries, _message_rows(0, 1 << code.k, code.k))
    book.setflags(write=False)
    return book


def _check_guard(code: DeepPolarCode, max_k: int | None) -> None:
    limit = settings.max_enum_k if max_k is None else max_k
    if code.k > limit:
        raise InvalidArgument(f"exhaustive search over 2^{code.k} messages exceeds the 2^{limit} guard")


def ml_decode_awgn(code: DeepPolarCode, y: np.ndarray, *, max_k: int | None = None) -> DecodeResult:
    _check_guard(code, max_k)
    y = np.asarray(y, dtype=float).reshape(-1)
    if y.size != code.n:
        raise InvalidArgument(f"expected {code.n} channel values, got {y.size}")
    if code.k <= CACHED_CODEBOOK_K:
        scores = bpsk_codebook(code) @ y
        best = int(np.argmax(scores))
        best_score = float(scores[best])
    else:
        generator = generator_matrix(code).entries
        best, best_score = -1, -np.inf
        step = 1 << CHUNK_BITS
        for start in range(0, 1 << code.k, step):
            scores = _bpsk_codewords(generator, _message_rows(start, start + step, code.k)) @ y
            local = int(np.argmax(scores))
            if scores[local] > best_score:
                best, best_score = start + local, float(scores[local])
    message = BitVector.from_string(format(best, f"0{code.k}b"))
    return DecodeResult(message=message, success=True, path_metric=-best_score)


def ml_decode_bec(code: DeepPolarCode, llr: np.ndarray) -> DecodeResult:
    llr = np.asarray(llr, dtype=float).reshape(-1)
    if llr.size != code.n:
        raise InvalidArgument(f"expected {code.n} LLRs, got {llr.size}")
    known = np.flatnonzero(llr != 0.0)
    if known.size == 0:
        return DecodeResult(message=BitVector.zeros(code.k), success=False, status="ambiguous")
    generator = generator_matrix(code).entries
    system = Gf2Matrix(generator[:, known].T)
    observed = BitVector.from_array((llr[known] < 0).astype(np.uint8))
    solved = gf2_solve(system, observed)
    if solved.status == "unique":
        return DecodeResult(message=solved.solution, success=True, status="unique")
    status = "ambiguous" if solved.status == "multiple" else "inconsistent"
    return DecodeResult(message=BitVector.zeros(code.k), success=False, status=status)


def consistent_messages(code: DeepPolarCode, llr: np.ndarray, *, max_k: int | None = None) -> np.ndarray:
    """Every message whose codeword agrees with the unerased positions (exhaustive)."""
    _check_guard(code, max_k)
    llr = np.asarray(llr, dtype=float).reshape(-1)
    known = np.flatnonzero(llr != 0.0)
    target = (llr[known] < 0).astype(np.uint8)
    messages = _message_rows(0, 1 << code.k, code.k)
    codewords = (messages.astype(np.int64) @ generator_matrix(code).entries.astype(np.int64)) & 1
    hits = np.all(codewords[:, known] == target, axis=1)
    return messages[hits]
