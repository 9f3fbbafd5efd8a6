"""
Weight spectra and distance estimates.

weight_distribution walks the message space in Gray-code order, so each
codeword is the previous one XOR a single cached generator row. Blocks of
the message space can run in worker processes; each block restarts the
walk at its own Gray codeword.
"""
from __future__ import annotations

import itertools
import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from multiprocessing import Pool
from typing import Iterator, Sequence

import numpy as np

from deep_polar.channels import q_function
from deep_polar.config import LLR_MAX, settings
from deep_polar.construction import DeepPolarCode, code_from_sets, flat_inputs
from deep_polar.encoder import generator_matrix
from deep_polar.errors import InvalidArgument
from deep_polar.gf2 import BitVector, Gf2Matrix, gf2_solve, pack_rows, polar_transform_rows
from deep_polar.scl import list_decode

log = logging.getLogger("deep_polar.analysis")

BLOCK_BITS = 16


@dataclass(slots=True)
class WeightDistribution:
    k: int
    n: int
    counts: dict[int, int] = field(default_factory=dict)

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    @property
    def min_distance(self) -> int:
        nonzero = [w for w, c in self.counts.items() if w > 0 and c > 0]
        return min(nonzero) if nonzero else 0

    @property
    def a_dmin(self) -> int:
        return self.counts.get(self.min_distance, 0)

    def count(self, weight: int) -> int:
        return self.counts.get(weight, 0)

    def rows(self) -> list[tuple[int, int]]:
        return sorted(self.counts.items())

    def to_dict(self) -> dict[str, object]:
        return {"k": self.k, "n": self.n, "counts": {str(w): c for w, c in self.rows()}}


def gray_walk(rows: Sequence[int], start: int, stop: int) -> Iterator[tuple[int, int]]:
    """(message, packed codeword) for Gray indices start..stop-1; message bit j selects row j."""
    gray = start ^ (start >> 1)
    word = 0
    for j, row in enumerate(rows):
        if gray >> j & 1:
            word ^= row
    yield gray, word
    for t in range(start + 1, stop):
        word ^= rows[(t & -t).bit_length() - 1]
        yield t ^ (t >> 1), word


def _gray_block(rows: Sequence[int], start: int, stop: int) -> Counter:
    """Histogram of codeword weights for Gray indices start..stop-1."""
    return Counter(word.bit_count() for _, word in gray_walk(rows, start, stop))


def _gray_block_task(args: tuple[tuple[int, ...], int, int]) -> Counter:
    return _gray_block(*args)


def weight_distribution(code: DeepPolarCode, *, max_k: int | None = None, workers: int = 1) -> WeightDistribution:
    """Exact codeword weight histogram over all 2^K messages."""
    limit = settings.max_enum_k if max_k is None else max_k
    if code.k > limit:
        raise InvalidArgument(f"enumerating 2^{code.k} messages exceeds the 2^{limit} guard")
    rows = tuple(pack_rows(generator_matrix(code).entries))
    total = 1 << code.k
    step = min(total, 1 << BLOCK_BITS)
    blocks = [(rows, start, start + step) for start in range(0, total, step)]
    hist: Counter = Counter()
    if workers > 1 and len(blocks) > 1:
        with Pool(workers) as pool:
            for part in pool.imap_unordered(_gray_block_task, blocks):
                hist.update(part)
    else:
        for block in blocks:
            hist.update(_gray_block_task(block))
    log.debug("Weight distribution of N=%d K=%d: %s", code.n, code.k, sorted(hist.items()))
    return WeightDistribution(code.k, code.n, dict(sorted(hist.items())))


def min_weight_scl_estimate(code: DeepPolarCode, list_size: int) -> int:
    """
    Smallest nonzero codeword weight among the survivors of a list decoder
    fed the noiseless all-zero word. An upper bound on d_min; exact once
    the list holds every message.
    """
    if list_size < 2:
        raise InvalidArgument(f"list size must be >= 2, got {list_size}")
    outcome = list_decode(code, np.full(code.n, LLR_MAX), list_size, bpc=True)
    weights = polar_transform_rows(outcome.u).sum(axis=1)
    nonzero = weights[weights > 0]
    if nonzero.size == 0:
        raise InvalidArgument("no nonzero codeword survived; the code has K = 0")
    return int(nonzero.min())


def flat_codewords(code: DeepPolarCode, weight: int | None = None) -> int:
    """
    Number of codewords that are indicators of affine flats of the given
    power-of-two weight (the outer dmin by default).

    Those flats are the minimum-weight words of the Reed-Muller code over
    the outer mask, so a zero count means d_min > weight. Membership is
    solved against the generator, CRC and inner layers included.
    """
    weight = code.outer.dmin if weight is None else weight
    inputs, _ = flat_inputs(code.n, weight)
    frozen = np.asarray(code.outer.frozen, dtype=int) - 1
    candidates = inputs[~inputs[:, frozen].any(axis=1)] if frozen.size else inputs
    system = Gf2Matrix(generator_matrix(code).entries.T)
    found = 0
    for x in polar_transform_rows(candidates):
        found += gf2_solve(system, BitVector.from_array(x)).status == "unique"
    log.debug("N=%d K=%d: %d of %d weight-%d flats are codewords", code.n, code.k, found, len(inputs), weight)
    return found


def ml_bler_approx(a_dmin: int, dmin: int, snr: float) -> float:
    """A_dmin * Q(sqrt(dmin * snr)), snr linear (1 / sigma^2 for unit-energy BPSK)."""
    if snr < 0:
        raise InvalidArgument(f"snr must be non-negative, got {snr}")
    return a_dmin * q_function(math.sqrt(dmin * snr))


def best_subcode(n: int, info_superset: Sequence[int], k: int, *, max_k: int | None = None) -> tuple[DeepPolarCode, WeightDistribution]:
    """
    Exhaustive search over K-subsets of an information set, keeping the one
    with the largest minimum distance and then the fewest minimum-weight
    codewords. Ties keep the first subset in lexicographic order.
    """
    superset = sorted(info_superset)
    if not 1 <= k <= len(superset):
        raise InvalidArgument(f"cannot pick {k} of {len(superset)} indices")
    best: tuple[DeepPolarCode, WeightDistribution] | None = None
    best_key: tuple[int, int] | None = None
    for subset in itertools.combinations(superset, k):
        code = code_from_sets(n, subset, name=f"subcode({n},{k})")
        spectrum = weight_distribution(code, max_k=max_k)
        key = (-spectrum.min_distance, spectrum.a_dmin)
        if best_key is None or key < best_key:
            best, best_key = (code, spectrum), key
    log.info("Best (%d,%d) sub-code: dmin=%d A_dmin=%d", n, k, -best_key[0], best_key[1])
    return best
