"""
Bit-channel reliability profiles.

Three sources: exact BEC evolution, density evolution under the Gaussian
approximation (DEGA) for BI-AWGN, and an externally supplied rank order such
as the 5G NR sequence. A profile only matters through the order it induces
(higher value = more reliable, ties go to the larger index) and, for BEC,
through threshold selection.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Literal, Sequence

import numpy as np
from scipy.optimize import brentq

from deep_polar.config import settings
from deep_polar.errors import InvalidArgument
from deep_polar.gf2 import log2_exact

log = logging.getLogger("deep_polar.reliability")

ProfileKind = Literal["bec_capacity", "dega_mean_llr", "rank_order"]
Direction = Literal["transpose", "forward"]

# Chung's two-piece approximation of phi(m) = 1 - E[tanh(L/2)], L ~ N(m, 2m).
# Below PHI_SMALL the fit exceeds 1, so log phi runs linearly to 0 at m = 0.
PHI_CROSSOVER = 10.0
PHI_SMALL = 0.1
_PHI_A = 0.4527
_PHI_B = 0.86
_PHI_C = 0.0218


@dataclass(frozen=True, slots=True)
class ReliabilityProfile:
    n: int
    values: tuple[float, ...]
    kind: ProfileKind
    channel_param: float | None = None

    def __post_init__(self) -> None:
        log2_exact(self.n)
        if len(self.values) != self.n:
            raise InvalidArgument(f"profile has {len(self.values)} values for N={self.n}")
        if self.kind == "bec_capacity" and any(not 0.0 <= v <= 1.0 for v in self.values):
            raise InvalidArgument("BEC capacities must lie in [0, 1]")
        if self.kind == "dega_mean_llr" and any(v < 0.0 for v in self.values):
            raise InvalidArgument("DEGA mean LLRs must be non-negative")

    def value(self, index: int) -> float:
        """Reliability of 1-based bit-channel index."""
        if not 1 <= index <= self.n:
            raise InvalidArgument(f"index {index} outside [1, {self.n}]")
        return self.values[index - 1]

    def ordering(self) -> list[int]:
        """1-based indices, most reliable first; equal values put the larger index first."""
        return sorted(range(1, self.n + 1), key=lambda i: (-self.values[i - 1], -i))

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)


def bec_profile(n: int, eps: float) -> ReliabilityProfile:
    """Exact capacities I(W_N^(i)) = 1 - Z for the BEC(eps)."""
    log2_exact(n)
    if not 0.0 <= eps <= 1.0:
        raise InvalidArgument(f"erasure probability {eps} outside [0, 1]")
    z = np.array([eps], dtype=float)
    while z.size < n:
        nxt = np.empty(2 * z.size)
        nxt[0::2] = 2.0 * z - z * z
        nxt[1::2] = z * z
        z = nxt
    return ReliabilityProfile(n, tuple(float(v) for v in 1.0 - z), "bec_capacity", eps)


def ebn0_to_sigma2(ebn0_db: float, rate: float) -> float:
    """Noise variance for unit-energy BPSK at the given Eb/N0."""
    if not 0.0 < rate <= 1.0:
        raise InvalidArgument(f"rate {rate} outside (0, 1]")
    return 1.0 / (2.0 * rate * 10.0 ** (ebn0_db / 10.0))


def _log_phi_fit(m: float) -> float:
    return -_PHI_A * m**_PHI_B + _PHI_C


def _log_phi(m: float) -> float:
    if m <= 0.0:
        return 0.0
    if m < PHI_SMALL:
        return _log_phi_fit(PHI_SMALL) * m / PHI_SMALL
    if m < PHI_CROSSOVER:
        return _log_phi_fit(m)
    return _log_phi_right(m)


def _log_phi_right(m: float) -> float:
    return 0.5 * math.log(math.pi / m) - m / 4.0 + math.log1p(-10.0 / (7.0 * m))


def _check_node_mean(m: float) -> float:
    """phi^-1(1 - (1 - phi(m))^2), solved in the log domain."""
    lp = _log_phi(m)
    # log(1 - (1 - p)^2): log p + log(2 - p) for small p, log1p(-q^2) with q = 1 - p near p = 1
    if lp < -1.0:
        target = lp + math.log(2.0 - math.exp(lp))
    else:
        q = -math.expm1(lp)
        target = math.log1p(-q * q)
    if target >= 0.0:
        return 0.0
    edge = _log_phi_fit(PHI_SMALL)
    if target >= edge:
        return PHI_SMALL * target / edge
    if target >= _log_phi_right(PHI_CROSSOVER):
        base = (_PHI_C - target) / _PHI_A
        return max(base, 0.0) ** (1.0 / _PHI_B)
    hi = max(m, 2.0 * PHI_CROSSOVER)
    return brentq(lambda x: _log_phi_right(x) - target, PHI_CROSSOVER, hi, xtol=1e-12)


def dega_profile(n: int, design_snr_db: float, rate: float) -> ReliabilityProfile:
    """Per-index mean LLRs under the Gaussian approximation."""
    log2_exact(n)
    sigma2 = ebn0_to_sigma2(design_snr_db, rate)
    means = [2.0 / sigma2]
    while len(means) < n:
        nxt: list[float] = []
        for m in means:
            nxt.append(_check_node_mean(m))
            nxt.append(2.0 * m)
        means = nxt
    return ReliabilityProfile(n, tuple(means), "dega_mean_llr", design_snr_db)


def sequence_profile(ordering: Sequence[int]) -> ReliabilityProfile:
    """Rank-order profile from indices listed least reliable first; value = position."""
    n = len(ordering)
    log2_exact(n)
    if sorted(ordering) != list(range(1, n + 1)):
        raise InvalidArgument("ordering is not a permutation of 1..N")
    values = [0.0] * n
    for rank, index in enumerate(ordering, start=1):
        values[index - 1] = float(rank)
    return ReliabilityProfile(n, tuple(values), "rank_order")


@lru_cache(maxsize=8)
def load_sequence(path: Path | str | None = None) -> tuple[int, ...]:
    """Read a whitespace-separated 1-based sequence, most reliable first."""
    path = Path(path) if path is not None else settings.sequence_file
    try:
        tokens = path.read_text(encoding="utf-8").split()
    except OSError as exc:
        raise InvalidArgument(f"cannot read reliability sequence {path}: {exc}") from exc
    try:
        sequence = tuple(int(t) for t in tokens)
    except ValueError as exc:
        raise InvalidArgument(f"non-integer token in {path}") from exc
    log2_exact(len(sequence))
    if sorted(sequence) != list(range(1, len(sequence) + 1)):
        raise InvalidArgument(f"{path} is not a permutation of 1..{len(sequence)}")
    log.debug("Loaded reliability sequence of length %d from %s", len(sequence), path)
    return sequence


def restrict_sequence(sequence: Sequence[int], n: int) -> list[int]:
    """Nested restriction: keep indices <= n in their original order."""
    log2_exact(n)
    if n > len(sequence):
        raise InvalidArgument(f"sequence of length {len(sequence)} cannot cover N={n}")
    return [i for i in sequence if i <= n]


def file_profile(n: int, path: Path | str | None = None) -> ReliabilityProfile:
    most_reliable_first = restrict_sequence(load_sequence(path), n)
    return sequence_profile(most_reliable_first[::-1])


@dataclass(frozen=True, slots=True)
class ProfileSource:
    """Parsed `bec:EPS`, `dega:SNR_DB[:RATE]` or `seq[:PATH]` descriptor."""

    kind: Literal["bec", "dega", "seq"]
    param: float | None = None
    rate: float | None = None
    path: str | None = None

    @classmethod
    def parse(cls, text: str) -> "ProfileSource":
        head, _, rest = text.strip().partition(":")
        head = head.lower()
        try:
            if head == "bec":
                return cls("bec", float(rest))
            if head == "dega":
                snr, _, rate = rest.partition(":")
                return cls("dega", float(snr), float(rate) if rate else None)
        except ValueError as exc:
            raise InvalidArgument(f"bad profile descriptor {text!r}") from exc
        if head in ("seq", "5g"):
            return cls("seq", path=rest or None)
        raise InvalidArgument(f"unknown profile kind in {text!r}; expected bec, dega or seq")

    def __str__(self) -> str:
        if self.kind == "bec":
            return f"bec:{self.param:g}"
        if self.kind == "dega":
            return f"dega:{self.param:g}" + (f":{self.rate:g}" if self.rate else "")
        return f"seq:{self.path}" if self.path else "seq"

    def build(self, n: int, rate: float = 0.5, direction: Direction = "forward") -> ReliabilityProfile:
        """Profile for one layer. Transpose-direction bit channels all equal W, so BEC/DEGA come out flat."""
        if self.kind == "seq":
            return file_profile(n, self.path)
        if self.kind == "bec":
            if direction == "transpose":
                return _flat(bec_profile(1, self.param), n)
            return bec_profile(n, self.param)
        design_rate = self.rate or rate
        if direction == "transpose":
            return _flat(dega_profile(1, self.param, design_rate), n)
        return dega_profile(n, self.param, design_rate)


def _flat(single: ReliabilityProfile, n: int) -> ReliabilityProfile:
    log2_exact(n)
    return ReliabilityProfile(n, single.values * n, single.kind, single.channel_param)
