from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy.special import erfc

from deep_polar.config import LLR_MAX
from deep_polar.errors import InvalidArgument
from deep_polar.gf2 import BitVector

ChannelKind = Literal["bi_awgn", "bec"]
NOISELESS = math.inf


def trial_rng(seed: int, point: int, trial: int) -> np.random.Generator:
    """Counter-based stream for one trial; independent of scheduling order."""
    if seed < 0 or point < 0 or trial < 0:
        raise InvalidArgument("seed, point and trial must be non-negative")
    key = seed + (point << 64)
    return np.random.Generator(np.random.Philox(key=key, counter=[0, 0, 0, trial]))


@dataclass(frozen=True, slots=True)
class ChannelModel:
    kind: ChannelKind
    param: float
    rate: float = 1.0
    snr_kind: Literal["ebn0", "esn0"] = "ebn0"

    def __post_init__(self) -> None:
        if self.kind not in ("bi_awgn", "bec"):
            raise InvalidArgument(f"unknown channel kind {self.kind!r}")
        if not 0.0 < self.rate <= 1.0:
            raise InvalidArgument(f"rate {self.rate} outside (0, 1]")
        if self.kind == "bec" and not 0.0 <= self.param <= 1.0:
            raise InvalidArgument(f"erasure probability {self.param} outside [0, 1]")

    @classmethod
    def awgn(cls, snr_db: float, rate: float, snr_kind: Literal["ebn0", "esn0"] = "ebn0") -> "ChannelModel":
        return cls("bi_awgn", snr_db, rate, snr_kind)

    @classmethod
    def bec(cls, eps: float) -> "ChannelModel":
        return cls("bec", eps)

    @property
    def noiseless(self) -> bool:
        return self.kind == "bi_awgn" and math.isinf(self.param) and self.param > 0

    @property
    def sigma2(self) -> float:
        """Noise variance for unit-energy BPSK."""
        if self.kind != "bi_awgn":
            raise InvalidArgument("noise variance only applies to BI-AWGN")
        if self.noiseless:
            return 0.0
        esn0 = 10.0 ** (self.param / 10.0)
        if self.snr_kind == "ebn0":
            esn0 *= self.rate
        return 1.0 / (2.0 * esn0)

    def transmit_rows(self, x: np.ndarray, rng: np.random.Generator, *, clip: bool = True) -> np.ndarray:
        """
        LLRs ln p(y|0)/p(y|1) for 0/1 codeword array of any shape.

        AWGN LLRs are 2y / sigma^2, clipped to +-LLR_MAX unless clip is off.
        """
        x = np.asarray(x, dtype=np.uint8)
        symbols = 1.0 - 2.0 * x
        if self.kind == "bec":
            erased = rng.random(x.shape) < self.param
            return np.where(erased, 0.0, symbols * LLR_MAX)
        if self.noiseless:
            return symbols * LLR_MAX
        sigma2 = self.sigma2
        y = symbols + rng.normal(0.0, math.sqrt(sigma2), size=x.shape)
        llr = 2.0 * y / sigma2
        return np.clip(llr, -LLR_MAX, LLR_MAX) if clip else llr


def transmit(x: BitVector | np.ndarray, model: ChannelModel, rng: np.random.Generator) -> np.ndarray:
    bits = x.to_array() if isinstance(x, BitVector) else x
    return model.transmit_rows(bits, rng)


def q_function(x: float | np.ndarray) -> float | np.ndarray:
    """Gaussian upper tail Q(x) = erfc(x / sqrt 2) / 2."""
    tail = 0.5 * erfc(np.asarray(x, dtype=float) / math.sqrt(2.0))
    return tail if np.ndim(x) else float(tail)
