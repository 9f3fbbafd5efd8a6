from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Any

from deep_polar.config import settings
from deep_polar.errors import ConfigRejected
from deep_polar.gf2 import BitVector

DECODERS = ("sc", "scl", "scl-bpc", "parallel-scl", "ml")
CHANNELS = ("awgn", "bec")


@dataclass(slots=True)
class DecoderPath:
    decoded_prefix: tuple[int, ...]
    path_metric: float = 0.0
    # per inner layer, outermost first: (k, recovered prefix of u_l)
    layer_state: tuple[tuple[int, tuple[int, ...]], ...] = ()

    @property
    def position(self) -> int:
        return len(self.decoded_prefix)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "DecoderPath":
        return cls(
            decoded_prefix=tuple(int(b) for b in data.get("decoded_prefix", ())),
            path_metric=float(data.get("path_metric", 0.0)),
            layer_state=tuple((int(k), tuple(bits)) for k, bits in data.get("layer_state", ())),
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "decoded_prefix": list(self.decoded_prefix),
            "path_metric": self.path_metric,
            "layer_state": [[k, list(bits)] for k, bits in self.layer_state],
        }


@dataclass(slots=True)
class DecodeResult:
    message: BitVector
    success: bool
    path_metric: float = 0.0
    layer_bits: list[BitVector | None] = field(default_factory=list)
    killed: int = 0
    pruned: int = 0
    status: str = "ok"

    def to_dict(self) -> dict[str, Any]:
        return {
            "message": self.message.to_hex(),
            "message_bits": self.message.to_string(),
            "success": self.success,
            "path_metric": self.path_metric,
            "layer_bits": [bits.to_string() if bits else "" for bits in self.layer_bits],
            "killed": self.killed,
            "pruned": self.pruned,
            "status": self.status,
        }


@dataclass(slots=True)
class SimConfig:
    code: str | dict[str, Any]
    points: list[float]
    decoder: str = "scl-bpc"
    list_size: int = 8
    channel: str = "awgn"
    max_trials: int = 10_000
    target_errors: int = settings.target_errors
    seed: int = settings.seed
    snr_kind: str = "ebn0"
    min_sum: bool = False
    guess_bits: int = 0
    batch_size: int = settings.batch_size
    name: str = ""

    def validate(self) -> None:
        bad: list[str] = []
        if not self.points:
            bad.append("points must be non-empty")
        if self.max_trials < 1:
            bad.append("max_trials must be >= 1")
        if self.target_errors < 1:
            bad.append("target_errors must be >= 1")
        if self.list_size < 1:
            bad.append("list_size must be >= 1")
        if self.batch_size < 1:
            bad.append("batch_size must be >= 1")
        if self.decoder not in DECODERS:
            bad.append(f"decoder must be one of {', '.join(DECODERS)}")
        if self.channel not in CHANNELS:
            bad.append(f"channel must be one of {', '.join(CHANNELS)}")
        if self.snr_kind not in ("ebn0", "esn0"):
            bad.append("snr_kind must be ebn0 or esn0")
        if self.channel == "bec" and any(not 0.0 <= p <= 1.0 for p in self.points):
            bad.append("erasure probabilities must lie in [0, 1]")
        if bad:
            raise ConfigRejected("; ".join(bad))

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "SimConfig":
        if "code" not in data:
            raise ConfigRejected("simulation config needs a 'code' entry")
        points = data.get("points", data.get("ebn0", data.get("eps", [])))
        return cls(
            code=data["code"],
            points=[float(p) for p in points],
            decoder=data.get("decoder", "scl-bpc"),
            list_size=int(data.get("list_size", 8)),
            channel=data.get("channel", "awgn"),
            max_trials=int(data.get("max_trials", 10_000)),
            target_errors=int(data.get("target_errors", settings.target_errors)),
            seed=int(data.get("seed", settings.seed)),
            snr_kind=data.get("snr_kind", "ebn0"),
            min_sum=bool(data.get("min_sum", False)),
            guess_bits=int(data.get("guess_bits", 0)),
            batch_size=int(data.get("batch_size", settings.batch_size)),
            name=data.get("name", ""),
        )

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    def key(self) -> str:
        """Stable hash identifying the run for checkpoints."""
        payload = json.dumps(self.to_dict(), sort_keys=True, default=str)
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]


@dataclass(slots=True)
class PointResult:
    param: float
    trials: int = 0
    block_errors: int = 0
    bit_errors: int = 0
    seconds: float = 0.0
    k: int = 1

    @property
    def bler(self) -> float:
        return self.block_errors / self.trials if self.trials else 0.0

    @property
    def ber(self) -> float:
        return self.bit_errors / (self.trials * self.k) if self.trials else 0.0

    @property
    def ci95(self) -> float:
        if not self.trials:
            return 0.0
        p = self.bler
        return 1.96 * math.sqrt(p * (1.0 - p) / self.trials)

    def csv_row(self) -> list[str]:
        return [
            f"{self.param:g}",
            str(self.trials),
            str(self.block_errors),
            f"{self.bler:.6e}",
            f"{self.ci95:.6e}",
            str(self.bit_errors),
            f"{self.ber:.6e}",
            f"{self.seconds:.3f}",
        ]

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "PointResult":
        return cls(
            param=float(data["param"]),
            trials=int(data.get("trials", 0)),
            block_errors=int(data.get("block_errors", 0)),
            bit_errors=int(data.get("bit_errors", 0)),
            seconds=float(data.get("seconds", 0.0)),
            k=int(data.get("k", 1)),
        )

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


@dataclass(slots=True)
class SimResult:
    name: str
    points: list[PointResult] = field(default_factory=list)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "SimResult":
        return cls(
            name=data.get("name", ""),
            points=[PointResult.from_dict(p) for p in data.get("points", [])],
        )

    def to_dict(self) -> dict[str, Any]:
        return {"name": self.name, "points": [p.to_dict() for p in self.points]}
