from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path

from dotenv import load_dotenv


BASE_DIR = Path(__file__).resolve().parent.parent
ENV_FILE = BASE_DIR / ".env"
SEQUENCE_FILE = Path(__file__).resolve().parent / "data" / "nr_reliability_sequence.txt"

load_dotenv(ENV_FILE)

LLR_MAX = 60.0
LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")


@dataclass(slots=True)
class Settings:
    seed: int = int(os.getenv("DEEP_POLAR_SEED", "2024"))
    threads: int = int(os.getenv("DEEP_POLAR_THREADS", "1"))
    log_level: str = os.getenv("DEEP_POLAR_LOG_LEVEL", "INFO").upper()
    max_hypotheses: int = int(os.getenv("DEEP_POLAR_MAX_HYPOTHESES", str(2**16)))
    max_enum_k: int = int(os.getenv("DEEP_POLAR_MAX_ENUM_K", "26"))
    target_errors: int = int(os.getenv("DEEP_POLAR_TARGET_ERRORS", "200"))
    batch_size: int = int(os.getenv("DEEP_POLAR_BATCH_SIZE", "256"))
    sequence_file: Path = Path(os.getenv("DEEP_POLAR_SEQUENCE_FILE", str(SEQUENCE_FILE)))
    results_dir: Path = Path(os.getenv("DEEP_POLAR_RESULTS_DIR", str(BASE_DIR / "results")))

    def validate(self) -> None:
        bad: list[str] = []
        if self.seed < 0:
            bad.append("DEEP_POLAR_SEED")
        if self.threads < 1:
            bad.append("DEEP_POLAR_THREADS")
        if self.log_level not in LOG_LEVELS:
            bad.append("DEEP_POLAR_LOG_LEVEL")
        if self.max_hypotheses < 1:
            bad.append("DEEP_POLAR_MAX_HYPOTHESES")
        if not 1 <= self.max_enum_k <= 26:
            bad.append("DEEP_POLAR_MAX_ENUM_K")
        if self.target_errors < 1:
            bad.append("DEEP_POLAR_TARGET_ERRORS")
        if self.batch_size < 1:
            bad.append("DEEP_POLAR_BATCH_SIZE")
        if not self.sequence_file.exists():
            bad.append("DEEP_POLAR_SEQUENCE_FILE")
        if bad:
            raise ValueError(f"Invalid settings: {', '.join(bad)}")


settings = Settings()
