from __future__ import annotations

from functools import lru_cache
from pathlib import Path

import numpy as np
import pytest

from deep_polar.construction import DeepPolarCode, load_code_config

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"

SCL_BPC_CONFIGS = ("dp_128_29", "dp_128_32", "dp_128_56", "dp_128_64", "cadp_128_64", "dp_128_96")
PARALLEL_CONFIGS = ("dp_128_29_parallel", "dp_128_64_parallel")
ML_CONFIGS = ("dp_64_16", "dp_128_16", "dp_256_16", "cadp_64_16", "cadp_128_16", "cadp_256_16")
TABLE_CONFIGS = SCL_BPC_CONFIGS + PARALLEL_CONFIGS + ML_CONFIGS


@lru_cache(maxsize=None)
def load(name: str) -> DeepPolarCode:
    return load_code_config(CONFIG_DIR / f"{name}.json")


def noiseless_llr(codeword: np.ndarray, magnitude: float = 60.0) -> np.ndarray:
    return magnitude * (1.0 - 2.0 * np.asarray(codeword, dtype=float))


@pytest.fixture(scope="session")
def example1() -> DeepPolarCode:
    return load("example1")


@pytest.fixture(scope="session")
def example2() -> DeepPolarCode:
    return load("example2")


@pytest.fixture(scope="session")
def toy() -> DeepPolarCode:
    return load("toy")


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(7)
