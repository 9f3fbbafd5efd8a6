"""
Monte Carlo BLER/BER runner.

Trials of one sweep point are cut into fixed batches that are consumed in
order; early stopping is decided only at batch boundaries. Every trial
draws from its own counter-based stream (seed, point, trial), so counts do
not depend on the number of workers.
"""
from __future__ import annotations

import logging
import sys
import time
from collections import deque
from dataclasses import dataclass
from multiprocessing import Pool
from pathlib import Path
from typing import Any

import numpy as np

from deep_polar.channels import ChannelModel, trial_rng
from deep_polar.config import settings
from deep_polar.construction import CrcSpec, DeepPolarCode, load_code_config, polar_code
from deep_polar.encoder import encode_rows
from deep_polar.errors import ConfigRejected, DeepPolarError
from deep_polar.ml import ml_decode_awgn, ml_decode_bec
from deep_polar.models import DecodeResult, PointResult, SimConfig, SimResult
from deep_polar.reliability import ProfileSource
from deep_polar.scl import hypothesis_count, parallel_scl_decode, sc_decode, scl_bpc_decode, scl_decode
from deep_polar.state import CheckpointStore

log = logging.getLogger("deep_polar.simulation")

# decoder outcomes that count as block errors even when the returned bits happen to match
FAILED_STATUSES = frozenset({"ambiguous", "inconsistent"})


@dataclass(frozen=True, slots=True)
class Pipeline:
    code: DeepPolarCode
    decoder: str = "scl-bpc"
    list_size: int = 8
    channel: str = "awgn"
    min_sum: bool = False
    guess_bits: int = 0

    @property
    def clips_llr(self) -> bool:
        """AWGN ML correlates the raw 2y / sigma^2; every other decoder sees clipped LLRs."""
        return not (self.decoder == "ml" and self.channel == "awgn")

    def check(self) -> None:
        """Reject decoder/code combinations before any trial runs."""
        if self.decoder == "parallel-scl":
            count = hypothesis_count(self.code, self.guess_bits)
            if count > settings.max_hypotheses:
                raise ConfigRejected(f"parallel-SCL needs {count} hypotheses, budget is {settings.max_hypotheses}")
            if len(self.code.layers) == 1 and self.guess_bits > self.code.k_total:
                raise ConfigRejected(f"cannot guess {self.guess_bits} of {self.code.k_total} information bits")
        if self.decoder == "ml" and self.channel == "awgn" and self.code.k > settings.max_enum_k:
            raise ConfigRejected(f"ML decoding of K={self.code.k} exceeds the 2^{settings.max_enum_k} guard")

    def decode(self, llr: np.ndarray) -> DecodeResult:
        if self.decoder == "sc":
            return sc_decode(self.code, llr, min_sum=self.min_sum)
        if self.decoder == "scl":
            return scl_decode(self.code, llr, self.list_size, min_sum=self.min_sum)
        if self.decoder == "scl-bpc":
            return scl_bpc_decode(self.code, llr, self.list_size, min_sum=self.min_sum)
        if self.decoder == "parallel-scl":
            return parallel_scl_decode(self.code, llr, self.list_size, guess_bits=self.guess_bits, min_sum=self.min_sum)
        if self.decoder == "ml":
            if self.channel == "bec":
                return ml_decode_bec(self.code, llr)
            return ml_decode_awgn(self.code, llr)
        raise ConfigRejected(f"unknown decoder {self.decoder!r}")


def ca_polar_baseline(n: int, k: int, crc: CrcSpec | None = None, profile: ProfileSource | str = "seq",
                      list_size: int = 8) -> Pipeline:
    """Polar code on K + CRC most reliable indices, SCL with CRC-based path selection."""
    code = polar_code(n, k, profile, crc or CrcSpec())
    return Pipeline(code, "scl", list_size)


def resolve_code(spec: str | dict[str, Any]) -> DeepPolarCode:
    """Code from a config path, an inline config dict, or an inline CA-polar baseline."""
    if isinstance(spec, dict) and spec.get("kind") == "ca-polar":
        try:
            n, k = int(spec["n"]), int(spec["k"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigRejected("ca-polar baseline needs integer 'n' and 'k'") from exc
        return ca_polar_baseline(n, k, CrcSpec.parse(spec.get("crc", "crc6")), spec.get("profile", "seq")).code
    if isinstance(spec, dict):
        return load_code_config(spec)
    return load_code_config(Path(spec))


def run_trials(pipeline: Pipeline, model: ChannelModel, seed: int, point: int, first: int, last: int) -> tuple[int, int, int]:
    """(trials, block errors, bit errors) for trial indices first..last-1."""
    code = pipeline.code
    block_errors = bit_errors = 0
    for trial in range(first, last):
        rng = trial_rng(seed, point, trial)
        message = rng.integers(0, 2, size=code.k, dtype=np.uint8)
        codeword = encode_rows(code, message[None, :])[0]
        llr = model.transmit_rows(codeword, rng, clip=pipeline.clips_llr)
        result = pipeline.decode(llr)
        wrong = int(np.count_nonzero(result.message.to_array() != message))
        if wrong or result.status in FAILED_STATUSES:
            block_errors += 1
        bit_errors += wrong
    return last - first, block_errors, bit_errors


def _run_trials_task(args: tuple) -> tuple[int, int, int]:
    return run_trials(*args)


def _channel_for(config: SimConfig, code: DeepPolarCode, param: float) -> ChannelModel:
    if config.channel == "bec":
        return ChannelModel.bec(param)
    return ChannelModel.awgn(param, code.rate, config.snr_kind)


def run_point(pipeline: Pipeline, config: SimConfig, point: int, param: float, pool: Any = None,
              window: int = 1, progress: bool = False) -> PointResult:
    """
    Batches go to the pool at most `window` ahead of the one being counted;
    on early stop the batches still in flight are dropped unread.
    """
    code = pipeline.code
    model = _channel_for(config, code, param)
    result = PointResult(param=param, k=code.k)
    started = time.perf_counter()
    bounds = [
        (start, min(start + config.batch_size, config.max_trials))
        for start in range(0, config.max_trials, config.batch_size)
    ]
    pending: deque = deque()
    submitted = 0
    while submitted < len(bounds) or pending:
        while pool is not None and submitted < len(bounds) and len(pending) < window:
            first, last = bounds[submitted]
            pending.append(pool.apply_async(_run_trials_task, ((pipeline, model, config.seed, point, first, last),)))
            submitted += 1
        if pool is None:
            first, last = bounds[submitted]
            submitted += 1
            trials, errors, bits = run_trials(pipeline, model, config.seed, point, first, last)
        else:
            trials, errors, bits = pending.popleft().get()
        result.trials += trials
        result.block_errors += errors
        result.bit_errors += bits
        if progress:
            print(f"[{param:g}] trials={result.trials} errors={result.block_errors}", file=sys.stderr)
        if result.block_errors >= config.target_errors:
            if pending:
                log.debug("Point %g stopped early; dropping %d batch(es) in flight", param, len(pending))
            break
    result.seconds = time.perf_counter() - started
    return result


def run_bler(config: SimConfig, *, threads: int | None = None, progress: bool = False,
             checkpoint: CheckpointStore | None = None) -> SimResult:
    config.validate()
    try:
        code = resolve_code(config.code)
        pipeline = Pipeline(code, config.decoder, config.list_size, config.channel, config.min_sum, config.guess_bits)
        pipeline.check()
    except ConfigRejected:
        raise
    except DeepPolarError as exc:
        raise ConfigRejected(str(exc)) from exc

    key = config.key()
    done = checkpoint.load(key) if checkpoint else None
    finished = {p.param: p for p in done.points} if done else {}
    result = SimResult(name=config.name or code.name)
    workers = threads or settings.threads
    pool = Pool(workers) if workers > 1 else None
    try:
        for point, param in enumerate(config.points):
            if param in finished:
                log.info("Point %g restored from checkpoint", param)
                result.points.append(finished[param])
                continue
            stats = run_point(pipeline, config, point, param, pool, 2 * workers, progress)
            log.info(
                "%s %g: %d/%d errors, BLER=%.3e +- %.1e (%.1fs)",
                config.channel, param, stats.block_errors, stats.trials, stats.bler, stats.ci95, stats.seconds,
            )
            result.points.append(stats)
            if checkpoint:
                checkpoint.save(key, result)
    finally:
        if pool is not None:
            pool.close()
            pool.join()
    return result

