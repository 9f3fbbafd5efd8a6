"""
Successive cancellation list decoding for deep polar codes.

The list is held as numpy arrays with one row per path. Bit i (0-based)
refreshes the LLR levels 0..tz(i): the level at tz(i) is a right child (g
update with the re-encoded left sibling), every level below it a left child
(f update). Path metrics accumulate softplus(-(1 - 2u) * eta).

On a multi-layer code every outer connection bit doubles as an inner
codeword bit. The backpropagation parity check (BPC) feeds it into the
partial inverse of layer L-1, which may expose a frozen bit (must be zero)
or another connection bit to feed further down.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from deep_polar.config import LLR_MAX, settings
from deep_polar.construction import DeepPolarCode
from deep_polar.crc import crc_check_rows
from deep_polar.encoder import extract_message_rows, inner_connection_rows
from deep_polar.errors import InvalidArgument
from deep_polar.gf2 import (
    BitVector,
    polar_transform,
    polar_transform_rows,
    transpose_transform_prefix,
    transpose_transform_rows,
)
from deep_polar.models import DecodeResult, DecoderPath

log = logging.getLogger("deep_polar.scl")

INFO, CONNECTION, FROZEN = 0, 1, 2


@dataclass(frozen=True, slots=True)
class InnerLayerPlan:
    n: int
    roles: tuple[int, ...]
    conn_rank: tuple[int, ...]
    subsets: tuple[np.ndarray, ...]


@dataclass(frozen=True, slots=True)
class DecoderPlan:
    n: int
    levels: int
    frozen: np.ndarray
    conn_rank: np.ndarray
    # nearest inner layer (L-1) first
    inner: tuple[InnerLayerPlan, ...]


def _roles(n: int, info: tuple[int, ...], connection: tuple[int, ...]) -> tuple[list[int], list[int]]:
    roles = [FROZEN] * n
    rank = [-1] * n
    for i in info:
        roles[i - 1] = INFO
    for r, i in enumerate(connection):
        roles[i - 1] = CONNECTION
        rank[i - 1] = r
    return roles, rank


@lru_cache(maxsize=64)
def decoder_plan(code: DeepPolarCode) -> DecoderPlan:
    outer = code.outer
    roles, rank = _roles(outer.n, outer.info, outer.connection)
    inner = []
    for layer in reversed(code.layers[:-1]):
        layer_roles, layer_rank = _roles(layer.n, layer.info, layer.connection)
        subsets = tuple(np.array([j for j in range(k + 1) if j & k == j], dtype=np.intp) for k in range(layer.n))
        inner.append(InnerLayerPlan(layer.n, tuple(layer_roles), tuple(layer_rank), subsets))
    return DecoderPlan(
        n=outer.n,
        levels=outer.n.bit_length() - 1,
        frozen=np.array([r == FROZEN for r in roles]),
        conn_rank=np.array(rank, dtype=np.intp),
        inner=tuple(inner),
    )


@dataclass(slots=True)
class ListOutcome:
    """Surviving paths sorted by metric (stable)."""

    u: np.ndarray
    metrics: np.ndarray
    killed: int = 0
    pruned: int = 0
    collapsed: bool = False


def _check_node(a: np.ndarray, b: np.ndarray, min_sum: bool) -> np.ndarray:
    out = np.sign(a) * np.sign(b) * np.minimum(np.abs(a), np.abs(b))
    if not min_sum:
        out = out + np.log1p(np.exp(-np.abs(a + b))) - np.log1p(np.exp(-np.abs(a - b)))
    return out


def _push_connection(plan: DecoderPlan, a_bits: list[np.ndarray], m: int, values: np.ndarray, alive: np.ndarray) -> None:
    """Feed connection bit m of layer L-1 and test the frozen bits it uncovers."""
    depth = 0
    while True:
        layer = plan.inner[depth]
        a = a_bits[depth]
        a[:, m] = values
        recovered = np.bitwise_xor.reduce(a[:, layer.subsets[m]], axis=1)
        role = layer.roles[m]
        if role == FROZEN:
            alive &= recovered == 0
            return
        if role != CONNECTION:
            return
        m = layer.conn_rank[m]
        values = recovered
        depth += 1


def _check_full(plan: DecoderPlan, a_bits: list[np.ndarray], m: int, values: np.ndarray) -> np.ndarray:
    """Recompute every layer prefix from scratch; reference for _push_connection."""
    a_bits[0][:, m] = values
    prefix = a_bits[0][:, : m + 1]
    alive = np.ones(prefix.shape[0], dtype=bool)
    for depth, layer in enumerate(plan.inner):
        k = prefix.shape[1]
        if k == 0:
            break
        padded = np.zeros((prefix.shape[0], layer.n), dtype=np.uint8)
        padded[:, :k] = prefix
        recovered = transpose_transform_rows(padded)[:, :k]
        roles = np.asarray(layer.roles[:k])
        alive &= ~np.any(recovered[:, roles == FROZEN], axis=1)
        prefix = recovered[:, roles == CONNECTION]
        if depth + 1 < len(plan.inner):
            a_bits[depth + 1][:, : prefix.shape[1]] = prefix
    return alive


def list_decode(
    code: DeepPolarCode,
    llr: np.ndarray,
    list_size: int,
    *,
    frozen_mask: np.ndarray | None = None,
    frozen_values: np.ndarray | None = None,
    bpc: bool = True,
    bpc_full: bool = False,
    min_sum: bool = False,
) -> ListOutcome:
    """Run the list decoder and return every surviving outer input vector."""
    if list_size < 1:
        raise InvalidArgument(f"list size must be >= 1, got {list_size}")
    plan = decoder_plan(code)
    n = plan.n
    if n < 2:
        raise InvalidArgument("list decoding needs N >= 2")
    channel = np.clip(np.asarray(llr, dtype=float).reshape(-1), -LLR_MAX, LLR_MAX)
    if channel.size != n:
        raise InvalidArgument(f"expected {n} LLRs, got {channel.size}")
    frozen = plan.frozen if frozen_mask is None else np.asarray(frozen_mask, dtype=bool)
    fixed = np.zeros(n, dtype=np.uint8) if frozen_values is None else np.asarray(frozen_values, dtype=np.uint8)
    check = bpc and bool(plan.inner)

    paths = 1
    beliefs = [np.zeros((1, 1 << lam)) for lam in range(plan.levels)]
    u = np.zeros((1, n), dtype=np.uint8)
    metrics = np.zeros(1)
    a_bits = [np.zeros((1, layer.n), dtype=np.uint8) for layer in plan.inner]
    killed = pruned = 0
    collapsed = False
    capacity = list_size

    for i in range(n):
        top = plan.levels - 1 if i == 0 else (i & -i).bit_length() - 1
        for lam in range(top, -1, -1):
            parent = channel[None, :] if lam + 1 == plan.levels else beliefs[lam + 1]
            half = 1 << lam
            left, right = parent[:, :half], parent[:, half:]
            if (i >> lam) & 1:
                partial = polar_transform_rows(u[:, i - half : i])
                level = right + (1.0 - 2.0 * partial) * left
            else:
                level = _check_node(left, right, min_sum)
            if level.shape[0] != paths:
                level = np.repeat(level, paths, axis=0)
            beliefs[lam] = level

        eta = beliefs[0][:, 0]
        if frozen[i]:
            bit = int(fixed[i])
            metrics = metrics + np.logaddexp(0.0, -(1.0 - 2.0 * bit) * eta)
            u[:, i] = bit
            continue

        candidates = np.concatenate([metrics + np.logaddexp(0.0, -eta), metrics + np.logaddexp(0.0, eta)])
        parents = np.concatenate([np.arange(paths), np.arange(paths)])
        bits = np.repeat(np.array([0, 1], dtype=np.uint8), paths)
        keep = np.arange(2 * paths)
        candidate_a: list[np.ndarray] | None = None
        rank = int(plan.conn_rank[i])
        if check and rank >= 0:
            candidate_a = [a[parents] for a in a_bits]
            if bpc_full:
                alive = _check_full(plan, candidate_a, rank, bits)
            else:
                alive = np.ones(2 * paths, dtype=bool)
                _push_connection(plan, candidate_a, rank, bits, alive)
            killed += int(np.count_nonzero(~alive))
            if alive.any():
                keep = np.flatnonzero(alive)
            else:
                # every path violates a parity check: carry on with the best one as plain SC
                keep = np.array([int(np.argmin(candidates))])
                collapsed = True
                check = False
                capacity = 1

        order = keep[np.argsort(candidates[keep], kind="stable")]
        if order.size > capacity:
            pruned += order.size - capacity
            order = order[:capacity]
        source = parents[order]
        u = u[source]
        u[:, i] = bits[order]
        metrics = candidates[order]
        beliefs = [b[source] for b in beliefs]
        if candidate_a is not None:
            a_bits = [a[order] for a in candidate_a]
        else:
            a_bits = [a[source] for a in a_bits]
        paths = order.size

    if collapsed:
        log.debug("All paths failed the parity check; finished as SC (N=%d, S=%d)", n, list_size)
    final = np.argsort(metrics, kind="stable")
    return ListOutcome(u[final], metrics[final], killed, pruned, collapsed)


def _split_layers(code: DeepPolarCode, extended: np.ndarray) -> list[BitVector | None]:
    chunks: list[BitVector | None] = []
    start = 0
    for layer in code.layers:
        chunk = extended[start : start + layer.k]
        chunks.append(BitVector.from_array(chunk) if layer.k else None)
        start += layer.k
    return chunks


def select_result(code: DeepPolarCode, u_rows: np.ndarray, metrics: np.ndarray, *, success: bool = True,
                  killed: int = 0, pruned: int = 0) -> DecodeResult:
    """Pick the lowest-metric path, or the lowest-metric one passing the CRC when the code has one."""
    messages = extract_message_rows(code, u_rows)
    chosen = 0
    status = "ok" if success else "bpc-collapse"
    if code.crc is not None:
        passing = np.flatnonzero(crc_check_rows(messages, code.crc))
        if passing.size:
            chosen = int(passing[0])
        else:
            success = False
            status = "crc-fail"
    extended = messages[chosen]
    return DecodeResult(
        message=BitVector.from_array(extended[: code.k]),
        success=success,
        path_metric=float(metrics[chosen]),
        layer_bits=_split_layers(code, extended),
        killed=killed,
        pruned=pruned,
        status=status,
    )


def scl_bpc_decode(code: DeepPolarCode, llr: np.ndarray, list_size: int, *, min_sum: bool = False,
                   bpc_full: bool = False) -> DecodeResult:
    outcome = list_decode(code, llr, list_size, bpc=True, bpc_full=bpc_full, min_sum=min_sum)
    return select_result(
        code, outcome.u, outcome.metrics, success=not outcome.collapsed, killed=outcome.killed, pruned=outcome.pruned
    )


def sc_decode(code: DeepPolarCode, llr: np.ndarray, *, min_sum: bool = False) -> DecodeResult:
    """SC with the parity check: the list decoder with one path."""
    return scl_bpc_decode(code, llr, 1, min_sum=min_sum)


def scl_decode(code: DeepPolarCode, llr: np.ndarray, list_size: int, frozen_values: np.ndarray | None = None,
               *, min_sum: bool = False) -> DecodeResult:
    """
    Standard SCL without the parity check.

    With frozen_values (length N) the outer connection indices are frozen to
    the given values as well; without them they are decoded like
    information bits.
    """
    plan = decoder_plan(code)
    mask = plan.frozen
    if frozen_values is not None:
        mask = mask | (plan.conn_rank >= 0)
    outcome = list_decode(code, llr, list_size, frozen_mask=mask, frozen_values=frozen_values, bpc=False,
                          min_sum=min_sum)
    return select_result(code, outcome.u, outcome.metrics, pruned=outcome.pruned)


def hypothesis_count(code: DeepPolarCode, guess_bits: int | None = None) -> int:
    bits = code.inner_bits if len(code.layers) > 1 else (guess_bits or 0)
    return 1 << bits


def parallel_scl_decode(code: DeepPolarCode, llr: np.ndarray, list_size: int, *, guess_bits: int | None = None,
                        min_sum: bool = False, max_hypotheses: int | None = None) -> DecodeResult:
    """
    One SCL run per hypothesis of the inner information bits, A_L frozen to
    the hypothesis's connection pattern. Single-layer codes guess their
    `guess_bits` smallest information indices instead. The lowest final
    metric (CRC-passing first when the code has a CRC) wins.
    """
    budget = max_hypotheses or settings.max_hypotheses
    count = hypothesis_count(code, guess_bits)
    if count > budget:
        raise InvalidArgument(f"parallel-SCL needs {count} hypotheses, budget is {budget}")
    plan = decoder_plan(code)
    n = plan.n
    width = count.bit_length() - 1
    patterns = ((np.arange(count)[:, None] >> np.arange(width - 1, -1, -1)) & 1).astype(np.uint8)

    mask = plan.frozen.copy()
    if len(code.layers) > 1:
        mask |= plan.conn_rank >= 0
        positions = np.asarray(code.outer.connection) - 1
        assignments = inner_connection_rows(code, patterns)
    else:
        if width > code.outer.k:
            raise InvalidArgument(f"cannot guess {width} of {code.outer.k} information bits")
        positions = np.asarray(code.outer.info[:width], dtype=np.intp) - 1
        mask[positions] = True
        assignments = patterns

    rows: list[np.ndarray] = []
    metrics: list[np.ndarray] = []
    pruned = 0
    for assignment in assignments:
        fixed = np.zeros(n, dtype=np.uint8)
        fixed[positions] = assignment
        outcome = list_decode(code, llr, list_size, frozen_mask=mask, frozen_values=fixed, bpc=False, min_sum=min_sum)
        rows.append(outcome.u)
        metrics.append(outcome.metrics)
        pruned += outcome.pruned
    all_rows = np.concatenate(rows)
    all_metrics = np.concatenate(metrics)
    order = np.argsort(all_metrics, kind="stable")
    return select_result(code, all_rows[order], all_metrics[order], pruned=pruned)


def layer_state(code: DeepPolarCode, prefix: tuple[int, ...]) -> tuple[tuple[int, tuple[int, ...]], ...]:
    """Recovered inner prefixes for a decoded outer prefix, layer L-1 first."""
    states = []
    a = [prefix[p - 1] for p in code.outer.connection if p <= len(prefix)]
    for layer in reversed(code.layers[:-1]):
        if not a:
            break
        recovered = transpose_transform_prefix(BitVector.from_bits(a), layer.n).to_bits()
        states.append((len(a), tuple(recovered)))
        a = [recovered[p - 1] for p in layer.connection if p <= len(recovered)]
    return tuple(states)


def trace_path(code: DeepPolarCode, prefix: tuple[int, ...], path_metric: float = 0.0) -> DecoderPath:
    return DecoderPath(tuple(prefix), path_metric, layer_state(code, tuple(prefix)))


def bpc_prefix_check(path: DecoderPath, code: DeepPolarCode) -> bool:
    """True when no recovered inner frozen bit of the path's prefix is one."""
    state = path.layer_state or layer_state(code, path.decoded_prefix)
    for layer, (k, recovered) in zip(reversed(code.layers[:-1]), state):
        if any(recovered[p - 1] for p in layer.frozen if p <= k):
            return False
    return True


def is_codeword(code: DeepPolarCode, x: BitVector) -> bool:
    if len(x) != code.n:
        raise InvalidArgument(f"word has {len(x)} bits, code has N={code.n}")
    u = polar_transform(x)
    if any(u[p - 1] for p in code.outer.frozen):
        return False
    return bpc_prefix_check(trace_path(code, tuple(u.to_bits())), code)
