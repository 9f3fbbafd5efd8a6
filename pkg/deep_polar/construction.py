"""
Deep polar code construction.

Layers are stored ascending by N (layer 1 innermost). Inner layers apply
G^T to their input, the outer layer applies G. Each layer partitions [N_l]
into information (I), connection (A) and frozen (F) indices; the output of
layer l-1 lands on A_l in ascending index order.
"""
from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Any, Literal, Mapping, Sequence

import numpy as np

from deep_polar.errors import ConstructionInfeasible, InvalidArgument
from deep_polar.gf2 import (
    Gf2Matrix,
    affine_flats,
    column_weight,
    log2_exact,
    pack_words,
    polar_transform_rows,
    row_weight,
)
from deep_polar.reliability import Direction, ProfileSource, ReliabilityProfile

log = logging.getLogger("deep_polar.construction")

CRC6_POLY = 0x61  # 1 + D^5 + D^6
CONNECTION_RULES = ("reliability", "distance")
# the distance rule enumerates every inner message
MAX_SEARCH_BITS = 16


def _transform_weight(n: int, i: int, direction: Direction) -> int:
    return column_weight(n, i) if direction == "transpose" else row_weight(n, i)


@dataclass(frozen=True, slots=True)
class CrcSpec:
    """Generator polynomial, bit j holding the coefficient of D^j."""

    poly: int = CRC6_POLY

    def __post_init__(self) -> None:
        if self.poly < 3 or not self.poly & 1:
            raise InvalidArgument(f"CRC polynomial {self.poly:#x} needs degree >= 1 and a constant term")

    @property
    def degree(self) -> int:
        return self.poly.bit_length() - 1

    @classmethod
    def parse(cls, text: str | int | None) -> "CrcSpec | None":
        if text is None:
            return None
        if isinstance(text, int):
            return cls(text)
        cleaned = text.strip().lower()
        if cleaned in ("", "none", "null"):
            return None
        if cleaned == "crc6":
            return cls(CRC6_POLY)
        try:
            return cls(int(cleaned, 16))
        except ValueError as exc:
            raise InvalidArgument(f"bad CRC polynomial {text!r}") from exc

    def to_hex(self) -> str:
        return f"{self.poly:#x}"


@dataclass(frozen=True, slots=True)
class LayerSpec:
    n: int
    k: int
    dmin: int
    info: tuple[int, ...]
    connection: tuple[int, ...]
    frozen: tuple[int, ...]
    direction: Direction = "forward"

    def __post_init__(self) -> None:
        log2_exact(self.n)
        for name in ("info", "connection", "frozen"):
            values = getattr(self, name)
            if list(values) != sorted(set(values)):
                raise ConstructionInfeasible("partition", f"{name} indices must be sorted and distinct")
        union = set(self.info) | set(self.connection) | set(self.frozen)
        if union != set(range(1, self.n + 1)) or len(self.info) + len(self.connection) + len(self.frozen) != self.n:
            raise ConstructionInfeasible("partition", f"I, A and F do not partition [1, {self.n}]")
        if len(self.info) != self.k:
            raise ConstructionInfeasible("info-size", f"|I| = {len(self.info)} but K = {self.k}")
        light = [i for i in self.info + self.connection if self.weight(i) < self.dmin]
        if light:
            raise ConstructionInfeasible("weight-guard", f"indices {light} have weight below {self.dmin}")

    def weight(self, index: int) -> int:
        return _transform_weight(self.n, index, self.direction)

    def to_dict(self) -> dict[str, Any]:
        return {
            "n": self.n,
            "k": self.k,
            "dmin": self.dmin,
            "direction": self.direction,
            "info": list(self.info),
            "connection": list(self.connection),
            "frozen": list(self.frozen),
        }


@dataclass(frozen=True, slots=True)
class DeepPolarCode:
    layers: tuple[LayerSpec, ...]
    crc: CrcSpec | None = None
    profile: str = ""
    name: str = field(default="", compare=False)

    def __post_init__(self) -> None:
        if not self.layers:
            raise ConstructionInfeasible("layer-count", "a code needs at least one layer")
        sizes = [layer.n for layer in self.layers]
        if any(a >= b for a, b in zip(sizes, sizes[1:])):
            raise ConstructionInfeasible("layer-order", f"layer sizes {sizes} are not strictly increasing")
        if self.layers[-1].direction != "forward" or any(l.direction != "transpose" for l in self.layers[:-1]):
            raise ConstructionInfeasible("direction", "only the outer layer may use the forward transform")
        if self.layers[0].connection:
            raise ConstructionInfeasible("connection-size", "layer 1 cannot have connection indices")
        for prev, layer in zip(self.layers, self.layers[1:]):
            if len(layer.connection) != prev.n:
                raise ConstructionInfeasible(
                    "connection-size", f"|A| = {len(layer.connection)} for N={layer.n} but previous layer has N={prev.n}"
                )
        if self.crc is not None and self.k_total <= self.crc.degree:
            raise ConstructionInfeasible("crc-size", "CRC is longer than the information capacity")

    @property
    def n(self) -> int:
        return self.layers[-1].n

    @property
    def k_total(self) -> int:
        """Information positions across layers, CRC bits included."""
        return sum(layer.k for layer in self.layers)

    @property
    def crc_bits(self) -> int:
        return self.crc.degree if self.crc else 0

    @property
    def k(self) -> int:
        return self.k_total - self.crc_bits

    @property
    def rate(self) -> float:
        return self.k / self.n

    @property
    def outer(self) -> LayerSpec:
        return self.layers[-1]

    @property
    def inner_bits(self) -> int:
        return self.k_total - self.outer.k

    def describe(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "n": self.n,
            "k": self.k,
            "rate": self.rate,
            "profile": self.profile,
            "crc": self.crc.to_hex() if self.crc else None,
            "encoding_xors": encoding_complexity(self),
            "layers": [layer.to_dict() for layer in self.layers],
        }


def rm_mask(n: int, dmin: int, direction: Direction = "forward") -> tuple[int, ...]:
    """Indices whose transform row weight is at least dmin, ascending."""
    log2_exact(n)
    if dmin < 1:
        raise InvalidArgument(f"dmin must be >= 1, got {dmin}")
    return tuple(i for i in range(1, n + 1) if _transform_weight(n, i, direction) >= dmin)


def auto_dmin(n: int, needed: int, direction: Direction = "forward") -> int:
    """Largest power of two whose mask still hosts `needed` indices."""
    dmin = n
    while dmin > 1 and len(rm_mask(n, dmin, direction)) < needed:
        dmin //= 2
    return dmin


def build_layer(
    n: int,
    k: int | None,
    dmin: int | None,
    profile: ReliabilityProfile,
    n_prev: int = 0,
    direction: Direction = "forward",
    threshold: float | None = None,
) -> LayerSpec:
    if profile.n != n:
        raise InvalidArgument(f"profile covers N={profile.n}, layer needs N={n}")
    if k is None and threshold is None:
        raise InvalidArgument("a layer needs either k or a threshold")
    if dmin is None:
        if k is None:
            raise InvalidArgument("threshold selection needs an explicit dmin")
        dmin = auto_dmin(n, k + n_prev, direction)
    mask = set(rm_mask(n, dmin, direction))
    ranked = [i for i in profile.ordering() if i in mask]
    if threshold is not None:
        k = sum(1 for i in ranked if profile.value(i) >= threshold)
    if k < 0 or k + n_prev > len(ranked):
        raise ConstructionInfeasible(
            "mask-size", f"N={n}, dmin={dmin}: mask holds {len(ranked)} indices, need K={k} + {n_prev}"
        )
    info = tuple(sorted(ranked[:k]))
    connection = tuple(sorted(ranked[k : k + n_prev]))
    frozen = tuple(sorted(set(range(1, n + 1)) - set(info) - set(connection)))
    log.debug("Layer N=%d K=%d dmin=%d: I=%s A=%s", n, k, dmin, info, connection)
    return LayerSpec(n, k, dmin, info, connection, frozen, direction)


@lru_cache(maxsize=4)
def flat_inputs(n: int, weight: int) -> tuple[np.ndarray, np.ndarray]:
    """
    Outer inputs u = x G_N of every weight-`weight` affine flat x, with the
    supports of u packed into 64-bit words. G_N is its own inverse.
    """
    inputs = polar_transform_rows(affine_flats(log2_exact(n), log2_exact(weight)))
    inputs.setflags(write=False)
    return inputs, pack_words(inputs)


def _pack_ints(rows: np.ndarray) -> np.ndarray:
    return rows.astype(np.int64) @ (np.int64(1) << np.arange(rows.shape[1], dtype=np.int64))


def _inner_words(inner: tuple[LayerSpec, ...], outer: LayerSpec) -> np.ndarray:
    """Every output of layer L-1, packed as ints (element j at bit j-1)."""
    from deep_polar.encoder import inner_connection_rows  # encoder imports this module

    code = DeepPolarCode(inner + (outer,))
    bits = code.inner_bits
    if bits > MAX_SEARCH_BITS or len(outer.connection) > 62:
        raise ConstructionInfeasible("connection-rule", f"{bits} inner bits over N={inner[-1].n} are too many to enumerate")
    messages = ((np.arange(1 << bits)[:, None] >> np.arange(bits)) & 1).astype(np.uint8)
    return np.unique(_pack_ints(inner_connection_rows(code, messages)))


def _flats_inside(
    inputs: np.ndarray, words: np.ndarray, info: tuple[int, ...], connection: tuple[int, ...], inner: np.ndarray
) -> int:
    """Flats whose u sits on I and A with u_A an inner output."""
    allowed = np.zeros(inputs.shape[1], dtype=np.uint8)
    allowed[np.asarray(info + connection, dtype=int) - 1] = 1
    stray = words & ~pack_words(allowed)
    hits = np.flatnonzero(~stray.any(axis=1))
    if hits.size == 0:
        return 0
    values = _pack_ints(inputs[np.ix_(hits, np.asarray(connection, dtype=int) - 1)])
    return int(np.isin(values, inner).sum())


@lru_cache(maxsize=32)
def distance_connection(
    outer: LayerSpec, inner: tuple[LayerSpec, ...], profile: ReliabilityProfile, max_swaps: int = 32
) -> LayerSpec:
    """
    Re-pick A_L inside the weight mask so that no weight-dmin affine flat is
    a codeword.

    The weight-dmin words of the code spanned by the mask are exactly those
    flats, so clearing them pushes d_min past dmin. The search starts from
    the reliability choice and applies the single swap that clears the most
    flats, ties going to the more reliable incoming index.
    """
    if outer.dmin < 2 or outer.dmin & (outer.dmin - 1):
        raise InvalidArgument(f"the distance rule needs a power-of-two dmin >= 2, got {outer.dmin}")
    if not inner:
        raise InvalidArgument("the distance rule needs at least one inner layer")
    inputs, words = flat_inputs(outer.n, outer.dmin)
    inner_words = _inner_words(inner, outer)
    taken = set(outer.info)
    mask = set(rm_mask(outer.n, outer.dmin))
    ranked = [i for i in profile.ordering() if i in mask and i not in taken]
    rank = {index: position for position, index in enumerate(ranked)}
    current = outer.connection
    hits = _flats_inside(inputs, words, outer.info, current, inner_words)
    log.debug("N=%d dmin=%d: reliability choice of A keeps %d flats", outer.n, outer.dmin, hits)
    swaps = 0
    while hits and swaps < max_swaps:
        best_key: tuple[int, int] | None = None
        best = current
        for leaving in current:
            for entering in ranked:
                if entering in current:
                    continue
                trial = tuple(sorted(set(current) - {leaving} | {entering}))
                key = (_flats_inside(inputs, words, outer.info, trial, inner_words), rank[entering] - rank[leaving])
                if best_key is None or key < best_key:
                    best_key, best = key, trial
        if best_key is None or best_key[0] >= hits:
            break
        current, hits = best, best_key[0]
        swaps += 1
        log.debug("Swap %d: A=%s keeps %d flats", swaps, current, hits)
    if hits:
        log.warning("Distance rule stopped after %d swaps with %d weight-%d flats left", swaps, hits, outer.dmin)
    frozen = tuple(sorted(set(range(1, outer.n + 1)) - taken - set(current)))
    return LayerSpec(outer.n, outer.k, outer.dmin, outer.info, current, frozen, outer.direction)


@dataclass(frozen=True, slots=True)
class LayerConfig:
    n: int
    k: int | None = None
    dmin: int | None = None
    threshold: float | None = None
    connection_rule: str = "reliability"

    @classmethod
    def from_dict(cls, raw: Mapping[str, Any]) -> "LayerConfig":
        try:
            n = int(raw["n"])
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidArgument(f"layer entry {dict(raw)} needs an integer 'n'") from exc
        dmin = raw.get("dmin")
        rule = str(raw.get("connection", "reliability")).lower()
        if rule not in CONNECTION_RULES:
            raise InvalidArgument(f"connection rule must be one of {', '.join(CONNECTION_RULES)}, got {rule!r}")
        return cls(
            n=n,
            k=int(raw["k"]) if raw.get("k") is not None else None,
            dmin=None if dmin in (None, "auto") else int(dmin),
            threshold=float(raw["threshold"]) if raw.get("threshold") is not None else None,
            connection_rule=rule,
        )


def build_code(
    layers: Sequence[LayerConfig],
    profile: ProfileSource | str,
    crc: CrcSpec | None = None,
    name: str = "",
) -> DeepPolarCode:
    if isinstance(profile, str):
        profile = ProfileSource.parse(profile)
    if not layers:
        raise ConstructionInfeasible("layer-count", "a code needs at least one layer")
    # configs may list layers outermost-first
    ordered = sorted(layers, key=lambda layer: layer.n)
    sizes = [layer.n for layer in ordered]
    if len(set(sizes)) != len(sizes):
        raise ConstructionInfeasible("layer-order", f"duplicate layer sizes {sizes}")
    known = [layer.k for layer in ordered]
    rate = 0.5
    if all(k is not None for k in known):
        rate = max(sum(known) - (crc.degree if crc else 0), 1) / sizes[-1]

    built: list[LayerSpec] = []
    n_prev = 0
    for position, layer in enumerate(ordered):
        direction: Direction = "forward" if position == len(ordered) - 1 else "transpose"
        layer_profile = profile.build(layer.n, rate, direction)
        spec = build_layer(layer.n, layer.k, layer.dmin, layer_profile, n_prev, direction, layer.threshold)
        if layer.connection_rule == "distance":
            if direction != "forward":
                raise InvalidArgument("the distance rule applies to the outer layer only")
            spec = distance_connection(spec, tuple(built), layer_profile)
        built.append(spec)
        n_prev = layer.n
    code = DeepPolarCode(tuple(built), crc, str(profile), name)
    log.info("Built %s code N=%d K=%d with %d layer(s)", name or "unnamed", code.n, code.k, len(built))
    return code


def polar_code(n: int, k: int, profile: ProfileSource | str, crc: CrcSpec | None = None) -> DeepPolarCode:
    """Plain polar code: the K (+CRC) most reliable indices, no weight mask."""
    extra = crc.degree if crc else 0
    return build_code([LayerConfig(n, k + extra, 1)], profile, crc, name=f"polar({n},{k})")


def rm_code(n: int, dmin: int) -> DeepPolarCode:
    """Reed-Muller code: every row of weight >= dmin."""
    mask = rm_mask(n, dmin)
    frozen = tuple(i for i in range(1, n + 1) if i not in set(mask))
    layer = LayerSpec(n, len(mask), dmin, mask, (), frozen, "forward")
    return DeepPolarCode((layer,), None, "rm", f"rm({n},{len(mask)})")


def code_from_sets(n: int, info: Sequence[int], name: str = "") -> DeepPolarCode:
    """Single-layer code from an explicit information set."""
    info_sorted = tuple(sorted(info))
    frozen = tuple(i for i in range(1, n + 1) if i not in set(info_sorted))
    layer = LayerSpec(n, len(info_sorted), 1, info_sorted, (), frozen, "forward")
    return DeepPolarCode((layer,), None, "explicit", name)


def load_code_config(source: Path | str | Mapping[str, Any]) -> DeepPolarCode:
    """Build a code from a JSON file path or an already parsed dict."""
    if isinstance(source, Mapping):
        raw = dict(source)
        name = str(raw.get("name", ""))
    else:
        path = Path(source)
        try:
            raw = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise InvalidArgument(f"cannot read code config {path}: {exc}") from exc
        name = str(raw.get("name", path.stem))
    layers_raw = raw.get("layers")
    if not isinstance(layers_raw, list) or not layers_raw:
        raise InvalidArgument("code config needs a non-empty 'layers' list")
    layers = [LayerConfig.from_dict(entry) for entry in layers_raw]
    crc = CrcSpec.parse(raw.get("crc"))
    return build_code(layers, raw.get("profile", "bec:0.5"), crc, name)


def encoding_complexity(code: DeepPolarCode) -> int:
    """XOR count of the successive encoder: sum of (N_l / 2) log2 N_l."""
    return sum((layer.n // 2) * int(math.log2(layer.n)) for layer in code.layers)


def unified_pretransform(code: DeepPolarCode) -> Gf2Matrix:
    """
    N x N matrix T with x = [0_F, u_{L-1}, u_I] T G_N.

    Row blocks follow the input order: |F_L| zero rows, then G^T of the
    previous layer scattered onto the A_L columns, then identity rows onto
    the I_L columns.
    """
    outer = code.outer
    n = outer.n
    t = np.zeros((n, n), dtype=np.uint8)
    row = len(outer.frozen)
    if len(code.layers) > 1:
        prev_n = code.layers[-2].n
        gt = Gf2Matrix.polar(prev_n).T.entries
        cols = np.asarray(outer.connection) - 1
        t[row : row + prev_n, cols] = gt
        row += prev_n
    t[row : row + outer.k, np.asarray(outer.info, dtype=int) - 1] = np.eye(outer.k, dtype=np.uint8)
    return Gf2Matrix(t)
