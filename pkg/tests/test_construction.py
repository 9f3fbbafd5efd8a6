from dataclasses import replace

import numpy as np
import pytest

from deep_polar.construction import (
    CrcSpec,
    LayerConfig,
    auto_dmin,
    build_code,
    build_layer,
    distance_connection,
    encoding_complexity,
    load_code_config,
    polar_code,
    rm_code,
    rm_mask,
    unified_pretransform,
)
from deep_polar.encoder import encode, encode_rows
from deep_polar.errors import ConstructionInfeasible, InvalidArgument
from deep_polar.analysis import flat_codewords
from deep_polar.gf2 import BitVector, Gf2Matrix
from deep_polar.reliability import bec_profile
from tests.conftest import TABLE_CONFIGS, load


def test_rm_masks():
    assert rm_mask(32, 8) == (8, 12, 14, 15, 16, 20, 22, 23, 24, 26, 27, 28, 29, 30, 31, 32)
    assert rm_mask(16, 1) == tuple(range(1, 17))
    assert rm_mask(8, 8) == (8,)
    assert rm_mask(8, 4, "transpose") == (1, 2, 3, 5)
    assert auto_dmin(16, 12, "transpose") == 2


def test_example1_sets():
    outer = build_layer(32, 7, 8, bec_profile(32, 0.5), n_prev=8)
    assert set(outer.info) == {16, 24, 28, 29, 30, 31, 32}
    assert set(outer.connection) == {12, 14, 15, 20, 22, 23, 26, 27}
    assert 25 in outer.frozen


def test_example2_sets():
    outer = build_layer(32, 12, 8, bec_profile(32, 0.5), n_prev=4)
    assert set(outer.info) == {15, 16, 22, 23, 24, 26, 27, 28, 29, 30, 31, 32}
    assert set(outer.connection) == {8, 12, 14, 20}


def test_example_codes_inner_layers(example1, example2):
    assert example1.layers[0].info == (1, 2, 3, 5)
    assert example1.layers[0].frozen == (4, 6, 7, 8)
    assert example1.layers[0].connection == ()
    assert example2.layers[0].info == (1, 2, 3)
    assert (example1.n, example1.k) == (32, 11)
    assert (example2.n, example2.k) == (32, 15)


def test_threshold_selection_reproduces_example1():
    outer = build_layer(32, None, 8, bec_profile(32, 0.5), n_prev=8, threshold=0.98)
    assert outer.k == 7
    assert set(outer.info) == {16, 24, 28, 29, 30, 31, 32}


def test_mask_too_small_is_infeasible():
    with pytest.raises(ConstructionInfeasible) as caught:
        build_code([LayerConfig(8, 3), LayerConfig(16, 5, 16)], "bec:0.5")
    assert caught.value.invariant == "mask-size"


def test_duplicate_layer_sizes_are_rejected():
    with pytest.raises(ConstructionInfeasible):
        build_code([LayerConfig(8, 2), LayerConfig(8, 2)], "bec:0.5")


def test_single_layer_matches_polar_code():
    single = build_code([LayerConfig(32, 11, 1)], "bec:0.5")
    assert single.outer.info == polar_code(32, 11, "bec:0.5").outer.info
    ordering = bec_profile(32, 0.5).ordering()
    assert set(single.outer.info) == set(ordering[:11])


def test_rm_code_rows():
    code = rm_code(32, 8)
    assert code.k == 16
    assert code.outer.info == rm_mask(32, 8)


@pytest.mark.parametrize("name", TABLE_CONFIGS)
def test_table_codes_are_valid(name):
    code = load(name)
    expected_k = int(name.split("_")[2])
    assert code.k == expected_k
    assert code.k_total == code.k + (6 if code.crc else 0)
    outer = code.outer
    for layer in code.layers:
        sets = [set(layer.info), set(layer.connection), set(layer.frozen)]
        assert set().union(*sets) == set(range(1, layer.n + 1))
        assert sum(len(s) for s in sets) == layer.n
    assert min(outer.weight(i) for i in outer.info + outer.connection) >= outer.dmin


def test_dp_128_29_layer_order():
    code = load("dp_128_29")
    assert [(layer.n, layer.k) for layer in code.layers] == [(4, 2), (16, 8), (128, 19)]
    assert code.outer.dmin == 16


def test_same_config_gives_same_sets():
    assert load("dp_128_64") == load("dp_128_64")


def test_config_loader_errors(tmp_path):
    with pytest.raises(InvalidArgument):
        load_code_config({"layers": []})
    broken = tmp_path / "broken.json"
    broken.write_text("{not json", encoding="utf-8")
    with pytest.raises(InvalidArgument):
        load_code_config(broken)


def test_crc_spec_parsing():
    assert CrcSpec.parse("0x61").degree == 6
    assert CrcSpec.parse("crc6") == CrcSpec()
    assert CrcSpec.parse(None) is None
    with pytest.raises(InvalidArgument):
        CrcSpec.parse("0x60")


def test_encoding_complexity(example1):
    assert encoding_complexity(example1) == 16 * 5 + 4 * 3


def test_unified_pretransform_example1_blocks(example1):
    t = unified_pretransform(example1).entries
    outer = example1.outer
    frozen_rows = len(outer.frozen)
    assert not t[:frozen_rows].any()
    connection_cols = np.asarray(outer.connection) - 1
    gt = Gf2Matrix.polar(8).T.entries
    np.testing.assert_array_equal(t[frozen_rows : frozen_rows + 8][:, connection_cols], gt)
    info_cols = np.asarray(outer.info) - 1
    np.testing.assert_array_equal(t[frozen_rows + 8 :][:, info_cols], np.eye(7, dtype=np.uint8))


def test_unified_pretransform_single_layer_selects_rows():
    code = polar_code(16, 5, "bec:0.5")
    t = unified_pretransform(code).entries
    assert t.sum() == 5
    assert set(np.flatnonzero(t.sum(axis=0)) + 1) == set(code.outer.info)


def test_unified_pretransform_matches_encoder(example2, rng):
    t = unified_pretransform(example2)
    g = Gf2Matrix.polar(32)
    inner = example2.layers[0]
    for _ in range(100):
        d = rng.integers(0, 2, example2.k, dtype=np.uint8)
        u1 = np.zeros(inner.n, dtype=np.uint8)
        u1[np.asarray(inner.info) - 1] = d[: inner.k]
        # permuted input: zeros for F, u_1 for the G^T block, outer info bits
        permuted = np.concatenate([np.zeros(len(example2.outer.frozen), dtype=np.uint8), u1, d[inner.k :]])
        dense = (t @ g).left_multiply(BitVector.from_array(permuted))
        assert dense == encode(example2, BitVector.from_array(d))
    batch = rng.integers(0, 2, size=(4, example2.k), dtype=np.uint8)
    for row, codeword in zip(batch, encode_rows(example2, batch)):
        np.testing.assert_array_equal(codeword, encode(example2, BitVector.from_array(row)).to_array())


def _example1_raw(**outer) -> dict:
    return {
        "name": "example1-distance",
        "profile": "bec:0.5",
        "layers": [{"n": 8, "k": 4, "dmin": 4}, {"n": 32, "k": 7, "dmin": 8, **outer}],
    }


def test_distance_rule_never_keeps_more_flats(example1):
    lifted = load_code_config(_example1_raw(connection="distance"))
    outer = lifted.outer
    assert outer.info == example1.outer.info
    assert len(outer.connection) == len(example1.outer.connection)
    assert set(outer.connection) <= set(rm_mask(32, 8)) - set(outer.info)
    assert sorted(outer.info + outer.connection + outer.frozen) == list(range(1, 33))
    assert flat_codewords(lifted) <= flat_codewords(example1) == 20


def test_distance_rule_is_validated():
    with pytest.raises(InvalidArgument):
        load_code_config(_example1_raw(connection="weight"))
    with pytest.raises(InvalidArgument):
        load_code_config({"profile": "bec:0.5", "layers": [{"n": 8, "k": 4, "dmin": 4, "connection": "distance"},
                                                             {"n": 32, "k": 7, "dmin": 8}]})
    with pytest.raises(InvalidArgument):
        load_code_config({"profile": "bec:0.5", "layers": [{"n": 32, "k": 7, "dmin": 8, "connection": "distance"}]})
    example1 = load("example1")
    odd = replace(example1.outer, dmin=6)
    with pytest.raises(InvalidArgument):
        distance_connection(odd, example1.layers[:1], bec_profile(32, 0.5))
    with pytest.raises(InvalidArgument):
        distance_connection(example1.outer, (), bec_profile(32, 0.5))
