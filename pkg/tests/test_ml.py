import numpy as np
import pytest

from deep_polar.construction import code_from_sets, polar_code
from deep_polar.encoder import encode
from deep_polar.errors import InvalidArgument
from deep_polar.gf2 import BitVector
from deep_polar.ml import consistent_messages, ml_decode_awgn, ml_decode_bec
from tests.conftest import ML_CONFIGS, load, noiseless_llr


@pytest.mark.parametrize("name", ML_CONFIGS + ("example1",))
def test_awgn_ml_noiseless_round_trip(name, rng):
    code = load(name)
    for _ in range(5):
        message = rng.integers(0, 2, size=code.k, dtype=np.uint8)
        codeword = encode(code, BitVector.from_array(message)).to_array()
        assert ml_decode_awgn(code, 1.0 - 2.0 * codeword).message == BitVector.from_array(message)


def test_chunked_search_above_cached_size(rng):
    code = polar_code(32, 17, "bec:0.5")
    message = rng.integers(0, 2, size=17, dtype=np.uint8)
    codeword = encode(code, BitVector.from_array(message)).to_array()
    noisy = 1.0 - 2.0 * codeword + rng.normal(0.0, 0.3, 32)
    assert ml_decode_awgn(code, noisy).message == BitVector.from_array(message)


def test_enumeration_guard(example1):
    with pytest.raises(InvalidArgument):
        ml_decode_awgn(example1, np.zeros(32), max_k=8)
    with pytest.raises(InvalidArgument):
        ml_decode_awgn(example1, np.zeros(16))


def test_bec_statuses(example1, rng):
    message = rng.integers(0, 2, size=example1.k, dtype=np.uint8)
    llr = noiseless_llr(encode(example1, BitVector.from_array(message)).to_array())
    clean = ml_decode_bec(example1, llr)
    assert clean.status == "unique" and clean.success
    np.testing.assert_array_equal(clean.message.to_array(), message)

    assert ml_decode_bec(example1, np.zeros(32)).status == "ambiguous"

    corrupted = llr.copy()
    corrupted[0] = -corrupted[0]
    result = ml_decode_bec(example1, corrupted)
    assert result.status == "inconsistent" and not result.success


def test_bec_elimination_matches_enumeration(example1, rng):
    for _ in range(200):
        message = rng.integers(0, 2, size=example1.k, dtype=np.uint8)
        llr = noiseless_llr(encode(example1, BitVector.from_array(message)).to_array())
        llr[rng.random(32) < 0.5] = 0.0
        candidates = consistent_messages(example1, llr)
        result = ml_decode_bec(example1, llr)
        if len(candidates) == 1:
            assert result.status == "unique"
            np.testing.assert_array_equal(result.message.to_array(), candidates[0])
        else:
            assert result.status == "ambiguous"


def test_awgn_tie_goes_to_lexicographically_smaller_message():
    code = code_from_sets(2, [1, 2])
    # BPSK images: 00 -> (+,+), 01 -> (-,-), 10 -> (-,+), 11 -> (+,-); y is equidistant from 01 and 10
    result = ml_decode_awgn(code, np.array([-1.0, 0.0]))
    assert result.message.to_string() == "01"
    assert result.path_metric == pytest.approx(-1.0)
