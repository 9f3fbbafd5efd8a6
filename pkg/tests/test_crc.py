import numpy as np
from hypothesis import given, strategies as st

from deep_polar.construction import CrcSpec
from deep_polar.crc import crc_append, crc_append_rows, crc_check, crc_check_rows, crc_remainder
from deep_polar.gf2 import BitVector

CRC6 = CrcSpec()


def long_division(message: str, generator: str) -> str:
    """Textbook polynomial division on 0/1 strings, highest power first."""
    work = list(message + "0" * (len(generator) - 1))
    for i in range(len(message)):
        if work[i] == "1":
            for j, g in enumerate(generator):
                work[i + j] = "0" if work[i + j] == g else "1"
    return "".join(work[len(message) :])


def test_golden_vector_single_one():
    assert crc_remainder(BitVector.from_string("1"), CRC6).to_string() == "100001"
    assert crc_append(BitVector.from_string("1"), CRC6).to_string() == "1100001"


def test_all_zero_message_has_zero_crc():
    assert crc_remainder(BitVector.zeros(20), CRC6) == BitVector.zeros(6)


@given(st.text(alphabet="01", min_size=1, max_size=64))
def test_remainder_matches_long_division(bits):
    # 1 + D^5 + D^6 written highest power first
    assert crc_remainder(BitVector.from_string(bits), CRC6).to_string() == long_division(bits, "1100001")


@given(st.integers(1, 64), st.data())
def test_appended_words_check(k, data):
    d = BitVector(data.draw(st.integers(0, (1 << k) - 1)), k)
    extended = crc_append(d, CRC6)
    assert crc_check(extended, CRC6)
    flip = data.draw(st.integers(0, k + 5))
    assert not crc_check(extended ^ BitVector.unit(k + 6, flip + 1), CRC6)


def test_row_variants_agree(rng):
    messages = rng.integers(0, 2, size=(50, 23), dtype=np.uint8)
    extended = crc_append_rows(messages, CRC6)
    for row, ext in zip(messages, extended):
        np.testing.assert_array_equal(ext, crc_append(BitVector.from_array(row), CRC6).to_array())
    assert crc_check_rows(extended, CRC6).all()
    extended[0, 3] ^= 1
    assert not crc_check_rows(extended, CRC6)[0]
