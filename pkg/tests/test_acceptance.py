"""Desk-scale reproductions of the published tables and curve orderings."""
import numpy as np
import pytest
from scipy.stats import binom

from deep_polar.analysis import best_subcode, flat_codewords, min_weight_scl_estimate, ml_bler_approx
from deep_polar.channels import ChannelModel, trial_rng
from deep_polar.construction import polar_code, rm_mask
from deep_polar.encoder import encode, encode_rows, generator_matrix
from deep_polar.gf2 import BitVector, Gf2Matrix
from deep_polar.ml import bpsk_codebook, ml_decode_awgn
from deep_polar.models import PointResult, SimConfig
from deep_polar.scl import parallel_scl_decode, sc_decode, scl_bpc_decode
from deep_polar.simulation import Pipeline, ca_polar_baseline, run_point, run_trials
from tests.conftest import CONFIG_DIR, ML_CONFIGS, PARALLEL_CONFIGS, SCL_BPC_CONFIGS, load, noiseless_llr

pytestmark = pytest.mark.slow


def _bec_point(code, eps: float, trials: int, seed: int = 2024) -> PointResult:
    done, errors, bits = run_trials(Pipeline(code, "ml", channel="bec"), ChannelModel.bec(eps), seed, 0, 0, trials)
    return PointResult(param=eps, trials=done, block_errors=errors, bit_errors=bits, k=code.k)


def test_table_one_rm_type_rate_11():
    _, spectrum = best_subcode(32, rm_mask(32, 8), 11)
    assert spectrum.counts == {0: 1, 8: 40, 12: 336, 16: 1294, 20: 336, 24: 40, 32: 1}


@pytest.mark.parametrize("name", SCL_BPC_CONFIGS + PARALLEL_CONFIGS + ML_CONFIGS)
def test_zero_noise_round_trips(name, rng):
    code = load(name)
    decoders = [lambda llr: sc_decode(code, llr), lambda llr: scl_bpc_decode(code, llr, 1),
                lambda llr: scl_bpc_decode(code, llr, 8)]
    if name in PARALLEL_CONFIGS:
        decoders.append(lambda llr: parallel_scl_decode(code, llr, 8))
    if code.k <= 16:
        decoders.append(lambda llr: ml_decode_awgn(code, llr))
    for _ in range(100):
        message = rng.integers(0, 2, size=code.k, dtype=np.uint8)
        llr = noiseless_llr(encode(code, BitVector.from_array(message)).to_array())
        for decode in decoders:
            np.testing.assert_array_equal(decode(llr).message.to_array(), message)


def test_minimum_distance_guard_on_random_messages(rng):
    for name in SCL_BPC_CONFIGS + PARALLEL_CONFIGS + ML_CONFIGS:
        code = load(name)
        messages = rng.integers(0, 2, size=(100_000, code.k), dtype=np.uint8)
        messages = messages[messages.any(axis=1)]
        weights = encode_rows(code, messages).sum(axis=1)
        assert weights.min() >= code.outer.dmin, name


@pytest.mark.parametrize(
    "name,estimate",
    [("dp_128_64", 8), ("dp_128_96", 8), ("cadp_128_64", 8), ("dp_128_64_parallel", 12)],
)
def test_table_two_distance_estimates(name, estimate):
    assert min_weight_scl_estimate(load(name), 10_000) == estimate


@pytest.mark.parametrize("name", ["dp_128_32", "dp_128_29"])
def test_distance_rule_clears_weight_16_flats(name):
    code = load(name)
    assert code.outer.dmin == 16
    assert flat_codewords(code) == 0
    # RM(3,7) has no weights strictly between 16 and 24
    assert min_weight_scl_estimate(code, 10_000) >= 24


def test_crc_aided_ml_matches_naive_enumeration():
    code = load("cadp_64_16")
    indices = np.arange(1 << code.k)
    messages = ((indices[:, None] >> np.arange(code.k)) & 1).astype(np.uint8)
    book = np.stack([1.0 - 2.0 * encode(code, BitVector.from_array(m)).to_array() for m in messages])
    model = ChannelModel.awgn(4.0, code.rate)
    checked = 0
    for trial in range(1000):
        rng = trial_rng(29, 0, trial)
        message = messages[rng.integers(0, 1 << code.k)]
        llr = model.transmit_rows(encode(code, BitVector.from_array(message)).to_array(), rng, clip=False)
        scores = book @ llr
        top = np.sort(scores)
        if top[-1] - top[-2] <= 1e-9:
            continue
        naive = BitVector.from_array(messages[int(np.argmax(scores))])
        assert ml_decode_awgn(code, llr).message == naive
        checked += 1
    assert checked >= 990


def test_toy_list_decoders_match_ml():
    toy = load("toy")
    model = ChannelModel.awgn(3.0, toy.rate)
    book = bpsk_codebook(toy)
    checked = bpc_agree = parallel_agree = 0
    for trial in range(10_000):
        rng = trial_rng(17, 0, trial)
        message = rng.integers(0, 2, size=toy.k, dtype=np.uint8)
        llr = model.transmit_rows(encode(toy, BitVector.from_array(message)).to_array(), rng)
        scores = np.sort(book @ llr)
        if scores[-1] - scores[-2] <= 1e-9:
            continue
        ml = ml_decode_awgn(toy, llr).message
        checked += 1
        bpc_agree += scl_bpc_decode(toy, llr, 16).message == ml
        parallel_agree += parallel_scl_decode(toy, llr, 8).message == ml
    assert bpc_agree == checked
    assert parallel_agree == checked


def test_bec_ml_ordering():
    deep_11, deep_15 = load("example1"), load("example2")
    polar_11 = polar_code(32, 11, "bec:0.5")
    rm_type_15, _ = best_subcode(32, rm_mask(32, 8), 15)
    separated = 0
    for eps in (0.35, 0.40, 0.45):
        deep = _bec_point(deep_11, eps, 100_000)
        polar = _bec_point(polar_11, eps, 100_000)
        if deep.bler + deep.ci95 < polar.bler - polar.ci95:
            separated += 1
        deep_high = _bec_point(deep_15, eps, 100_000)
        rm_type = _bec_point(rm_type_15, eps, 100_000)
        assert deep_high.bler <= rm_type.bler + deep_high.ci95 + rm_type.ci95
    assert separated >= 2


def test_union_approximation_at_high_snr():
    code = load("example1")
    config = SimConfig(code=str(CONFIG_DIR / "example1.json"), points=[4.0], decoder="ml",
                       max_trials=400_000, target_errors=100)
    point = run_point(Pipeline(code, "ml"), config, 0, 4.0)
    assert point.block_errors >= 100
    snr = 1.0 / ChannelModel.awgn(4.0, code.rate).sigma2
    approx = ml_bler_approx(20, 8, snr)
    assert approx / 3.0 <= point.bler <= 3.0 * approx


def test_bler_confidence_interval_coverage():
    toy = load("toy")
    eps = 0.3
    # exact ML-BEC failure probability over every erasure pattern
    g = generator_matrix(toy).entries
    exact = 0.0
    for pattern in range(1 << toy.n):
        known = [j for j in range(toy.n) if not pattern >> j & 1]
        erased = toy.n - len(known)
        solvable = bool(known) and Gf2Matrix(g[:, known]).rank() == toy.k
        if not solvable:
            exact += eps**erased * (1 - eps) ** (toy.n - erased)
    covered = 0
    for seed in range(100):
        point = _bec_point(toy, eps, 2000, seed=seed)
        covered += abs(point.bler - exact) <= point.ci95
    assert covered >= binom.ppf(0.001, 100, 0.93)


BLER_WINDOW = (5e-3, 2e-2)


@pytest.mark.parametrize("name,k,start", [("dp_128_32", 32, 1.5), ("dp_128_56", 56, 2.0), ("dp_128_96", 96, 3.25)])
def test_deep_polar_not_worse_than_ca_polar(name, k, start):
    baseline = ca_polar_baseline(128, k)
    config = SimConfig(code=str(CONFIG_DIR / f"{name}.json"), points=[start], max_trials=200_000,
                       target_errors=200)
    low, high = BLER_WINDOW
    ebn0 = start
    for _ in range(12):
        ca = run_point(baseline, config, 0, ebn0)
        if low <= ca.bler <= high:
            break
        ebn0 = round(ebn0 + (0.2 if ca.bler > high else -0.2), 2)
    assert low <= ca.bler <= high, f"CA-polar never reached the BLER window, last {ca.bler:.2e} at {ebn0} dB"
    dp = run_point(Pipeline(load(name), "scl-bpc", 8), config, 0, ebn0)
    assert dp.bler <= ca.bler

