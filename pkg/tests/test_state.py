import io
import math

import pytest

from deep_polar.errors import ConfigRejected
from deep_polar.gf2 import BitVector
from deep_polar.models import DecodeResult, PointResult, SimConfig, SimResult
from deep_polar.state import CSV_HEADER, CheckpointStore, save_csv, write_csv


def test_point_statistics():
    point = PointResult(param=1.5, trials=1000, block_errors=100, bit_errors=250, seconds=2.0, k=10)
    assert point.bler == 0.1
    assert point.ber == 0.025
    assert point.ci95 == pytest.approx(1.96 * math.sqrt(0.1 * 0.9 / 1000))
    assert point.csv_row()[:3] == ["1.5", "1000", "100"]
    assert PointResult.from_dict(point.to_dict()) == point
    assert PointResult(param=0.0).bler == 0.0


def test_sim_config_parsing_and_key():
    config = SimConfig.from_dict({"code": "configs/toy.json", "ebn0": [1, 2], "list_size": 4})
    assert config.points == [1.0, 2.0]
    assert config.list_size == 4
    same = SimConfig.from_dict(config.to_dict())
    assert same.key() == config.key()
    other = SimConfig.from_dict({**config.to_dict(), "seed": config.seed + 1})
    assert other.key() != config.key()


@pytest.mark.parametrize(
    "overrides",
    [{"points": []}, {"max_trials": 0}, {"decoder": "bp"}, {"channel": "bec", "points": [1.5]}, {"snr_kind": "db"}],
)
def test_sim_config_validation(overrides):
    config = SimConfig.from_dict({"code": "toy.json", "points": [1.0], **overrides})
    with pytest.raises(ConfigRejected):
        config.validate()


def test_missing_code_is_rejected():
    with pytest.raises(ConfigRejected):
        SimConfig.from_dict({"points": [1.0]})


def test_decode_result_dict():
    result = DecodeResult(BitVector.from_string("101"), True, 0.25, [BitVector.from_string("101"), None])
    data = result.to_dict()
    assert data["message_bits"] == "101"
    assert data["layer_bits"] == ["101", ""]
    assert data["status"] == "ok"


def test_checkpoint_store(tmp_path):
    store = CheckpointStore(tmp_path / "runs" / "checkpoints.json")
    assert store.load("abc") is None
    result = SimResult("toy", [PointResult(param=1.0, trials=10, block_errors=2)])
    store.save("abc", result)
    store.save("def", SimResult("other"))
    assert store.load("abc") == result
    store.clear("abc")
    assert store.load("abc") is None
    assert store.load("def") == SimResult("other")


def test_csv_output(tmp_path):
    points = [PointResult(param=0.4, trials=100, block_errors=3, bit_errors=5, k=11)]
    handle = io.StringIO()
    write_csv(points, handle)
    lines = handle.getvalue().splitlines()
    assert lines[0] == ",".join(CSV_HEADER)
    assert lines[1].startswith("0.4,100,3,")
    path = tmp_path / "out" / "points.csv"
    save_csv(points, path)
    assert path.read_text(encoding="utf-8").splitlines() == lines
