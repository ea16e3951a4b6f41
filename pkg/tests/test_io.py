import json

import numpy as np
import pytest

import helpers as H
from pf_channels.channel import Channel, werner_holevo
from pf_channels.cones import PolyhedralCone, cones_equal
from pf_channels.io import (
    InputError,
    channel_from_dict,
    channel_to_dict,
    cone_from_dict,
    cone_to_dict,
    dumps,
    load_channel,
    load_choi,
    load_correlation,
    load_upb,
    parse_matrix,
    upb_to_dict,
    witness_from_dict,
    witness_to_dict,
)
from pf_channels.pf import verify_witness
from pf_channels.upb import UPBCandidate


def test_parse_matrix_real_and_complex():
    assert np.isrealobj(parse_matrix([[1, 2], [3, 4]]))
    m = parse_matrix([[[1, 0], [0, 1]], [[0, -1], [1, 0]]])
    assert m[0, 1] == 1j and m[1, 0] == -1j
    with pytest.raises(ValueError):
        parse_matrix([[1, 2], [3]])
    with pytest.raises(ValueError):
        parse_matrix([[[1, 2, 3]]])


def test_dumps_17_digits_and_deterministic():
    text = dumps({"x": 1 / 3, "y": [0.1, 2.0], "z": np.float64(1e-20), "nan": float("nan")})
    data = json.loads(text)
    assert data["x"] == 1 / 3
    assert "0.33333333333333331" in text
    assert data["nan"] is None
    assert dumps({"x": 1 / 3}) == dumps({"x": 1 / 3})


def test_channel_roundtrip(tmp_path):
    ch = Channel.from_kraus([np.diag([1.0, 1j])])
    path = tmp_path / "ch.json"
    path.write_text(dumps(channel_to_dict(ch)))
    back = load_channel(path)
    assert back.same_map(ch)


def test_channel_errors(tmp_path):
    with pytest.raises(InputError, match="missing.json"):
        load_channel(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(InputError, match="invalid JSON"):
        load_channel(bad)
    with pytest.raises(InputError, match="'kraus' or 'choi'"):
        channel_from_dict({"n": 2})
    with pytest.raises(InputError, match="kraus\\[0\\]"):
        channel_from_dict({"kraus": [[[1, "a"]]]})


def test_choi_csv(tmp_path):
    ch = werner_holevo()
    path = tmp_path / "wh.csv"
    np.savetxt(path, ch.choi, delimiter=",")
    assert load_choi(path, 3).same_map(ch)
    with pytest.raises(InputError, match="needs --n"):
        load_choi(path, None)
    with pytest.raises(InputError, match="must be 4x4"):
        load_choi(path, 2)


def test_choi_json(tmp_path):
    ch = werner_holevo()
    path = tmp_path / "wh.json"
    path.write_text(dumps({"n": 3, "choi": ch.choi}))
    assert load_choi(path, None).same_map(ch)


def test_correlation_files(tmp_path):
    c = np.array([[1.0, 0.5], [0.5, 1.0]])
    np.savetxt(tmp_path / "c.csv", c, delimiter=",")
    np.testing.assert_array_equal(load_correlation(tmp_path / "c.csv"), c)
    (tmp_path / "c.json").write_text(json.dumps({"matrix": c.tolist()}))
    np.testing.assert_array_equal(load_correlation(tmp_path / "c.json"), c)


def test_upb_roundtrip(tmp_path):
    e = np.eye(2)
    upb = UPBCandidate(e, np.array([[1, 1j], [1, -1j]]) / np.sqrt(2))
    path = tmp_path / "u.json"
    path.write_text(dumps(upb_to_dict(upb)))
    back = load_upb(path)
    np.testing.assert_allclose(back.vs, upb.vs)
    path.write_text(json.dumps({"d1": 3, "us": e.tolist(), "vs": e.tolist()}))
    with pytest.raises(InputError, match="d1"):
        load_upb(path)


def test_cone_roundtrip():
    c = PolyhedralCone([[1.0, 0.0], [1.0, 1.0]])
    assert cones_equal(c, cone_from_dict(json.loads(dumps(cone_to_dict(c)))))


def test_witness_roundtrip():
    ch, w = H.random_abelian_witnessed(np.random.default_rng(0), 3, 2)
    back = witness_from_dict(json.loads(dumps(witness_to_dict(w))))
    np.testing.assert_array_equal(back.ops, w.ops)
    np.testing.assert_array_equal(back.kraus, w.kraus)
    assert verify_witness(ch, back).residual <= 1e-14
    with pytest.raises(InputError, match="'m'"):
        witness_from_dict(dict(witness_to_dict(w), m=7))
