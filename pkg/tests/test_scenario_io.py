import json

import numpy as np
import pytest

from lindpert.errors import ValidationError
from lindpert.model import build_generator
from lindpert.scenario_io import (
    canonical_json,
    decode_matrix,
    digest,
    dump_scenario,
    encode,
    load_scenario,
    parse_scenario,
    scenario_to_dict,
)
from lindpert.scenarios import make_example


def _ex10_dict():
    sc = make_example("ex10")
    return scenario_to_dict("ex10", sc.l0spec, sc.l1spec, sc.dims, {"kernel": 1e-11})


def test_round_trip(tmp_path):
    sc = make_example("ex10")
    data = _ex10_dict()
    path = tmp_path / "s.json"
    dump_scenario(data, path)
    sf, sha = load_scenario(path)
    assert sha == digest(data)
    assert sf.name == "ex10" and sf.dim == 4 and sf.bipartite == sc.dims
    assert sf.tolerances == {"kernel": 1e-11}
    assert np.array_equal(build_generator(sf.l1spec).matrix, build_generator(sc.l1spec).matrix)
    # dumping again is byte-identical
    again = tmp_path / "t.json"
    dump_scenario(scenario_to_dict(sf.name, sf.l0spec, sf.l1spec, sf.bipartite, sf.tolerances), again)
    assert again.read_bytes() == path.read_bytes()


def test_minimal_scenario_and_real_entries():
    sf = parse_scenario({"schema_version": 1, "dim": 2, "hamiltonian0": [[0, 1], [1, 0]]})
    assert sf.l1spec.jumps == () and np.allclose(sf.l1spec.hamiltonian, 0)
    m = decode_matrix([[1, [0, 2]], [[0, -2], 3.5]], "m", 2)
    assert m[0, 1] == 2j and m[1, 1] == 3.5


@pytest.mark.parametrize(
    "patch, message",
    [
        ({"extra": 1}, "unknown field"),
        ({"schema_version": 2}, "schema_version"),
        ({"dim": 0}, "dim must be"),
        ({"dim": True}, "dim must be"),
        ({"hamiltonian0": [[0, 1], [0, 0]]}, "not Hermitian"),
        ({"hamiltonian0": [[0, 1]]}, "expected 2 rows"),
        ({"hamiltonian0": [[0, "x"], [1, 0]]}, r"hamiltonian0\[0\]\[1\]"),
        ({"jumps0": [[[1, 0]]]}, r"jumps0\[0\]"),
        ({"bipartite": [2, 3]}, "does not equal"),
        ({"tolerances": {"kernel": -1}}, "positive"),
        ({"tolerances": {"speed": 1}}, "unknown key"),
        ({"name": 3}, "name must be"),
    ],
)
def test_validation_errors(patch, message):
    data = {"schema_version": 1, "dim": 2, "hamiltonian0": [[0, 1], [1, 0]]}
    data.update(patch)
    with pytest.raises(ValidationError, match=message):
        parse_scenario(data)


def test_missing_field_and_bad_json(tmp_path):
    with pytest.raises(ValidationError, match="missing required field"):
        parse_scenario({"schema_version": 1, "dim": 2})
    with pytest.raises(ValidationError, match="top level"):
        parse_scenario([1, 2])
    bad = tmp_path / "bad.json"
    bad.write_text('{"dim": 2,\n  oops}')
    with pytest.raises(ValidationError, match="line 2 column"):
        load_scenario(bad)


def test_encode_and_canonical_json():
    obj = {"b": np.array([1 + 2j, 3]), "a": float("inf"), "c": np.float64(np.nan), "d": np.bool_(True)}
    enc = encode(obj)
    assert enc == {"b": [[1.0, 2.0], [3.0, 0.0]], "a": "inf", "c": "nan", "d": True}
    text = canonical_json({"z": [[1, 2], [3, 4]], "a": {"k": [1, 2]}})
    assert text.index('"a"') < text.index('"z"')
    assert "[1, 2]" in text and "[3, 4]" in text
    assert json.loads(text) == {"z": [[1, 2], [3, 4]], "a": {"k": [1, 2]}}
    with pytest.raises(TypeError):
        encode(object())


def test_digest_ignores_key_order():
    assert digest({"a": 1, "b": [1, 2]}) == digest({"b": [1, 2], "a": 1})
    assert digest({"a": 1}) != digest({"a": 2})
