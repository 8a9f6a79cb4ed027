import json

import numpy as np
import pytest

from bifree.cli import format_complex, main
from bifree.component import random_matrix
from bifree.modelfile import ComponentSpec, ModelError, ModelFile, dump_model, parse_model, parse_word
from bifree.ncpoly import neg, pos


def write(tmp_path, model, name="model.json"):
    path = tmp_path / name
    path.write_text(json.dumps(dump_model(model)))
    return str(path)


def schmidt_component(rng, weights, n_gens=2):
    return ComponentSpec(len(weights), [random_matrix(rng, len(weights)) for _ in range(n_gens)], schmidt=list(weights))


def centered_component():
    # traceless generator in a maximally entangled state has mean zero
    return ComponentSpec(2, [np.array([[1, 0], [0, -1]], dtype=complex)], schmidt=[1, 1])


def bad_component():
    r = 1 / np.sqrt(2)
    return ComponentSpec(2, [np.array([[0, 1], [0, 0]], dtype=complex)], vector=np.array([r, 0, 0, -r], dtype=complex))


@pytest.fixture
def good_path(tmp_path, rng):
    return write(tmp_path, ModelFile([schmidt_component(rng, [0.6, 0.4]), schmidt_component(rng, [1, 1])]))


@pytest.fixture
def bad_path(tmp_path, rng):
    return write(tmp_path, ModelFile([schmidt_component(rng, [0.7, 0.3]), bad_component()]), "bad.json")


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr()


def test_round_trip(rng):
    model = ModelFile([schmidt_component(rng, [3, 1]), bad_component()])
    again = parse_model(json.loads(json.dumps(dump_model(model))))
    assert again == model
    assert dump_model(again) == dump_model(model)


def test_parse_word():
    assert parse_word("0.1 ~1.0") == (neg(1, 0), pos(0, 1))
    assert parse_word("") == ()
    for bad in ["0", "a.b", "0.1.2", "~~0.1"]:
        with pytest.raises(ModelError):
            parse_word(bad)


@pytest.mark.parametrize(
    "data",
    [
        {},
        {"components": []},
        {"components": [{"dim": 2, "generators": [[[[1, 0]]]], "state": {"schmidt": [1, 1]}}]},
        {"components": [{"dim": 1, "generators": [], "state": {"schmidt": [-1]}}]},
        {"components": [{"dim": 1, "generators": [], "state": {"vector": [[2, 0]]}}]},
        {"components": [{"dim": 1, "generators": [], "state": {"schmidt": [1]}}], "options": {"psd_tol": -1}},
        {"components": [{"dim": 1, "generators": [], "state": {"schmidt": [1]}}], "extra": 1},
    ],
)
def test_validation_errors(data):
    with pytest.raises(ModelError):
        parse_model(data)


def test_format_complex():
    assert format_complex(1 + 0j) == "1+0i"
    assert format_complex(complex(0.5, -0.25)) == "0.5-0.25i"
    assert format_complex(complex(-0.0, -0.0)) == "0+0i"


def test_check_rp_good(capsys, good_path):
    code, out = run(capsys, "check-rp", good_path, "--all", "--json")
    assert code == 0
    assert json.loads(out.out)["ok"] is True


def test_check_rp_bad(capsys, bad_path):
    code, out = run(capsys, "check-rp", bad_path, "--json")
    report = json.loads(out.out)
    assert code == 1
    assert report["components"]["1"]["witness"]["value"] < 0
    code, _ = run(capsys, "check-rp", bad_path, "--component", "0")
    assert code == 0


def test_malformed_file(capsys, tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    code, out = run(capsys, "check-rp", str(path))
    assert code == 2 and "error" in out.err
    code, _ = run(capsys, "check-rp", str(tmp_path / "missing.json"))
    assert code == 2


def test_moment_unit(capsys, good_path):
    code, out = run(capsys, "moment", good_path, "--word", "")
    assert code == 0 and out.out.strip() == "1+0i"


def test_moment_centered_generators(capsys, tmp_path):
    path = write(tmp_path, ModelFile([centered_component(), centered_component()]))
    code, out = run(capsys, "moment", path, "--word", "0.0 1.0", "--json")
    value = json.loads(out.out)["value"]
    assert code == 0 and abs(complex(*value)) <= 1e-9


def test_moment_verify(capsys, good_path):
    code, out = run(capsys, "moment", good_path, "--word", "~0.1 1.0 0.0 ~1.1", "--verify", "--json")
    report = json.loads(out.out)
    assert code == 0 and report["abs_diff"] <= 1e-8


def test_moment_unknown_generator(capsys, good_path):
    code, _ = run(capsys, "moment", good_path, "--word", "3.0")
    assert code == 2
    code, _ = run(capsys, "moment", good_path, "--word", "0.7")
    assert code == 2


def test_gram(capsys, good_path):
    code, out = run(capsys, "gram", good_path, "--json", "--matrix", "--max-len", "1")
    report = json.loads(out.out)
    assert code == 0
    assert report["gram"]["size"] == 5 and len(report["gram"]["matrix"]) == 5


def test_verify_theorem_pass(capsys, good_path):
    code, out = run(capsys, "verify-theorem", good_path, "--max-len", "2", "--trials", "500", "--json")
    report = json.loads(out.out)
    assert code == 0 and report["verdict"] == "pass"
    assert report["version"] and report["options"]["seed"] == 42


def test_verify_theorem_hypothesis_failure(capsys, bad_path):
    code, out = run(capsys, "verify-theorem", bad_path, "--trials", "10", "--json")
    assert code == 3
    assert json.loads(out.out)["verdict"] == "hypothesis-failure"


def test_verify_theorem_trivial(capsys, good_path):
    code, out = run(capsys, "verify-theorem", good_path, "--max-len", "0", "--trials", "3", "--json")
    assert code == 0 and json.loads(out.out)["gram"]["size"] == 1


def test_oracle_compare(capsys, good_path):
    code, out = run(capsys, "oracle-compare", good_path, "--count", "50", "--json")
    assert code == 0 and json.loads(out.out)["max_abs_diff"] <= 1e-8


def test_determinism(capsys, good_path):
    _, first = run(capsys, "verify-theorem", good_path, "--trials", "50", "--json")
    _, second = run(capsys, "verify-theorem", good_path, "--trials", "50", "--json")
    assert first.out == second.out
