import hashlib
import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from plconf import lamplighter as L
from plconf.cli import main
from plconf.plmap import random_element
from plconf.serial import (
    ValidationError,
    element_from_json,
    element_to_json,
    lamp_from_json,
    lamp_to_json,
    loads_checked,
)


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


@given(st.integers(0, 10**6), st.sampled_from([2, 3, 5]))
def test_element_json_round_trip(seed, n):
    g = random_element(seed, 3, n)
    assert element_from_json(json.loads(json.dumps(element_to_json(g)))) == g


@given(st.dictionaries(st.integers(-5, 5), st.integers(-9, 9)), st.integers(-3, 3))
def test_lamp_json_round_trip(lamps, shift):
    u = L.lamp_elt(L.IntLamp(), lamps, shift)
    assert lamp_from_json(json.loads(json.dumps(lamp_to_json(u))), L.IntLamp()) == u


def test_positioned_json_error():
    with pytest.raises(ValidationError, match="line 2 column"):
        loads_checked('{"n": 2,\n  oops}')


def test_breakpoint_errors_name_the_index():
    bad = {"n": 2, "breakpoints": [["0", "0"], ["1/x", "1/2"], ["1", "1"]]}
    with pytest.raises(ValidationError, match=r"breakpoints\[1\]"):
        element_from_json(bad)
    with pytest.raises(ValidationError, match="slope|power|breakpoint"):
        element_from_json({"n": 2, "breakpoints": [["0", "0"], ["1/3", "1/2"], ["1", "1"]]})


def test_compare_example(capsys):
    code, out = run(capsys, "conf", "compare", "rigidstab:1/4", "rigidstab:3/8", "--n", "2")
    doc = json.loads(out)
    assert code == 0
    assert doc["result"]["forward"]["kind"] == doc["result"]["backward"]["kind"] == "dominates"
    assert doc["result"]["equivalent"]


def test_output_is_deterministic(capsys):
    args = ("conf", "check", "nbhdorbitfix:1/3", "--budget", "30", "--seed", "5")
    first = run(capsys, *args)
    second = run(capsys, *args)
    assert first == second and first[0] == 0
    manifest = json.loads(first[1])["manifest"]
    assert manifest["seed"] == 5 and manifest["budgets"]["samples"] == 30
    assert "version" in manifest and "timestamp" not in json.dumps(manifest)


def test_compose_from_files(tmp_path, capsys):
    f = tmp_path / "f.json"
    g = random_element(3, 2, 2)
    text = json.dumps(element_to_json(g))
    f.write_text(text)
    code, out = run(capsys, "elt", "compose", str(f), "identity")
    doc = json.loads(out)
    assert code == 0 and element_from_json(doc["result"]) == g
    assert doc["manifest"]["input_hashes"][str(f)] == hashlib.sha256(text.encode()).hexdigest()


def test_strict_exit_code(capsys):
    code, out = run(capsys, "lamp", "compare", "qh(trivial)", "qh(whole)", "--strict")
    assert code == 2 and json.loads(out)["result"]["kind"] == "refuted"
    code, _ = run(capsys, "lamp", "compare", "qh(trivial)", "qh(whole)")
    assert code == 0


@pytest.mark.parametrize("argv", [
    ("elt", "invert", "{broken"),
    ("elt", "invert", "no/such/file.json"),
    ("conf", "check", "rigidstab:9/10"),
    ("lamp", "check", "nonsplit", "--group", "int"),
    ("tree", "dist", "gen:0", "--t", "3/4"),
    ("nonlamplike", "member", "identity", "{a}"),
])
def test_errors_exit_one_with_json(capsys, argv):
    code, out = run(capsys, *argv)
    assert code == 1
    assert set(json.loads(out)) == {"error", "message"}


def test_unknown_subcommand(capsys):
    assert main(["frobnicate"]) == 1


@pytest.mark.parametrize("argv,key", [
    (("elt", "chi", "gen:0"), "chi0"),
    (("elt", "fixed", "bump"), "points"),
    (("conf", "largest", "orbitfix:1/3"), "k"),
    (("conf", "fixed", "orbitfix:1/4"), "points"),
    (("lamp", "check", "machado:1", "--budget", "40"), "prod_k"),
    (("lamp", "member", '{"shift": 0, "lamps": {"-3": 1}}', "machado:1"), None),
    (("lamp", "nonsplit", "--p-max", "4"), "steps"),
    (("tree", "dist", "gen:0"), "distance"),
    (("tree", "type", "gen:0"), "type"),
    (("tree", "busemann", "gen:0"), "value"),
    (("tree", "ball", "--depth", "2"), "acyclic"),
    (("nonlamplike", "stilde", "{1}", "40"), "elements"),
    (("nonlamplike", "oddset", "3"), "elements"),
    (("nonlamplike", "compare", "{3}", "{3,5}"), "verdict"),
    (("harness", "2"), "criteria"),
])
def test_subcommands(capsys, argv, key):
    code, out = run(capsys, *argv)
    doc = json.loads(out)
    assert code == 0, out
    assert doc["manifest"]["command"] == " ".join(argv[:2]) or doc["manifest"]["command"] == argv[0]
    if key:
        assert key in doc["result"]


def test_section_then_xi(tmp_path, capsys):
    code, out = run(capsys, "lamp", "section", '{"0": 1, "-2": -3}')
    assert code == 0
    f = tmp_path / "g.json"
    f.write_text(json.dumps(json.loads(out)["result"]))
    code, out = run(capsys, "lamp", "xi", str(f))
    assert code == 0 and json.loads(out)["result"] == {"-2": -3, "0": 1}


def test_xi_needs_fixed_neighbourhood_of_zero(capsys):
    code, out = run(capsys, "lamp", "xi", "gen:0")
    assert code == 1 and json.loads(out)["error"] == "PLError"


def test_stilde_example_via_cli(capsys):
    _, out = run(capsys, "nonlamplike", "stilde", "{1}", "40")
    assert json.loads(out)["result"]["elements"] == [1, 2, 4, 8, 16, 31, 32, 33]
