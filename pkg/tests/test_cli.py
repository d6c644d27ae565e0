import json
import math
import random
import subprocess
import sys
from pathlib import Path

import pytest

from ruelle_kit import cli
from ruelle_kit.catalog import abc_system, cantor_system, two_vertex_graph
from ruelle_kit.serialize import FORMAT, dumps, graph_to_json, system_to_json
from _corpus import violating_flip

DATA = Path(__file__).resolve().parents[1] / "data"


def run(capsys, *argv):
    code = cli.main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def write(tmp_path, name, doc):
    p = tmp_path / name
    p.write_text(dumps(doc) if not isinstance(doc, str) else doc)
    return p


def test_validate_system_and_graph(capsys):
    code, out, _ = run(capsys, "validate", DATA / "abc.json")
    doc = json.loads(out)
    assert code == 0 and doc["valid"] and doc["format"] == FORMAT
    code, out, _ = run(capsys, "validate", DATA / "two_vertex_graph.json")
    assert code == 0 and json.loads(out)["primitive_witness"] == [1, 1]
    code, out, _ = run(capsys, "validate", DATA / "missing_square_graph.json")
    assert code == 2 and not json.loads(out)["valid"]


def test_rpf_coordinate(capsys):
    code, out, _ = run(capsys, "rpf", DATA / "abc.json", "--depth", 3, "--coordinate", 0)
    doc = json.loads(out)
    assert code == 0
    assert doc["lambda"] == pytest.approx(math.exp(0.3) + math.exp(-0.7), rel=1e-12)
    assert doc["uniqueness"] == "certified"


def test_cocycle_check_exit_codes(capsys, tmp_path):
    code, out, _ = run(capsys, "cocycle-check", DATA / "abc.json")
    assert code == 0 and json.loads(out)["operators_commute"]
    bad = write(tmp_path, "bad.json", system_to_json(violating_flip(random.Random(0))))
    code, out, _ = run(capsys, "cocycle-check", bad)
    doc = json.loads(out)
    assert code == 2 and doc["cocycle_condition"] is False and doc["witness"] is not None


def test_kms_eval(capsys):
    code, out, _ = run(capsys, "kms-eval", DATA / "cuntz_2_kms_eval.json")
    # mu is the Bernoulli(1/2, 1/2) measure: 1 * 1/4 + 2 * 1/2 + off-diagonal 0
    assert code == 0 and json.loads(out)["value"] == pytest.approx(1.25)


def test_kgraph_subcommands(capsys):
    code, out, _ = run(capsys, "kgraph", "validate", DATA / "two_vertex_graph.json")
    assert code == 0
    code, out, _ = run(capsys, "kgraph", "rpf", DATA / "two_vertex_graph.json")
    doc = json.loads(out)
    assert code == 0 and sum(doc["vertex_masses"].values()) == pytest.approx(1.0)
    code, out, _ = run(
        capsys, "kgraph", "kms", DATA / "o2_o3_graph.json", "--beta", math.log(2), "--degree-bound", "1,1"
    )
    assert code == 2 and not json.loads(out)["passed"]


def test_tsv_output(capsys):
    code, out, _ = run(capsys, "beta-search", DATA / "cuntz_2.json", "--format", "tsv")
    lines = dict(line.split("\t", 1) for line in out.strip().splitlines())
    assert code == 0 and lines["key"] == "value"
    # scalar lists are comma-joined
    assert float(lines["betas"]) == pytest.approx(math.log(2))


def test_error_exit_codes(capsys, tmp_path):
    code, _, err = run(capsys, "validate", tmp_path / "missing.json")
    assert code == 1 and "error" in err
    code, _, _ = run(capsys, "validate", write(tmp_path, "junk.json", "{not json"))
    assert code == 1
    code, _, err = run(capsys, "validate", write(tmp_path, "fmt.json", {"format": "other/9", "type": "system"}))
    assert code == 1 and "format" in err
    # the swap shift is irreducible but not primitive
    swap = {
        "format": FORMAT,
        "type": "system",
        "space": {"kind": "sft", "matrix": [[0, 1], [1, 0]]},
        "maps": [{"kind": "shift"}],
        "potentials": [0],
    }
    code, _, _ = run(capsys, "rpf", write(tmp_path, "swap.json", swap), "--depth", 2)
    assert code == 3
    flip = dict(swap, space={"kind": "full_shift", "n": 2}, maps=[{"kind": "symbol_bijection", "perm": [1, 0]}])
    code, _, _ = run(capsys, "joint-rpf", write(tmp_path, "flip.json", flip), "--depth", 2)
    assert code == 2
    code, _, _ = run(capsys, "beta-search", DATA / "cuntz_2.json", "--beta-min", 1, "--beta-max", 2)
    assert code == 2


def test_beta_min_below_max():
    with pytest.raises(SystemExit):
        cli.main(["beta-search", str(DATA / "cuntz_2.json"), "--beta-min", "3", "--beta-max", "1"])


def test_roundtrip_files_match_catalog(tmp_path, capsys):
    sys_path = write(tmp_path, "cantor.json", system_to_json(cantor_system(2, [1, 0], [0, 0])))
    code, out, _ = run(capsys, "joint-rpf", sys_path, "--depth", 3)
    assert code == 0
    graph_path = write(tmp_path, "g.json", graph_to_json(two_vertex_graph(), theta=0.7))
    code, out, _ = run(capsys, "kgraph", "kms", graph_path, "--beta", 1.0, "--dynamics", "normalized", "--degree-bound", "1,1")
    assert code == 0 and json.loads(out)["passed"]
    assert json.loads((DATA / "abc.json").read_text()) == json.loads(dumps(system_to_json(abc_system())))


def test_console_entry_point():
    res = subprocess.run([sys.executable, "-m", "ruelle_kit", "beta-search", str(DATA / "cuntz_3_graph.json")], capture_output=True, text=True)
    assert res.returncode == 0
    assert json.loads(res.stdout)["betas"] == pytest.approx([math.log(3)])
