import csv
import io
import json

import numpy as np
import pytest

from grouptest.cli import main
from grouptest.experiment import ExperimentSpec, derive_seed, parse_grid, reload_instance, run_experiment
from grouptest.errors import IncompatibleFamily
from grouptest.functions import MatrixFunction, class_function, constant, save_function
from grouptest.groups import cyclic, symmetric
from grouptest.instances import certify


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def s3_class_fn(tmp_path):
    G = symmetric(3)
    p = tmp_path / "f.fn"
    save_function(class_function(G, [1.0, -1.0, 0.5]), p)
    return str(p)


def test_conjinv_on_class_function(capsys, s3_class_fn):
    code, out, _ = run(capsys, "test-conjinv", "--group", "builtin:symmetric:3", "--function", s3_class_fn,
                       "--epsilon", "0.2", "--seed", "7")
    doc = json.loads(out)
    assert code == 0 and doc["verdict"] == "accept" and doc["queries"] == 100
    assert set(doc) >= {"tool_version", "tester", "epsilon", "seed", "verdict", "queries", "rounds"}
    assert "witness" not in doc


def test_conjinv_rejects_with_witness(capsys, tmp_path):
    G = symmetric(3)
    v = np.ones(6)
    v[1] = -1
    p = tmp_path / "f.fn"
    from grouptest.functions import ScalarFunction
    save_function(ScalarFunction(G, v), p)
    code, out, _ = run(capsys, "test-conjinv", "--group", "builtin:symmetric:3", "--function", str(p),
                       "--epsilon", "0.1", "--seed", "3", "--certify")
    doc = json.loads(out)
    assert code == 1 and doc["verdict"] == "reject"
    assert doc["witness"]["kind"] == "conjugation"
    assert doc["certificate"]["distance"] > 0


def test_irreps_boolean_cube(capsys):
    code, out, _ = run(capsys, "irreps", "--group", "builtin:boolean_cube:2")
    doc = json.loads(out)
    assert code == 0
    assert [r["dim"] for r in doc["irreps"]] == [1, 1, 1, 1]


def test_uniteq_dim_mismatch(capsys, tmp_path):
    G = cyclic(8)
    save_function(MatrixFunction(G, np.zeros((8, 2, 2))), tmp_path / "f.fn")
    save_function(MatrixFunction(G, np.zeros((8, 3, 3))), tmp_path / "g.fn")
    code, _, err = run(capsys, "test-uniteq", "--group", "builtin:cyclic:8", "--function", str(tmp_path / "f.fn"),
                       "--function2", str(tmp_path / "g.fn"), "--epsilon", "0.5", "--seed", "1")
    assert code == 2 and "error" in err


def test_malformed_file_reports_line(capsys, tmp_path):
    p = tmp_path / "bad.fn"
    save_function(constant(symmetric(3)), p)
    lines = p.read_text().splitlines()
    lines[2] = "not a number"
    p.write_text("\n".join(lines) + "\n")
    code, _, err = run(capsys, "fourier", "--group", "builtin:symmetric:3", "--function", str(p))
    assert code == 2 and f"{p}:3:" in err


def test_order_mismatch(capsys, tmp_path):
    p = tmp_path / "f.fn"
    save_function(constant(cyclic(5)), p)
    code, _, _ = run(capsys, "test-hom", "--group", "builtin:symmetric:3", "--function", str(p),
                     "--epsilon", "0.3", "--seed", "0")
    assert code == 2


def test_missing_flags(capsys):
    assert main(["test-conjinv", "--group", "builtin:cyclic:3"]) == 2
    capsys.readouterr()


def test_out_flag(capsys, tmp_path, s3_class_fn):
    out = tmp_path / "r.json"
    code, printed, _ = run(capsys, "oracle", "--group", "builtin:symmetric:3", "--function", s3_class_fn,
                           "--property", "conjugate-invariance", "--out", str(out))
    assert code == 0 and printed == ""
    doc = json.loads(out.read_text())
    assert doc["distance"] == 0 and doc["rejection_probability"] == 0


def test_oracle_subcommands(capsys, s3_class_fn):
    for prop in ("homomorphism", "character-ray", "cubic"):
        code, out, _ = run(capsys, "oracle", "--group", "builtin:symmetric:3", "--function", s3_class_fn,
                           "--property", prop)
        assert code == 0 and json.loads(out)


def test_dist(capsys, tmp_path, s3_class_fn):
    G = symmetric(3)
    save_function(constant(G, -1.0), tmp_path / "g.fn")
    code, out, _ = run(capsys, "dist", "--group", "builtin:symmetric:3", "--function", s3_class_fn,
                       "--function2", str(tmp_path / "g.fn"))
    assert code == 0 and json.loads(out)["distance"] > 0


def test_seed_derivation():
    assert derive_seed(0, (0, 0), 0) != derive_seed(0, (0, 0), 1)
    assert derive_seed(5, (1, 2), 3) == derive_seed(5, (1, 2), 3)
    assert derive_seed(5, (1, 2), 3) ^ 5 == derive_seed(0, (1, 2), 3)
    assert parse_grid("0.1:0.3:3") == [0.1, 0.2, 0.3]
    with pytest.raises(ValueError):
        parse_grid("0:1:2")


def test_incompatible_family():
    with pytest.raises(IncompatibleFamily):
        ExperimentSpec("test-hom", "builtin:cyclic:4", "planted-unitary", [0.3])
    assert main(["experiment", "--tester", "test-uniteq", "--group", "builtin:cyclic:4",
                 "--family", "random-function", "--epsilon-grid", "0.3"]) == 2


def _experiment(tmp_path, name, fmt):
    out = tmp_path / name
    argv = ["experiment", "--tester", "test-conjinv", "--group", "builtin:symmetric:4", "--family",
            "random-function", "--epsilon-grid", "0.1:0.3:3", "--params", "0.3,0.5", "--trials", "20",
            "--seed", "11", "--format", fmt, "--no-timing", "--out", str(out)]
    assert main(argv) == 0
    return out.read_bytes()


def test_experiment_byte_identical(tmp_path):
    a = _experiment(tmp_path, "a.json", "json")
    b = _experiment(tmp_path, "b.json", "json")
    assert a.replace(b"/a_instances", b"/b_instances") == b


def test_csv_and_json_agree(tmp_path):
    js = json.loads(_experiment(tmp_path, "r.json", "json"))
    rows = list(csv.DictReader(io.StringIO(_experiment(tmp_path, "r.csv", "csv").decode())))
    assert len(rows) == len(js["rows"]) == 6
    for c, j in zip(rows, js["rows"]):
        for k, v in c.items():
            assert float(v) == j[k]


def test_parallel_matches_serial():
    kw = dict(tester="test-hom", group="builtin:cyclic:6", family="noisy-homomorphism",
              epsilons=[0.2, 0.4], params=[0.1], trials=8, seed=2, timing=False)
    a = run_experiment(ExperimentSpec(**kw))
    b = run_experiment(ExperimentSpec(jobs=2, **kw))
    assert a == b


def test_logged_instance_reproduces_certificate(tmp_path):
    spec = ExperimentSpec("test-char", "builtin:symmetric:3", "perturbed-character", [0.3], params=[0.4],
                          trials=2, seed=1, instance_dir=str(tmp_path / "inst"), timing=False)
    row = run_experiment(spec)[0]
    inst = reload_instance(row, symmetric(3))
    assert certify(inst, "test-char").to_dict() == row["certificate"]


def test_homomorphism_family_always_accepted():
    spec = ExperimentSpec("test-hom", "builtin:symmetric:3", "homomorphism", parse_grid("0.2:0.5:2"),
                          params=[0, 1], trials=10, timing=False)
    assert all(r["accept_rate"] == 1.0 for r in run_experiment(spec))
