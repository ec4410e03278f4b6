import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from multinorms.cli import main
from multinorms.instances import InstanceError, dump_instance, load_instance, parse_instance
from multinorms.module import ModuleSpace, ModuleTuple
from multinorms.report import from_json, to_csv, to_json

INSTANCES = Path(__file__).resolve().parents[1] / "instances"


def write(tmp_path, doc, name="inst.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc) if not isinstance(doc, str) else doc)
    return str(p)


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def c2_doc(cols):
    return {
        "algebra": {"blocks": [1]},
        "module": {"rank": len(cols[0])},
        "tuple": [[[[[z]]] for z in col] for col in cols],
    }


# ---------------------------------------------------------------------------
# instances


def test_parse_roundtrip():
    rng = np.random.default_rng(0)
    t = ModuleTuple.random(ModuleSpace((1, 2), 2), 3, rng)
    inst = parse_instance(json.loads(json.dumps(dump_instance(t, cfg={"restarts": 3}))))
    assert all(a.allclose(b, 0.0) for a, b in zip(inst.tuple, t))
    assert inst.config().restarts == 3


@pytest.mark.parametrize(
    "mutate,where",
    [
        (lambda d: d.pop("tuple"), "tuple"),
        (lambda d: d.update(extra=1), "extra"),
        (lambda d: d["algebra"].update(blocks=[0]), "algebra.blocks[0]"),
        (lambda d: d["tuple"][1].pop(), "tuple[1]"),
        (lambda d: d["tuple"][1][0][0].__setitem__(0, [1, 2, 3]), "tuple[1][0][0][0]"),
        (lambda d: d["tuple"][0][1][0][0].__setitem__(0, "x"), "tuple[0][1][0][0][0]"),
        (lambda d: d.update(cfg={"restarts": 0}), "cfg"),
        (lambda d: d.update(cfg={"restarts": 1.5}), "cfg.restarts"),
        (lambda d: d.update(cfg={"bogus": 1}), "cfg.bogus"),
    ],
)
def test_parse_errors_name_position(mutate, where):
    doc = c2_doc([[1, 0], [0, 1]])
    mutate(doc)
    with pytest.raises(InstanceError) as exc:
        parse_instance(doc)
    assert exc.value.where == where
    assert str(exc.value).startswith(where)


def test_decomposition_field_validated():
    doc = c2_doc([[1, 0], [0, 1]])
    doc["decomposition"] = [[[[[[1]]], [[[0]]]], [[[[1]]], [[[0]]]]]]
    with pytest.raises(InstanceError) as exc:
        parse_instance(doc)
    assert exc.value.where == "decomposition"


def test_load_instance_reports_json_position(tmp_path):
    with pytest.raises(InstanceError) as exc:
        load_instance(write(tmp_path, '{"algebra": '))
    assert exc.value.where.startswith("line 1")
    with pytest.raises(InstanceError):
        load_instance(tmp_path / "missing.json")


def test_shipped_instances_parse():
    for p in sorted(INSTANCES.glob("*.json")):
        load_instance(p)


# ---------------------------------------------------------------------------
# compute


def test_compute_hilbert_orthonormal_pair(tmp_path, capsys):
    path = write(tmp_path, c2_doc([[1, 0], [0, 1]]))
    code, out, _ = run(["compute", "--instance", path, "--norm", "hilbert", "--json"], capsys)
    assert code == 0
    case = from_json(out)["cases"][0]
    assert abs(case["value"] - 1.41421356) <= 1e-6
    assert case["lower_bound"] <= case["value"] <= case["upper_bound"] + 1e-12


@pytest.mark.parametrize("norm", ["mu-star", "min", "star", "hilbert", "pure-state", "two-two"])
def test_compute_single_vector(norm, tmp_path, capsys):
    path = write(tmp_path, c2_doc([[3, 4]]))
    code, out, _ = run(["compute", "--instance", path, "--norm", norm, "--json", "--restarts", "2"], capsys)
    assert code == 0
    assert from_json(out)["cases"][0]["value"] == pytest.approx(5.0, abs=1e-12)


def test_compute_commutative_algebra_pure_state(capsys):
    code, out, _ = run(["compute", "--instance", str(INSTANCES / "commutative_algebra.json"), "--norm", "pure-state"], capsys)
    assert code == 0
    value = float(next(line for line in out.splitlines() if line.startswith("value:")).split()[1])
    assert value == pytest.approx(3.0, abs=1e-6)


def test_compute_text_bounds_bracket_value(capsys):
    code, out, _ = run(["compute", "--instance", str(INSTANCES / "m2_split.json"), "--norm", "star", "--restarts", "4"], capsys)
    assert code == 0
    fields = dict(line.split(":", 1) for line in out.splitlines())
    lo, hi = (float(v) for v in fields["bounds"].strip(" []").split(","))
    assert lo <= float(fields["value"]) <= hi
    assert "dual tuple" in fields["certificate"]


def test_compute_unsupported_shape(capsys):
    code, _, err = run(["compute", "--instance", str(INSTANCES / "m2_split.json"), "--norm", "two-two"], capsys)
    assert code == 3 and "scalar" in err


def test_compute_bad_input(tmp_path, capsys):
    doc = c2_doc([[1, 0], [0, 1]])
    doc["tuple"][1][0] = [[["a"]]]
    code, _, err = run(["compute", "--instance", write(tmp_path, doc), "--norm", "min"], capsys)
    assert code == 2 and "tuple[1][0][0][0][0]" in err
    code, _, _ = run(["compute", "--instance", str(tmp_path / "nope.json"), "--norm", "min"], capsys)
    assert code == 2


def test_argument_errors_exit_2(capsys):
    for argv in (["compute", "--norm", "hilbert"], ["compute", "--instance", "x", "--norm", "nope"],
                 ["verify", "--suite", "basis", "--restarts", "0"], ["frobnicate"]):
        with pytest.raises(SystemExit) as exc:
            main(argv)
        assert exc.value.code == 2
    capsys.readouterr()


# ---------------------------------------------------------------------------
# verify, report


def test_verify_zero_cases(capsys):
    code, out, _ = run(["verify", "--suite", "axioms", "--cases", "0"], capsys)
    assert code == 0 and "0/0" in out


def test_verify_basis_json(capsys):
    code, out, _ = run(["verify", "--suite", "basis", "--cases", "3", "--json"], capsys)
    doc = from_json(out)
    assert code == 0 and doc["passed"] and len(doc["cases"]) == 3


def test_verify_violation_exit_1(capsys):
    # the shipped suites pass at their defaults, so plug in one that cannot
    import multinorms.cli as cli
    from multinorms.suites import CaseResult, SuiteResult

    def failing(opts):
        res = SuiteResult("fake", opts.seed, opts.cfg(), opts.tol)
        case = CaseResult(0, "always fails")
        case.add("never", False, value=1.0)
        res.cases.append(case)
        return res

    original = cli.SUITES["basis"]
    cli.SUITES["basis"] = failing
    try:
        code, out, _ = run(["verify", "--suite", "basis"], capsys)
    finally:
        cli.SUITES["basis"] = original
    assert code == 1 and "violated never" in out


def test_verify_kh_seed_1_p4_n2():
    from multinorms.optimize import DEFAULT_CONFIG
    from multinorms.suites import case_rng, check_kh_case

    res = check_kh_case(4, case_rng(1, 5, 4), DEFAULT_CONFIG.with_(seed=1), 1e-4, 4, 2)
    assert res.passed, [c.to_dict() for c in res.checks]


def test_report_roundtrip_and_csv(tmp_path, capsys):
    code, out, _ = run(["verify", "--suite", "basis", "--cases", "4", "--json"], capsys)
    src = tmp_path / "result.json"
    src.write_text(out)
    jpath, cpath = tmp_path / "r.json", tmp_path / "r.csv"
    assert main(["report", "--input", str(src), "--out", str(jpath)]) == 0
    assert main(["report", "--input", str(src), "--out", str(cpath), "--format", "csv"]) == 0
    doc = from_json(jpath.read_text())
    assert doc == from_json(out)
    assert to_json(doc) == jpath.read_text()
    rows = cpath.read_text().strip().splitlines()
    assert len(rows) - 1 == len(doc["cases"]) == 4


def test_report_errors(tmp_path, capsys):
    src = tmp_path / "result.json"
    src.write_text(to_json({"cases": []}))
    code, _, err = run(["report", "--input", str(src), "--out", str(tmp_path / "no" / "dir" / "x.json")], capsys)
    assert code == 2 and "cannot write" in err
    src.write_text("[1, 2]")
    assert run(["report", "--input", str(src), "--out", str(tmp_path / "x.json")], capsys)[0] == 2
    src.write_text("not json")
    assert run(["report", "--input", str(src), "--out", str(tmp_path / "x.json")], capsys)[0] == 2


def test_report_serialization_details():
    doc = {"cases": [{"index": 0, "value": 1.0, "tiny": 1e-20, "nested": {"a": [1, 2.5]}, "flag": True}]}
    text = to_json(doc)
    assert '"value": 1.0' in text and '"tiny": 9.9999999999999995e-21' in text
    assert from_json(text) == doc
    csv_text = to_csv(doc)
    # scalar fields only; arrays stay in the JSON report
    assert csv_text.splitlines()[0].split(",") == ["index", "value", "tiny", "flag"]


def test_same_seed_reports_byte_identical(tmp_path):
    outs = []
    for i in range(2):
        out = tmp_path / f"run{i}.json"
        verify = subprocess.run(
            [sys.executable, "-m", "multinorms.cli", "verify", "--suite", "dim-equality", "--cases", "3", "--restarts", "4", "--json"],
            capture_output=True, text=True, check=True,
        )
        report = subprocess.run(
            [sys.executable, "-m", "multinorms.cli", "report", "--out", str(out)],
            input=verify.stdout, capture_output=True, text=True,
        )
        assert report.returncode == 0, report.stderr
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]


def test_search_gap_json(capsys):
    code, out, _ = run(["search-gap", "--dim", "2", "--n", "3", "--trials", "2", "--restarts", "2", "--json"], capsys)
    doc = from_json(out)
    assert code == 0 and doc["best"]["trial"] in (0, 1)
    assert len(doc["best"]["vectors"]) == 3
