import contextlib
import io
import json
import subprocess
import sys
from pathlib import Path

import pytest

from artifact import cli

FIX = Path(__file__).parent.parent / "fixtures"


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    with contextlib.redirect_stderr(err):
        code = cli.main(list(argv), out=out)
    return code, out.getvalue(), err.getvalue()


def test_classify_symplectic_fixture():
    code, out, _ = run("classify", "--input", str(FIX / "sp4_3.json"), "--strict")
    body = json.loads(out)
    assert code == 0
    assert body["family"] == "Sp" and body["confirmed"]


@pytest.mark.parametrize("name,family", [("su3_3", "SU"), ("sl3_3", "SL"), ("sl3_25", "SL")])
def test_classify_other_fixtures(name, family):
    code, out, _ = run("classify", "--input", str(FIX / f"{name}.json"))
    assert code == 0 and json.loads(out)["family"] == family


def test_graph_formats():
    path = str(FIX / "sl3_5.json")
    code, out, _ = run("graph", "--input", path)
    body = json.loads(out)
    assert code == 0 and body["metrics"]["strongly_connected"]
    assert body["V_span_dim"] == 3
    code, out, _ = run("graph", "--input", path, "--format", "dot")
    assert out.startswith("digraph")
    code, out, _ = run("graph", "--input", path, "--format", "csv")
    assert out.splitlines()[0] == "source,target,label,twoway"


def test_oracle_subcommands():
    path = str(FIX / "sl3_3.json")
    assert json.loads(run("oracle", "order", "--input", path)[1])["order"] == 5616
    closure = json.loads(run("oracle", "closure", "--input", path)[1])
    assert closure == {"order": 5616, "truncated": False, "max_depth": closure["max_depth"]}
    diam = json.loads(run("oracle", "diameter", "--input", path)[1])["diameter"]
    assert 0 < diam <= closure["max_depth"]


def test_cap_exit_code():
    code, out, _ = run("oracle", "closure", "--input", str(FIX / "sl3_3.json"), "--cap", "100")
    assert code == 3
    assert json.loads(out)["error"] == "CapExceeded"


def test_synthesize_with_emit(tmp_path):
    emit = tmp_path / "words.jsonl"
    code, out, _ = run("synthesize", "--input", str(FIX / "sp4_3.json"), "--emit", str(emit))
    assert code == 0
    body = json.loads(out)
    assert body["group"] == "Sp(4,3)"
    lines = [json.loads(x) for x in emit.read_text().splitlines()]
    assert len(lines) == 80
    assert all(r["length"] == len(r["word"]) for r in lines)


def test_synthesize_from_matrices():
    code, out, _ = run("synthesize", "--input", str(FIX / "sl3_3_matrices.json"))
    assert code == 0
    assert json.loads(out)["report"]["transvection_count"] >= 104


@pytest.mark.parametrize("name", ["sl3_9", "sp4_9"])
def test_excluded_fields(name):
    path = str(FIX / f"{name}.json")
    code, out, err = run("synthesize", "--input", path)
    assert code == 5
    assert json.loads(out)["error"] == "UnsupportedQ"
    assert "UnsupportedQ" in err
    for cmd in (["classify"], ["graph"], ["oracle", "order"]):
        assert run(*cmd, "--input", path)[0] == 0


def test_parse_error(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    code, out, _ = run("classify", "--input", str(bad))
    assert code == 4 and json.loads(out)["error"] == "ParseError"


def test_hypothesis_unmet_exit_code(tmp_path):
    inst = json.loads((FIX / "sl3_5.json").read_text())
    inst["generators"] = inst["generators"][:1]
    path = tmp_path / "one.json"
    path.write_text(json.dumps(inst))
    assert run("synthesize", "--input", str(path))[0] == 2


def test_acceptance_subcommand_json():
    code, out, _ = run("acceptance", "--only", "1,6", "--format", "json")
    body = json.loads(out)
    assert code == 0 and body["passed"]
    assert [c["criterion"] for c in body["criteria"]] == [1, 6]


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "artifact", "oracle", "order", "--input",
                           str(FIX / "su3_3.json")], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout) == {"group": "SU(3,9)", "order": 6048}
