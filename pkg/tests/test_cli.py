import json

import pytest

from hypercross.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    cap = capsys.readouterr()
    return code, cap.out, cap.err


def records(text):
    return [json.loads(line) for line in text.splitlines() if line.strip()]


@pytest.fixture
def table_file(tmp_path, capsys):
    path = tmp_path / "table.json"
    assert main(["tree", "table", "--save", str(path)]) == 0
    capsys.readouterr()
    return path


def test_check_tree_table(capsys, table_file):
    code, out, _ = run(capsys, "crossratio", "check", "--in", str(table_file))
    assert code == 0
    rows = records(out)
    assert rows[0]["k"] == "0"
    assert rows[-1]["summary"]["ok"] is True


def test_pgl2_sharp(capsys):
    code, out, _ = run(capsys, "finite", "pgl2", "--q", "3", "--k", "3")
    assert code == 0
    row = records(out)[0]
    assert row["sharp"] is True and row["order"] == 24


def test_unknown_flag():
    with pytest.raises(SystemExit) as exc:
        main(["finite", "pgl2", "--bogus"])
    assert exc.value.code == 2


def test_malformed_file(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"a": \n')
    code, out, err = run(capsys, "crossratio", "check", "--in", str(bad))
    assert code == 2
    assert "line 2 column 1" in out + err


def test_unknown_node_is_failure(capsys):
    code, out, err = run(capsys, "tree", "distance", "a", "b")
    assert code == 1
    assert "unknown node" in out + err


def test_deterministic(capsys):
    a = run(capsys, "tree", "random", "--leaves", "7")[1]
    b = run(capsys, "tree", "random", "--leaves", "7")[1]
    assert a == b


def test_seed_env_override(capsys, monkeypatch):
    a = run(capsys, "tree", "random", "--seed", "1")[1]
    monkeypatch.setenv("HYPERCROSS_SEED", "1")
    b = run(capsys, "tree", "random", "--seed", "99")[1]
    assert a == b


def test_suite_tree_zero(capsys):
    code, out, _ = run(capsys, "suite", "tree-zero-hyperbolic")
    assert code == 0
    row = records(out)[0]
    assert row["trees"] == 200 and row["zero_k"] == 200


def test_suite_rho_median(capsys):
    code, out, _ = run(capsys, "suite", "rho-median")
    assert code == 0
    assert records(out)[0]["max_deviation"] == "0"


@pytest.mark.parametrize("name", ["", "nope"])
def test_bad_suite_name(capsys, name):
    code, _, _ = run(capsys, "suite", name)
    assert code == 2


def test_emit_dot(capsys):
    code, out, _ = run(capsys, "tree", "show", "--emit-dot")
    assert code == 0
    assert out.startswith("graph tree {")


def test_emit_dot_unsupported(capsys):
    code, out, err = run(capsys, "finite", "pgl2", "--emit-dot")
    assert code == 2
    assert "DOT" in out + err


def test_out_file(capsys, tmp_path):
    target = tmp_path / "report.jsonl"
    assert main(["tree", "show", "--out", str(target)]) == 0
    rows = records(target.read_text())
    assert rows[-1]["summary"]["records"] == 1
