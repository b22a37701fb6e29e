import json

import pytest

from thompson_closure.cli import main
from thompson_closure.thompson import X0, X1, format_element

from test_hardness import Z_TEXT


@pytest.fixture
def files(tmp_path):
    (tmp_path / "x0.txt").write_text(format_element(X0))
    (tmp_path / "x1.txt").write_text(format_element(X1))
    (tmp_path / "gens.txt").write_text("word: x0\n")
    (tmp_path / "z.txt").write_text(Z_TEXT)
    return tmp_path


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_core_build_and_member(files, capsys):
    core = files / "core.txt"
    code, out, _ = run(capsys, "core", "build", "-g", files / "gens.txt", "-o", core)
    assert code == 0 and out.strip() == "core: 3 vertices, 4 edges, 3 cells"
    code, out, _ = run(capsys, "core", "member", "-c", core, "-e", files / "x0.txt")
    assert (code, out.strip()) == (0, "member: yes")
    code, out, _ = run(capsys, "core", "member", "-c", core, "-e", files / "x1.txt", "--json")
    assert code == 0 and json.loads(out)["member"] is False


def test_element_eval(files, capsys):
    code, out, _ = run(capsys, "element", "eval", "-e", files / "x0.txt", "-t", "3/8", "-t", "3/4", "--json")
    assert code == 0
    assert json.loads(out)["values"] == [{"t": "3/8", "value": "5/8"}, {"t": "3/4", "value": "7/8"}]
    code, _, err = run(capsys, "element", "eval", "-e", files / "x0.txt", "-t", "1/3")
    assert code == 1 and err.startswith("error:")


def test_completion_and_closure(files, capsys):
    core = files / "core.txt"
    run(capsys, "core", "build", "-g", files / "gens.txt", "-o", core)
    code, out, _ = run(capsys, "completion", "verify", "-c", core, "--json")
    assert code == 0 and json.loads(out)["ok"] is True
    code, out, _ = run(capsys, "closure", "factorize", "-c", core, "-e", files / "x0.txt", "--json")
    assert code == 0 and json.loads(out)["word"] == "y0"
    code, out, _ = run(capsys, "closure", "factorize", "-c", core, "-e", files / "x1.txt")
    assert code == 1


def test_probe_output_is_deterministic(files, capsys):
    core = files / "core.txt"
    run(capsys, "core", "build", "-g", files / "gens.txt", "-o", core)
    args = ("probe", "-c", core, "-n", "20", "--seed", "3", "--json")
    first = run(capsys, *args)
    second = run(capsys, *args)
    assert first == second and first[0] == 0
    assert json.loads(first[1])["violations"] == 0


def test_hardness_encode(files, capsys):
    code, out, _ = run(capsys, "hardness", "encode", "-p", files / "z.txt", "--json")
    payload = json.loads(out)
    assert code == 0 and (payload["letters"], payload["rules"]) == (32, 32)


def test_usage_errors(files, capsys):
    with pytest.raises(SystemExit) as exc:
        main(["core", "build"])
    assert exc.value.code == 2
    code, _, err = run(capsys, "core", "stats", "-c", files / "missing.txt")
    assert code == 1 and "cannot read" in err
    with pytest.raises(SystemExit):
        main(["probe", "-c", str(files / "x.txt"), "-n", "0"])
