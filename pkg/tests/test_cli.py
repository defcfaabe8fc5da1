import json
import subprocess
import sys

import pytest

from abduct.cli import main


def gen(tmp_path, name="run", *extra):
    out = tmp_path / name
    code = main(["generate", "--n", "10", "--k", "2", "--r", "2", "--m", "3000", "--seed", "5", "--out", str(out), *extra])
    return code, out


ABDUCE = ["--epsilon", "0.1", "--gamma", "0.5", "--delta", "0.1", "--k", "2", "--r", "3"]


def test_generate_writes_files_deterministically(tmp_path):
    code, a = gen(tmp_path, "a")
    assert code == 0
    assert sorted(p.name for p in a.iterdir()) == ["dataset.csv", "kb.txt", "manifest.json", "query.txt"]
    _, b = gen(tmp_path, "b")
    for f in a.iterdir():
        assert f.read_bytes() == (b / f.name).read_bytes()
    manifest = json.loads((a / "manifest.json").read_text())
    assert manifest["m"] == 3000 and manifest["prng"]


def test_generate_rejects_overfull(tmp_path, capsys):
    out = tmp_path / "bad"
    assert main(["generate", "--n", "4", "--k", "2", "--r", "3", "--out", str(out)]) == 1
    assert not out.exists()
    assert "error" in capsys.readouterr().err


def test_seed_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("ABDUCT_SEED", "5")
    out = tmp_path / "env"
    main(["generate", "--n", "10", "--k", "2", "--r", "2", "--m", "3000", "--out", str(out)])
    _, ref = gen(tmp_path, "ref")
    assert (out / "dataset.csv").read_bytes() == (ref / "dataset.csv").read_bytes()


def test_abduce_zero_noise_passes_bounds(tmp_path, capsys):
    _, d = gen(tmp_path, "z", "--epsilon-star", "0", "--holdout", "3000")
    capsys.readouterr()
    code = main(["abduce", "--examples", str(d / "dataset.csv"), "--kb", str(d / "kb.txt"),
                 "--query", f"@{d / 'query.txt'}", "--mu", "0.3", *ABDUCE, "--exclude-query-attrs",
                 "--holdout", str(d / "holdout.csv")])
    assert code == 0
    report = json.loads(capsys.readouterr().out)
    assert report["result"]["status"] == "Found"
    assert report["bounds"]["passed"]
    assert report["samples"]["m_actual"] <= 3000


def test_abduce_estimates_mu_and_writes_table(tmp_path):
    _, d = gen(tmp_path, "t", "--epsilon-star", "0")
    out = tmp_path / "report.txt"
    code = main(["abduce", "--examples", str(d / "dataset.csv"), "--kb", str(d / "kb.txt"),
                 "--query", "x11", *ABDUCE, "--exclude-query-attrs", "--format", "table", "--output", str(out)])
    assert code == 0
    assert out.read_text().startswith("status: Found")


def test_abduce_all_unobserved_exits_2(tmp_path):
    p = tmp_path / "stars.csv"
    p.write_text("x1,x2,x3\n" + "*,*,*\n" * 50)
    assert main(["abduce", "--examples", str(p), "--query", "x3", "--mu", "0.3", *ABDUCE[:-4], "--k", "1"]) == 2


def test_abduce_missing_kb(tmp_path, capsys):
    p = tmp_path / "d.csv"
    p.write_text("x1,x2\n1,1\n")
    missing = tmp_path / "nope.txt"
    code = main(["abduce", "--examples", str(p), "--kb", str(missing), "--query", "x2", "--mu", "0.3", *ABDUCE])
    assert code == 1
    assert str(missing) in capsys.readouterr().err


def test_abduce_bad_query(tmp_path, capsys):
    p = tmp_path / "d.csv"
    p.write_text("x1,x2\n1,1\n")
    assert main(["abduce", "--examples", str(p), "--query", "x1 &", "--mu", "0.3", *ABDUCE]) == 1
    assert "offset 4" in capsys.readouterr().err


def test_samples_table_and_json(capsys):
    args = ["samples", "--mu", "0.3", "--epsilon", "0.1", "--gamma", "0.5", "--delta", "0.1", "--k", "2",
            "--r", "3", "--n", "20"]
    assert main(args) == 0
    assert "10368" in capsys.readouterr().out
    assert main(args + ["--format", "json"]) == 0
    obj = json.loads(capsys.readouterr().out)
    assert obj["derived"]["m"] == 10368 and obj["derived"]["cover_target"] == 3111


def test_samples_zero_gamma_exits_1(capsys):
    args = ["samples", "--mu", "0.3", "--epsilon", "0.1", "--gamma", "0", "--delta", "0.1", "--k", "2", "--n", "20"]
    assert main(args) == 1
    assert "gamma" in capsys.readouterr().err


def test_usage_error_exits_1():
    with pytest.raises(SystemExit) as exc:
        main(["samples"])
    assert exc.value.code == 1


def test_evaluate_from_report(tmp_path, capsys):
    _, d = gen(tmp_path, "e", "--epsilon-star", "0", "--holdout", "2000")
    report = tmp_path / "report.json"
    main(["abduce", "--examples", str(d / "dataset.csv"), "--kb", str(d / "kb.txt"), "--query", f"@{d / 'query.txt'}",
          "--mu", "0.3", *ABDUCE, "--exclude-query-attrs", "--output", str(report)])
    code = main(["evaluate", "--examples", str(d / "holdout.csv"), "--kb", str(d / "kb.txt"),
                 "--query", f"@{d / 'query.txt'}", "--hypothesis", f"@{report}", "--mu", "0.3", *ABDUCE])
    assert code == 0
    obj = json.loads(capsys.readouterr().out)
    assert obj["evaluation"]["holdout_size"] == 2000 and obj["bounds"]["passed"]


def test_verify(tmp_path, capsys):
    _, d = gen(tmp_path, "v")
    assert main(["verify", "--examples", str(d / "dataset.csv"), "--kb", str(d / "kb.txt"),
                 "--query", f"@{d / 'query.txt'}", "--rows", "60", "--format", "json"]) == 0
    obj = json.loads(capsys.readouterr().out)
    assert obj["ok"] and obj["terms"] == 22


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "abduct", "--version"], capture_output=True, text=True)
    assert out.returncode == 0 and "abduct" in out.stdout
