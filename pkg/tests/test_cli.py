import json

import pytest

import lamina.acceptance
from lamina.acceptance import CriterionResult
from lamina.cli import main, reject_rows
from lamina.lamination import Figela


def _run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_usage_errors(capsys):
    assert _run(capsys, "nonsense")[0] == 1
    code, _, err = _run(capsys, "simulate")
    assert code == 1 and "--alpha" in err
    assert _run(capsys, "simulate", "--alpha", "x", "--t-max", "1")[0] == 1
    assert _run(capsys, "code", "--n", "7")[0] == 1
    assert _run(capsys, "polygon", "--n", "3")[0] == 1


def test_simulate_is_deterministic(capsys):
    a = _run(capsys, "simulate", "--alpha", "2", "--t-max", "50", "--seed", "3")
    b = _run(capsys, "simulate", "--alpha", "2", "--t-max", "50", "--seed", "3")
    assert a[0] == 0 and a[1] == b[1]
    header = json.loads(a[1].splitlines()[0])
    assert header["kind"] == "figela" and header["seed"] == 3 and header["alpha"] == 2.0


def test_jsonl_then_render_matches_direct_svg(tmp_path, capsys):
    j, direct, via = tmp_path / "f.jsonl", tmp_path / "a.svg", tmp_path / "b.svg"
    base = ["simulate", "--alpha", "2", "--t-max", "200", "--seed", "1"]
    assert main(base + ["--out", str(j)]) == 0
    assert main(base + ["--format", "svg", "--out", str(direct)]) == 0
    assert main(["render", "--input", str(j), "--out", str(via)]) == 0
    assert direct.read_bytes() == via.read_bytes()
    f, _ = Figela.from_jsonl(j)
    assert direct.read_text().count("<line") == len(f)


def test_simulate_csv_stats(capsys):
    code, out, _ = _run(capsys, "simulate", "--alpha", "2", "--t-max", "100", "--grid", "10,100", "--format", "csv")
    lines = out.splitlines()
    assert code == 0 and lines[0] == "time,n_chords,height_0.0_0.5" and len(lines) == 3


def test_reject_csv(capsys):
    code, out, _ = _run(capsys, "reject", "--n", "2000", "--seed", "4")
    rows = [line.split(",") for line in out.splitlines()]
    assert code == 0 and rows[0] == ["proposals", "chords", "chords_over_sqrt_n"]
    assert [r[0] for r in rows[1:]] == ["10", "100", "1000", "2000"]
    assert float(rows[-1][2]) == pytest.approx(int(rows[-1][1]) / 2000 ** 0.5)
    assert reject_rows([]) == []


def test_polygon_and_code_outputs(capsys):
    code, out, _ = _run(capsys, "polygon", "--n", "8", "--seed", "2")
    assert code == 0 and out.splitlines()[0] == "i,j" and len(out.splitlines()) == 6
    code, out, _ = _run(capsys, "polygon", "--n", "8", "--model", "matching", "--format", "jsonl")
    assert code == 0 and json.loads(out.splitlines()[0])["kind"] == "polygon"
    code, out, _ = _run(capsys, "code", "--n", "20", "--seed", "1")
    assert code == 0 and out.splitlines()[0] == "t,g" and len(out.splitlines()) == 22


def test_frag_csv(capsys):
    code, out, _ = _run(capsys, "frag", "--t-max", "10", "--grid", "1,10", "--measure", "C")
    assert code == 0 and len(out.splitlines()) == 3


def test_config_env_and_flag_precedence(tmp_path, capsys, monkeypatch):
    cfg = tmp_path / "c.toml"
    cfg.write_text('alpha = 2.0\nt_max = 30.0\nseed = 5\n')
    base = _run(capsys, "simulate", "--config", str(cfg))[1]
    assert json.loads(base.splitlines()[0])["seed"] == 5
    monkeypatch.setenv("LAMINA_SEED", "6")
    env = _run(capsys, "simulate", "--config", str(cfg))[1]
    assert json.loads(env.splitlines()[0])["seed"] == 6
    flag = _run(capsys, "simulate", "--config", str(cfg), "--seed", "7")[1]
    assert json.loads(flag.splitlines()[0])["seed"] == 7
    monkeypatch.setenv("LAMINA_SEED", "oops")
    assert _run(capsys, "simulate", "--config", str(cfg))[0] == 1


def test_config_errors_name_the_line(tmp_path, capsys):
    cfg = tmp_path / "c.toml"
    cfg.write_text('alpha = 2.0\n\nbogus = 1\n')
    code, _, err = _run(capsys, "simulate", "--config", str(cfg), "--t-max", "1")
    assert code == 1 and f"{cfg}:3:" in err and "bogus" in err
    cfg.write_text('alpha = 2.0\nt_max = = 1\n')
    code, _, err = _run(capsys, "simulate", "--config", str(cfg))
    assert code == 1 and f"{cfg}:2:" in err
    cfg.write_text('command = "reject"\n')
    assert _run(capsys, "simulate", "--config", str(cfg))[0] == 1


def test_analyze_criterion_passes(tmp_path, capsys):
    code, out, _ = _run(capsys, "analyze", "--criteria", "4", "--replicas-scale", "0.1", "--out", str(tmp_path))
    assert code == 0 and "[PASS] criterion 4" in out
    report = json.loads((tmp_path / "acceptance.json").read_text())
    assert report["passed"] and report["criteria"][0]["id"] == 4


def test_analyze_failure_exit_code(tmp_path, capsys, monkeypatch):
    failed = CriterionResult(99, "stub", False, checks=[])
    monkeypatch.setattr(lamina.acceptance, "run_suite", lambda *a, **k: [failed])
    code, out, _ = _run(capsys, "analyze", "--out", str(tmp_path))
    assert code == 2 and "FAILED" in out


def test_analyze_counts_writes_files(tmp_path, capsys):
    code, _, _ = _run(capsys, "analyze", "--suite", "counts", "--replicas", "20", "--t-max", "100",
                      "--out", str(tmp_path))
    assert code == 0 and (tmp_path / "counts.csv").exists() and (tmp_path / "chord_counts.svg").exists()
