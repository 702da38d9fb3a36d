import json
import math
import subprocess
import sys

import pytest

from medembed.cli import CSV_HEADER, main


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_generate_path(tmp_path, capsys):
    out = tmp_path / "p.json"
    code, stdout, _ = run(capsys, "generate", "--space", "path",
                          "--len", "5", "-o", str(out))
    assert code == 0
    assert "6 vertices" in stdout
    doc = json.loads(out.read_text())
    assert doc["type"] == "tree"
    assert doc["n"] == 6
    assert doc["generator"]["spec"] == "path:5"


def test_generate_grid_reports_hyperplanes(tmp_path, capsys):
    out = tmp_path / "g.json"
    code, stdout, _ = run(capsys, "generate", "--space", "grid",
                          "--dims", "2x3", "-o", str(out))
    assert code == 0
    assert "12 vertices" in stdout
    assert "5 hyperplanes" in stdout
    assert "dimension 2" in stdout


def test_generate_grid_20x20_counts(tmp_path, capsys):
    out = tmp_path / "g.json"
    code, stdout, _ = run(capsys, "generate", "--space", "grid",
                          "--dims", "20x20", "-o", str(out))
    assert code == 0
    assert "441 vertices" in stdout
    assert "40 hyperplanes" in stdout


def test_generate_binary_sample_deterministic(tmp_path, capsys):
    a = tmp_path / "a.json"
    b = tmp_path / "b.json"
    for out in (a, b):
        code, _, _ = run(capsys, "generate", "--space", "binary-sample",
                         "--depth", "30", "--rays", "6", "--seed", "42",
                         "-o", str(out))
        assert code == 0
    assert a.read_bytes() == b.read_bytes()


def test_generate_binary_sample_needs_seed(tmp_path, capsys):
    code, _, err = run(capsys, "generate", "--space", "binary-sample",
                       "--depth", "5", "--rays", "2",
                       "-o", str(tmp_path / "x.json"))
    assert code == 2
    assert "seed" in err


def test_generate_budget_exceeded(tmp_path, capsys):
    code, _, err = run(capsys, "generate", "--space", "grid",
                       "--dims", "1000x1000", "--max-vertices", "1000",
                       "-o", str(tmp_path / "x.json"))
    assert code == 2
    assert "budget" in err


def test_embed_stable_output(tmp_path, capsys):
    space = tmp_path / "p.json"
    run(capsys, "generate", "--space", "path", "--len", "25", "-o", str(space))
    code, stdout, _ = run(capsys, "embed", "--space", str(space),
                          "--weight", "paper:18", "--vertex", "20")
    assert code == 0
    doc = json.loads(stdout)
    assert doc["weight"] == "paper:18"
    assert len(doc["coords"]) == 3  # depth 20 leaves indices 18..20
    keys = [k for k, _ in doc["coords"]]
    assert keys == sorted(keys)


def test_generate_staircase(tmp_path, capsys):
    out = tmp_path / "st.json"
    code, stdout, _ = run(capsys, "generate", "--space", "staircase",
                          "--cols", "4", "-o", str(out))
    assert code == 0
    assert "19 vertices" in stdout
    code, stdout, _ = run(capsys, "generate", "--space", "staircase",
                          "--heights", "3,2", "-o", str(out))
    assert code == 0
    assert "dimension 2" in stdout


def test_embed_byte_identical_across_processes(tmp_path):
    space = tmp_path / "g.json"
    argv = [sys.executable, "-m", "medembed.cli"]
    subprocess.run(argv + ["generate", "--space", "grid", "--dims", "5x4",
                           "-o", str(space)], check=True, capture_output=True)
    outs = []
    for _ in range(2):
        res = subprocess.run(
            argv + ["embed", "--space", str(space), "--weight", "unit",
                    "--vertex", "17"],
            check=True, capture_output=True)
        outs.append(res.stdout)
    assert outs[0] == outs[1]
    doc = json.loads(outs[0])
    assert len(doc["coords"]) > 0


def test_measure_unit_profile(tmp_path, capsys):
    space = tmp_path / "p.json"
    run(capsys, "generate", "--space", "path", "--len", "9", "-o", str(space))
    out = tmp_path / "out.csv"
    code, _, _ = run(capsys, "measure", "--space", str(space),
                     "--weight", "unit", "--sampler", "exhaustive",
                     "-o", str(out))
    assert code == 0
    lines = out.read_text().strip().splitlines()
    assert lines[0] == CSV_HEADER
    assert len(lines) == 10  # distances 1..9
    for line in lines[1:]:
        t, rho, delta, lo, up, pairs = line.split(",")
        assert float(rho) == pytest.approx(math.sqrt(int(t)), rel=1e-8)
        assert float(rho) == float(delta)
        assert int(pairs) == 10 - int(t)


def test_measure_assert_passes(tmp_path, capsys):
    space = tmp_path / "s.json"
    run(capsys, "generate", "--space", "spider", "--legs", "3",
        "--leg-len", "40", "-o", str(space))
    out = tmp_path / "out.csv"
    code, stdout, _ = run(capsys, "measure", "--space", str(space),
                          "--weight", "paper:18", "--sampler", "exhaustive",
                          "--assert", "-o", str(out))
    assert code == 0
    assert "PASS" in stdout


def test_measure_missing_file(tmp_path, capsys):
    out = tmp_path / "out.csv"
    code, _, err = run(capsys, "measure", "--space",
                       str(tmp_path / "nope.json"), "-o", str(out))
    assert code == 2
    assert not out.exists()  # no partial CSV
    assert "no such space file" in err


def test_measure_rejects_nonmedian(tmp_path, capsys):
    bad = tmp_path / "k3.json"
    bad.write_text('{"type":"median_graph","n":3,"root":0,'
                   '"edges":[[0,1],[1,2],[0,2]]}\n')
    out = tmp_path / "out.csv"
    code, _, err = run(capsys, "measure", "--space", str(bad), "-o", str(out))
    assert code == 2
    assert "median" in err
    assert "triple" in err
    assert not out.exists()


def test_measure_sampler_needs_seed(tmp_path, capsys):
    space = tmp_path / "p.json"
    run(capsys, "generate", "--space", "path", "--len", "9", "-o", str(space))
    code, _, err = run(capsys, "measure", "--space", str(space),
                       "--sampler", "stratified:10",
                       "-o", str(tmp_path / "x.csv"))
    assert code == 2
    assert "seed" in err


def test_measure_deterministic_given_seed(tmp_path, capsys):
    space = tmp_path / "s.json"
    run(capsys, "generate", "--space", "spider", "--legs", "4",
        "--leg-len", "10", "-o", str(space))
    outs = []
    for name in ("a.csv", "b.csv"):
        out = tmp_path / name
        code, _, _ = run(capsys, "measure", "--space", str(space),
                         "--weight", "unit", "--sampler", "stratified:5",
                         "--seed", "11", "-o", str(out))
        assert code == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]


def test_verify_lemma_pass(capsys):
    code, stdout, _ = run(capsys, "verify", "--suite", "lemma",
                          "--N-max", "100000")
    assert code == 0
    assert "lemma[PASS]" in stdout
    assert "deficit constant" in stdout


def test_verify_lemma_fails_below_monotone_cutoff(capsys):
    with pytest.warns(UserWarning):
        code, stdout, _ = run(capsys, "verify", "--suite", "lemma",
                              "--weight", "paper:16", "--N-max", "10000")
    assert code == 1
    assert "lemma[FAIL]" in stdout


def test_verify_oracle_tree_and_grid(tmp_path, capsys):
    space = tmp_path / "t.json"
    run(capsys, "generate", "--space", "caterpillar", "--spine", "6",
        "--hair", "2", "-o", str(space))
    code, stdout, _ = run(capsys, "verify", "--suite", "oracle",
                          "--space", str(space))
    assert code == 0 and "oracle[PASS]" in stdout
    grid = tmp_path / "g.json"
    run(capsys, "generate", "--space", "grid", "--dims", "4x4",
        "-o", str(grid))
    code, stdout, _ = run(capsys, "verify", "--suite", "oracle",
                          "--space", str(grid))
    assert code == 0 and "oracle[PASS]" in stdout
    assert "max deviation 0" in stdout


def test_verify_normalpath(tmp_path, capsys):
    grid = tmp_path / "g.json"
    run(capsys, "generate", "--space", "grid", "--dims", "5x5", "-o", str(grid))
    code, stdout, _ = run(capsys, "verify", "--suite", "normalpath",
                          "--space", str(grid))
    assert code == 0
    assert "max index deviation over edges: 1" in stdout
    assert "normalpath[PASS]" in stdout


def test_verify_product(capsys):
    code, stdout, _ = run(capsys, "verify", "--suite", "product",
                          "--seed", "0", "--count", "2000")
    assert code == 0
    assert "product[PASS]" in stdout


def test_verify_unknown_suite(capsys):
    code, _, err = run(capsys, "verify", "--suite", "nope")
    assert code == 2
    assert "unknown suite" in err


def test_report_merges(tmp_path, capsys):
    a = tmp_path / "a.csv"
    b = tmp_path / "b.csv"
    a.write_text(CSV_HEADER + "\n2,1.5,2.5,1,4,10\n3,2,3,1.5,6,5\n")
    b.write_text(CSV_HEADER + "\n2,1.2,2.8,0.9,4.5,7\n4,2.5,3.5,2,8,2\n")
    out = tmp_path / "m.csv"
    code, _, _ = run(capsys, "report", "-o", str(out), str(a), str(b))
    assert code == 0
    lines = out.read_text().strip().splitlines()
    assert lines[0] == CSV_HEADER
    assert lines[1] == "2,1.2,2.8,0.9,4.5,17"
    assert lines[2] == "3,2,3,1.5,6,5"
    assert lines[3] == "4,2.5,3.5,2,8,2"


def test_report_rejects_foreign_header(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("a,b,c\n1,2,3\n")
    code, _, err = run(capsys, "report", "-o", str(tmp_path / "m.csv"),
                       str(bad))
    assert code == 2
    assert "header" in err
