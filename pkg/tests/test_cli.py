import json

import pytest

from dforge import __version__
from dforge.cli import main
from dforge.digitalseq import GeneratorTuple


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def data_rows(text):
    return [line for line in text.splitlines() if not line.startswith("#")]


def test_gen_van_der_corput(capsys):
    code, out, _ = run(capsys, "gen", "--q", "2", "--s", "1", "--matrix", "identity", "--N", "4")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == f"# dforge {__version__}"
    assert lines[1].startswith("# config ")
    rows = data_rows(out)
    assert rows[0] == "n,x1,x1_num,x1_den"
    assert [r.split(",")[1] for r in rows[1:]] == ["0", "0.5", "0.25", "0.75"]


def test_gen_empty(capsys):
    code, out, _ = run(capsys, "gen", "--matrix", "identity", "--N", "0")
    assert code == 0
    assert data_rows(out) == ["n,x1,x1_num,x1_den"]


def test_gen_is_deterministic(tmp_path, capsys):
    path = tmp_path / "a.csv"
    runs = []
    for _ in range(2):
        assert main(["gen", "--s", "2", "--q", "3", "--N", "20", "--seed", "9", "--out", str(path)]) == 0
        runs.append(path.read_bytes())
    assert runs[0] == runs[1]


def test_gen_requires_seed_for_random(capsys):
    code, out, err = run(capsys, "gen", "--N", "4")
    assert code == 2 and "--seed" in err and out == ""


def test_gen_saves_and_loads_tuple(tmp_path, capsys):
    tup = tmp_path / "t.json"
    code, first, _ = run(capsys, "gen", "--s", "2", "--N", "8", "--seed", "1", "--save-tuple", str(tup))
    assert code == 0
    T = GeneratorTuple.from_json(tup.read_text())
    assert T.s == 2 and T.provenance["seed"] == 1
    code, second, _ = run(capsys, "gen", "--s", "2", "--N", "8", "--load", str(tup))
    assert data_rows(first) == data_rows(second)


def test_disc_rows(capsys):
    code, out, _ = run(capsys, "disc", "--matrix", "identity", "--N-max", "8", "--spectral-check")
    assert code == 0
    rows = data_rows(out)
    header = rows[0].split(",")
    assert header[:7] == ["N", "D_star", "D_star_num", "D_star_den", "D_star_normalized",
                          "logN_s", "logN_s_loglogN"]
    body = [dict(zip(header, r.split(","))) for r in rows[1:]]
    assert [int(r["N"]) for r in body] == list(range(1, 9))
    assert body[0]["D_star"] == "1"
    assert body[1]["logN_s_loglogN"] == ""
    assert all(float(r["deviation"]) <= 1e-7 for r in body)


def test_disc_normalized_and_json(capsys):
    code, out, _ = run(capsys, "disc", "--q", "3", "--s", "2", "--N", "5", "--seed", "2",
                       "--normalized", "--format", "json")
    doc = json.loads(out)
    assert code == 0 and doc["version"] == __version__ and doc["config"]["normalized"] is True
    row = doc["rows"][0]
    assert row["D_star"] == pytest.approx(row["D_star_normalized"])


def test_disc_figure(tmp_path, capsys):
    fig = tmp_path / "d.png"
    code, _, _ = run(capsys, "disc", "--matrix", "pascal", "--s", "2", "--N-max", "6", "--figure", str(fig))
    assert code == 0 and fig.stat().st_size > 0


def test_disc_cost_guard_refusal(monkeypatch, capsys):
    monkeypatch.setenv("DFORGE_COST_GUARD", "10")
    code, out, err = run(capsys, "disc", "--matrix", "identity", "--s", "2", "--N", "30")
    assert code == 3 and "refused" in err and "10" in err


def test_verify_valuation_measure(capsys):
    code, out, err = run(capsys, "verify", "lemma2", "--q", "2", "--m", "3", "--mode", "exhaustive")
    doc = json.loads(out)
    assert code == 0 and doc["ok"]
    check = doc["checks"][0]
    assert check["expected"] == "1/4" and check["observed"] == "1/4"


def test_verify_spectral_identity(capsys):
    code, out, _ = run(capsys, "verify", "lemma6", "--q", "2", "--s", "1", "--m", "4")
    doc = json.loads(out)
    assert code == 0
    assert doc["checks"][0]["observed"] <= 1e-7


def test_verify_paired_integral(capsys):
    code, out, _ = run(capsys, "verify", "lemma3a", "--q", "2")
    assert code == 0 and json.loads(out)["ok"]


@pytest.mark.parametrize("suite", ["lemma1", "lemma3b", "theta"])
def test_verify_other_suites(capsys, suite):
    code, out, _ = run(capsys, "verify", suite, "--q", "3", "--s", "1")
    assert code == 0 and json.loads(out)["ok"]


def test_verify_montecarlo_needs_seed(capsys):
    code, _, err = run(capsys, "verify", "lemma2", "--mode", "montecarlo")
    assert code == 2 and "--seed" in err


def test_verify_failure_exit(monkeypatch, capsys):
    from dforge import checks

    def broken(*a, **k):
        c = checks.Check("always fails", "0", 1.0, 0.0, cases=1, violations=[f"v{i}" for i in range(15)])
        return [c]

    monkeypatch.setattr("dforge.cli.run_suite", broken)
    code, out, err = run(capsys, "verify", "lemma1")
    assert code == 1
    assert err.count("violation:") == 10


def test_measure_commands(capsys):
    code, out, _ = run(capsys, "measure", "--kind", "mm", "--q", "3", "--s", "2", "--m", "5", "--k", "4,7")
    doc = json.loads(out)
    assert code == 0 and doc["result"]["estimate_exact"] == "1/81"
    code, out, _ = run(capsys, "measure", "--kind", "joint", "--s", "2", "--k", "4,4", "--shift", "8,0")
    assert code == 0 and json.loads(out)["expected"] == "1/16"
    code, out, _ = run(capsys, "measure", "--s", "2", "--m", "4", "--k", "1,1", "--mode", "montecarlo",
                       "--seed", "5", "--trials", "20000", "--format", "csv")
    assert code == 0 and data_rows(out)[0].startswith("estimate,")


def test_witness_pipeline(tmp_path, capsys):
    argv = ["witness", "--q", "2", "--s", "1", "--seed", "0", "--seeds", "16", "--r-max", "10",
            "--J", "8", "--scan"]
    code, out, err = run(capsys, *argv)
    assert code == 0
    doc = json.loads(out)
    assert doc["summary"]["seeds"] == 16
    assert doc["summary"]["found"] == len(doc["growth"]) > 0
    for r in doc["results"]:
        assert r["violations"] == []
        if r["found"]:
            rep = r["report"]
            assert rep["max_abs_D"] >= rep["certified_bound"] - 1e-12
    # parallel runs give byte-identical output apart from the echoed --jobs
    code, out2, _ = run(capsys, *argv, "--jobs", "2")
    doc2 = json.loads(out2)
    doc2["config"]["jobs"] = 1
    assert json.dumps(doc2, indent=2) + "\n" == out
    code, out3, _ = run(capsys, *argv)
    assert out3 == out


def test_witness_table_and_figure(tmp_path, capsys):
    table, fig = tmp_path / "g.csv", tmp_path / "w.png"
    code, _, _ = run(capsys, "witness", "--seed", "0", "--seeds", "4", "--r-max", "8", "--J", "4",
                     "--table", str(table), "--figure", str(fig))
    assert code == 0 and fig.stat().st_size > 0
    assert data_rows(table.read_text())[0].startswith("seed,r_total,m,N")


def test_witness_none_found_is_success(capsys):
    code, out, err = run(capsys, "witness", "--seed", "0", "--r-max", "2", "--J", "1")
    doc = json.loads(out)
    assert code == 0 and doc["summary"]["none_found"] and "legitimate" in err


def test_witness_requires_seed(capsys):
    code, _, err = run(capsys, "witness")
    assert code == 2


def test_module_entry_point():
    import subprocess
    import sys

    res = subprocess.run([sys.executable, "-m", "dforge", "--version"], capture_output=True, text=True)
    assert res.returncode == 0 and __version__ in res.stdout
