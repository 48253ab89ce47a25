import csv
import math
import os

import pytest

from specmon.cli import DETAIL_COLUMNS, main, tau_for_exponent

SMALL = ["--T", "2000", "--trials", "4"]


def read(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def run(tmp_path, *argv, name="out"):
    out = tmp_path / name
    code = main([*argv, "--out", str(out)])
    return code, out


def test_run_writes_detail_columns(tmp_path):
    code, out = run(tmp_path, "run", *SMALL, "--variant", "2")
    assert code == 0
    with open(out / "trials.csv") as fh:
        assert next(csv.reader(fh)) == list(DETAIL_COLUMNS)
    rows = read(out / "trials.csv")
    assert len(rows) == 4
    assert {r["variant"] for r in rows} == {"II"}
    assert {r["adversary"] for r in rows} == {"adaptive"}
    agg = read(out / "aggregate.csv")
    assert len(agg) == 1 and agg[0]["trials"] == "4"
    assert os.path.exists(out / "cdf.csv")


def test_rows_satisfy_accounting(tmp_path):
    _, out = run(tmp_path, "run", *SMALL, "--variant", "3", "--adversary", "uniform")
    for r in read(out / "trials.csv"):
        U_alg, U_best = float(r["U_alg"]), float(r["U_best"])
        assert float(r["weak_regret"]) == pytest.approx(U_best - U_alg, abs=1e-9)
        assert U_alg == pytest.approx(float(r["G_alg"]) - float(r["L_alg"]), abs=1e-9)


@pytest.mark.parametrize("argv", [
    ["run", "--l", "4", "--r", "0.3"],
    ["run", "--variant", "9"],
    ["run", "--T", "100", "--variant", "1"],
    ["run", "--variant", "4", "--r", "0.5"],
    ["run", "--gamma", "2", "--variant", "1"],
    ["sweep", "--axis", "l", "--values", "2,4"],
])
def test_invalid_config_exits_2(tmp_path, argv, capsys):
    code, out = run(tmp_path, *argv)
    assert code == 2
    assert "invalid configuration" in capsys.readouterr().err
    assert not out.exists()


def test_unwritable_output_exits_3(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert main(["run", *SMALL, "--out", str(blocker / "sub")]) == 3


def test_missing_config_file_exits_3(tmp_path):
    assert main(["run", "--config", str(tmp_path / "nope.cfg"), "--out", str(tmp_path)]) == 3


def test_config_file_and_flag_precedence(tmp_path):
    cfg = tmp_path / "exp.cfg"
    cfg.write_text("# example\nT = 2000\ntrials = 3\nvariant = 2\nadversary = normal\nmus = 3\n")
    _, out = run(tmp_path, "run", "--config", str(cfg), "--adversary", "fixed")
    rows = read(out / "trials.csv")
    assert len(rows) == 3
    assert {r["adversary"] for r in rows} == {"fixed"}
    assert {r["M"] for r in rows} == {"3"}
    assert {r["variant"] for r in rows} == {"II"}


def test_config_file_unknown_key(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("colour = blue\n")
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2


def test_sweep_rows(tmp_path):
    _, out = run(tmp_path, "sweep", *SMALL, "--axis", "pd", "--values", "0.5,0.9")
    agg = read(out / "aggregate.csv")
    assert [(r["p_d"], r["variant"]) for r in agg] == [
        ("0.5", "II"), ("0.5", "III"), ("0.9", "II"), ("0.9", "III")]
    assert len(read(out / "trials.csv")) == 16


def test_tau_exponent_sweep(tmp_path):
    _, out = run(tmp_path, "sweep", *SMALL, "--variant", "2", "--axis", "tau-exp",
                 "--values", "2,3")
    taus = [r["tau"] for r in read(out / "aggregate.csv")]
    assert taus == [str(tau_for_exponent(2000, 2)), str(tau_for_exponent(2000, 3))]
    assert tau_for_exponent(2000, 2) == round(math.sqrt(2000))


def test_runs_are_deterministic(tmp_path):
    _, a = run(tmp_path, "run", *SMALL, name="a")
    _, b = run(tmp_path, "run", *SMALL, name="b")
    assert (a / "trials.csv").read_text() == (b / "trials.csv").read_text()
    assert (a / "aggregate.csv").read_text() == (b / "aggregate.csv").read_text()


def test_workers_do_not_change_results(tmp_path):
    _, a = run(tmp_path, "run", *SMALL, name="a")
    _, b = run(tmp_path, "run", *SMALL, "--workers", "2", name="b")
    assert (a / "trials.csv").read_text() == (b / "trials.csv").read_text()


def test_more_trials_extend_fewer(tmp_path):
    _, a = run(tmp_path, "run", "--T", "2000", "--trials", "10", name="a")
    _, b = run(tmp_path, "run", "--T", "2000", "--trials", "5", name="b")
    assert read(a / "trials.csv")[:5] == read(b / "trials.csv")


def test_dump_matrix(tmp_path):
    _, out = run(tmp_path, "run", "--T", "2000", "--trials", "2", "--dump-matrix")
    files = sorted(os.listdir(out / "matrices"))
    assert len(files) == 2
    rows = list(csv.reader(open(out / "matrices" / files[0])))
    assert rows[0] == [f"ch{k}" for k in range(1, 11)]
    assert len(rows) == 2001
    assert {v for row in rows[1:] for v in row} <= {"0.0", "0.3"}


def test_params_output(capsys):
    assert main(["params", "--variant", "1,2,3,4"]) == 0
    text = capsys.readouterr().out
    assert "S=45 C=5" in text
    lines = {line.split()[0]: line.split() for line in text.splitlines() if line[:1] in "I"}
    assert lines["I"][1] == "6"
    assert lines["II"][1] == "8"
    assert lines["III"][1] == "3"
    assert lines["IV"][1] == "7"
    assert "adaptive MU learner: tau=11" in text


def test_params_warns_on_short_horizon(capsys):
    assert main(["params", "--variant", "1,2", "--T", "200"]) == 0
    text = capsys.readouterr().out
    assert "I       warning" in text
    assert "II " in text and "warning" not in text.split("II ", 1)[1].splitlines()[0]
