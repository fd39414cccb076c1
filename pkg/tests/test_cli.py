import csv
import io
import json
import subprocess
import sys
from pathlib import Path

import pytest

from stpvnd.cli import CSV_COLUMNS, SUMMARY_COLUMNS, aggregate, main, summarize, test_set as set_of
from stpvnd.steinlib import load_optima, parse_solution, read_stp

DATA = Path(__file__).parent / "data"
K4 = str(DATA / "k4star.stp")


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def report_rows(text):
    head = text.split("\n\n")[0]
    return list(csv.DictReader(io.StringIO(head)))


def test_csv_columns_and_k4star(capsys):
    code, out, _ = run(capsys, "--instance", K4, "--runs", "3", "--time-limit", "5")
    assert code == 0
    assert out.splitlines()[0] == ",".join(CSV_COLUMNS)
    (row,) = report_rows(out)
    assert (row["V"], row["E"], row["T"]) == ("4", "6", "3")
    assert row["best"] == "3" and row["worst"] == "3" and row["avg"] == "3.00"
    assert row["stdev"] == "0.00" and row["time_s"] != ""
    # K4STAR is not in the bundled table
    assert row["gap_pct"] == "" and row["best_known"] == ""


def test_gap_against_custom_optima(tmp_path, capsys):
    table = tmp_path / "opt.csv"
    table.write_text("K4STAR,3,true\n")
    code, out, _ = run(capsys, "--instance", K4, "--runs", "2", "--optima", str(table), "--deterministic")
    (row,) = report_rows(out)
    assert row["gap_pct"] == "0.00" and row["best_known"] == "3" and row["time_s"] == ""


def test_summary_block(capsys):
    _, out, _ = run(capsys, "--instance", K4, "--instance", str(DATA / "path3.stp"), "--runs", "1",
                    "--deterministic")
    head, tail = out.split("\n\n")
    assert [r["name"] for r in csv.DictReader(io.StringIO(head))] == ["K4STAR", "PATH3"]
    rows = list(csv.DictReader(io.StringIO(tail)))
    assert list(rows[0]) == SUMMARY_COLUMNS
    assert [(r["set"], r["instances"]) for r in rows] == [("K", "1"), ("PATH", "1")]


def test_set_aliases():
    assert set_of("HC6U") == "PUC" and set_of("E01") == "E" and set_of("taq0631") == "TAQ"


def test_summary_counts_optima():
    inst, _ = read_stp(DATA / "k4star.stp")
    table = load_optima("K4STAR,3,true\n")
    rows = summarize([aggregate(inst, [3, 3, 4], [0.1, 0.1, 0.1], table)])
    assert rows == [{"set": "K", "instances": 1, "optima": 1, "time_s": 0.1, "gap_pct": 11.11}]


def test_aggregate_population_stdev():
    inst, _ = read_stp(DATA / "k4star.stp")
    r = aggregate(inst, [3, 5], None, load_optima(""))
    assert (r.best, r.avg, r.worst, r.stdev, r.time_s) == (3, 4.0, 5, 1.0, None)


def test_json_emit(capsys):
    code, out, _ = run(capsys, "--instance", K4, "--runs", "2", "--emit", "json", "--deterministic")
    d = json.loads(out)
    (rep,) = d["reports"]
    assert rep["best"] == 3 and rep["costs"] == [3, 3] and rep["time_s"] is None
    assert d["summary"][0]["set"] == "K"


def test_deterministic_output_identical(capsys):
    argv = ["--instance", str(DATA / "rand40.stp"), "--runs", "2", "--seed", "7", "--deterministic",
            "--emit", "json"]
    _, a, _ = run(capsys, *argv)
    _, b, _ = run(capsys, *argv)
    assert a == b


def test_oracle_flag(capsys):
    inst, _ = read_stp(DATA / "rand40.stp")
    from stpvnd.exact import exact_steiner
    opt = exact_steiner(inst)[0]
    _, out, _ = run(capsys, "--instance", str(DATA / "rand40.stp"), "--runs", "1", "--oracle")
    assert report_rows(out)[0]["best"] == str(opt)


def test_dir_and_solutions(tmp_path, capsys):
    src = tmp_path / "in"
    src.mkdir()
    for n in ("k4star.stp", "path3.stp"):
        (src / n).write_text((DATA / n).read_text())
    sols = tmp_path / "sols"
    out_file = tmp_path / "report.csv"
    code, out, _ = run(capsys, "--dir", str(src), "--runs", "1", "--solutions", str(sols), "-o", str(out_file),
                       "--deterministic")
    assert code == 0 and out == ""
    assert len(report_rows(out_file.read_text())) == 2
    inst, _ = read_stp(DATA / "k4star.stp")
    assert parse_solution((sols / "K4STAR.sol").read_text(), inst).cost == 3


def test_parse_failure_exit_1(tmp_path, capsys):
    bad = tmp_path / "bad.stp"
    bad.write_text("not a steinlib file\n")
    code, out, err = run(capsys, "--instance", K4, "--instance", str(bad), "--runs", "1")
    assert code == 1
    assert "bad.stp" in err and "magic" in err
    assert len(report_rows(out)) == 1


@pytest.mark.parametrize("argv", [
    [],
    ["--instance", K4, "--runs", "0"],
    ["--instance", K4, "--time-limit", "0"],
    ["--instance", K4, "--bmin", "8", "--bmax", "2"],
    ["--instance", K4, "--no-reduce", "bogus"],
    ["--instance", K4, "--emit", "xml"],
])
def test_bad_arguments_exit_2(argv, capsys):
    with pytest.raises(SystemExit) as exc:
        main(argv)
    assert exc.value.code == 2


def test_no_reduce_and_modes(capsys):
    code, out, _ = run(capsys, "--instance", K4, "--runs", "1", "--no-reduce", "triangle", "--no-reduce",
                       "special-distance", "--degree-mode", "graph", "--window-mode", "global",
                       "--deterministic")
    assert code == 0 and report_rows(out)[0]["best"] == "3"


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "stpvnd", "--instance", K4, "--runs", "1", "--deterministic"],
                          capture_output=True, text=True, timeout=60)
    assert proc.returncode == 0 and proc.stdout.startswith("name,V,E,T")
