import csv
import json
import subprocess
import sys

import pytest

from qsine import cli


def _rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_poisson1d_outputs(tmp_path):
    rc = cli.main(["poisson1d", "--n", "16", "32", "--p", "3", "--out", str(tmp_path)])
    assert rc == 0
    rows = _rows(tmp_path / "poisson1d.csv")
    assert list(rows[0]) == list(cli.COLUMNS["poisson1d"])
    assert [r["N"] for r in rows] == ["16", "32"]
    m = json.loads((tmp_path / "manifest.json").read_text())
    assert m["config"]["experiment"] == "poisson1d" and m["rows"] == 2


def test_rerun_is_byte_identical(tmp_path):
    args = ["fractional1d", "--n", "16", "--p", "3", "--samples", "2", "--seed", "5"]
    cli.main(args + ["--out", str(tmp_path / "a")])
    cli.main(args + ["--out", str(tmp_path / "b")])
    for name in ("fractional1d.csv", "fractional1d_samples.csv", "manifest.json"):
        a = (tmp_path / "a" / name).read_bytes()
        b = (tmp_path / "b" / name).read_bytes().replace(b"/b", b"/a")
        assert a == b, name


def test_gatecount_polylog_report(tmp_path, capsys):
    rc = cli.main(["gatecount-ur", "--n", "3", "4", "5", "6", "--out", str(tmp_path)])
    poly = {r["series"]: r for r in _rows(tmp_path / "polylog.csv")}
    assert set(poly) == {"mcx", "ripple"}
    assert list(_rows(tmp_path / "polylog.csv")[0]) == list(cli.POLYLOG_COLUMNS)
    bad = [s for s, r in poly.items() if r["bounded"] != "true"]
    assert rc == 0
    if bad:
        assert "polylog exponent" in capsys.readouterr().err


def test_strict_polylog_exit_code(tmp_path):
    rc = cli.main(["gatecount-ur", "--n", "3", "4", "5", "6", "7", "8", "--shift", "mcx",
                   "--strict-polylog", "--out", str(tmp_path)])
    poly = _rows(tmp_path / "polylog.csv")
    assert rc == (3 if any(r["bounded"] != "true" for r in poly) else 0)


@pytest.mark.parametrize("argv", [
    ["poisson1d", "--n", "12"],
    ["poisson1d", "--n", "2048"],
    ["poisson2d", "--n", "128"],
    ["poisson1d", "--p", "9"],
    ["poisson1d", "--partition", "zigzag"],
    ["gatecount-uf", "--p", "3"],
    ["plotdata"],
])
def test_usage_errors(tmp_path, argv, capsys):
    assert cli.main(argv + ["--out", str(tmp_path)] if argv[0] != "plotdata" else argv) == 2
    assert "qsine: error" in capsys.readouterr().err


def test_plotdata_empty(tmp_path):
    src = tmp_path / "empty.csv"
    src.write_text("")
    out = tmp_path / "plot.csv"
    assert cli.emit_plotdata(src, out) == []
    assert out.read_text() == "series,x,y\n"


def test_plotdata_header_only(tmp_path):
    src = tmp_path / "h.csv"
    src.write_text("N,p,l2\n")
    assert cli.emit_plotdata(src) == []


def test_plotdata_passthrough(tmp_path):
    src = tmp_path / "long.csv"
    src.write_text("series,x,y\na,1,2\nb,3,4\n")
    out = tmp_path / "o.csv"
    cli.emit_plotdata(src, out)
    assert out.read_text() == src.read_text()


def test_plotdata_melts_groups(tmp_path):
    src = tmp_path / "g.csv"
    src.write_text("shift,p,n,total\nmcx,,3,10\nripple,,3,12\n")
    rows = cli.emit_plotdata(src)
    assert rows == [{"series": "total[shift=mcx]", "x": "3", "y": "10"},
                    {"series": "total[shift=ripple]", "x": "3", "y": "12"}]


def test_polylog_exponent_recovers_power():
    ns = [3, 4, 5, 6, 7]
    assert cli.polylog_exponent(ns, [n**3 for n in ns]) == pytest.approx(3.0)


def test_thread_pool_env(monkeypatch):
    monkeypatch.setenv("QSINE_THREADS", "3")
    assert cli.pool_size() == 3
    assert cli._map(lambda v: v * v, [1, 2, 3]) == [1, 4, 9]
    monkeypatch.setenv("QSINE_THREADS", "x")
    with pytest.raises(cli.UsageError):
        cli.pool_size()


def test_console_entry_help():
    out = subprocess.run([sys.executable, "-m", "qsine.cli", "--help"], capture_output=True, text=True)
    assert out.returncode == 0
    assert "gatecount-solver" in out.stdout and "exit status" in out.stdout
