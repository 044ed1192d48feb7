import csv
import io
import json
import subprocess
import sys

import pytest

from suq2 import cli
from suq2.cli import COLUMNS, ConfigError, RunConfig, format_report, load_config, main, run

FAST = dict(max2j=12, trace_2j=40, kernel_2j=6)


@pytest.fixture(scope="module")
def index_rows():
    return run("index", RunConfig(**FAST))


def _by_name(rows):
    return {r["name"]: r for r in rows}


# -- configuration -------------------------------------------------------------


def test_config_file_parsing(tmp_path):
    p = tmp_path / "run.cfg"
    p.write_text("# campaign\nq = 0.3\nmax-2j = 20   # interior\ntol = 1e-7\nstrict_truncation = yes\n\nprecision=extended\n")
    assert load_config(str(p)) == {"q": 0.3, "max2j": 20, "tol_check": 1e-7, "strict_truncation": True, "precision": "extended"}


@pytest.mark.parametrize("body", ["q 0.3\n", "colour = red\n", "max2j = many\n", "strict_truncation = maybe\n"])
def test_config_file_errors(tmp_path, body):
    p = tmp_path / "bad.cfg"
    p.write_text(body)
    with pytest.raises(ConfigError):
        load_config(str(p))


@pytest.mark.parametrize(
    "field, value",
    [("q", 1.5), ("q", 0.0), ("max2j", 0), ("trace_2j", 5), ("kernel_2j", 2), ("tol_check", -1.0), ("workers", 0), ("precision", "quad")],
)
def test_validation_rejects(field, value):
    with pytest.raises(ConfigError):
        RunConfig(**{field: value}).validate()


@pytest.mark.parametrize("argv", [["index", "--q", "1.5"], ["index", "--max-2j", "0"], ["index", "--config", "/nonexistent/file"]])
def test_usage_errors_exit_2(argv, capsys):
    assert main(argv) == 2
    assert "error" in capsys.readouterr().err


def test_unknown_command_is_argparse_error():
    with pytest.raises(SystemExit) as exc:
        main(["nonsense"])
    assert exc.value.code == 2


def test_flags_override_config(tmp_path, monkeypatch):
    seen = {}

    def fake(cfg):
        seen["cfg"] = cfg
        return [cli._row("x", "y", 0, 0, 0.0, 1.0)]

    monkeypatch.setitem(cli.SUITES, "index", fake)
    p = tmp_path / "run.cfg"
    p.write_text("q = 0.3\nseed = 7\n")
    assert main(["index", "--config", str(p), "--q", "0.4", "--out-file", str(tmp_path / "o.json")]) == 0
    assert seen["cfg"].q == 0.4 and seen["cfg"].seed == 7


# -- report rows ------------------------------------------------------------------


def test_index_rows(index_rows):
    rows = _by_name(index_rows)
    r = rows["ind(PUP)"]
    assert r["target"] == 1 and r["computed"] == 1 and r["residual"] == 0 and r["pass"]
    assert rows["dim ker PUP"]["computed"] == 1
    assert rows["dim ker PU*P"]["computed"] == 0
    assert all(r["pass"] for r in index_rows)


def test_rows_have_exactly_the_report_fields(index_rows):
    for r in index_rows:
        assert tuple(r) == COLUMNS
        assert isinstance(r["name"], str) and isinstance(r["anchor"], str)
        assert isinstance(r["pass"], bool)


def test_pairing_closed_row_at_other_q():
    rows = _by_name(run("pairing", RunConfig(q=0.8, **FAST)))
    r = rows["psi1(U^{-1},U)"]
    assert r["target"] == -2 and r["computed"] == -2 and r["pass"]
    assert rows["-1/2 psi1(U^{-1},U) = ind(PUP)"]["pass"]


def test_failing_check_becomes_row():
    rows = cli._Rows()
    rows.check("boom", "anchor", 1, lambda: 1 / 0, 1.0)
    rows.close_to("near", "anchor", 1, lambda: 1.5, 0.1)
    assert rows[0]["pass"] is False and rows[0]["residual"] is None and "ZeroDivisionError" in rows[0]["computed"]
    assert rows[1]["pass"] is False and rows[1]["residual"] == 0.5


def test_plain_values_are_json_friendly():
    from fractions import Fraction

    assert cli._plain(Fraction(-1, 2)) == -0.5
    assert cli._plain(2 + 0j) == 2.0
    assert cli._plain(float("inf")) == "inf"
    assert json.loads(json.dumps([cli._plain(x) for x in (Fraction(1, 3), 1j, None, True)]))


# -- formats and exit codes ----------------------------------------------------------


def test_output_formats(index_rows):
    data = json.loads(format_report(index_rows, "json"))
    assert data == index_rows
    parsed = list(csv.DictReader(io.StringIO(format_report(index_rows, "csv"))))
    assert [r["name"] for r in parsed] == [r["name"] for r in index_rows]
    assert list(parsed[0]) == list(COLUMNS)
    text = format_report(index_rows, "text").splitlines()
    assert text[0].split() == list(COLUMNS)
    assert len(text) == len(index_rows) + 1
    assert all(line.rstrip().endswith(("PASS", "FAIL")) for line in text[1:])
    with pytest.raises(ConfigError):
        format_report(index_rows, "xml")


def test_failures_exit_1(tmp_path, monkeypatch, capsys):
    monkeypatch.setitem(cli.SUITES, "tau", lambda cfg: [cli._row("bad", "a", 0, 1.0, 1.0, 0.5)])
    out = tmp_path / "r.csv"
    assert main(["tau", "--output", "csv", "--out-file", str(out)]) == 1
    assert "FAIL bad" in capsys.readouterr().err
    assert out.read_text().startswith(",".join(COLUMNS))


def test_report_all_is_union_in_order(monkeypatch):
    for name in cli.SUITES:
        monkeypatch.setitem(cli.SUITES, name, lambda cfg, n=name: [cli._row(n, "a", 0, 0, 0.0, 1.0)])
    rows = run("report-all", RunConfig())
    assert [r["name"] for r in rows] == list(cli.SUITES)
    with pytest.raises(ConfigError):
        run("unknown", RunConfig())


def test_module_entry_point():
    out = subprocess.run(
        [sys.executable, "-m", "suq2", "index", "--kernel-2j", "6", "--trace-2j", "20", "--output", "text"],
        capture_output=True,
        text=True,
        check=False,
    )
    assert out.returncode == 0, out.stderr
    assert "ind(PUP)" in out.stdout


# -- the cheaper suites end to end ----------------------------------------------------


@pytest.mark.parametrize("suite", ["relations", "tau", "symbols"])
def test_cheap_suites_pass(suite):
    rows = run(suite, RunConfig(**FAST))
    failed = [r["name"] for r in rows if not r["pass"]]
    assert rows and not failed


def test_same_seed_reproduces_rows():
    a = run("symbols", RunConfig(seed=1, **FAST))
    b = run("symbols", RunConfig(seed=1, **FAST))
    assert a == b
