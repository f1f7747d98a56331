"""CLI behavior: frozen report bytes, exit codes, config merging, figures."""

import csv
import json
import math
import subprocess
import sys

import pytest

from qclock.cli import main
from qclock.report import CSV_COLUMNS

HEADER = ",".join(CSV_COLUMNS)


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_qfi_frozen_csv(tmp_path):
    out = tmp_path / "qfi.csv"
    assert main(["qfi", "--probe", "noon", "--n", "4", "--output", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == HEADER
    assert lines[1] == "qfi,noon,1,4,8,1,,,,64,0.125,,,,"


def test_csv_header_is_stable(tmp_path):
    assert HEADER == (
        "experiment,probe,d,n,N,omega,theta_true,shots,trials,"
        "qfi,crb,empirical_dev,mt_bound,ren2012,ratio"
    )


def test_qfi_prints_report_without_output(capsys):
    assert main(["qfi", "--probe", "average", "--d", "2", "--n", "1"]) == 0
    captured = capsys.readouterr().out
    assert captured.startswith("qfi: probe=average")
    assert HEADER in captured
    assert "qfi,average,2,1,4,1,,,,16,0.25,,,," in captured


def test_qfi_rejects_w_probe(capsys):
    assert main(["qfi", "--probe", "w"]) == 2


def test_unknown_probe_is_usage_error(capsys):
    assert main(["qfi", "--probe", "ghz"]) == 2


def test_missing_subcommand_is_usage_error(capsys):
    assert main([]) == 2


def test_help_exits_zero(capsys):
    assert main(["--help"]) == 0


def test_bad_output_directory(capsys):
    assert main(["qfi", "--probe", "noon", "--output", "/no/such/dir/x.csv"]) == 2


def test_negative_seed_rejected(capsys):
    assert main(["qfi", "--probe", "noon", "--seed", "-3"]) == 2


def test_nonpositive_omega_rejected(capsys):
    assert main(["qfi", "--probe", "noon", "--omega", "0"]) == 2


def test_montecarlo_json_schema(tmp_path):
    out = tmp_path / "mc.json"
    code = main(
        ["montecarlo", "--probe", "noon", "--n", "1", "--shots", "200",
         "--trials", "50", "--format", "json", "--output", str(out)]
    )
    assert code == 0
    payload = json.loads(out.read_text())
    assert set(payload) == {"experiment", "config", "result"}
    assert payload["experiment"] == "montecarlo"
    result = payload["result"]
    assert set(result) == {
        "theta_true", "trials", "shots", "estimates", "empirical_dev", "crb"
    }
    assert len(result["estimates"]) == 50
    assert payload["config"]["seed"] == 1


def test_montecarlo_default_offset_is_quarter_window(tmp_path):
    out = tmp_path / "mc.json"
    main(["montecarlo", "--probe", "noon", "--n", "1", "--shots", "200",
          "--trials", "50", "--format", "json", "--output", str(out)])
    result = json.loads(out.read_text())["result"]
    # noon n=1 half-window is pi/2; the default sits a quarter of the way in
    assert result["theta_true"] == pytest.approx(math.pi / 8)


def test_montecarlo_csv_ratio(tmp_path):
    out = tmp_path / "mc.csv"
    assert main(["montecarlo", "--probe", "noon", "--n", "4", "--output", str(out)]) == 0
    (row,) = read_rows(out)
    ratio = float(row["ratio"])
    assert ratio == pytest.approx(
        float(row["empirical_dev"]) / float(row["crb"]), rel=1e-9
    )
    assert 0.9 <= ratio <= 1.25


def test_montecarlo_single_theta_only(capsys):
    assert main(["montecarlo", "--probe", "noon", "--theta", "0.1,0.2"]) == 2


def test_sweep_rows_and_slope(tmp_path):
    out = tmp_path / "sweep.csv"
    code = main(
        ["sweep", "--probe", "noon", "--n", "1,2,4,8", "--shots", "1000",
         "--trials", "200", "--seed", "1", "--output", str(out)]
    )
    assert code == 0
    rows = read_rows(out)
    assert len(rows) == 5
    for row, n in zip(rows[:4], (1, 2, 4, 8)):
        assert int(row["n"]) == n
        assert int(row["N"]) == 2 * n
        assert row["experiment"] == "sweep"
    fit = rows[4]
    assert fit["d"] == "" and fit["n"] == "" and fit["N"] == ""
    slope = float(fit["ratio"])
    assert -1.05 <= slope <= -0.95


def test_compare_average_frozen_rows(tmp_path):
    out = tmp_path / "cmp.csv"
    assert main(["compare-average", "--d", "1,2,4", "--n", "1", "--output", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == HEADER
    assert lines[3] == "compare-average,average,4,1,8,1,,,,64,0.125,,0.25,0.285714285714,2"
    d2 = lines[2].split(",")
    assert float(d2[-1]) == pytest.approx(math.sqrt(2), rel=1e-11)


def test_protocol_emits_tab_log(tmp_path):
    out = tmp_path / "protocol.log"
    code = main(
        ["protocol", "--probe", "noon", "--n", "1", "--theta", "0.3",
         "--output", str(out)]
    )
    assert code == 0
    lines = out.read_text().strip().split("\n")
    assert all(len(line.split("\t")) == 4 for line in lines)
    assert sum("trigger-flip" in line for line in lines) == 2
    assert lines[-1].split("\t")[1] == "final-flip"


def test_protocol_json_has_events_and_fidelity(tmp_path):
    out = tmp_path / "protocol.json"
    code = main(
        ["protocol", "--probe", "average", "--d", "3", "--n", "1", "--theta", "0.5",
         "--format", "json", "--output", str(out)]
    )
    assert code == 0
    result = json.loads(out.read_text())["result"]
    assert result["fidelity_vs_closed_form"] == pytest.approx(1.0, abs=1e-12)
    kinds = [e["event"] for e in result["events"]]
    assert kinds.count("trigger-flip") == 4  # broadcast offset, nodes 0..3


def test_wstate_frequencies(tmp_path):
    out = tmp_path / "w.csv"
    code = main(
        ["wstate", "--d", "2", "--theta", "0.0,0.0", "--shots", "20000",
         "--seed", "7", "--output", str(out)]
    )
    assert code == 0
    rows = read_rows(out)
    assert len(rows) == 2
    p = 0.5 + 1.0 / 3.0
    for row in rows:
        assert row["probe"] == "w"
        freq = float(row["ratio"])
        assert abs(freq - p) <= 0.02
        assert float(row["empirical_dev"]) == pytest.approx(abs(freq - p), abs=1e-12)


def test_wstate_ignores_other_probes(tmp_path):
    out = tmp_path / "w.csv"
    assert main(["wstate", "--probe", "noon", "--d", "1", "--output", str(out)]) == 0
    (row,) = read_rows(out)
    assert row["probe"] == "w"


def test_oracle_check_passes(tmp_path):
    out = tmp_path / "oracle.csv"
    assert main(["oracle-check", "--output", str(out)]) == 0
    rows = read_rows(out)
    assert len(rows) == 16  # 12 conditional grids + 4 protocol cases
    assert all(float(row["empirical_dev"]) <= 1e-10 for row in rows)


def test_oracle_check_reports_mismatch(tmp_path, monkeypatch, capsys):
    monkeypatch.setattr("qclock.cli.oracle_w_conditional", lambda d, params, delta: 0.123)
    out = tmp_path / "oracle.csv"
    assert main(["oracle-check", "--output", str(out)]) == 3
    assert out.exists()  # the report is still written before the failure exit
    assert "oracle-check failure" in capsys.readouterr().err


def test_config_file_merging(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("probe = noon\nn = 4\nshots = 250\ntrials = 50\n")
    out = tmp_path / "mc.json"
    code = main(
        ["montecarlo", "--config", str(cfg), "--trials", "60",
         "--format", "json", "--output", str(out)]
    )
    assert code == 0
    conf = json.loads(out.read_text())["config"]
    assert conf["shots"] == 250   # from the file
    assert conf["trials"] == 60   # flag overrides file
    assert conf["n"] == [4]


def test_config_file_subcommand_wins(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("experiment = qfi\nprobe = noon\nn = 2\n")
    out = tmp_path / "mc.json"
    code = main(
        ["montecarlo", "--config", str(cfg), "--shots", "200", "--trials", "50",
         "--format", "json", "--output", str(out)]
    )
    assert code == 0
    assert json.loads(out.read_text())["experiment"] == "montecarlo"


def test_config_file_unknown_key(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("bogus = 1\n")
    assert main(["qfi", "--config", str(cfg)]) == 2


def test_config_file_inline_comments(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# full-line comment\nshots = 300  # inline comment\n")
    out = tmp_path / "mc.json"
    code = main(
        ["montecarlo", "--probe", "noon", "--config", str(cfg), "--trials", "50",
         "--format", "json", "--output", str(out)]
    )
    assert code == 0
    assert json.loads(out.read_text())["config"]["shots"] == 300


def test_missing_config_file(capsys):
    assert main(["qfi", "--probe", "noon", "--config", "/no/such/file.cfg"]) == 2


def test_reports_are_byte_identical(tmp_path):
    args = ["montecarlo", "--probe", "noon", "--n", "2", "--shots", "200",
            "--trials", "50", "--seed", "13"]
    a = tmp_path / "a.csv"
    b = tmp_path / "b.csv"
    assert main(args + ["--output", str(a)]) == 0
    assert main(args + ["--output", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_plot_renders_png_next_to_report(tmp_path):
    out = tmp_path / "mc.csv"
    code = main(
        ["montecarlo", "--probe", "noon", "--n", "1", "--shots", "200",
         "--trials", "50", "--output", str(out), "--plot"]
    )
    assert code == 0
    png = tmp_path / "mc.png"
    assert png.read_bytes()[:4] == b"\x89PNG"


def test_plot_default_basename(tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)
    assert main(["compare-average", "--d", "1,2,4", "--plot"]) == 0
    assert (tmp_path / "qclock_report.png").read_bytes()[:4] == b"\x89PNG"


@pytest.mark.parametrize(
    "args",
    [
        ["sweep", "--probe", "noon", "--n", "1,2", "--shots", "200", "--trials", "50"],
        ["wstate", "--d", "2", "--theta", "0.3,0.8", "--shots", "2000"],
    ],
)
def test_plot_sweep_and_wstate(tmp_path, args):
    out = tmp_path / "report.csv"
    assert main(args + ["--output", str(out), "--plot"]) == 0
    assert (tmp_path / "report.png").read_bytes()[:4] == b"\x89PNG"


def test_plot_without_figure_still_succeeds(tmp_path, capsys):
    # qfi and protocol have no figure; --plot degrades to a notice
    out = tmp_path / "qfi.csv"
    assert main(["qfi", "--probe", "noon", "--output", str(out), "--plot"]) == 0
    assert "no figure" in capsys.readouterr().err
    assert not (tmp_path / "qfi.png").exists()


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "qclock.cli", "qfi", "--probe", "noon", "--n", "2"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert "F_Q=16" in proc.stdout
