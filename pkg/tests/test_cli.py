"""
Unit tests for the command-line interface
"""

import json
import math

import pytest

from src.cli.commands import EXIT_CHECK_FAILED, EXIT_NON_CONVERGENCE, EXIT_SUCCESS, EXIT_USAGE
from src.cli.formatters import SCHEMA_VERSION, build_report, format_number, render
from src.main import build_parser, execute, resolve_threads, run_config_from_args
from src.cli.run_config import RunConfig
from src.reports.report_store import ReportStore
from src.utils.config_loader import ConfigLoader

CONFIG_TEMPLATE = """
logging:
  level: "INFO"
  log_to_file: false
numerics:
  abs_tol: 1.0e-8
  rel_tol: 1.0e-6
  agreement_tol: 1.0e-4
ladders:
  singular:
    r0: 1.0
    steps: 12
  semigroup:
    t0: 1.0
    steps: 10
  harmonic:
    y0: 1.0
    steps: 10
profile:
  cache_dir: null
montecarlo:
  n_paths: 1000
  seed: 1
  mode: "exact"
  dt: 1.0e-4
parallel:
  threads: 1
reports:
  enabled: true
  report_dir: "{report_dir}"
"""


@pytest.fixture
def config(tmp_path):
    """Loaded configuration writing reports under tmp_path."""
    path = tmp_path / "config.yaml"
    path.write_text(CONFIG_TEMPLATE.format(report_dir=tmp_path / "reports"), encoding="utf-8")
    loader = ConfigLoader(str(path))
    loader.load()
    loader.validate()
    return loader


def run_cli(argv, config):
    """Parse argv and execute; returns the exit code."""
    args = build_parser().parse_args(argv)
    return execute(args, config)


def test_eval_master_oracle(config, capsys):
    """Test eval of the Gaussian, d=1, alpha=1, x=0, definition I."""
    code = run_cli(["--no-save", "eval", "--d", "1", "--alpha", "1", "--fn", "gaussian", "--x", "0",
                    "--def", "I"], config)
    report = json.loads(capsys.readouterr().out)

    assert code == EXIT_SUCCESS
    assert report["schema_version"] == SCHEMA_VERSION
    assert report["params"]["d"] == 1
    result = report["results"][0]
    assert result["method"] == "I"
    assert result["value"] == pytest.approx(-2.0 / math.sqrt(math.pi), abs=1e-4)


def test_eval_rejects_alpha_outside_interval(config, caplog):
    """Test alpha=2.5 is a usage error naming the open interval."""
    code = run_cli(["--no-save", "eval", "--d", "1", "--alpha", "2.5", "--fn", "gaussian", "--x", "0",
                    "--def", "I"], config)
    assert code == EXIT_USAGE
    assert "open interval (0, 2)" in caplog.text


def test_eval_unknown_function_and_tag(config):
    """Test unknown function names and definition tags are usage errors."""
    assert run_cli(["--no-save", "eval", "--d", "1", "--alpha", "1", "--fn", "nope", "--def", "I"],
                   config) == EXIT_USAGE
    assert run_cli(["--no-save", "eval", "--d", "1", "--alpha", "1", "--fn", "gaussian", "--def", "Z"],
                   config) == EXIT_USAGE


def test_eval_non_convergence_exit_code(config, capsys):
    """Test the shell series at 0 under D exits 2 with the report flagged."""
    code = run_cli(["--no-save", "eval", "--d", "1", "--alpha", "1", "--fn", "path_I_not_D", "--def", "D",
                    "--x", "0"], config)
    report = json.loads(capsys.readouterr().out)
    assert code == EXIT_NON_CONVERGENCE
    assert report["results"][0]["converged"] is False
    assert report["diagnostics"]["non_converged"] == 1


def test_eval_csv_table(config, capsys):
    """Test csv output carries the convergence table columns."""
    code = run_cli(["--no-save", "eval", "--d", "1", "--alpha", "1", "--fn", "gaussian", "--x", "0",
                    "--def", "S", "--out", "csv"], config)
    lines = capsys.readouterr().out.splitlines()
    assert code == EXIT_SUCCESS
    assert lines[0] == "h,value,extrapolated,order"
    assert lines[1].startswith("# function=gaussian method=S")


def test_parser_usage_error_exits_1():
    """Test argparse errors exit with the usage code."""
    with pytest.raises(SystemExit) as exc:
        build_parser().parse_args(["eval", "--d", "two"])
    assert exc.value.code == EXIT_USAGE


def test_run_config_file_under_flags(tmp_path):
    """Test flags override the bundle and the bundle fills the rest."""
    bundle = tmp_path / "run.conf"
    bundle.write_text("d = 2\nalpha = 1.0  # overridden\nfn = bump\nx = 0.1,0.2\n", encoding="utf-8")
    args = build_parser().parse_args(["eval", "--run-config", str(bundle), "--alpha", "1.5", "--def", "D"])
    run = run_config_from_args(args)

    assert run.d == 2
    assert run.alpha == 1.5
    assert run.fn == "bump"
    assert run.points == ((0.1, 0.2),)
    assert run.definitions == ("D",)


def test_thread_resolution(config, monkeypatch):
    """Test --threads beats FRACLAP_THREADS, which beats the config."""
    monkeypatch.delenv("FRACLAP_THREADS", raising=False)
    assert resolve_threads(RunConfig(), config).threads == 1
    monkeypatch.setenv("FRACLAP_THREADS", "3")
    assert resolve_threads(RunConfig(), config).threads == 3
    assert resolve_threads(RunConfig(threads=2), config).threads == 2


def test_mc_dynkin_is_reproducible_across_threads(config, capsys):
    """Test identical seeds give identical output for 1 and 3 threads."""
    base = ["--no-save", "mc", "dynkin", "--d", "1", "--alpha", "1", "--fn", "gaussian", "--x", "0",
            "--r", "0.5", "--n", "20000", "--seed", "7"]
    assert run_cli(base + ["--threads", "1"], config) == EXIT_SUCCESS
    first = json.loads(capsys.readouterr().out)
    assert run_cli(base + ["--threads", "3"], config) == EXIT_SUCCESS
    second = json.loads(capsys.readouterr().out)

    assert first["results"] == second["results"]
    assert first["results"][0]["passed"]


def test_mc_exit_dump(config, tmp_path, capsys):
    """Test mc exit writes the CSV samples and the JSON summary."""
    dump = tmp_path / "exits.csv"
    code = run_cli(["--no-save", "mc", "exit", "--d", "2", "--alpha", "1", "--n", "5000", "--seed", "3",
                    "--dump", str(dump)], config)
    summary = json.loads(capsys.readouterr().out)["results"][0]

    assert code == EXIT_SUCCESS
    assert summary["all_outside"]
    header = dump.read_text(encoding="utf-8").splitlines()[0]
    assert header == "exit_r,exit_angle_1,exit_time,steps"
    assert json.loads(dump.with_suffix(".json").read_text(encoding="utf-8"))["n_paths"] == 5000


def test_audit_failure_exit_code(config, mocker, capsys):
    """Test a failing audit row maps to exit code 3."""
    audit_cls = mocker.patch("src.cli.commands.IdentityAudit")
    audit_cls.return_value.run.return_value = {
        "params": {"d": 1, "alpha": 1.0},
        "grid": {"r": 1.0},
        "rows": [{"name": "green_mass", "residual": 1.0, "tolerance": 1e-7, "passed": False,
                  "informational": False}],
        "stats": {"rows": 1, "passed": 0, "failed": 1, "informational": 0, "errors": 0},
        "passed": False,
        "duration_seconds": 0.0,
    }
    code = run_cli(["--no-save", "audit", "--d", "1", "--alpha", "1", "--grid", "r=2"], config)

    assert code == EXIT_CHECK_FAILED
    audit_cls.assert_called_once()
    assert audit_cls.call_args[0][1] == {"r": 2.0}


def test_probe_conjecture_reports_consistent(config, capsys):
    """Test the probe subcommand on a small grid."""
    code = run_cli(["--no-save", "probe-conjecture", "--alpha", "1.5", "--orders", "4", "--grid", "11"],
                   config)
    result = json.loads(capsys.readouterr().out)["results"][0]
    assert code == EXIT_SUCCESS
    assert result["status"] == "consistent"
    assert "not a proof" in result["kind"]


def test_reports_are_saved_and_listed(config, mocker, capsys):
    """Test a run persists its report and 'reports' lists it."""
    mocker.patch("src.cli.commands.probe_conjecture_cm", return_value={
        "name": "conjecture_probe", "kind": "numerical probe, not a proof", "status": "consistent",
        "violations": [], "unresolved": 0})
    assert run_cli(["probe-conjecture", "--alpha", "1.5"], config) == EXIT_SUCCESS
    capsys.readouterr()

    assert run_cli(["reports", "--out", "json"], config) == EXIT_SUCCESS
    listed = json.loads(capsys.readouterr().out)["results"]
    assert len(listed) == 1
    assert listed[0]["subcommand"] == "probe-conjecture"
    assert listed[0]["status"] == "success"
    assert len(ReportStore(config.get("reports.report_dir")).list_reports()) == 1


def test_human_output_uses_ten_digits():
    """Test human rendering prints 10 significant digits."""
    assert format_number(-1.1283791670955126) == "-1.128379167"
    report = build_report({"d": 1, "alpha": 1.0}, {"fn": "gaussian"},
                          [{"method": "I", "value": -1.1283791670955126, "converged": True}])
    text = render(report, "human", title="L f(x)")
    assert "value=-1.128379167" in text
    assert "✓" in text


if __name__ == '__main__':
    pytest.main([__file__, '-v'])
