"""
Unit tests for ReportStore
"""

import json
import math

import numpy as np
import pytest

from src.reports.report_store import ReportStore
from src.utils.validators import validate_run_id


def test_report_store_creates_directory(tmp_path):
    """Test the report directory is created on init."""
    target = tmp_path / "nested" / "reports"
    ReportStore(str(target))
    assert target.is_dir()


def test_save_and_load(tmp_path):
    """Test a saved report loads back with its metadata."""
    store = ReportStore(str(tmp_path))
    run_id = store.save("eval", "success", {"results": [{"value": -1.1283791671}]})

    assert validate_run_id(run_id)
    record = store.load(run_id)
    assert record["subcommand"] == "eval"
    assert record["status"] == "success"
    assert record["report"]["results"][0]["value"] == -1.1283791671


def test_save_handles_numpy_and_non_finite(tmp_path):
    """Test numpy values are converted and infinities stored as strings."""
    store = ReportStore(str(tmp_path))
    run_id = store.save("mc exit", "success", {"point": np.array([0.5, 0.0]), "error": math.inf,
                                               "n": np.int64(3)})

    with open(tmp_path / f"{run_id}.json", encoding="utf-8") as f:
        record = json.load(f)
    assert record["report"]["point"] == [0.5, 0.0]
    assert record["report"]["error"] == "inf"
    assert record["report"]["n"] == 3


def test_load_missing_or_malformed(tmp_path):
    """Test unknown and malformed run ids return None."""
    store = ReportStore(str(tmp_path))
    assert store.load("20240101_000000_abcdef") is None
    assert store.load("../etc/passwd") is None


def test_list_reports_newest_first(tmp_path, mocker):
    """Test listing order and the limit."""
    store = ReportStore(str(tmp_path))
    ids = iter(["20240101_000000_aaaaaa", "20240102_000000_bbbbbb", "20240103_000000_cccccc"])
    mocker.patch.object(store, "_generate_run_id", side_effect=lambda: next(ids))

    store.save("eval", "success", {})
    store.save("audit", "audit-failed", {}, exit_code=3)
    store.save("compare", "non-converged", {}, exit_code=2)

    listed = store.list_reports(limit=2)
    assert [r["run_id"] for r in listed] == ["20240103_000000_cccccc", "20240102_000000_bbbbbb"]
    assert listed[1]["status"] == "audit-failed"
    assert listed[1]["exit_code"] == 3


def test_list_skips_corrupt_files(tmp_path):
    """Test unreadable files are skipped with a warning."""
    store = ReportStore(str(tmp_path))
    (tmp_path / "20240101_000000_broken.json").write_text("{not json", encoding="utf-8")
    store.save("eval", "success", {})

    listed = store.list_reports()
    assert len(listed) == 1
    assert listed[0]["subcommand"] == "eval"


def test_cleanup_old_reports(tmp_path):
    """Test reports older than the cutoff are deleted."""
    store = ReportStore(str(tmp_path))
    old = {"run_id": "20000101_000000_oldold", "timestamp": "2000-01-01T00:00:00+00:00",
           "subcommand": "eval", "status": "success", "report": {}}
    (tmp_path / "20000101_000000_oldold.json").write_text(json.dumps(old), encoding="utf-8")
    store.save("eval", "success", {})

    assert store.cleanup_old_reports(days=30) == 1
    assert len(store.list_reports()) == 1


if __name__ == '__main__':
    pytest.main([__file__, '-v'])
