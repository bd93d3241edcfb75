"""
On-disk store of CLI run reports.
"""

import json
import math
import random
import string
from datetime import datetime, timedelta, timezone
from pathlib import Path
from typing import Any, Dict, List, Optional

from ..utils.logger import get_logger
from ..utils.validators import validate_run_id

logger = get_logger(__name__)

DEFAULT_REPORT_DIR = "data/reports"
LIST_LIMIT = 20


def json_ready(value: Any) -> Any:
    """
    Convert a report body to strict JSON types.

    numpy scalars and arrays become Python numbers and lists, paths become
    strings, and non-finite floats become the strings "inf", "-inf", "nan".
    """
    if hasattr(value, "tolist"):
        value = value.tolist()
    if isinstance(value, Path):
        return str(value)
    if isinstance(value, float) and not math.isfinite(value):
        return str(value)
    if isinstance(value, dict):
        return {str(k): json_ready(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [json_ready(v) for v in value]
    return value


class ReportStore:
    """Persist JSON reports of CLI runs under a timestamped run id."""

    def __init__(self, report_dir: str = DEFAULT_REPORT_DIR):
        """
        Initialize report store.

        Args:
            report_dir: Directory to store report files
        """
        self.report_dir = Path(report_dir)
        self.report_dir.mkdir(parents=True, exist_ok=True)

        logger.debug(f"Report store initialized: {report_dir}")

    def _generate_run_id(self) -> str:
        """
        Generate unique run ID.

        Returns:
            Run ID string (format: YYYYMMDD_HHMMSS_randomstr)
        """
        timestamp = datetime.now(timezone.utc).strftime('%Y%m%d_%H%M%S')
        random_str = ''.join(random.choices(string.ascii_lowercase + string.digits, k=6))
        return f"{timestamp}_{random_str}"

    def _get_report_file(self, run_id: str) -> Path:
        return self.report_dir / f"{run_id}.json"

    def save(self, subcommand: str, status: str, report: Dict[str, Any], exit_code: int = 0) -> str:
        """
        Save a run report.

        Args:
            subcommand: CLI subcommand that produced the report (e.g. "eval", "mc dynkin")
            status: "success", "non-converged", "audit-failed" or "error"
            report: JSON-ready report body
            exit_code: Process exit code of the run

        Returns:
            Run ID
        """
        run_id = self._generate_run_id()

        record = {
            'run_id': run_id,
            'timestamp': datetime.now(timezone.utc).isoformat(),
            'subcommand': subcommand,
            'status': status,
            'exit_code': exit_code,
            'report': json_ready(report),
        }

        with open(self._get_report_file(run_id), 'w', encoding='utf-8') as f:
            json.dump(record, f, indent=2, ensure_ascii=False)

        logger.info(f"Report saved: {run_id}")

        return run_id

    def load(self, run_id: str) -> Optional[Dict[str, Any]]:
        """
        Load a saved report.

        Args:
            run_id: Run ID

        Returns:
            Stored record, or None if not found or the id is malformed
        """
        if not validate_run_id(run_id):
            logger.warning(f"Invalid run ID: {run_id}")
            return None

        report_file = self._get_report_file(run_id)

        if not report_file.exists():
            logger.warning(f"Report not found: {run_id}")
            return None

        with open(report_file, 'r', encoding='utf-8') as f:
            record = json.load(f)

        logger.debug(f"Loaded report: {run_id}")

        return record

    def list_reports(self, limit: Optional[int] = LIST_LIMIT, days: Optional[int] = None) -> List[Dict[str, Any]]:
        """
        List saved reports, newest first.

        Args:
            limit: Maximum number of reports to return
            days: Only return reports from the last N days

        Returns:
            List of summaries (run_id, timestamp, subcommand, status, exit_code)
        """
        # run ids start with the UTC timestamp, so name order is time order
        report_files = sorted(self.report_dir.glob("*.json"), key=lambda p: p.name, reverse=True)

        reports = []

        for report_file in report_files:
            try:
                with open(report_file, 'r', encoding='utf-8') as f:
                    record = json.load(f)

                if days is not None:
                    run_time = datetime.fromisoformat(record['timestamp'])
                    if run_time < datetime.now(timezone.utc) - timedelta(days=days):
                        continue

                reports.append({
                    'run_id': record['run_id'],
                    'timestamp': record['timestamp'],
                    'subcommand': record.get('subcommand', ''),
                    'status': record.get('status', ''),
                    'exit_code': record.get('exit_code'),
                })

                if limit and len(reports) >= limit:
                    break

            except (OSError, ValueError, KeyError) as e:
                logger.warning(f"Failed to load report file {report_file}: {e}")

        return reports

    def cleanup_old_reports(self, days: int = 90) -> int:
        """
        Delete reports older than the given number of days.

        Returns:
            Number of reports deleted
        """
        logger.info(f"Cleaning up reports older than {days} days...")

        cutoff = datetime.now(timezone.utc) - timedelta(days=days)
        deleted_count = 0

        for report_file in self.report_dir.glob("*.json"):
            try:
                with open(report_file, 'r', encoding='utf-8') as f:
                    record = json.load(f)

                if datetime.fromisoformat(record['timestamp']) < cutoff:
                    report_file.unlink()
                    deleted_count += 1
                    logger.debug(f"Deleted old report: {record['run_id']}")

            except (OSError, ValueError, KeyError) as e:
                logger.warning(f"Failed to process report file {report_file}: {e}")

        logger.info(f"Deleted {deleted_count} old reports")

        return deleted_count
