"""
Subcommand bodies. Each cmd_* takes the merged RunConfig, the parsed
argparse namespace and the loaded YAML configuration and returns a
CommandResult; printing, persistence and exit-code mapping live in main.
"""

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np

from ..audit.conjecture_probe import probe_conjecture_cm, probe_location
from ..audit.identity_audit import IdentityAudit
from ..ballgeom.ball import BallSpec
from ..kernels.params import Params
from ..kernels.profiles import MProfile
from ..kernels.stable_density import PROFILE_NODES, PROFILE_RHO_MAX, get_p1_profile
from ..montecarlo.exit import MCConfig, exit_summary, simulate_exit
from ..montecarlo.validation import (
    check_dynkin_formula,
    check_increment_law,
    check_stable_scaling,
    mc_characteristic_operator,
)
from ..operators.agreement import agreement_matrix, evaluate_definition
from ..operators.settings import EvalSettings
from ..reports.report_store import DEFAULT_REPORT_DIR, ReportStore, json_ready
from ..testbank.bank import bank_standard, get_function, list_bank
from ..utils.config_loader import ConfigLoader
from ..utils.errors import DomainError
from ..utils.logger import get_logger
from .formatters import build_report, render_csv
from .run_config import RunConfig

logger = get_logger(__name__)

EXIT_SUCCESS = 0
EXIT_USAGE = 1
EXIT_NON_CONVERGENCE = 2
EXIT_CHECK_FAILED = 3

STATUS_BY_CODE = {
    EXIT_SUCCESS: "success",
    EXIT_USAGE: "error",
    EXIT_NON_CONVERGENCE: "non-converged",
    EXIT_CHECK_FAILED: "check-failed",
}

MC_ACTIONS = ("exit", "dynkin", "charop", "law")


@dataclass
class CommandResult:
    """Outcome of one subcommand."""

    subcommand: str
    exit_code: int
    report: Dict[str, Any]
    csv_rows: Optional[List[Dict[str, Any]]] = None
    csv_blocks: Optional[List[Dict[str, Any]]] = None
    title: str = ""
    save: bool = True
    files: List[str] = field(default_factory=list)

    @property
    def status(self) -> str:
        return STATUS_BY_CODE.get(self.exit_code, "error")


def eval_settings(run: RunConfig, config: ConfigLoader) -> EvalSettings:
    """YAML numerics and ladders, then run-config and flag overrides."""
    return EvalSettings.from_config(config).with_overrides(**run.settings_overrides())


def mc_config(run: RunConfig, config: ConfigLoader, default_r: Optional[float] = None) -> MCConfig:
    """YAML montecarlo section, then run-config and flag overrides."""
    r = run.r if run.r is not None else (default_r or float(config.get("montecarlo.ball_radius", 1.0)))
    return MCConfig.from_config(config, ball=BallSpec(r), **run.mc_overrides())


def _params(run: RunConfig) -> Params:
    return Params(run.d, run.alpha)


def _inputs(run: RunConfig, **extra: Any) -> Dict[str, Any]:
    inputs = run.to_mapping()
    inputs.pop("d", None)
    inputs.pop("alpha", None)
    inputs.update({k: v for k, v in extra.items() if v is not None})
    return inputs


def cmd_eval(run: RunConfig, args, config: ConfigLoader) -> CommandResult:
    """
    Evaluate L f(x) with each requested definition at each point.

    Exit 0 when every report converged, 2 otherwise.
    """
    run.validate(require=("d", "alpha", "fn", "definitions"))
    params = _params(run)
    f = get_function(params, run.fn)
    settings = eval_settings(run, config)

    results, blocks = [], []
    non_converged = 0
    for x in run.point_list():
        for tag in run.definitions:
            report = evaluate_definition(params, f, x, tag, settings)
            result = {"function": f.name, "point": x}
            result.update(report.to_dict())
            if f.has_oracle(tag):
                try:
                    oracle = float(f.oracle(np.asarray(x, dtype=float)))
                    result["oracle"] = oracle
                    result["oracle_deviation"] = abs(report.value - oracle)
                except DomainError:
                    pass
            results.append(result)

            if report.converged:
                logger.info(f"✓ {tag} at {x}: {report.value:.10g} ± {report.error_estimate:.2e}")
            else:
                non_converged += 1
                logger.warning(f"✗ {tag} at {x}: not converged ({report.value:.10g}, "
                               f"error {report.error_estimate:.2e})")

            rows = report.table.rows() if report.table is not None else [
                {"h": "", "value": report.value, "extrapolated": report.value, "order": ""}]
            blocks.append({"label": f"function={f.name} method={tag} point={','.join(repr(c) for c in x)}",
                           "rows": rows})

    diagnostics = {"evaluations": len(results), "non_converged": non_converged, "settings": settings.to_dict()}
    report = build_report(params.to_dict(), _inputs(run), results, diagnostics)
    code = EXIT_NON_CONVERGENCE if non_converged else EXIT_SUCCESS
    return CommandResult("eval", code, report, csv_blocks=blocks, title=f"L f(x) for {f.name}")


def cmd_compare(run: RunConfig, args, config: ConfigLoader) -> CommandResult:
    """
    Agreement matrix for one function, or the standard bank when --fn is absent.

    Exit 2 on any non-converged entry, 3 on any failing pair.
    """
    run.validate(require=("d", "alpha"))
    params = _params(run)
    settings = eval_settings(run, config)
    functions = [get_function(params, run.fn)] if run.fn else bank_standard(params)

    results, pair_rows = [], []
    non_converged = failed_pairs = 0
    for f in functions:
        for x in run.point_list():
            matrix = agreement_matrix(params, f, x, run.definitions or None, settings)
            data = matrix.to_dict()
            data["pairs_failed"] = sum(1 for p in matrix.pairs if not p["passed"])
            results.append(data)

            non_converged += sum(1 for e in matrix.entries.values()
                                 if e.report is not None and not e.report.converged)
            failed_pairs += data["pairs_failed"]
            for pair in matrix.pairs:
                pair_rows.append({"function": f.name, "point": matrix.point, **pair})

    diagnostics = {"matrices": len(results), "non_converged_entries": non_converged,
                   "failed_pairs": failed_pairs}
    report = build_report(params.to_dict(), _inputs(run), results, diagnostics)
    if non_converged:
        code = EXIT_NON_CONVERGENCE
    elif failed_pairs:
        code = EXIT_CHECK_FAILED
    else:
        code = EXIT_SUCCESS
    return CommandResult("compare", code, report, csv_rows=pair_rows, title="Agreement matrix")


def parse_grid_overrides(items: Optional[List[str]]) -> Dict[str, float]:
    """
    Parse --grid key=value overrides.

    Raises:
        DomainError: On malformed items
    """
    grid = {}
    for item in items or []:
        if "=" not in item:
            raise DomainError(f"--grid expects key=value, got '{item}'")
        key, value = (part.strip() for part in item.split("=", 1))
        try:
            grid[key] = float(value)
        except ValueError as e:
            raise DomainError(f"--grid value for '{key}' is not a number: {value}") from e
    return grid


def cmd_audit(run: RunConfig, args, config: ConfigLoader) -> CommandResult:
    """Identity audit; exit 0 iff every non-informational row passes, else 3."""
    run.validate(require=("d", "alpha"))
    params = _params(run)
    grid = parse_grid_overrides(getattr(args, "grid", None))
    summary = IdentityAudit(params, grid).run()

    diagnostics = {"stats": summary["stats"], "duration_seconds": summary["duration_seconds"],
                   "passed": summary["passed"]}
    report = build_report(summary["params"], {"grid": summary["grid"]}, summary["rows"], diagnostics)
    code = EXIT_SUCCESS if summary["passed"] else EXIT_CHECK_FAILED
    csv_rows = [{k: row.get(k) for k in ("name", "residual", "tolerance", "passed", "informational")}
                for row in summary["rows"]]
    return CommandResult("audit", code, report, csv_rows=csv_rows, title="Identity audit")


def _write_exit_dump(path: str, rows: List[Dict[str, Any]], summary: Dict[str, Any]) -> List[str]:
    csv_path = Path(path)
    csv_path.parent.mkdir(parents=True, exist_ok=True)
    csv_path.write_text(render_csv(rows), encoding="utf-8")
    json_path = csv_path.with_suffix(".json")
    json_path.write_text(json.dumps(json_ready(summary), indent=2), encoding="utf-8")
    logger.info(f"Exit samples written to {csv_path}, summary to {json_path}")
    return [str(csv_path), str(json_path)]


def cmd_mc(run: RunConfig, args, config: ConfigLoader) -> CommandResult:
    """
    Monte Carlo validations: exit (exit laws), dynkin (Dynkin's formula),
    charop (characteristic operator), law (sampler laws and scaling).

    Exit 3 when a statistical check fails.
    """
    action = args.action
    if action not in MC_ACTIONS:
        raise DomainError(f"Unknown mc action '{action}'; choose from {', '.join(MC_ACTIONS)}")
    require = ("d", "alpha", "fn") if action in ("dynkin", "charop") else ("d", "alpha")
    run.validate(require=require)
    params = _params(run)
    cfg = mc_config(run, config)
    subcommand = f"mc {action}"
    files: List[str] = []
    csv_rows = None

    if action == "exit":
        start = getattr(args, "start", None)
        batch = simulate_exit(params, cfg, start=start)
        summary = exit_summary(params, batch)
        summary["diagnostics"] = batch.diagnostics
        results = [summary]
        csv_rows = batch.rows()
        if getattr(args, "dump", None):
            files = _write_exit_dump(args.dump, csv_rows, summary)
        checks = [summary["all_outside"]]
        if "ks_statistic" in summary:
            checks.append(summary["ks_statistic"] < summary["ks_threshold"])
        if "within_3sigma" in summary:
            checks.append(summary["within_3sigma"])
        passed = all(bool(c) for c in checks)
    elif action == "dynkin":
        f = get_function(params, run.fn)
        settings = eval_settings(run, config)
        results = [check_dynkin_formula(params, cfg, f, x, lam=run.lam or 0.0, settings=settings)
                   for x in run.point_list()]
        passed = all(row["passed"] for row in results)
    elif action == "charop":
        f = get_function(params, run.fn)
        settings = eval_settings(run, config)
        results, csv_rows = [], []
        for x in run.point_list():
            estimate = mc_characteristic_operator(params, f, x, config=cfg, settings=settings)
            results.append({"function": f.name, "point": x, **estimate.to_dict()})
            csv_rows.extend(estimate.table.rows())
        passed = all(r["passed"] is not False for r in results)
    else:
        results = check_increment_law(params, n=cfg.n_paths, seed=cfg.seed)
        results.append(check_stable_scaling(params, cfg))
        passed = all(row["passed"] for row in results)

    for row in results:
        label = row.get("name", subcommand)
        if row.get("passed", passed) is False:
            logger.warning(f"✗ {label}: check failed")
        else:
            logger.info(f"✓ {label}")

    report = build_report(params.to_dict(), _inputs(run, action=action), results, {"config": cfg.to_dict()})
    code = EXIT_SUCCESS if passed else EXIT_CHECK_FAILED
    return CommandResult(subcommand, code, report, csv_rows=csv_rows, title=f"Monte Carlo: {action}", files=files)


def cmd_probe_conjecture(run: RunConfig, args, config: ConfigLoader) -> CommandResult:
    """
    Sign pattern of the derivatives of sqrt(r) K_{alpha/2}(r^{1/alpha}).

    The outcome is data: exit 0 for "consistent" and for "violation found".
    """
    run.validate(require=("alpha",))
    result = probe_conjecture_cm(run.alpha, orders=args.orders, grid=args.grid, r_min=args.r_min,
                                 r_max=args.r_max)
    location = probe_location(result)
    if location is not None:
        result["first_violation_r"] = location["r"]
        result["first_violation_order"] = location["order"]
    report = build_report({"alpha": run.alpha}, _inputs(run), [result],
                          {"note": "numerical probe of complete monotonicity, not a proof"})
    return CommandResult("probe-conjecture", EXIT_SUCCESS, report, csv_rows=result["violations"],
                         title="Complete-monotonicity probe")


def cmd_bank_list(run: RunConfig, args, config: ConfigLoader) -> CommandResult:
    """Bank entries for (d, alpha); with --validate a failed self-check exits 3."""
    run.validate(require=("d", "alpha"))
    params = _params(run)
    validate = bool(getattr(args, "validate", False))
    rows = list_bank(params, validate=validate)
    failed = [row["name"] for row in rows if row.get("validated") is False]
    report = build_report(params.to_dict(), {"validate": validate}, rows, {"failed_validation": failed})
    code = EXIT_CHECK_FAILED if failed else EXIT_SUCCESS
    return CommandResult("bank list", code, report, title="Test-function bank", save=False)


def cmd_kernels_dump(run: RunConfig, args, config: ConfigLoader) -> CommandResult:
    """Tabulated p_1 profile with m and m' on the profile grid."""
    run.validate(require=("d", "alpha"))
    params = _params(run)
    nodes = int(config.get("profile.nodes", PROFILE_NODES))
    rho_max = float(getattr(args, "rho_max", None) or config.get("profile.rho_max", PROFILE_RHO_MAX))
    cache_dir = config.get("profile.cache_dir")
    profile = get_p1_profile(params, nodes, rho_max, cache_dir)
    m = MProfile(params, profile)

    rho = profile.grid[:: max(1, int(getattr(args, "every", 1) or 1))]
    values, m_values, m_prime = np.asarray(profile(rho)), np.asarray(m(rho)), np.asarray(m.derivative(rho))
    rows = [{"rho": float(r), "p1": float(p), "m": float(mv), "m_prime": float(mp)}
            for r, p, mv, mp in zip(rho, values, m_values, m_prime)]
    report = build_report(params.to_dict(), {"nodes": nodes, "rho_max": rho_max, "rows": len(rows)}, rows,
                          {"tail_exponent": profile.tail_exponent, "tail_coefficient": profile.tail_coefficient})
    return CommandResult("kernels dump", EXIT_SUCCESS, report, title="p_1 profile", save=False)


def cmd_reports(run: RunConfig, args, config: ConfigLoader) -> CommandResult:
    """List recent run reports, or show one with --show RUN_ID."""
    store = ReportStore(config.get("reports.report_dir", DEFAULT_REPORT_DIR))
    show = getattr(args, "show", None)
    if show:
        record = store.load(show)
        if record is None:
            raise DomainError(f"No report with run id '{show}'")
        return CommandResult("reports", EXIT_SUCCESS, record.get("report", {}), title=f"Report {show}", save=False)

    listed = store.list_reports(limit=getattr(args, "limit", None) or 20)
    report = build_report(None, {"report_dir": str(store.report_dir)}, listed)
    return CommandResult("reports", EXIT_SUCCESS, report, title="Recent runs", save=False)
