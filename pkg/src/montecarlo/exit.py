"""
First exit from a ball: exact sampling of the exit position from the
Poisson kernel, or path stepping with stable increments.
"""

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Iterator, List, Optional

import numpy as np
from scipy import special, stats

from ..ballgeom.ball import BallSpec, green_mass
from ..kernels.params import Params
from ..utils.config_loader import ConfigLoader
from ..utils.errors import BudgetError, DomainError
from ..utils.logger import get_logger
from ..utils.parallel import ordered_map
from .sampler import BLOCK_SIZE, block_rng, sample_stable_increment, uniform_directions

logger = get_logger(__name__)

MODES = ("exact", "path")
MAX_STEPS = 10 ** 8


@dataclass(frozen=True)
class MCConfig:
    """Monte Carlo run settings."""

    n_paths: int = 100000
    seed: int = 12345
    ball: BallSpec = field(default_factory=lambda: BallSpec(1.0))
    mode: str = "exact"
    dt: float = 1e-4
    threads: int = 1
    max_steps: int = MAX_STEPS

    def __post_init__(self):
        if self.n_paths < 1:
            raise DomainError(f"n_paths must be at least 1, got {self.n_paths}")
        if self.mode not in MODES:
            raise DomainError(f"Unknown Monte Carlo mode '{self.mode}' (use {' or '.join(MODES)})")
        if self.mode == "path" and not self.dt > 0:
            raise DomainError(f"Path mode needs dt > 0, got {self.dt}")

    @classmethod
    def from_config(cls, config: ConfigLoader, **overrides: Any) -> "MCConfig":
        """MC settings from the montecarlo section, with non-None overrides."""
        values = {
            "n_paths": int(config.get_float("montecarlo.n_paths", cls.n_paths)),
            "seed": int(config.get("montecarlo.seed", cls.seed)),
            "mode": config.get("montecarlo.mode", cls.mode),
            "dt": config.get_float("montecarlo.dt", cls.dt),
            "max_steps": int(config.get_float("montecarlo.max_steps", cls.max_steps)),
            "threads": int(config.get("parallel.threads", cls.threads) or 1),
        }
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)

    def to_dict(self) -> Dict[str, Any]:
        return {"n_paths": self.n_paths, "seed": self.seed, "r": self.ball.r, "y": self.ball.y.tolist(),
                "mode": self.mode, "dt": self.dt, "threads": self.threads}


@dataclass
class ExitSample:
    """One exit: position outside the ball, time (nan in exact mode) and steps."""

    position: np.ndarray
    time: float
    steps: int


@dataclass
class ExitBatch:
    """Exit records of a run as arrays, in path order."""

    positions: np.ndarray
    times: np.ndarray
    steps: np.ndarray
    config: MCConfig
    start: Optional[np.ndarray] = None
    diagnostics: Dict[str, Any] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.times)

    def __iter__(self) -> Iterator[ExitSample]:
        for p, t, s in zip(self.positions, self.times, self.steps):
            yield ExitSample(p, float(t), int(s))

    def radii(self, centre: Optional[np.ndarray] = None) -> np.ndarray:
        c = np.zeros(self.positions.shape[1]) if centre is None else centre
        return np.linalg.norm(self.positions - c, axis=1)

    def rows(self) -> List[Dict[str, float]]:
        """
        CSV rows: exit_r, exit_angle_1[, exit_angle_2], exit_time, steps.

        d=1 records the direction as angle 0 or pi, d=2 the polar angle,
        d=3 the colatitude then the azimuth.
        """
        rows = []
        d = self.positions.shape[1]
        for sample in self:
            p = sample.position
            row = {"exit_r": float(np.linalg.norm(p))}
            if d == 1:
                row["exit_angle_1"] = 0.0 if p[0] > 0 else math.pi
            elif d == 2:
                row["exit_angle_1"] = float(math.atan2(p[1], p[0]))
            else:
                row["exit_angle_1"] = float(math.acos(max(-1.0, min(1.0, p[2] / row["exit_r"]))))
                row["exit_angle_2"] = float(math.atan2(p[1], p[0]))
            row["exit_time"] = sample.time
            row["steps"] = sample.steps
            rows.append(row)
        return rows


def exit_radius_cdf(params: Params, r: float, rho) -> np.ndarray:
    """P(|X_tau| <= rho) from the centre of B_r: 1 - I_{r^2/rho^2}(alpha/2, 1 - alpha/2)."""
    alpha = params.alpha
    rho = np.asarray(rho, dtype=float)
    u = np.clip(r * r / np.maximum(rho, r) ** 2, 0.0, 1.0)
    return 1.0 - special.betainc(alpha / 2.0, 1.0 - alpha / 2.0, u)


def _centred_exits(params: Params, r: float, size: int, rng: np.random.Generator) -> np.ndarray:
    """Exit positions from the centre: radius r / sqrt(U), U ~ Beta(alpha/2, 1 - alpha/2)."""
    u = rng.beta(params.alpha / 2.0, 1.0 - params.alpha / 2.0, size)
    radius = r / np.sqrt(np.maximum(u, 1e-300))
    return radius[:, None] * uniform_directions(params.d, size, rng)


def _exact_block(params: Params, config: MCConfig, start: np.ndarray, block: int, size: int) -> Dict[str, Any]:
    """
    Exit positions from y, sampled from the centred law and accepted with
    probability ((r - |y|) |z| / (r |z - y|))^d.
    """
    rng = block_rng(config.seed, block)
    r = config.ball.r
    offset = float(np.linalg.norm(start))
    if offset == 0.0:
        return {"positions": _centred_exits(params, r, size, rng), "proposals": size}
    accepted: List[np.ndarray] = []
    count, proposals = 0, 0
    while count < size:
        batch = max(2 * (size - count), 64)
        z = _centred_exits(params, r, batch, rng)
        proposals += batch
        ratio = ((r - offset) * np.linalg.norm(z, axis=1) / (r * np.linalg.norm(z - start, axis=1))) ** params.d
        keep = z[rng.uniform(0.0, 1.0, batch) < ratio]
        accepted.append(keep)
        count += len(keep)
    return {"positions": np.concatenate(accepted)[:size], "proposals": proposals}


def _path_block(params: Params, config: MCConfig, start: np.ndarray, block: int, size: int,
                observer: Optional[Callable[[np.ndarray, float, np.ndarray], None]] = None) -> Dict[str, Any]:
    """Step all paths of a block until each leaves the ball."""
    rng = block_rng(config.seed, block)
    r2 = config.ball.r ** 2
    positions = np.tile(start, (size, 1))
    steps = np.zeros(size, dtype=np.int64)
    active = np.ones(size, dtype=bool)
    step = 0
    while active.any():
        if step >= config.max_steps:
            raise BudgetError(f"{int(active.sum())} paths still inside after {config.max_steps} steps "
                              f"(dt={config.dt:g})")
        if observer is not None:
            observer(positions, step * config.dt, active)
        idx = np.flatnonzero(active)
        positions[idx] += sample_stable_increment(params, config.dt, rng, len(idx))
        step += 1
        steps[idx] = step
        outside = np.sum(positions[idx] ** 2, axis=1) >= r2
        active[idx[outside]] = False
    return {"positions": positions, "steps": steps}


def simulate_exit(params: Params, config: MCConfig, start=None,
                  observer_factory: Optional[Callable[[int, int], Callable]] = None) -> ExitBatch:
    """
    Exit positions (and times in path mode) from B_r started at y.

    Blocks of 4096 paths draw from independent Philox streams keyed by
    (seed, block), so results do not depend on the thread count.

    Args:
        params: Problem parameters
        config: Run settings; config.ball fixes r
        start: Starting point, |y| < r (defaults to config.ball.y)
        observer_factory: Path mode only; builds a per-block callback
            observer(positions, time, active) invoked before every step

    Returns:
        ExitBatch

    Raises:
        DomainError: If the start is not inside the ball
        BudgetError: If a path exceeds config.max_steps steps
    """
    ball = config.ball if start is None else BallSpec(config.ball.r, start)
    y = ball.with_dimension(params.d).y
    blocks = [(b, min(BLOCK_SIZE, config.n_paths - s)) for b, s in enumerate(range(0, config.n_paths, BLOCK_SIZE))]
    logger.debug(f"simulate_exit: {config.n_paths} paths in {len(blocks)} blocks ({config.mode} mode)")

    if config.mode == "exact":
        results = ordered_map(lambda bs: _exact_block(params, config, y, *bs), blocks, config.threads)
        positions = np.concatenate([res["positions"] for res in results])
        times = np.full(len(positions), math.nan)
        steps = np.zeros(len(positions), dtype=np.int64)
        proposals = sum(res["proposals"] for res in results)
        diagnostics = {"acceptance_rate": len(positions) / proposals}
    else:
        def run(bs):
            observer = observer_factory(*bs) if observer_factory else None
            return _path_block(params, config, y, *bs, observer=observer)

        results = ordered_map(run, blocks, config.threads)
        positions = np.concatenate([res["positions"] for res in results])
        steps = np.concatenate([res["steps"] for res in results])
        times = steps * config.dt
        diagnostics = {"max_steps_taken": int(steps.max())}

    return ExitBatch(positions=positions, times=times, steps=steps, config=config, start=y,
                     diagnostics=diagnostics)


def monitoring_bias_bound(params: Params, dt: float) -> float:
    """Allowance for exits missed between monitoring times, dt^{min(1, 1/alpha)}."""
    return dt ** min(1.0, 1.0 / params.alpha)


def exit_summary(params: Params, batch: ExitBatch) -> Dict[str, Any]:
    """
    Summary statistics: mean exit time against the Green mass, and the
    radial KS distance against the exit law from the centre.
    """
    config = batch.config
    n = len(batch)
    summary: Dict[str, Any] = {"n_paths": n, "mode": config.mode}
    r = config.ball.r
    start = np.zeros(params.d) if batch.start is None else batch.start
    if config.mode == "path":
        mean = float(np.mean(batch.times))
        stderr = float(np.std(batch.times, ddof=1) / math.sqrt(n)) if n > 1 else math.inf
        expected = green_mass(params, BallSpec(r, start))
        bias = monitoring_bias_bound(params, config.dt)
        summary.update({"mean_exit_time": mean, "stderr": stderr, "green_mass": expected,
                        "dt_bias_bound": bias, "within_3sigma": abs(mean - expected) <= 3 * stderr + bias})
    if not np.any(start):
        ks = stats.kstest(batch.radii(), lambda rho: exit_radius_cdf(params, r, rho))
        summary.update({"ks_statistic": float(ks.statistic), "ks_threshold": 1.63 / math.sqrt(n)})
    summary["all_outside"] = bool(np.all(batch.radii() >= r))
    return summary
