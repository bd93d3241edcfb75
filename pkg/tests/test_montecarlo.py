"""
Unit tests for the stable sampler, ball-exit simulation and Dynkin checks
"""

import math

import numpy as np
import pytest

from src.ballgeom.ball import BallSpec
from src.kernels.params import Params
from src.montecarlo.exit import MCConfig, exit_radius_cdf, exit_summary, simulate_exit
from src.montecarlo.sampler import block_rng, kanter_subordinator, sample_stable, sample_stable_increment
from src.montecarlo.validation import (
    check_dynkin_formula,
    check_increment_law,
    check_stable_scaling,
    mc_characteristic_operator,
)
from src.testbank.functions import make_constant, make_gaussian
from src.utils.errors import BudgetError, DomainError


def test_streams_are_reproducible():
    """Test identical seeds give bit-identical samples and distinct blocks differ."""
    params = Params(2, 1.5)
    a = sample_stable(params, 1.0, 5000, seed=7)
    b = sample_stable(params, 1.0, 5000, seed=7)
    assert a.shape == (5000, 2)
    assert np.array_equal(a, b)
    assert not np.array_equal(kanter_subordinator(1.5, 10, block_rng(7, 0)),
                              kanter_subordinator(1.5, 10, block_rng(7, 1)))


def test_increment_needs_positive_time():
    """Test t <= 0 is rejected."""
    with pytest.raises(DomainError):
        sample_stable_increment(Params(1, 1.0), 0.0, block_rng(0, 0))


def test_subordinator_is_positive():
    """Test S_1 samples are positive and finite."""
    s = kanter_subordinator(0.8, 10000, block_rng(1, 0))
    assert np.all(s > 0)
    assert np.all(np.isfinite(s))


def test_cauchy_increment_law():
    """Test alpha=1 increments against the Cauchy CDF, E exp(-S) and symmetry."""
    rows = check_increment_law(Params(1, 1.0), n=20000, seed=3)
    assert [row["name"] for row in rows] == ["increment_symmetry", "increment_ks_cauchy", "subordinator_laplace"]
    assert all(row["passed"] for row in rows)


def test_stable_scaling_in_law():
    """Test 2 X_1 and X_{2^alpha} agree in law."""
    row = check_stable_scaling(Params(2, 1.2), MCConfig(n_paths=20000, seed=11), c=2.0)
    assert row["passed"]
    assert row["statistic"] < row["threshold"]


def test_exit_radius_cdf():
    """Test the exit radius CDF vanishes at r, increases and tends to 1."""
    params = Params(3, 0.7)
    rho = np.array([1.0, 1.5, 3.0, 100.0, 1e8])
    cdf = exit_radius_cdf(params, 1.0, rho)
    assert cdf[0] == 0.0
    assert np.all(np.diff(cdf) > 0)
    assert cdf[-1] == pytest.approx(1.0, abs=1e-4)


def test_exact_exits_are_outside_and_match_law():
    """Test exact exits from the centre leave the ball and pass the radial KS test."""
    params = Params(2, 1.0)
    config = MCConfig(n_paths=20000, seed=5, ball=BallSpec(1.0))
    batch = simulate_exit(params, config)
    summary = exit_summary(params, batch)

    assert len(batch) == 20000
    assert summary["all_outside"]
    assert summary["ks_statistic"] < summary["ks_threshold"]
    assert math.isnan(batch.times[0])


def test_offset_start_uses_rejection():
    """Test exits from y != 0 are outside and favour the near side."""
    params = Params(1, 1.0)
    config = MCConfig(n_paths=10000, seed=2, ball=BallSpec(1.0))
    batch = simulate_exit(params, config, start=[0.6])

    assert np.all(np.abs(batch.positions[:, 0]) >= 1.0)
    assert np.mean(batch.positions[:, 0] > 0) > 0.6
    assert 0 < batch.diagnostics["acceptance_rate"] <= 1.0


def test_start_outside_ball():
    """Test a start on or outside the sphere is rejected."""
    with pytest.raises(DomainError):
        simulate_exit(Params(1, 1.0), MCConfig(n_paths=10), start=[1.0])


def test_thread_count_does_not_change_results():
    """Test exit samples are identical for 1 and 4 threads."""
    params = Params(3, 1.5)
    one = simulate_exit(params, MCConfig(n_paths=10000, seed=9, threads=1), start=[0.2, 0.0, 0.1])
    four = simulate_exit(params, MCConfig(n_paths=10000, seed=9, threads=4), start=[0.2, 0.0, 0.1])
    assert np.array_equal(one.positions, four.positions)


def test_path_mode_mean_exit_time():
    """Test E tau from B_1 at 0 is 1 for d=1, alpha=1."""
    params = Params(1, 1.0)
    config = MCConfig(n_paths=2000, seed=4, mode="path", dt=1e-3)
    batch = simulate_exit(params, config)
    summary = exit_summary(params, batch)

    assert summary["green_mass"] == pytest.approx(1.0, rel=1e-12)
    assert summary["within_3sigma"]
    assert summary["all_outside"]
    assert np.all(batch.steps >= 1)
    assert np.allclose(batch.times, batch.steps * 1e-3)


def test_path_mode_step_budget():
    """Test paths exceeding the step budget raise BudgetError."""
    config = MCConfig(n_paths=100, seed=0, mode="path", dt=1e-8, max_steps=2)
    with pytest.raises(BudgetError):
        simulate_exit(Params(1, 1.0), config)


def test_config_validation():
    """Test invalid Monte Carlo settings are rejected."""
    with pytest.raises(DomainError):
        MCConfig(n_paths=0)
    with pytest.raises(DomainError):
        MCConfig(mode="walk")
    with pytest.raises(DomainError):
        MCConfig(mode="path", dt=0.0)


def test_csv_rows():
    """Test dump rows carry the radius, angles, time and steps."""
    batch = simulate_exit(Params(3, 1.0), MCConfig(n_paths=5, seed=1))
    rows = batch.rows()
    assert list(rows[0]) == ["exit_r", "exit_angle_1", "exit_angle_2", "exit_time", "steps"]
    assert all(row["exit_r"] > 1.0 for row in rows)


def test_dynkin_formula_gaussian():
    """Test Dynkin's formula for the Gaussian, d=1, alpha=1, x=0, r=0.5."""
    params = Params(1, 1.0)
    config = MCConfig(n_paths=20000, seed=7, ball=BallSpec(0.5))
    row = check_dynkin_formula(params, config, make_gaussian(params), [0.0])

    assert row["passed"]
    assert row["generator_source"] == "oracle"
    assert row["deterministic"] < 0


def test_dynkin_formula_constant_is_exact():
    """Test the constant gives a zero residual with zero spread."""
    params = Params(2, 1.5)
    config = MCConfig(n_paths=1000, seed=1, ball=BallSpec(0.4))
    row = check_dynkin_formula(params, config, make_constant(params), [0.2, 0.0])

    assert row["residual"] == 0.0
    assert row["stderr"] == 0.0
    assert row["passed"]


def test_dynkin_formula_offset_point_2d():
    """Test d=2, alpha=1.5, Gaussian at x=(0.2, 0), r=0.4."""
    params = Params(2, 1.5)
    config = MCConfig(n_paths=20000, seed=21, ball=BallSpec(0.4))
    row = check_dynkin_formula(params, config, make_gaussian(params), [0.2, 0.0])
    assert row["passed"]


def test_discounted_dynkin_formula():
    """Test the lambda > 0 form on common stepped paths."""
    params = Params(1, 1.0)
    config = MCConfig(n_paths=2000, seed=13, mode="path", dt=1e-3, ball=BallSpec(0.5))
    row = check_dynkin_formula(params, config, make_gaussian(params), [0.0], lam=1.0)

    assert row["mode"] == "path"
    assert row["passed"]


def test_negative_discount_rejected():
    """Test lambda < 0 is rejected."""
    params = Params(1, 1.0)
    with pytest.raises(DomainError):
        check_dynkin_formula(params, MCConfig(n_paths=10), make_gaussian(params), [0.0], lam=-1.0)


def test_characteristic_operator_gaussian():
    """Test the extrapolated characteristic operator against -2/sqrt(pi)."""
    params = Params(1, 1.0)
    result = mc_characteristic_operator(params, make_gaussian(params), [0.0],
                                        config=MCConfig(n_paths=50000, seed=17), compare=False)
    assert abs(result.value + 2.0 / math.sqrt(math.pi)) <= max(3.0 * result.stderr, 1e-2)
    assert len(result.table.values) == 5
    assert result.to_dict()["table"]["model"] == "expansion"


def test_characteristic_operator_constant():
    """Test the constant gives exactly 0."""
    params = Params(2, 0.5)
    result = mc_characteristic_operator(params, make_constant(params), [0.0, 0.0],
                                        config=MCConfig(n_paths=1000, seed=1), compare=False)
    assert result.value == 0.0
    assert result.stderr == 0.0
    assert not result.statistical_floor


def test_characteristic_operator_needs_ladder():
    """Test short or non-decreasing ladders are rejected."""
    params = Params(1, 1.0)
    with pytest.raises(DomainError):
        mc_characteristic_operator(params, make_gaussian(params), [0.0], radii=[0.5, 0.25, 0.125],
                                   compare=False)


if __name__ == '__main__':
    pytest.main([__file__, '-v'])
