import io
import math

import numpy as np
import pytest
from scipy import integrate, stats

from mbens.kernel import build_kernel, correlation
from mbens.sampler import (
    N_BATCHES,
    ChainState,
    TuningError,
    linear_statistic,
    log_target,
    run_chain,
    write_samples_csv,
)
from mbens.specfun import DomainError
from mbens.weights import EnsembleSpec, GenGaussian, GenSymJacobi, Jacobi, JacobiPrime, Laguerre


def test_log_target_values():
    spec = EnsembleSpec(Laguerre(1.0), 2, 2.0)
    x = [0.5, 2.0]
    expected = math.log(1.5) + math.log(4.0 - 0.25) + (math.log(0.5) - 0.5) + (math.log(2.0) - 2.0)
    assert log_target(spec, x) == pytest.approx(expected, rel=1e-15)
    assert log_target(spec, [1.0, 1.0]) == -math.inf
    assert log_target(spec, [-1.0, 1.0]) == -math.inf


def test_log_target_full_line_uses_signed_power():
    spec = EnsembleSpec(GenGaussian(0.0), 2, 2.0)
    x = [-0.5, 1.0]
    expected = math.log(1.5) + math.log(1.0 + 0.25) - 0.25 - 1.0
    assert log_target(spec, x) == pytest.approx(expected, rel=1e-15)


def test_chain_is_deterministic_for_a_seed():
    spec = EnsembleSpec(Jacobi(0.5, 0.5), 3, 1.5)
    a = run_chain(spec, 2000, seed=42)
    b = run_chain(spec, 2000, seed=42)
    c = run_chain(spec, 2000, seed=43)
    assert np.array_equal(a.samples, b.samples)
    assert not np.array_equal(a.samples, c.samples)
    assert a.burn_in == 400 and a.samples.shape == (2000, 3)


def test_samples_stay_in_support():
    for spec in (
        EnsembleSpec(Jacobi(-0.5, 0.3), 3, 0.5),
        EnsembleSpec(JacobiPrime(0.0, 12.0), 3, 1.0),
        EnsembleSpec(GenSymJacobi(0.2, 0.0), 4, 2.0),
    ):
        res = run_chain(spec, 3000, seed=1)
        lo, hi = spec.weight.support
        assert np.all(res.samples > lo) and np.all(res.samples < hi)
        lo_acc, hi_acc = 0.15, 0.75
        assert lo_acc < res.acceptance_rate < hi_acc


def test_single_particle_histogram():
    # N = 1 draws from w / h_0 = x e^{-x}, i.e. Gamma(2)
    spec = EnsembleSpec(Laguerre(1.0), 1, 1.7)
    res = run_chain(spec, 60000, seed=3)
    xs = res.samples[::10, 0]
    edges = np.array([0, 0.5, 1.0, 1.5, 2.0, 3.0, 4.0, 6.0, np.inf])
    observed, _ = np.histogram(xs, edges)
    probs = np.diff(stats.gamma(2).cdf(edges))
    _, pval = stats.chisquare(observed, probs * len(xs))
    assert pval > 1e-3


def test_single_particle_mean():
    spec = EnsembleSpec(Jacobi(1.0, 2.0), 1, 1.0)
    res = run_chain(spec, 40000, seed=5)
    mean, err = linear_statistic(res.samples, "sum_x")
    assert abs(mean - 2 / 5) < 4 * err  # Beta(2, 3) mean


def test_full_line_parity_symmetry():
    spec = EnsembleSpec(GenGaussian(0.5), 3, 2.0)
    res = run_chain(spec, 30000, seed=8)
    mean, err = linear_statistic(res.samples, "sum_x")
    assert abs(mean) < 4 * err


def test_two_particle_count_matches_kernel():
    spec = EnsembleSpec(Laguerre(0.5), 2, 1.5)
    res = run_chain(spec, 40000, seed=11)
    mean, err = linear_statistic(res.samples, "count_below", threshold=1.0)
    K = build_kernel(spec)
    pred = integrate.quad(lambda x: correlation(K, [x]), 0.0, 1.0, epsrel=1e-10)[0]
    assert abs(mean - pred) < 4 * err


def test_linear_statistic_batch_means():
    const = np.ones((160, 2))
    mean, err = linear_statistic(const, "sum_x2")
    assert mean == 2.0 and err == 0.0
    with pytest.raises(DomainError):
        linear_statistic(np.ones((N_BATCHES - 1, 2)), "sum_x")
    with pytest.raises(DomainError):
        linear_statistic(const, "count_below")
    with pytest.raises(DomainError):
        linear_statistic(const, "max")
    vals = np.arange(320.0).reshape(-1, 1)
    mean, err = linear_statistic(vals, "sum_x")
    batches = vals[:, 0].reshape(N_BATCHES, -1).mean(axis=1)
    assert err == pytest.approx(np.std(batches, ddof=1) / 4.0)


def test_bad_inputs():
    spec = EnsembleSpec(Laguerre(0.0), 2, 1.0)
    with pytest.raises(DomainError):
        run_chain(spec, 0, seed=1)
    with pytest.raises(DomainError):
        run_chain(spec, 10, seed=1, initial=[1.0, 1.0])
    with pytest.raises(DomainError):
        run_chain(spec, 10, seed=1, initial=[1.0])


def test_zero_acceptance_raises():
    spec = EnsembleSpec(Laguerre(0.0), 1, 1.0)
    with pytest.raises(TuningError):
        run_chain(spec, 50, seed=1, burn_in=0, step_scale=1e4)


def test_chain_state_check():
    spec = EnsembleSpec(Laguerre(0.0), 2, 1.0)
    x = np.array([0.5, 1.5])
    state = ChainState(x, log_target(spec, x), np.random.default_rng(0), np.ones(2))
    assert state.check(spec)
    state.log_density += 1.0
    assert not state.check(spec)


def test_samples_csv():
    spec = EnsembleSpec(Laguerre(0.0), 2, 1.0)
    res = run_chain(spec, 100, seed=2)
    buf = io.StringIO()
    rows = write_samples_csv(res, buf, every=10)
    lines = buf.getvalue().splitlines()
    assert rows == 10 and lines[1] == "step,x_1,x_2"
    assert '"seed": 2' in lines[0]
