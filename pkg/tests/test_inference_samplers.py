import numpy as np
import pytest

from sbicover.inference.samplers import (McmcError, default_resolution,
                                         grid_cells, grid_log_normalizer,
                                         grid_masses, grid_posterior_sample,
                                         metropolis_hastings, run_chains)
from sbicover.rng import RngStream
from sbicover.simulators.gaussian import gaussian_true_posterior


def _std_normal_logp(theta):
    return -0.5 * np.sum(theta * theta, axis=1)


def test_mh_standard_normal_moments():
    res = metropolis_hastings(_std_normal_logp, np.zeros(1), steps=4000,
                              scale=0.8, rng=RngStream(0), burn=500)
    assert res.samples.shape == (4000, 1)
    assert res.samples.mean() == pytest.approx(0.0, abs=0.1)
    assert res.samples.std() == pytest.approx(1.0, abs=0.1)
    assert 0.15 < res.acceptance < 0.75
    assert np.allclose(res.log_densities,
                       _std_normal_logp(res.samples), atol=1e-12)


def test_mh_determinism():
    a = metropolis_hastings(_std_normal_logp, np.zeros(2), 100, 0.5, RngStream(1))
    b = metropolis_hastings(_std_normal_logp, np.zeros(2), 100, 0.5, RngStream(1))
    assert np.array_equal(a.samples, b.samples)


def test_mh_rejects_bad_init():
    def logp(theta):
        return np.where(np.abs(theta[:, 0]) < 1.0, 0.0, -np.inf)
    with pytest.raises(McmcError):
        metropolis_hastings(logp, np.array([5.0]), 100, 0.5, RngStream(2))


def test_mh_stall_detection():
    # density is a single point: every proposal is rejected
    def logp(theta):
        return np.where(np.abs(theta[:, 0]) < 1e-12, 0.0, -np.inf)
    with pytest.raises(McmcError, match="consecutive"):
        metropolis_hastings(logp, np.zeros(1), 3000, 0.5, RngStream(3))


def test_run_chains_lockstep_shapes():
    inits = np.zeros((5, 2))
    thetas, logps, acc, scales = run_chains(_std_normal_logp, inits, keep=50,
                                            gen=RngStream(4).gen, burn=100)
    assert thetas.shape == (50, 5, 2)
    assert logps.shape == (50, 5)
    assert acc.shape == (5,) and scales.shape == (5,)
    assert np.all(acc > 0.0)


def test_grid_cells_layout():
    centers, widths = grid_cells((np.array([0.0, -1.0]), np.array([1.0, 1.0])), 4)
    assert centers.shape == (16, 2)
    assert widths == pytest.approx([0.25, 0.5])
    assert centers[0] == pytest.approx([0.125, -0.75])
    # centers tile the box: means sit at the box center
    assert centers.mean(axis=0) == pytest.approx([0.5, 0.0])
    with pytest.raises(ValueError):
        grid_cells((np.zeros(3), np.ones(3)), 4)


def test_grid_masses_normalized():
    logp = np.array([0.0, np.log(3.0), -np.inf])
    masses = grid_masses(logp)
    assert masses == pytest.approx([0.25, 0.75, 0.0])
    with pytest.raises(ValueError):
        grid_masses(np.full(4, -np.inf))


def test_grid_posterior_sample_matches_target():
    oracle = gaussian_true_posterior()
    x = np.array([2.0, 2.0, 2.0, 2.0])  # posterior N(1.6, 1/5)
    samples = grid_posterior_sample(lambda t: oracle.log_density(t, x),
                                    (np.array([-8.0]), np.array([8.0])),
                                    1024, 20000, RngStream(5))
    assert samples.shape == (20000, 1)
    assert samples.mean() == pytest.approx(1.6, abs=0.02)
    assert samples.std() == pytest.approx(1.0 / np.sqrt(5.0), abs=0.02)


def test_grid_log_normalizer_on_normalized_density():
    oracle = gaussian_true_posterior()
    x = np.zeros(4)
    logz = grid_log_normalizer(lambda t: oracle.log_density(t, x),
                               (np.array([-8.0]), np.array([8.0])), 2048)
    assert logz == pytest.approx(0.0, abs=1e-6)
    # doubling the density doubles the integral
    logz2 = grid_log_normalizer(lambda t: oracle.log_density(t, x) + np.log(2),
                                (np.array([-8.0]), np.array([8.0])), 2048)
    assert logz2 == pytest.approx(np.log(2.0), abs=1e-6)


def test_default_resolution():
    assert default_resolution(1) == 1024
    assert default_resolution(2) == 64
