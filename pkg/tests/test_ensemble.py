import numpy as np
import pytest

from sbicover.dataset import sample_joint
from sbicover.inference.base import PriorEstimator
from sbicover.inference.ensemble import (EnsembleEstimator,
                                         ensemble_log_posterior,
                                         generic_coverage_logp, log_mean_exp)
from sbicover.inference.io import load_estimator, save_estimator
from sbicover.inference.nre import train_nre
from sbicover.nn.train import TrainConfig
from sbicover.rng import RngStream
from sbicover.simulators import get_benchmark
from sbicover.simulators.gaussian import gaussian_true_posterior


def _nre_members(n_members=2, seed=51):
    bench = get_benchmark("gaussian")
    ds = sample_joint(bench, 256, RngStream(seed))
    cfg = TrainConfig(epochs=5, hidden=(16,))
    members = [train_nre(ds, bench, cfg, RngStream(seed, (1, j)))
               for j in range(n_members)]
    return bench, ds, members


def test_log_mean_exp_hand_case():
    a = np.log(np.array([[1.0, 3.0], [2.0, 2.0]]))
    out = log_mean_exp(a, axis=1)
    assert out == pytest.approx(np.log([2.0, 2.0]), abs=1e-12)
    # stable under large offsets
    assert log_mean_exp(a + 700.0, axis=1) == pytest.approx(
        np.log([2.0, 2.0]) + 700.0, abs=1e-9)


def test_density_is_mean_of_member_densities():
    bench, ds, members = _nre_members(3)
    ens = EnsembleEstimator(members)
    thetas = np.linspace(-2.0, 2.0, 11)[:, None]
    x = ds.xs[0]
    stack = np.stack([m.log_density(thetas, x) for m in members], axis=1)
    assert np.allclose(ens.log_density(thetas, x),
                       log_mean_exp(stack, axis=1), atol=1e-12)


def test_ratio_and_density_averaging_agree():
    # averaging ratios then multiplying by the prior equals averaging
    # the posterior densities, because the prior factor is shared
    bench, ds, members = _nre_members(2)
    ens = EnsembleEstimator(members)
    thetas = np.linspace(-2.0, 2.0, 11)[:, None]
    x = ds.xs[0]
    via_ratio = bench.prior.log_density(thetas) + ens.log_ratio(thetas, x)
    assert np.allclose(via_ratio, ens.log_density(thetas, x), atol=1e-12)
    assert np.allclose(ensemble_log_posterior(ens, thetas, x),
                       ens.log_density(thetas, x), atol=1e-12)


def test_exact_mixture_sampling_moments():
    # two analytic posteriors with std scales 0.5 and 2.0 share the mean;
    # the mixture variance is the average of the member variances
    narrow = gaussian_true_posterior(std_scale=0.5)
    wide = gaussian_true_posterior(std_scale=2.0)
    ens = EnsembleEstimator([narrow, wide])
    assert ens.normalized
    x = np.full(4, 1.0)  # posterior mean 0.8, base var 1/5
    draws = ens.sample(40000, x, RngStream(52))
    assert draws.mean() == pytest.approx(0.8, abs=0.02)
    expected_var = (0.25 + 4.0) / 2.0 / 5.0
    assert draws.var() == pytest.approx(expected_var, rel=0.05)


def test_membership_validation():
    bench, ds, members = _nre_members(2)
    with pytest.raises(ValueError, match="at least one"):
        EnsembleEstimator([])
    with pytest.raises(ValueError, match="mixed"):
        EnsembleEstimator([members[0], gaussian_true_posterior()])
    with pytest.raises(ValueError, match="flag"):
        EnsembleEstimator(members, flag="whatever")
    slcp_member = PriorEstimator(get_benchmark("slcp").prior,
                                 benchmark_id="slcp")
    gauss_member = PriorEstimator(bench.prior, benchmark_id="gaussian")
    with pytest.raises(ValueError, match="benchmark"):
        EnsembleEstimator([slcp_member, gauss_member])
    a, b = members
    a.x_o = np.zeros(4)
    b.x_o = np.ones(4)
    with pytest.raises(ValueError, match="x_o"):
        EnsembleEstimator([a, b])


def test_save_load_roundtrip(tmp_path):
    bench, ds, members = _nre_members(2)
    ens = EnsembleEstimator(members, flag="bagged")
    path = tmp_path / "ens.sbic"
    save_estimator(path, ens)
    loaded = load_estimator(path, bench)
    assert loaded.size == 2
    assert loaded.flag == "bagged"
    thetas = np.linspace(-2.0, 2.0, 9)[:, None]
    assert np.array_equal(loaded.log_density(thetas, ds.xs[0]),
                          ens.log_density(thetas, ds.xs[0]))


def test_generic_coverage_logp_determinism():
    bench, ds, members = _nre_members(2)
    ens = EnsembleEstimator(members)
    thetas, xs = ds.thetas[:6], ds.xs[:6]
    obs_a, samp_a = generic_coverage_logp(ens, thetas, xs, 16, RngStream(53))
    obs_b, samp_b = generic_coverage_logp(ens, thetas, xs, 16, RngStream(53))
    assert obs_a.shape == (6,) and samp_a.shape == (6, 16)
    assert np.array_equal(obs_a, obs_b)
    assert np.array_equal(samp_a, samp_b)
