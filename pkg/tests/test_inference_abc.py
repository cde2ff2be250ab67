import numpy as np
import pytest

from sbicover.inference.abc import (AbcPosterior, kde_log_density,
                                    rejection_abc, silverman_bandwidth,
                                    smc_abc)
from sbicover.priors import UniformBox
from sbicover.rng import RngStream
from sbicover.simulators.base import Benchmark


def _bit_toy():
    # one latent bit observed through a 10% flip channel
    prior = UniformBox([-0.5], [1.5])

    def simulate(thetas, rng):
        bits = (thetas[:, 0] > 0.5).astype(np.float64)
        flips = rng.gen.random(bits.shape) < 0.1
        return np.where(flips, 1.0 - bits, bits)[:, None]

    return Benchmark(id="bit-toy", prior=prior, observable_shape=(1,),
                     simulate_batch=simulate)


def _bit_fraction(post):
    return float(np.sum(post.weights[post.thetas[:, 0] <= 0.5]))


def test_rejection_abc_recovers_exact_bit_posterior():
    bench = _bit_toy()
    post = rejection_abc(np.zeros(1), bench.prior, bench.simulate_batch,
                         budget=4096, quantile=0.4, rng=RngStream(31),
                         benchmark_id=bench.id)
    # P(bit=0 | x=0) = 0.9; accepted set is all exact matches w.h.p.
    n_acc = post.meta["n_accepted"]
    assert n_acc == int(4096 * 0.4) + 1 == 1639
    se = 3.0 * np.sqrt(0.9 * 0.1 / n_acc)
    assert _bit_fraction(post) == pytest.approx(0.9, abs=se)
    assert post.meta["epsilon"] == 0.0
    assert np.allclose(post.weights, 1.0 / n_acc)


def test_rejection_abc_validation():
    bench = _bit_toy()
    with pytest.raises(ValueError, match="budget"):
        rejection_abc(np.zeros(1), bench.prior, bench.simulate_batch, 50, 0.5,
                      RngStream(1))
    with pytest.raises(ValueError, match="quantile"):
        rejection_abc(np.zeros(1), bench.prior, bench.simulate_batch, 200, 1.5,
                      RngStream(1))
    with pytest.raises(ValueError, match="too few"):
        rejection_abc(np.zeros(1), bench.prior, bench.simulate_batch, 100, 0.01,
                      RngStream(1))


def test_silverman_bandwidth_positive_per_dim():
    gen = np.random.default_rng(0)
    thetas = gen.normal(size=(200, 3)) * np.array([1.0, 5.0, 0.001])
    w = np.full(200, 1.0 / 200)
    h = silverman_bandwidth(thetas, w)
    assert h.shape == (3,)
    assert np.all(h > 0)
    assert h[1] > h[0] > h[2]


def test_kde_log_density_two_point_hand_case():
    prior = UniformBox([-10.0], [10.0])
    post = AbcPosterior(np.array([[0.0], [2.0]]), np.array([0.75, 0.25]),
                        prior, np.zeros(1), bandwidth=np.array([1.0]))
    # mixture of N(0,1) and N(2,1) with weights 3/4, 1/4 at theta=0
    expected = np.log(0.75 * np.exp(0.0) + 0.25 * np.exp(-2.0)) \
        - 0.5 * np.log(2 * np.pi)
    assert kde_log_density(post, np.array([0.0])) == pytest.approx(
        expected, abs=1e-12)


def test_posterior_masks_outside_prior_support():
    prior = UniformBox([0.0], [1.0])
    post = AbcPosterior(np.array([[0.5]]), np.array([1.0]), prior,
                        np.zeros(1), bandwidth=np.array([0.2]))
    inside = post.log_density(np.array([[0.5], [2.0]]), np.zeros(1))
    assert np.isfinite(inside[0])
    assert inside[1] == -np.inf
    assert inside[0] == pytest.approx(
        kde_log_density(post, np.array([[0.5]]))[0], abs=1e-12)


def test_sampling_deterministic_and_in_box():
    bench = _bit_toy()
    post = rejection_abc(np.zeros(1), bench.prior, bench.simulate_batch,
                         budget=1024, quantile=0.3, rng=RngStream(33))
    a = post.sample(256, np.zeros(1), RngStream(7))
    b = post.sample(256, np.zeros(1), RngStream(7))
    assert np.array_equal(a, b)
    lows, highs = post.prior.grid_box()
    assert np.all(a >= lows) and np.all(a <= highs)


def test_posterior_validation():
    prior = UniformBox([0.0], [1.0])
    with pytest.raises(ValueError, match="nonempty"):
        AbcPosterior(np.zeros((0, 1)), np.zeros(0), prior, np.zeros(1))
    with pytest.raises(ValueError, match="nonnegative"):
        AbcPosterior(np.zeros((2, 1)), np.array([1.0, -1.0]), prior,
                     np.zeros(1))
    with pytest.raises(ValueError, match="sum to zero"):
        AbcPosterior(np.zeros((2, 1)), np.zeros(2), prior, np.zeros(1))


def test_smc_abc_schedule_and_budget():
    bench = _bit_toy()
    calls = []

    def counting_sim(thetas, rng):
        calls.append(len(thetas))
        return bench.simulate_batch(thetas, rng)

    post = smc_abc(np.zeros(1), bench.prior, counting_sim, budget=2000,
                   population=200, decay=0.5, rng=RngStream(34),
                   benchmark_id=bench.id)
    assert sum(calls) == 2000
    eps = post.meta["epsilons"]
    assert all(b <= a for a, b in zip(eps, eps[1:]))
    assert post.meta["generations"] == len(eps)
    frac = _bit_fraction(post)
    assert frac > 0.8  # sharper than the prior's 0.5


def test_smc_abc_validation():
    bench = _bit_toy()
    with pytest.raises(ValueError, match="population"):
        smc_abc(np.zeros(1), bench.prior, bench.simulate_batch, 1000, 10, 0.5,
                RngStream(1))
    with pytest.raises(ValueError, match="decay"):
        smc_abc(np.zeros(1), bench.prior, bench.simulate_batch, 1000, 100, 1.5,
                RngStream(1))
    with pytest.raises(ValueError, match="budget"):
        smc_abc(np.zeros(1), bench.prior, bench.simulate_batch, 50, 100, 0.5,
                RngStream(1))
