import numpy as np
import pytest

from sbicover.dataset import sample_joint
from sbicover.inference.io import load_estimator, save_estimator
from sbicover.inference.npe import train_npe
from sbicover.nn.train import TrainConfig
from sbicover.rng import RngStream
from sbicover.simulators import get_benchmark


def _fit(seed=21, n=512, epochs=25):
    bench = get_benchmark("gaussian")
    ds = sample_joint(bench, n, RngStream(seed))
    cfg = TrainConfig(epochs=epochs, hidden=(32, 32))
    est = train_npe(ds, bench, cfg, RngStream(seed, (1,)))
    return bench, ds, est


def test_density_integrates_to_one():
    # normal prior never truncates the mixture, so the density is normalized
    bench, ds, est = _fit()
    grid = np.linspace(-14.0, 14.0, 8193)[:, None]
    w = grid[1, 0] - grid[0, 0]
    for i in range(3):
        mass = np.sum(np.exp(est.log_density(grid, ds.xs[i]))) * w
        assert mass == pytest.approx(1.0, abs=1e-3)


def test_density_masked_outside_prior_support():
    bench = get_benchmark("slcp")
    ds = sample_joint(bench, 256, RngStream(22))
    est = train_npe(ds, bench, TrainConfig(epochs=5, hidden=(16,)),
                    RngStream(23))
    inside = np.zeros((1, 2))
    outside = np.array([[4.0, 0.0]])  # beyond the uniform box
    assert np.isfinite(est.log_density(inside, ds.xs[0])[0])
    assert est.log_density(outside, ds.xs[0])[0] == -np.inf


def test_sampling_deterministic_and_in_support():
    bench, ds, est = _fit()
    a = est.sample(128, ds.xs[0], RngStream(3))
    b = est.sample(128, ds.xs[0], RngStream(3))
    assert a.shape == (128, 1)
    assert np.array_equal(a, b)
    assert np.all(bench.prior.contains(a))


def test_posterior_tracks_conjugate_mean():
    bench, ds, est = _fit(seed=24, n=2048, epochs=60)
    gen = RngStream(25)
    for x_mean in (-1.0, 0.0, 1.5):
        x = np.full(4, x_mean)
        draws = est.sample(2000, x, gen.child_keyed(str(x_mean)))
        expected = 4.0 * x_mean / 5.0
        assert draws.mean() == pytest.approx(expected, abs=0.2)


def test_mixture_at_matches_log_density():
    from sbicover.nn.mdn import mdn_log_density
    bench, ds, est = _fit()
    params = est.mixture_at(ds.xs[0])
    thetas = np.linspace(-2.0, 2.0, 5)[:, None]
    std = est.t_norm.apply(thetas)
    raw = mdn_log_density(params, std) - np.sum(np.log(est.t_norm.std))
    assert np.allclose(est.log_density(thetas, ds.xs[0]), raw, atol=1e-12)


def test_save_load_roundtrip(tmp_path):
    bench, ds, est = _fit()
    path = tmp_path / "npe.sbic"
    save_estimator(path, est)
    loaded = load_estimator(path, bench)
    grid = np.linspace(-3.0, 3.0, 11)[:, None]
    assert np.array_equal(loaded.log_density(grid, ds.xs[0]),
                          est.log_density(grid, ds.xs[0]))
    assert loaded.method == "npe"
    assert loaded.meta["budget"] == len(ds)
