import numpy as np
import pytest

from sbicover.dataset import sample_joint
from sbicover.inference.nre import train_nre
from sbicover.inference.snre import round_sizes, snre_sequential
from sbicover.nn.train import TrainConfig
from sbicover.rng import RngStream
from sbicover.simulators import get_benchmark
from sbicover.simulators.base import CountingBenchmark


def test_round_sizes_splits_budget():
    assert round_sizes(1000, 3) == [334, 333, 333]
    assert round_sizes(256, 2) == [128, 128]
    assert round_sizes(100, 1) == [100]
    assert sum(round_sizes(777, 5)) == 777


def test_budget_consumed_exactly():
    bench = CountingBenchmark(get_benchmark("gaussian"))
    x_o = np.full(4, 0.5)
    cfg = TrainConfig(epochs=5, hidden=(16,))
    est = snre_sequential(x_o, bench, 256, 2, cfg, RngStream(41))
    assert bench.count == 256
    assert est.meta["total_simulations"] == 256
    assert est.meta["rounds"] == 2
    assert est.meta["round_sizes"] == [128, 128]


def test_single_round_matches_plain_training():
    bench = get_benchmark("gaussian")
    x_o = np.zeros(4)
    cfg = TrainConfig(epochs=8, hidden=(16,))
    root = RngStream(42)
    est = snre_sequential(x_o, bench, 128, 1, cfg, root)
    ds = sample_joint(bench, 128, root.child(0, 0))
    plain = train_nre(ds, bench, cfg, root.child(1, 0))
    grid = np.linspace(-2.0, 2.0, 9)[:, None]
    assert np.array_equal(est.log_density(grid, x_o),
                          plain.log_density(grid, x_o))


def test_records_target_observation():
    bench = get_benchmark("gaussian")
    x_o = np.array([0.1, 0.2, 0.3, 0.4])
    est = snre_sequential(x_o, bench, 128, 1, TrainConfig(epochs=3, hidden=(16,)),
                          RngStream(43))
    assert np.array_equal(est.x_o, x_o)


def test_later_rounds_pull_toward_observation():
    # budget is tiny, so only check the directional pull off the prior mean
    bench = get_benchmark("gaussian")
    x_o = np.full(4, 1.0)  # true posterior mean 0.8, prior mean 0.0
    cfg = TrainConfig(epochs=20, hidden=(32, 32))
    est = snre_sequential(x_o, bench, 512, 2, cfg, RngStream(44))
    draws = est.sample(500, x_o, RngStream(45))
    assert draws.mean() > 0.2


def test_validation_errors():
    bench = get_benchmark("gaussian")
    cfg = TrainConfig(epochs=1)
    with pytest.raises(ValueError, match="rounds"):
        snre_sequential(np.zeros(4), bench, 128, 0, cfg, RngStream(1))
    with pytest.raises(ValueError, match="64"):
        snre_sequential(np.zeros(4), bench, 128, 4, cfg, RngStream(1))
