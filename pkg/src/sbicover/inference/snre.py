"""Sequential (multi-round) ratio estimation targeted at one observation.

Round 0 draws from the prior; each later round draws its share of the budget
from the current ratio posterior at x_o, simulates those parameters, and
retrains on all pairs accumulated so far.  With rounds=1 the procedure is
bitwise identical to the amortized path (same stream layout), apart from the
recorded x_o.
"""

import numpy as np

from ..dataset import Dataset, sample_joint
from .nre import RatioEstimator, train_nre


def round_sizes(budget, rounds):
    """Split budget into per-round dataset sizes, remainder to early rounds."""
    base, rem = divmod(budget, rounds)
    return [base + 1 if r < rem else base for r in range(rounds)]


def snre_sequential(x_o, benchmark, budget, rounds, cfg, rng):
    """Multi-round NRE.  Returns a non-amortized RatioEstimator at x_o.

    Stream layout per round r: rng.child(0, r) simulates the round's data,
    rng.child(1, r) trains, rng.child(2, r) drives the proposal sampler.
    """
    if rounds < 1:
        raise ValueError("rounds must be >= 1")
    if budget // rounds < 64:
        raise ValueError(
            f"budget {budget} over {rounds} rounds leaves fewer than 64 "
            "pairs per round")
    x_o = np.asarray(x_o, dtype=np.float64)
    sizes = round_sizes(budget, rounds)
    est = None
    all_thetas, all_xs = [], []
    for r in range(rounds):
        data_rng = rng.child(0, r)
        if r == 0:
            ds = sample_joint(benchmark, sizes[0], data_rng)
            thetas, xs = ds.thetas, ds.xs
        else:
            thetas = est.sample(sizes[r], x_o, rng.child(2, r))
            xs = benchmark.simulate_batch(thetas, data_rng.child(1))
        all_thetas.append(thetas)
        all_xs.append(xs)
        acc = Dataset(np.concatenate(all_thetas), np.concatenate(all_xs),
                      benchmark.id, {"rounds_used": r + 1})
        est = train_nre(acc, benchmark, cfg, rng.child(1, r))
    est.x_o = x_o
    est.meta = dict(est.meta)
    est.meta.update({"rounds": rounds, "round_sizes": sizes,
                     "total_simulations": int(sum(sizes))})
    return est
