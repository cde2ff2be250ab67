"""Go/no-go validation suite: eleven numbered criteria.

Each criterion function returns (ok, detail) and is independent of the
others; `run_all` executes a selection and prints one line per criterion.
The criteria pin down the properties the package exists to provide:

 1  the exact conjugate posterior passes the coverage diagnostic
 2  the prior-as-posterior estimator passes it (uniform and normal priors)
 3  deliberately mis-scaled posteriors are flagged in the right direction
 4  ratio-averaged and density-averaged ensemble posteriors agree pointwise
 5  ensembles dominate their mean member's empirical coverage curve
 6  empirical coverage at level 0.8 is nondecreasing in ensemble size
 7  ABC posteriors converge on a discretely enumerable toy problem
 8  learned ratios track analytic ratios and calibrate on the gaussian task
 9  numerics: gradients, density quadrature, HPD region consistency
10  simulator-call accounting matches the budget formulas exactly
11  the desk-scale result matrix reruns byte-for-byte identically

Criteria with stated wall-clock limits fail when the limit is exceeded,
so a pass certifies both correctness and desk-scale feasibility.
"""

import hashlib
import os
import shutil
import tempfile
import time

import numpy as np

from .coverage import default_levels, empirical_expected_coverage, hpd_contains
from .dataset import sample_joint
from .harness import cells
from .harness.config import ExperimentConfig
from .inference.base import PriorEstimator
from .inference.ensemble import log_mean_exp
from .inference.abc import rejection_abc, smc_abc, AbcPosterior
from .inference.nre import train_nre
from .inference.npe import train_npe
from .inference.samplers import grid_cells, grid_masses
from .nn.mdn import mdn_loss_and_grad, raw_dim
from .nn.net import init_mlp, mlp_backward, mlp_forward_cached
from .nn.train import TrainConfig, bce_loss_grad
from .priors import IndependentNormal, UniformBox
from .rng import RngStream
from .simulators import get_benchmark
from .simulators.base import Benchmark
from .simulators.gaussian import analytic_log_ratio, gaussian_true_posterior


def _within_two_ci(curve):
    """(ok, worst_margin, worst_level): |emp - nominal| < 2*CI at all levels."""
    gap = np.abs(curve.coverage - curve.levels)
    margin = gap - 2.0 * curve.ci
    worst = int(np.argmax(margin))
    return bool(np.all(margin < 0.0)), float(margin[worst]), float(curve.levels[worst])


def criterion_1():
    """Exact gaussian posterior: coverage within 2*CI of nominal everywhere."""
    start = time.monotonic()
    bench = get_benchmark("gaussian")
    root = RngStream(901)
    test = sample_joint(bench, 2000, root.child(0))
    curve = empirical_expected_coverage(gaussian_true_posterior(),
                                        test.thetas, test.xs, 2000,
                                        root.child(1))
    ok, worst, at = _within_two_ci(curve)
    elapsed = time.monotonic() - start
    ok = ok and elapsed < 120.0
    return ok, (f"oracle worst gap-2CI margin {worst:+.4f} at level {at:.2f} "
                f"(n_eval=2000 m=2000, {elapsed:.0f}s/120s)")


def criterion_2():
    """Prior-as-posterior estimator is calibrated on slcp and gaussian."""
    start = time.monotonic()
    root = RngStream(902)
    parts = []
    ok = True
    for i, bid in enumerate(("slcp", "gaussian")):
        bench = get_benchmark(bid)
        test = sample_joint(bench, 2000, root.child(0, i))
        est = PriorEstimator(bench.prior, benchmark_id=bench.id)
        curve = empirical_expected_coverage(est, test.thetas, test.xs, 2000,
                                            root.child(1, i))
        good, worst, at = _within_two_ci(curve)
        ok = ok and good
        parts.append(f"{bid} margin {worst:+.4f}@{at:.2f}")
    elapsed = time.monotonic() - start
    ok = ok and elapsed < 240.0
    return ok, "prior estimator: " + ", ".join(parts) + f" ({elapsed:.0f}s/240s)"


def criterion_3():
    """Std x0.5 flagged overconfident, x2.0 conservative, at levels 0.2-0.9."""
    start = time.monotonic()
    bench = get_benchmark("gaussian")
    root = RngStream(903)
    test = sample_joint(bench, 2000, root.child(0))
    levels = default_levels()
    band = (levels > 0.2 - 1e-9) & (levels < 0.9 + 1e-9)
    parts = []
    ok = True
    for i, (scale, sign) in enumerate(((0.5, -1.0), (2.0, +1.0))):
        est = gaussian_true_posterior(std_scale=scale)
        curve = empirical_expected_coverage(est, test.thetas, test.xs, 2000,
                                            root.child(1, i))
        # signed margin beyond the 2*CI band, positive = correct direction
        margin = sign * (curve.coverage - levels) - 2.0 * curve.ci
        good = bool(np.all(margin[band] > 0.0))
        ok = ok and good
        parts.append(f"x{scale} min margin {margin[band].min():+.4f}")
    elapsed = time.monotonic() - start
    ok = ok and elapsed < 120.0
    return ok, "direction: " + ", ".join(parts) + f" ({elapsed:.0f}s/120s)"


def criterion_4():
    """Ratio-averaged == density-averaged ensemble log posterior to 1e-9."""
    bench = get_benchmark("slcp")
    root = RngStream(904)
    ds = sample_joint(bench, 512, root.child(0))
    cfg = TrainConfig(epochs=30)
    members = [train_nre(ds, bench, cfg, root.child(1, j)) for j in range(5)]
    test = sample_joint(bench, 1000, root.child(2))
    # ratio path: log prior + log mean of member ratios, vectorized over pairs
    logits = np.stack([m.log_ratio_pairs(test.thetas, test.xs)
                       for m in members], axis=1)
    ratio_avg = bench.prior.log_density(test.thetas) + log_mean_exp(logits, axis=1)
    # density path: log mean of member posterior densities, pair by pair
    dens = np.empty((1000, 5))
    for i in range(1000):
        for j, m in enumerate(members):
            dens[i, j] = m.log_density(test.thetas[i], test.xs[i])
    dens_avg = log_mean_exp(dens, axis=1)
    worst = float(np.max(np.abs(ratio_avg - dens_avg)))
    return worst <= 1e-9, f"max |ratio-avg - density-avg| = {worst:.2e} over 10^3 pairs"


def criterion_5():
    """5-member ensembles cover at least as well as their mean member."""
    start = time.monotonic()
    bench = get_benchmark("slcp")
    cfg = TrainConfig()
    levels = default_levels()
    member_curves, ensemble_curves = [], []
    for seed in range(5):
        root = RngStream(905, (seed,))
        ds = sample_joint(bench, 1024, root.child(0))
        members = [train_nre(ds, bench, cfg, root.child(1, j))
                   for j in range(5)]
        test = sample_joint(bench, 2000, root.child(2))
        groups = [[j] for j in range(5)] + [list(range(5))]
        curves = cells._group_curves_shared_grid(members, groups, test, 1000,
                                                 levels, root.child(3))
        member_curves.extend(c.coverage for c in curves[:5])
        ensemble_curves.append(curves[5].coverage)
    mean_member = np.mean(member_curves, axis=0)
    mean_ensemble = np.mean(ensemble_curves, axis=0)
    hold = mean_ensemble >= mean_member - 0.01
    n_hold = int(hold.sum())
    gain = float(np.mean(mean_ensemble - mean_member))
    elapsed = time.monotonic() - start
    ok = n_hold >= 17 and elapsed < 3600.0
    return ok, (f"ensemble >= member-0.01 at {n_hold}/19 levels, mean gain "
                f"{gain:+.4f} ({elapsed:.0f}s/3600s)")


def criterion_6():
    """Coverage at level 0.8 nondecreasing in ensemble size 1..20."""
    start = time.monotonic()
    bench = get_benchmark("slcp")
    root = RngStream(906)
    ds = sample_joint(bench, 1024, root.child(0))
    cfg = TrainConfig()
    members = [train_nre(ds, bench, cfg, root.child(1, j)) for j in range(20)]
    test = sample_joint(bench, 2000, root.child(2))
    levels = default_levels()
    sizes = [1, 2, 5, 10, 20]
    groups = [g for s in sizes for g in cells._partition(20, s)]
    curves = cells._group_curves_shared_grid(members, groups, test, 1000,
                                             levels, root.child(3))
    idx = int(np.argmin(np.abs(levels - 0.8)))
    means, pos = [], 0
    for s in sizes:
        n_groups = 20 // s
        vals = [curves[pos + g].coverage[idx] for g in range(n_groups)]
        means.append(float(np.mean(vals)))
        pos += n_groups
    steps = np.diff(means)
    ok = bool(np.all(steps >= -0.01))
    elapsed = time.monotonic() - start
    ok = ok and elapsed < 7200.0
    txt = "/".join(f"{v:.3f}" for v in means)
    return ok, (f"level-0.8 coverage by size 1/2/5/10/20: {txt} "
                f"({elapsed:.0f}s/7200s)")


def _bit_toy():
    """Discrete toy with enumerable posterior: x = 1[theta>0.5] flipped w.p. 0.1."""
    prior = UniformBox([-0.5], [1.5])

    def simulate(thetas, rng):
        thetas = np.asarray(thetas, dtype=np.float64)
        bits = (thetas[:, 0] > 0.5).astype(np.float64)
        flip = rng.gen.random(thetas.shape[0]) < 0.1
        return np.where(flip, 1.0 - bits, bits)[:, None]

    return Benchmark(id="bit-toy", prior=prior, observable_shape=(1,),
                     simulate_batch=simulate)


def _bit_fraction(post):
    return float(post.weights[post.thetas[:, 0] <= 0.5].sum())


def criterion_7():
    """Rejection and SMC ABC within TV 0.05 of the enumerated posterior."""
    start = time.monotonic()
    bench = _bit_toy()
    x_o = np.zeros(1)
    root = RngStream(907)
    # exact posterior: P(bit=0 | x=0) = 0.9*0.5 / 0.5 = 0.9
    rej = rejection_abc(x_o, bench.prior, bench.simulate_batch, budget=32768,
                        quantile=0.4, rng=root.child(0), benchmark_id=bench.id)
    tv_rej = abs(_bit_fraction(rej) - 0.9)
    smc = smc_abc(x_o, bench.prior, bench.simulate_batch, budget=40000,
                  population=10000, decay=0.5, rng=root.child(1),
                  benchmark_id=bench.id)
    tv_smc = abs(_bit_fraction(smc) - 0.9)
    elapsed = time.monotonic() - start
    ok = (tv_rej < 0.05 and tv_smc < 0.05
          and rej.n_accepted >= 10000 and smc.n_accepted >= 10000
          and elapsed < 60.0)
    return ok, (f"TV rejection {tv_rej:.4f} (n={rej.n_accepted}), "
                f"smc {tv_smc:.4f} (n={smc.n_accepted}) ({elapsed:.1f}s/60s)")


def criterion_8():
    """Learned vs analytic log ratios correlate; coverage near diagonal."""
    start = time.monotonic()
    bench = get_benchmark("gaussian")
    root = RngStream(908)
    ds = sample_joint(bench, 8192, root.child(0))
    est = train_nre(ds, bench, TrainConfig(), root.child(1))
    held = sample_joint(bench, 1000, root.child(2))
    got = est.log_ratio_pairs(held.thetas, held.xs)
    want = analytic_log_ratio(held.thetas, held.xs)
    corr = float(np.corrcoef(got, want)[0, 1])
    curve = empirical_expected_coverage(est, held.thetas, held.xs, 1000,
                                        root.child(3))
    gap = float(np.max(np.abs(curve.coverage - curve.levels)))
    elapsed = time.monotonic() - start
    ok = corr > 0.95 and gap < 0.1 and elapsed < 600.0
    return ok, (f"log-ratio corr {corr:.4f}, max |coverage-nominal| {gap:.4f} "
                f"({elapsed:.0f}s/600s)")


def _max_grad_relerr(weights, loss_fn, eps=1e-5):
    """Worst relative error of analytic vs central-difference gradients."""
    _, grads = loss_fn(weights)
    worst = 0.0
    for (w, b), (dw, db) in zip(weights, grads):
        for arr, ana in ((w, dw), (b, db)):
            flat = arr.ravel()
            aflat = np.asarray(ana, dtype=np.float64).ravel()
            for idx in range(flat.size):
                keep = flat[idx]
                flat[idx] = keep + eps
                up = loss_fn(weights)[0]
                flat[idx] = keep - eps
                dn = loss_fn(weights)[0]
                flat[idx] = keep
                num = (up - dn) / (2.0 * eps)
                rel = abs(num - aflat[idx]) / max(abs(num) + abs(aflat[idx]), 1e-6)
                worst = max(worst, rel)
    return worst


def _gradcheck():
    gen = np.random.default_rng(7)
    x = gen.standard_normal((16, 4))
    y = (gen.random(16) < 0.5).astype(np.float64)
    w_bce = init_mlp([4, 6, 5, 1], gen)

    def bce(ws):
        out, cache = mlp_forward_cached(ws, x)
        loss, dout = bce_loss_grad(out, y)
        return loss, mlp_backward(ws, cache, dout)

    t = gen.standard_normal((16, 2))
    w_mdn = init_mlp([4, 6, raw_dim(3, 2)], gen)

    def mdn(ws):
        raw, cache = mlp_forward_cached(ws, x)
        loss, draw = mdn_loss_and_grad(raw, t, 3)
        return loss, mlp_backward(ws, cache, draw)

    return max(_max_grad_relerr(w_bce, bce), _max_grad_relerr(w_mdn, mdn))


def _quadrature_errors():
    """How far the MDN and KDE densities are from integrating to one."""
    errors = []
    bench = get_benchmark("gaussian")
    root = RngStream(909, (1,))
    ds = sample_joint(bench, 512, root.child(0))
    est = train_npe(ds, bench, TrainConfig(epochs=25), root.child(1))
    x = ds.xs[0]
    centers, widths = grid_cells((np.array([-14.0]), np.array([14.0])), 32768)
    mass = float(np.exp(est.log_density(centers, x)).sum() * widths[0])
    errors.append(abs(mass - 1.0))

    gen = root.child(2).gen
    kde1 = AbcPosterior(gen.standard_normal((300, 1)), gen.random(300) + 0.1,
                        IndependentNormal([0.0], [1.0]), x_o=np.zeros(1))
    mass = float(np.exp(kde1.log_density(centers, np.zeros(1))).sum() * widths[0])
    errors.append(abs(mass - 1.0))

    pts = np.concatenate([gen.standard_normal((200, 2)),
                          gen.standard_normal((200, 2)) + 1.5])
    kde2 = AbcPosterior(pts, np.ones(400), IndependentNormal([0.0, 0.0], [1.0, 1.0]),
                        x_o=np.zeros(1))
    centers, widths = grid_cells((np.full(2, -12.0), np.full(2, 12.0)), 1024)
    total = 0.0
    for lo in range(0, centers.shape[0], 65536):
        chunk = centers[lo:lo + 65536]
        total += float(np.exp(kde2.log_density(chunk, np.zeros(1))).sum())
    errors.append(abs(total * widths.prod() - 1.0))
    return errors


def _hpd_agreement(n_trials=1000, m=10000, resolution=4096):
    """Sample-quantile vs grid HPD membership agreement on the gaussian oracle."""
    bench = get_benchmark("gaussian")
    oracle = gaussian_true_posterior()
    root = RngStream(909, (2,))
    pairs = sample_joint(bench, n_trials, root.child(0))
    levels = 0.05 + 0.90 * root.child(1).gen.random(n_trials)
    box = bench.prior.grid_box()
    centers, widths = grid_cells(box, resolution)
    low, width = float(box[0][0]), float(widths[0])
    agree = 0
    for i in range(n_trials):
        x, theta = pairs.xs[i], pairs.thetas[i]
        samples = oracle.sample(m, x, root.child(2, i))
        logs = oracle.log_density(samples, x)
        by_sample = bool(hpd_contains(float(oracle.log_density(theta, x)),
                                      logs, levels[i]))
        masses = grid_masses(oracle.log_density(centers, x))
        order = np.argsort(-masses)
        cut = int(np.searchsorted(np.cumsum(masses[order]), levels[i]))
        member = np.zeros(centers.shape[0], dtype=bool)
        member[order[:cut + 1]] = True
        cell = int((theta[0] - low) // width)
        by_grid = 0 <= cell < centers.shape[0] and bool(member[cell])
        agree += int(by_sample == by_grid)
    return agree / n_trials


def criterion_9():
    """Gradients, unit-mass quadrature, and HPD membership consistency."""
    rel = _gradcheck()
    quad = _quadrature_errors()
    agreement = _hpd_agreement()
    ok = (rel < 1e-4 and max(quad) < 1e-3 and agreement >= 0.98)
    quad_txt = "/".join(f"{e:.1e}" for e in quad)
    return ok, (f"grad rel err {rel:.2e}, quadrature |mass-1| mdn/kde1d/kde2d "
                f"{quad_txt}, hpd agreement {agreement:.3f}")


def criterion_10():
    """Simulator-call counters match budget formulas exactly for all methods."""
    cfg = ExperimentConfig(
        benchmarks=["gaussian"],
        methods=["nre", "npe", "ensemble-nre", "ensemble-npe", "bagged-nre",
                 "rej-abc", "smc-abc", "snre"],
        budgets=[128], seeds=1, n_eval=64, m=64, n_obs=6, epochs=3,
        hidden=[16, 16], ensemble_size=3)
    parts = []
    ok = True
    for method in cfg.methods:
        _, calls = cells.cell_records(cfg, "gaussian", method, 128, 0)
        want = 128 * 6 if method in cells.NONAMORTIZED_METHODS else 128 + 64
        good = calls == want
        ok = ok and good
        parts.append(f"{method}={calls}{'' if good else '!=' + str(want)}")
    return ok, "calls " + " ".join(parts)


def criterion_11():
    """Desk matrix reruns byte-identically within the time limit."""
    start = time.monotonic()
    digests, n_cells = [], 0
    base = dict(benchmarks=["gaussian", "slcp", "mg1"],
                methods=["nre", "npe", "rej-abc"],
                budgets=[128, 256, 512, 1024], seeds=2,
                n_eval=500, m=500, n_obs=50, abc_quantile=0.05)
    for run in range(2):
        out_dir = tempfile.mkdtemp(prefix=f"sbicover-matrix-{run}-")
        try:
            cfg = ExperimentConfig(out=out_dir, **base)
            statuses, results_path = cells.run_matrix(cfg, jobs=1)
            bad = [s for s in statuses if s["status"] != "done"]
            if bad:
                return False, (f"run {run}: {len(bad)} cells failed, first: "
                               f"{bad[0].get('error', bad[0]['status'])}")
            n_cells = len(statuses)
            with open(results_path, "rb") as fh:
                digests.append(hashlib.sha256(fh.read()).hexdigest())
        finally:
            shutil.rmtree(out_dir, ignore_errors=True)
    elapsed = time.monotonic() - start
    ok = digests[0] == digests[1] and elapsed < 10800.0
    return ok, (f"2x{n_cells} cells, sha256 {digests[0][:12]} vs "
                f"{digests[1][:12]} ({elapsed:.0f}s/10800s)")


CRITERIA = (
    (1, "oracle calibration", criterion_1),
    (2, "prior estimator calibration", criterion_2),
    (3, "miscalibration direction", criterion_3),
    (4, "ensemble averaging identity", criterion_4),
    (5, "ensemble coverage dominance", criterion_5),
    (6, "coverage vs ensemble size", criterion_6),
    (7, "abc exactness limit", criterion_7),
    (8, "ratio estimator fidelity", criterion_8),
    (9, "numerics", criterion_9),
    (10, "budget accounting", criterion_10),
    (11, "matrix determinism", criterion_11),
)


def run_all(selected=None, out=print):
    """Run criteria (all, or the given numbers) and print one line each.

    Returns a list of (number, ok, detail) tuples.
    """
    chosen = [c for c in CRITERIA if selected is None or c[0] in selected]
    if selected is not None:
        known = {c[0] for c in CRITERIA}
        bad = sorted(set(selected) - known)
        if bad:
            raise ValueError(f"unknown criteria: {bad}")
    results = []
    for number, name, fn in chosen:
        begin = time.monotonic()
        try:
            ok, detail = fn()
        except Exception as exc:
            ok, detail = False, f"crashed: {type(exc).__name__}: {exc}"
        elapsed = time.monotonic() - begin
        verdict = "PASS" if ok else "FAIL"
        out(f"criterion {number:2d} {verdict} {name}: {detail} [{elapsed:.1f}s]")
        results.append((number, ok, detail))
    return results
