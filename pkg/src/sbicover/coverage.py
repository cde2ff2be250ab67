"""Expected-coverage diagnostic for approximate posteriors.

For a test pair (theta*, x) and level 1-alpha, the highest-density credible
region of the approximate posterior contains theta* exactly when the density
at theta* beats the alpha-quantile of the density of m self-samples.  The
empirical rule is a rank comparison: with
    below = #{j : log p(sample_j) <  log p(theta*)}
    ties  = #{j : log p(sample_j) == log p(theta*)}
the randomized rank R = below + Uniform{0..ties} (drawn only when ties > 0)
is contained at level 1-alpha iff R >= floor(alpha * m) + 1.  Under a
perfectly calibrated posterior R is uniform on {0..m}, so the expected
coverage at that level is 1 - (floor(alpha*m)+1)/(m+1), the diagonal up to
O(1/m).  Averaging the indicator over pairs drawn from the joint gives the
expected coverage curve.
"""

from dataclasses import dataclass, field

import numpy as np

from .dataset import sample_joint
from .inference.base import EstimatorError
from .inference.ensemble import generic_coverage_logp

DEFAULT_Z = 1.96

CSV_COLUMNS = ("benchmark", "method", "budget", "seed", "ensemble_size",
               "level", "empirical", "ci_halfwidth", "n_eval")


def default_levels():
    return np.linspace(0.05, 0.95, 19)


def curve_rows(curve, benchmark, method, budget, seed, ensemble_size=1):
    """One result row per level, in the order of CSV_COLUMNS."""
    rows = []
    for level, emp, ci in zip(curve.levels, curve.coverage, curve.ci):
        rows.append({"benchmark": benchmark, "method": method,
                     "budget": int(budget), "seed": int(seed),
                     "ensemble_size": int(ensemble_size),
                     "level": float(level), "empirical": float(emp),
                     "ci_halfwidth": float(ci), "n_eval": int(curve.n_test)})
    return rows


def _level_ks(m, levels):
    """floor(alpha * m) per level, guarded against float droop."""
    alphas = 1.0 - np.asarray(levels, dtype=np.float64)
    return np.floor(alphas * m + 1e-9).astype(np.int64)


def calibrated_coverage(m, levels):
    """Exact expected coverage of a calibrated posterior under the rank rule."""
    ks = _level_ks(m, np.asarray(levels))
    return 1.0 - (ks + 1) / (m + 1.0)


def coverage_ranks(log_star, logs, gen):
    """Randomized rank of each theta* among its m self-samples.

    Randomness is consumed only for rows with exact ties, so continuous
    targets give bit-reproducible ranks regardless of the generator state.
    """
    log_star = np.asarray(log_star, dtype=np.float64)
    logs = np.asarray(logs, dtype=np.float64)
    below = np.sum(logs < log_star[:, None], axis=1).astype(np.int64)
    ties = np.sum(logs == log_star[:, None], axis=1)
    tied = ties > 0
    if tied.any():
        below[tied] += gen.integers(0, ties[tied] + 1)
    return below


def rank_contained(ranks, m, levels):
    """Indicator matrix (n_pairs, n_levels) of HPD containment."""
    ks = _level_ks(m, levels)
    return np.asarray(ranks)[:, None] >= (ks + 1)[None, :]


def hpd_threshold(logs, level):
    """Density cutoff of the level-HPD region estimated from self-samples."""
    logs = np.sort(np.asarray(logs, dtype=np.float64))
    m = logs.size
    k = int(_level_ks(m, np.array([level]))[0])
    return float(logs[min(max(k, 0), m - 1)])


def hpd_contains(log_star, logs, level):
    """Deterministic containment check; agrees with the rank rule when the
    density at theta* ties none of the samples."""
    return bool(log_star >= hpd_threshold(logs, level))


def coverage_ci(coverage, n_test, z=DEFAULT_Z):
    c = np.clip(np.asarray(coverage, dtype=np.float64), 0.0, 1.0)
    return z * np.sqrt(c * (1.0 - c) / n_test)


@dataclass
class CoverageCurve:
    levels: np.ndarray
    coverage: np.ndarray
    n_test: int
    m: int
    ci: np.ndarray = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.levels = np.asarray(self.levels, dtype=np.float64)
        self.coverage = np.asarray(self.coverage, dtype=np.float64)
        if self.ci is None:
            self.ci = coverage_ci(self.coverage, self.n_test)


def has_coverage(curve, z=DEFAULT_Z):
    """No level is significantly below nominal (one-sided binomial check
    under the null coverage == level)."""
    sd = np.sqrt(curve.levels * (1.0 - curve.levels) / curve.n_test)
    return bool(np.all(curve.coverage >= curve.levels - z * sd))


def is_conservative(curve):
    """Empirical coverage at or above nominal at every level."""
    return bool(np.all(curve.coverage >= curve.levels))


def _coverage_logp(estimator, test_thetas, test_xs, m, rng):
    hook = getattr(estimator, "coverage_logp", None)
    if hook is not None:
        return hook(test_thetas, test_xs, m, rng)
    return generic_coverage_logp(estimator, test_thetas, test_xs, m, rng)


def curve_from_logp(log_star, logs, rng, levels=None):
    levels = default_levels() if levels is None else np.asarray(levels)
    m = logs.shape[1]
    ranks = coverage_ranks(log_star, logs, rng.gen)
    contained = rank_contained(ranks, m, levels)
    coverage = contained.mean(axis=0)
    return CoverageCurve(levels=levels, coverage=coverage,
                         n_test=logs.shape[0], m=m)


def empirical_expected_coverage(estimator, test_thetas, test_xs, m, rng,
                                levels=None):
    """Expected coverage of an amortized estimator over given test pairs.

    test pairs must be draws from the joint (theta ~ prior, x ~ simulator).
    rng.child(0) drives posterior sampling, rng.child(1) the tie-breaking.
    """
    if not estimator.is_amortized:
        raise EstimatorError(
            "estimator is tied to a single observation; expected coverage "
            "over the joint needs one refit per test observation "
            "(nonamortized_expected_coverage)")
    test_thetas = np.asarray(test_thetas, dtype=np.float64)
    test_xs = np.asarray(test_xs, dtype=np.float64)
    if test_thetas.shape[0] != test_xs.shape[0] or test_thetas.shape[0] == 0:
        raise ValueError("test pairs must be matched and nonempty")
    log_star, logs = _coverage_logp(estimator, test_thetas, test_xs, m,
                                    rng.child(0))
    return curve_from_logp(log_star, logs, rng.child(1), levels)


def nonamortized_expected_coverage(fit, benchmark, n_obs, m, rng,
                                   levels=None):
    """Expected coverage of a per-observation procedure (ABC, multi-round).

    `fit(x_o, rng) -> estimator` is run once per test observation drawn from
    the joint; indicators are pooled across observations.  Per observation i,
    rng.child(0, i) draws the pair, rng.child(1, i) fits, rng.child(2, i)
    samples the fitted posterior; rng.child(3) breaks rank ties.
    """
    levels = default_levels() if levels is None else np.asarray(levels)
    log_star = np.empty(n_obs)
    logs = np.empty((n_obs, m))
    for i in range(n_obs):
        pair = sample_joint(benchmark, 1, rng.child(0, i))
        theta_star, x_o = pair.thetas[0], pair.xs[0]
        estimator = fit(x_o, rng.child(1, i))
        samples = estimator.sample(m, x_o, rng.child(2, i))
        logs[i] = np.atleast_1d(estimator.log_density(samples, x_o))
        log_star[i] = estimator.log_density(theta_star, x_o)
    return curve_from_logp(log_star, logs, rng.child(3), levels)


def expected_information_gain(estimator, test_thetas, test_xs):
    """Monte Carlo E_{theta,x ~ joint}[log p_hat(theta|x) - log p(theta)].

    Requires a normalized density; wrap low-dimensional ratio estimators in
    GridNormalized first.  Exactly zero for the prior itself.
    """
    if not estimator.normalized:
        raise EstimatorError(
            "information gain needs a normalized posterior density; wrap the "
            "estimator in GridNormalized (d <= 2) to fix the constant")
    test_thetas = np.asarray(test_thetas, dtype=np.float64)
    test_xs = np.asarray(test_xs, dtype=np.float64)
    n = test_thetas.shape[0]
    total = 0.0
    for i in range(n):
        lp = estimator.log_density(test_thetas[i], test_xs[i])
        total += lp - float(estimator.prior.log_density(test_thetas[i]))
    return total / n
