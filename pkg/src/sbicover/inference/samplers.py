"""Posterior samplers: random-walk Metropolis-Hastings and an exact grid
sampler for low-dimensional targets.

Both work on log densities known only up to a constant.  The MH engine runs
any number of chains in lockstep (one numpy step per iteration across chains),
adapting each chain's proposal scale toward the 0.2-0.5 acceptance band during
burn-in and freezing it afterwards.
"""

from dataclasses import dataclass

import numpy as np

ADAPT_WINDOW = 50
ADAPT_UP = 1.1
ADAPT_DOWN = 0.9
STALL_LIMIT = 1000


class McmcError(Exception):
    pass


@dataclass
class MhResult:
    samples: np.ndarray       # (kept, d)
    log_densities: np.ndarray  # (kept,)
    acceptance: float
    scale: float


def run_chains(log_density, inits, keep, gen, burn=500, thin=1, scale=0.5,
               widths=None, adapt=True, collect_thetas=True):
    """Lockstep random-walk MH over B parallel chains.

    log_density maps (B, d) -> (B,).  Returns (thetas (keep, B, d) or None,
    logps (keep, B), acceptance (B,), scales (B,)).  Proposals are
    theta + scale_b * widths * N(0, I); widths sets per-dimension geometry,
    scale_b adapts per chain during burn-in.
    """
    theta = np.array(inits, dtype=np.float64, copy=True)
    b, d = theta.shape
    logp = np.asarray(log_density(theta), dtype=np.float64)
    if not np.all(np.isfinite(logp)):
        raise McmcError("non-finite log density at chain initialization")
    widths = np.ones(d) if widths is None else np.asarray(widths, dtype=np.float64)
    scales = np.full(b, float(scale))
    thetas_out = np.empty((keep, b, d)) if collect_thetas else None
    logps_out = np.empty((keep, b))
    accepted = np.zeros(b, dtype=np.int64)
    window_acc = np.zeros(b, dtype=np.int64)
    stall = np.zeros(b, dtype=np.int64)
    total = burn + keep * thin
    for step in range(total):
        prop = theta + scales[:, None] * widths[None, :] * \
            gen.standard_normal((b, d))
        logp_prop = np.asarray(log_density(prop), dtype=np.float64)
        logu = np.log(gen.random(b))
        acc = logu < (logp_prop - logp)
        theta[acc] = prop[acc]
        logp[acc] = logp_prop[acc]
        accepted += acc
        window_acc += acc
        stall = np.where(acc, 0, stall + 1)
        if np.any(stall >= STALL_LIMIT):
            chain = int(np.argmax(stall))
            raise McmcError(
                f"chain {chain} rejected {STALL_LIMIT} consecutive proposals "
                f"(scale {scales[chain]:.3g})")
        in_burn = step < burn
        if adapt and in_burn and (step + 1) % ADAPT_WINDOW == 0:
            rate = window_acc / ADAPT_WINDOW
            scales = np.where(rate > 0.5, scales * ADAPT_UP, scales)
            scales = np.where(rate < 0.2, scales * ADAPT_DOWN, scales)
            window_acc[:] = 0
        if not in_burn:
            offset = step - burn
            if (offset + 1) % thin == 0:
                k = offset // thin
                if collect_thetas:
                    thetas_out[k] = theta
                logps_out[k] = logp
    return thetas_out, logps_out, accepted / total, scales


def metropolis_hastings(log_density, init, steps, scale, rng, burn=None,
                        thin=1):
    """Single-chain random-walk MH.

    log_density maps (B, d) -> (B,) (a single chain still passes a batch of
    one).  `steps` counts kept post-burn-in samples after thinning; burn
    defaults to steps // 5.  The proposal scale adapts during burn-in toward
    0.2-0.5 acceptance, then freezes.
    """
    init = np.asarray(init, dtype=np.float64)
    if burn is None:
        burn = max(steps // 5, ADAPT_WINDOW)
    thetas, logps, acc, scales = run_chains(
        log_density, init[None, :], keep=steps, gen=rng.gen, burn=burn,
        thin=thin, scale=scale)
    return MhResult(samples=thetas[:, 0, :], log_densities=logps[:, 0],
                    acceptance=float(acc[0]), scale=float(scales[0]))


def grid_cells(box, resolution):
    """Cell centers of a regular grid over box = (lows, highs).

    resolution: points per dimension (int or per-dim sequence).  Returns
    (centers (G, d), widths (d,)).
    """
    lows, highs = (np.asarray(v, dtype=np.float64) for v in box)
    d = lows.size
    if d > 2:
        raise ValueError("grid sampling supports at most 2 dimensions")
    res = np.broadcast_to(np.asarray(resolution, dtype=np.int64), (d,))
    widths = (highs - lows) / res
    axes = [lows[j] + widths[j] * (np.arange(res[j]) + 0.5) for j in range(d)]
    if d == 1:
        centers = axes[0][:, None]
    else:
        a, b = np.meshgrid(axes[0], axes[1], indexing="ij")
        centers = np.column_stack([a.ravel(), b.ravel()])
    return centers, widths


def grid_masses(logp):
    """Normalized cell masses from cell-center log densities (equal cells)."""
    logp = np.asarray(logp, dtype=np.float64)
    finite = np.isfinite(logp)
    if not finite.any():
        raise ValueError("all-zero mass on the grid")
    hi = logp[finite].max()
    w = np.where(finite, np.exp(logp - hi), 0.0)
    return w / w.sum()


def sample_grid_cells(masses, centers, widths, m, gen):
    cells = gen.choice(masses.size, size=m, p=masses)
    jitter = (gen.random((m, centers.shape[1])) - 0.5) * widths[None, :]
    return centers[cells] + jitter


def grid_posterior_sample(log_density, box, resolution, m, rng):
    """Draw m points from exp(log_density) restricted to the box.

    Normalizes over a regular grid, samples cells categorically, jitters
    uniformly within each cell.  d <= 2 only.
    """
    centers, widths = grid_cells(box, resolution)
    masses = grid_masses(log_density(centers))
    return sample_grid_cells(masses, centers, widths, m, rng.gen)


def grid_log_normalizer(log_density, box, resolution):
    """log of the integral of exp(log_density) over the box (midpoint rule)."""
    centers, widths = grid_cells(box, resolution)
    logp = np.asarray(log_density(centers), dtype=np.float64)
    finite = np.isfinite(logp)
    if not finite.any():
        raise ValueError("all-zero mass on the grid")
    hi = logp[finite].max()
    total = np.sum(np.where(finite, np.exp(logp - hi), 0.0))
    return float(hi + np.log(total) + np.sum(np.log(widths)))


def default_resolution(d):
    return 1024 if d == 1 else 64
