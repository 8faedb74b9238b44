"""Monte Carlo and grid-search checks that do not reuse the solver's formulas.

The shock is simulated as an exact GBM in log space. Non-terminal selves
are stepped on a time grid; a threshold crossing between grid times is
detected by sampling the exact maximum of the Brownian bridge, so the
crossing test carries no discretisation bias. Self lifetimes are drawn
exactly from their exponential laws. Once the terminal self is in charge
the threshold is constant forever, so its first-passage time is drawn
directly from the inverse-Gaussian (or Levy, at zero log drift) law.

Paths are processed in fixed batches, each with its own seed substream, so
results depend only on the seed and configuration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bargaining import nash_product
from .params import AgentType, DiscountSpec, ModelParams

BATCH_PATHS = 16384
_TINY_DRIFT = 1e-14


class OracleConfigError(ValueError):
    pass


class GridBracketError(ValueError):
    pass


@dataclass(frozen=True)
class SimConfig:
    num_paths: int = 200_000
    time_step: float = 0.005
    horizon: float | None = None  # default: exp(-rho*horizon) < 1e-6
    seed: int = 20200222
    antithetic: bool = True

    def __post_init__(self) -> None:
        if int(self.num_paths) != self.num_paths or self.num_paths < 1:
            raise OracleConfigError(f"num_paths must be a positive integer, got {self.num_paths!r}")
        if self.antithetic and self.num_paths % 2:
            raise OracleConfigError("antithetic sampling needs an even num_paths")
        if not self.time_step > 0:
            raise OracleConfigError("time_step must be > 0")
        if self.horizon is not None and not self.horizon > 0:
            raise OracleConfigError("horizon must be > 0")
        if not 0 <= int(self.seed) < 2**64:
            raise OracleConfigError("seed must fit in 64 bits")

    def horizon_for(self, p: ModelParams) -> float:
        if self.horizon is not None:
            return float(self.horizon)
        return math.log(1e6) / p.rho + 1.0

    def replace(self, **changes) -> "SimConfig":
        values = dict(
            num_paths=self.num_paths,
            time_step=self.time_step,
            horizon=self.horizon,
            seed=self.seed,
            antithetic=self.antithetic,
        )
        values.update(changes)
        return SimConfig(**values)


@dataclass(frozen=True)
class McEstimate:
    mean: float
    stderr: float
    num_paths: int


@dataclass(frozen=True)
class GridSearchResult:
    grid: np.ndarray
    means: np.ndarray
    stderrs: np.ndarray
    best_index: int
    reference: float | None = None
    reference_estimate: McEstimate | None = None
    gap: float | None = None
    gap_stderr: float | None = None

    @property
    def best_threshold(self) -> float:
        return float(self.grid[self.best_index])

    @property
    def spacing(self) -> float:
        i = self.best_index
        lo = self.grid[max(i - 1, 0)]
        hi = self.grid[min(i + 1, len(self.grid) - 1)]
        return float(max(self.grid[i] - lo, hi - self.grid[i]))

    def agrees(self, sigmas: float = 3.0) -> bool:
        """Reference within one grid step of the argmax, or not worse than the
        argmax by more than ``sigmas`` paired standard errors."""
        if self.reference is None:
            raise ValueError("no reference threshold was evaluated")
        if abs(self.reference - self.best_threshold) <= self.spacing * (1 + 1e-12):
            return True
        return self.gap <= sigmas * self.gap_stderr


class _Moments:
    """Streaming mean and co-moment matrix (Chan et al. merge), shifted by the
    first row so constant data yields exactly zero spread."""

    def __init__(self) -> None:
        self.n = 0
        self.shift = None
        self.mean = None
        self.comoment = None

    def add(self, rows: np.ndarray) -> None:
        if self.shift is None:
            self.shift = rows[0].copy()
        x = rows - self.shift
        nb = x.shape[0]
        mb = x.mean(axis=0)
        dev = x - mb
        cb = dev.T @ dev
        if self.n == 0:
            self.n, self.mean, self.comoment = nb, mb, cb
            return
        delta = mb - self.mean
        n = self.n + nb
        self.mean = self.mean + delta * (nb / n)
        self.comoment = self.comoment + cb + np.outer(delta, delta) * (self.n * nb / n)
        self.n = n

    def result(self) -> tuple[np.ndarray, np.ndarray]:
        mean = self.shift + self.mean
        if self.n < 2:
            return mean, np.zeros_like(self.comoment)
        return mean, self.comoment / (self.n - 1) / self.n


def _uniform(rng: np.random.Generator, size) -> np.ndarray:
    # (0, 1): both u and 1 - u stay usable inside logarithms
    return np.maximum(rng.random(size), 1e-300)


def first_passage_times(a, nu: float, sigma: float, z, u, v) -> np.ndarray:
    """Exact first-passage times of ``nu*t + sigma*W_t`` to levels ``a``.

    ``z`` standard normal, ``u`` and ``v`` uniform draws broadcastable
    against ``a``. Levels ``a <= 0`` are hit at time 0; with negative drift
    the level is missed with probability ``1 - exp(2 nu a / sigma^2)``
    (time ``inf``). The positive-drift law is inverse Gaussian with mean
    ``a/nu`` and shape ``a^2/sigma^2``, sampled by the
    Michael-Schucany-Haas transformation.
    """
    a = np.asarray(a, dtype=float)
    pos = a > 0
    aa = np.where(pos, a, 1.0)
    shape = aa**2 / sigma**2
    y = np.broadcast_to(np.asarray(z, dtype=float) ** 2, aa.shape)
    with np.errstate(divide="ignore"):
        if abs(nu) <= _TINY_DRIFT:
            tau = shape / y
        else:
            m = aa / abs(nu)
            w = m * y / (2.0 * shape)
            x1 = m / (1.0 + w + np.sqrt(w * w + 2.0 * w))
            tau = np.where(u <= m / (m + x1), x1, m * m / x1)
            if nu < 0:
                tau = np.where(v < np.exp(2.0 * nu * aa / sigma**2), tau, np.inf)
    return np.where(pos, tau, 0.0)


def _bridge_stage(y, t, t_end, log_barriers, unit, sign, rng, n_units, p, dt):
    """Step paths until every barrier is crossed or the stage ends.

    Returns the crossing time of each barrier (``inf`` if not crossed) and the
    log-shock and clock of every path when it left the loop.
    """
    n = y.size
    G = log_barriers.size
    nu = p.alpha - 0.5 * p.sigma**2
    s2 = p.sigma**2
    hit = np.full((n, G), np.inf)
    count = np.searchsorted(log_barriers, y, side="right")
    for g in range(G):
        hit[count > g, g] = t[count > g]
    y, t = y.copy(), t.copy()

    idx = np.flatnonzero((count < G) & (t < t_end))
    yy, tt, te, cc = y[idx], t[idx], t_end[idx], count[idx]
    uu, ss = unit[idx], sign[idx]
    z_units = np.zeros(n_units)
    u_units = np.ones(n_units)
    alive = np.zeros(n_units, dtype=bool)
    while idx.size:
        h = np.minimum(dt, te - tt)
        alive[:] = False
        alive[uu] = True
        live = np.flatnonzero(alive)
        z_units[live] = rng.standard_normal(live.size)
        u_units[live] = _uniform(rng, live.size)
        step = nu * h + p.sigma * np.sqrt(h) * ss * z_units[uu]
        y_new = yy + step
        peak = 0.5 * (yy + y_new + np.sqrt(step * step - 2.0 * s2 * h * np.log(u_units[uu])))
        new_count = np.searchsorted(log_barriers, peak, side="right")
        jumped = np.flatnonzero(new_count > cc)
        if jumped.size:
            reps = new_count[jumped] - cc[jumped]
            rows = np.repeat(idx[jumped], reps)
            offsets = np.repeat(np.cumsum(reps) - reps, reps)
            cols = np.arange(reps.sum()) - offsets + np.repeat(cc[jumped], reps)
            hit[rows, cols] = np.repeat(tt[jumped] + 0.5 * h[jumped], reps)
        cc, yy, tt = new_count, y_new, tt + h
        done = (cc >= G) | (te - tt <= 1e-12)
        if np.any(done):
            y[idx[done]] = yy[done]
            t[idx[done]] = np.where(te[done] - tt[done] <= 1e-12, te[done], tt[done])
            keep = ~done
            idx, yy, tt, te, cc, uu, ss = idx[keep], yy[keep], tt[keep], te[keep], cc[keep], uu[keep], ss[keep]
    return hit, y, t


def _batch_payoffs(p, lams, discounts, grid, futures, x0, cfg, horizon, rng, n_units):
    members = 2 if cfg.antithetic else 1
    n = n_units * members
    unit = np.tile(np.arange(n_units), members)
    antithetic = np.repeat(np.arange(members) == 1, n_units)
    sign = np.where(antithetic, -1.0, 1.0)
    K = len(lams)
    eta, theta = p.eta, p.theta
    nu = p.alpha - 0.5 * p.sigma**2

    u_life = _uniform(rng, (n_units, K))
    z_term = rng.standard_normal(n_units)
    u_term = _uniform(rng, n_units)
    v_term = _uniform(rng, n_units)
    u_life = np.where(antithetic[:, None], 1.0 - u_life[unit], u_life[unit])
    lifetimes = -np.log(u_life) / np.asarray(lams, dtype=float)
    zt = sign * z_term[unit]
    ut = np.where(antithetic, 1.0 - u_term[unit], u_term[unit])
    vt = np.where(antithetic, 1.0 - v_term[unit], v_term[unit])

    log_grid = np.log(grid)
    y0 = math.log(x0)
    exercise_grid = eta * np.maximum(grid, x0) - theta

    def terminal_value(y, t, rows, levels, disc):
        # levels: 1-D array of log barriers; result has one column per level
        a = levels[None, :] - y[:, None]
        tau = first_passage_times(a, nu, p.sigma, zt[rows][:, None], ut[rows][:, None], vt[rows][:, None])
        t_hit = t[:, None] + tau
        x_ex = np.maximum(np.exp(levels)[None, :], np.exp(y)[:, None])
        with np.errstate(over="ignore", invalid="ignore"):
            val = disc * np.exp(-p.rho * t_hit) * (eta * x_ex - theta)
        return np.where(t_hit <= horizon, val, 0.0)

    if K == 0:
        return terminal_value(np.full(n, y0), np.zeros(n), np.arange(n), log_grid, discounts[0]), members

    t_end = np.minimum(lifetimes[:, 0], horizon)
    hit0, y_end, _ = _bridge_stage(
        np.full(n, y0), np.zeros(n), t_end, log_grid, unit, sign, rng, n_units, p, cfg.time_step
    )
    cont = np.zeros(n)
    rows = np.flatnonzero(np.isinf(hit0[:, -1]) & (lifetimes[:, 0] < horizon))
    y = y_end[rows]
    t = lifetimes[rows, 0].copy()
    for k in range(1, K):
        b = np.array([math.log(futures[k - 1])])
        t_stage_end = np.minimum(t + lifetimes[rows, k], horizon)
        hit, y_next, _ = _bridge_stage(y, t, t_stage_end, b, unit[rows], sign[rows], rng, n_units, p, cfg.time_step)
        th = hit[:, 0]
        ex = np.isfinite(th)
        x_ex = np.maximum(futures[k - 1], np.exp(y[ex]))
        cont[rows[ex]] = discounts[k] * np.exp(-p.rho * th[ex]) * (eta * x_ex - theta)
        survive = ~ex & (t + lifetimes[rows, k] < horizon)
        rows, y, t = rows[survive], y_next[survive], (t + lifetimes[rows, k])[survive]
    if rows.size:
        cont[rows] = terminal_value(y, t, rows, np.array([math.log(futures[K - 1])]), discounts[K])[:, 0]

    with np.errstate(over="ignore"):
        exercised = discounts[0] * np.exp(-p.rho * hit0) * exercise_grid[None, :]
    payoff = np.where(np.isfinite(hit0), exercised, cont[:, None])
    return payoff, members


def _run(p, lams, discounts, grid, futures, x0, cfg):
    if not x0 > 0:
        raise OracleConfigError("x0 must be > 0")
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0 or np.any(~(grid > 0)):
        raise OracleConfigError("thresholds must be a non-empty list of positive numbers")
    if len(futures) != len(lams):
        raise OracleConfigError(
            f"expected {len(lams)} future thresholds for this self structure, got {len(futures)}"
        )
    if any(not f > 0 for f in futures):
        raise OracleConfigError("future thresholds must be positive")
    order = np.argsort(grid, kind="stable")
    sorted_grid = grid[order]
    horizon = cfg.horizon_for(p)
    members = 2 if cfg.antithetic else 1
    total_units = cfg.num_paths // members
    per_batch = BATCH_PATHS // members
    moments = _Moments()
    for b, start in enumerate(range(0, total_units, per_batch)):
        n_units = min(per_batch, total_units - start)
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(cfg.seed), spawn_key=(b,))))
        payoff, m = _batch_payoffs(p, lams, discounts, sorted_grid, futures, x0, cfg, horizon, rng, n_units)
        unit_avg = payoff.reshape(m, n_units, -1).mean(axis=0)
        moments.add(unit_avg)
    mean, cov = moments.result()
    inv = np.empty_like(order)
    inv[order] = np.arange(order.size)
    return mean[inv], cov[np.ix_(inv, inv)]


def _structure(agent, d: DiscountSpec | None):
    agent = AgentType(agent)
    if agent is AgentType.CONSISTENT:
        return (), (1.0,)
    if d is None:
        raise OracleConfigError(f"{agent.value} agent needs a DiscountSpec")
    return d.stages(agent)


def simulate_policy_value(
    p: ModelParams,
    d: DiscountSpec | None,
    agent: AgentType | str,
    thresholds,
    x0: float,
    cfg: SimConfig,
) -> McEstimate:
    """Self 0's expected discounted net exit payoff when self ``n`` exits the
    first time the shock reaches ``thresholds[n]``."""
    lams, discounts = _structure(agent, d)
    thresholds = [float(v) for v in thresholds]
    if len(thresholds) != len(lams) + 1:
        raise OracleConfigError(
            f"{AgentType(agent).value} agent has {len(lams) + 1} selves, got {len(thresholds)} thresholds"
        )
    mean, cov = _run(p, lams, discounts, [thresholds[0]], thresholds[1:], x0, cfg)
    return McEstimate(float(mean[0]), float(math.sqrt(max(cov[0, 0], 0.0))), cfg.num_paths)


def grid_optimal_threshold(
    p: ModelParams,
    d: DiscountSpec | None,
    agent: AgentType | str,
    future_thresholds,
    x0: float,
    cfg: SimConfig,
    grid,
    reference: float | None = None,
) -> GridSearchResult:
    """Self 0's best threshold on ``grid`` with later selves' thresholds fixed.

    Every grid point is valued on the same simulated paths. If ``reference``
    is given it is valued on those paths too, and the paired standard error
    of its value gap to the argmax is reported.
    """
    lams, discounts = _structure(agent, d)
    grid = np.asarray(grid, dtype=float)
    pts = grid if reference is None else np.append(grid, reference)
    mean, cov = _run(p, lams, discounts, pts, [float(v) for v in future_thresholds], x0, cfg)
    G = grid.size
    means = mean[:G]
    stderrs = np.sqrt(np.maximum(np.diag(cov)[:G], 0.0))
    best = int(np.argmax(means))
    if reference is None:
        return GridSearchResult(grid, means, stderrs, best)
    ref_est = McEstimate(float(mean[G]), float(math.sqrt(max(cov[G, G], 0.0))), cfg.num_paths)
    gap = float(means[best] - mean[G])
    gap_var = cov[best, best] + cov[G, G] - 2.0 * cov[best, G]
    return GridSearchResult(
        grid, means, stderrs, best,
        reference=float(reference),
        reference_estimate=ref_est,
        gap=gap,
        gap_stderr=float(math.sqrt(max(gap_var, 0.0))),
    )


def default_threshold_grid(p: ModelParams, step: float = 0.05) -> np.ndarray:
    """Grid on [1.01 theta/eta, 1.05 x*] with the given spacing."""
    from .solvers import consistent_threshold

    lo = 1.01 * p.theta / p.eta
    hi = 1.05 * consistent_threshold(p)
    count = int(math.floor((hi - lo) / step)) + 1
    return lo + step * np.arange(count)


def nash_product_check(p: ModelParams, x: float, price_grid) -> float:
    """Grid argmax of the Nash product; the grid must bracket the optimum."""
    grid = np.asarray(price_grid, dtype=float)
    values = nash_product(p, x, grid)
    if not np.any(np.isfinite(values)):
        raise GridBracketError("no price on the grid leaves both parties a non-negative surplus")
    i = int(np.argmax(values))
    if not 0 < i < grid.size - 1:
        raise GridBracketError(
            f"argmax at grid edge {grid[i]:.10g}; grid [{grid[0]:.10g}, {grid[-1]:.10g}] "
            "does not bracket the Nash price"
        )
    return float(grid[i])
