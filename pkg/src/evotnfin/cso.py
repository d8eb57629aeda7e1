"""Cat Swarm Optimization (CSO) for box-bounded minimization.

Each round assigns every cat to seeking or tracing mode.  Seeking cats
sample mutated copies of their position and pick one by fitness-weighted
roulette; tracing cats move along a velocity pulled toward the best
position found so far.  The best-so-far solution is kept across rounds.

Randomness is split into substreams keyed on (seed, iteration, epoch, cat),
so evaluating a round's candidates in one batch or one by one gives the
same result.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .exceptions import ConfigError, EvaluationError
from .network import batch_loss, decode_params, encode_params

_TAG_INIT, _TAG_STEP, _TAG_MODES, _TAG_RANDOM = 0, 1, 2, 3
_MAX_REINIT = 10


class Mode(enum.Enum):
    SEEKING = "seeking"
    TRACING = "tracing"


@dataclass
class Cat:
    position: np.ndarray
    velocity: np.ndarray
    fitness: float = math.inf
    mode: Mode = Mode.SEEKING


@dataclass(frozen=True)
class CsoConfig:
    """CSO hyperparameters.

    ``inertia`` is either the string ``"adaptive"`` (linearly decaying weight
    starting at ``w_start + 0.5``) or a constant weight; ``1.0`` reproduces
    the plain velocity update without inertia damping.
    """

    smp: int = 3
    srd: float = 0.10
    cdc: float = 1.0
    spc: bool = True
    mixture_ratio: float = 0.5
    c1: float = 2.05
    w_start: float = 0.15
    inertia: object = "adaptive"
    iterations: int = 200
    population: int = 40
    epochs_per_iteration: int = 5
    seed: int = 0
    vmax_fraction: float = 0.2

    def __post_init__(self):
        if self.smp < 1:
            raise ConfigError("smp must be >= 1")
        for name in ("cdc", "mixture_ratio"):
            v = getattr(self, name)
            if not 0 < v <= 1:
                raise ConfigError(f"{name} must lie in (0, 1], got {v}")
        # srd = 0 is allowed: it freezes seeking cats, which is a useful fixed point
        if not 0 <= self.srd <= 1:
            raise ConfigError(f"srd must lie in [0, 1], got {self.srd}")
        if self.population < 2:
            raise ConfigError("population must be >= 2")
        if not self.c1 > 0:
            raise ConfigError("c1 must be positive")
        if self.iterations < 1 or self.epochs_per_iteration < 1:
            raise ConfigError("iterations and epochs_per_iteration must be >= 1")
        if self.inertia != "adaptive":
            try:
                object.__setattr__(self, "inertia", float(self.inertia))
            except (TypeError, ValueError):
                raise ConfigError(f"inertia must be 'adaptive' or a number, got {self.inertia!r}")

    @property
    def adaptive(self):
        return self.inertia == "adaptive"

    def weight(self, iteration):
        if self.adaptive:
            return adaptive_inertia(iteration, self.iterations, self.w_start)
        return self.inertia


@dataclass
class CsoReport:
    best_position: np.ndarray
    best_fitness: float
    fitness_curve: np.ndarray
    evaluations: int
    initial_fitness: float = math.nan
    initial_best_position: np.ndarray = field(default=None, repr=False)
    weights: np.ndarray = field(default=None, repr=False)


def adaptive_inertia(iteration, max_iterations, w_start=0.15):
    """Inertia weight ``w_start + (i_max - i) / (2 * i_max)``."""
    return w_start + (max_iterations - iteration) / (2.0 * max_iterations)


def _rng(seed, *key):
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=key))


def _as_bounds(bounds, dimension):
    lo, hi = bounds
    lo = np.broadcast_to(np.asarray(lo, dtype=float), (dimension,)).copy()
    hi = np.broadcast_to(np.asarray(hi, dtype=float), (dimension,)).copy()
    if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
        raise ConfigError("bounds must be finite")
    if np.any(hi < lo):
        raise ConfigError("upper bounds must not be below lower bounds")
    return lo, hi


def selection_probabilities(fitness):
    """Seeking-mode selection scores for a minimization problem.

    ``|FS_i - FS_max| / (FS_max - FS_min)`` over finite candidates; all ones
    when every finite value is equal.  Non-finite candidates score 0.
    """
    fitness = np.asarray(fitness, dtype=float)
    finite = np.isfinite(fitness)
    if not finite.any():
        raise EvaluationError("every seeking candidate has non-finite fitness")
    p = np.zeros_like(fitness)
    fs = fitness[finite]
    fs_max, fs_min = fs.max(), fs.min()
    if fs_max == fs_min:
        p[finite] = 1.0
    else:
        p[finite] = np.abs(fs - fs_max) / (fs_max - fs_min)
    return p


def _roulette(p, rng):
    total = p.sum()
    if total <= 0:
        p = np.ones_like(p)
        total = p.size
    return int(rng.choice(p.size, p=p / total))


def _seeking_candidates(position, config, lo, hi, rng):
    dim = position.size
    n_copies = config.smp - 1 if config.spc else config.smp
    n_change = math.ceil(config.cdc * dim)
    width = np.where(np.isfinite(hi - lo), hi - lo, 1.0)
    copies = []
    for _ in range(n_copies):
        idx = np.arange(dim) if n_change >= dim else rng.choice(dim, n_change, replace=False)
        u = rng.uniform(-config.srd, config.srd, idx.size)
        new = position.copy()
        old = new[idx]
        # zeros would stay zero under a relative perturbation
        new[idx] = old * (1.0 + u) + np.where(old == 0.0, u * 1e-3 * width[idx], 0.0)
        copies.append(np.clip(new, lo, hi))
    if config.spc:
        copies.append(position.copy())
    return np.array(copies)


def _tracing_move(cat, best, config, iteration, lo, hi, rng):
    r1 = rng.uniform(0.0, 1.0, cat.position.size)
    v = config.weight(iteration) * cat.velocity + r1 * config.c1 * (best - cat.position)
    vmax = config.vmax_fraction * (hi - lo)
    v = np.clip(v, -vmax, vmax)
    x = np.clip(cat.position + v, lo, hi)
    return x, v


def _evaluator(fitness_fn, batch_fitness_fn):
    if batch_fitness_fn is not None:
        return lambda pts: np.asarray(batch_fitness_fn(pts), dtype=float)
    return lambda pts: np.array([float(fitness_fn(p)) for p in pts])


def _open_bounds(bounds, dimension):
    if bounds is None:
        return np.full(dimension, -np.inf), np.full(dimension, np.inf)
    return _as_bounds(bounds, dimension)


def seeking_step(cat, fitness_fn, config, rng, bounds=None):
    """Move a seeking cat to one of its mutated copies chosen by roulette."""
    if cat.mode is not Mode.SEEKING:
        raise ValueError("seeking_step needs a cat in seeking mode")
    lo, hi = _open_bounds(bounds, cat.position.size)
    cands = _seeking_candidates(cat.position, config, lo, hi, rng)
    fs = np.array([float(fitness_fn(c)) for c in cands])
    k = _roulette(selection_probabilities(fs), rng)
    return replace(cat, position=cands[k], fitness=float(fs[k]))


def tracing_step(cat, best, config, iteration, rng, bounds=None, fitness_fn=None):
    """Velocity update toward ``best`` followed by a position update.

    The fitness is refreshed only when ``fitness_fn`` is given.
    """
    if cat.mode is not Mode.TRACING:
        raise ValueError("tracing_step needs a cat in tracing mode")
    best = np.asarray(best, dtype=float)
    if best.shape != cat.position.shape:
        raise ValueError("best position has the wrong dimension")
    lo, hi = _open_bounds(bounds, best.size)
    x, v = _tracing_move(cat, best, config, iteration, lo, hi, rng)
    fitness = float(fitness_fn(x)) if fitness_fn is not None else cat.fitness
    return replace(cat, position=x, velocity=v, fitness=fitness)


def tracing_count(population, mixture_ratio):
    return int(math.floor(mixture_ratio * population + 0.5))


def assign_modes(cats, mixture_ratio, rng):
    """Flag ``round(MR * population)`` randomly chosen cats as tracing."""
    n = len(cats)
    if n < 2:
        raise ConfigError("population must be >= 2")
    tracing = set(rng.choice(n, tracing_count(n, mixture_ratio), replace=False).tolist())
    return [replace(c, mode=Mode.TRACING if i in tracing else Mode.SEEKING) for i, c in enumerate(cats)]


def minimize(
    fitness_fn,
    dimension,
    bounds,
    config=None,
    batch_fitness_fn=None,
    initial_position=None,
    callback=None,
):
    """Minimize ``fitness_fn`` over a box with CSO.

    Parameters
    ----------
    fitness_fn : callable
        Maps a position vector to a float.  May be None when
        ``batch_fitness_fn`` is given.
    dimension : int
    bounds : (low, high)
        Scalars or per-dimension arrays; used for initialization, position
        clamping and the velocity limit (``vmax_fraction`` of the width).
    config : CsoConfig
    batch_fitness_fn : callable, optional
        Maps a (B, dimension) array to B fitness values; used instead of
        looping over ``fitness_fn``.
    initial_position : array, optional
        Placed as cat 0 instead of a random start.
    callback : callable, optional
        Called as ``callback(iteration, best_position, best_fitness)`` after
        every outer iteration.
    """
    config = config or CsoConfig()
    if dimension < 1:
        raise ConfigError("dimension must be >= 1")
    if fitness_fn is None and batch_fitness_fn is None:
        raise ConfigError("a fitness function is required")
    lo, hi = _as_bounds(bounds, dimension)
    evaluate = _evaluator(fitness_fn, batch_fitness_fn)
    seed = config.seed
    n_evals = 0

    positions = np.empty((config.population, dimension))
    for i in range(config.population):
        positions[i] = _rng(seed, _TAG_INIT, i, 0).uniform(lo, hi)
    if initial_position is not None:
        positions[0] = np.asarray(initial_position, dtype=float)
    fitness = evaluate(positions)
    n_evals += config.population
    for i in range(config.population):
        attempt = 0
        while not np.isfinite(fitness[i]):
            attempt += 1
            if attempt > _MAX_REINIT:
                raise EvaluationError(f"cat {i} has non-finite fitness after {_MAX_REINIT} restarts")
            positions[i] = _rng(seed, _TAG_INIT, i, attempt).uniform(lo, hi)
            fitness[i] = evaluate(positions[i][None])[0]
            n_evals += 1

    cats = [
        Cat(positions[i].copy(), np.zeros(dimension), float(fitness[i]))
        for i in range(config.population)
    ]
    b = int(np.argmin(fitness))
    best_pos, best_fit = cats[b].position.copy(), cats[b].fitness
    initial_fitness = best_fit
    initial_best = best_pos.copy()
    curve = []
    weights = []

    for it in range(config.iterations):
        weights.append(config.weight(it))
        for ep in range(config.epochs_per_iteration):
            cats = assign_modes(cats, config.mixture_ratio, _rng(seed, _TAG_MODES, it, ep))
            rngs = [_rng(seed, _TAG_STEP, it, ep, i) for i in range(len(cats))]
            blocks, owners = [], []
            moves = {}
            for i, cat in enumerate(cats):
                if cat.mode is Mode.SEEKING:
                    pts = _seeking_candidates(cat.position, config, lo, hi, rngs[i])
                else:
                    x, v = _tracing_move(cat, best_pos, config, it, lo, hi, rngs[i])
                    moves[i] = v
                    pts = x[None]
                blocks.append(pts)
                owners.append((i, len(pts)))
            points = np.concatenate(blocks)
            values = evaluate(points)
            n_evals += len(points)

            start = 0
            new_cats = []
            for (i, count), pts in zip(owners, blocks):
                fs = values[start : start + count]
                start += count
                cat = cats[i]
                if cat.mode is Mode.SEEKING:
                    k = _roulette(selection_probabilities(fs), rngs[i])
                    new_cats.append(replace(cat, position=pts[k], fitness=float(fs[k])))
                else:
                    new_cats.append(
                        replace(cat, position=pts[0], velocity=moves[i], fitness=float(fs[0]))
                    )
            cats = new_cats
            fits = np.array([c.fitness for c in cats])
            b = int(np.argmin(fits))
            if fits[b] < best_fit:
                best_fit = float(fits[b])
                best_pos = cats[b].position.copy()
        curve.append(best_fit)
        if callback is not None:
            callback(it, best_pos.copy(), best_fit)

    return CsoReport(
        best_position=best_pos,
        best_fitness=best_fit,
        fitness_curve=np.array(curve),
        evaluations=n_evals,
        initial_fitness=initial_fitness,
        initial_best_position=initial_best,
        weights=np.array(weights),
    )


def random_search(fitness_fn, dimension, bounds, evaluations, seed=0, batch_fitness_fn=None):
    """Uniform random sampling baseline with a fixed evaluation budget."""
    lo, hi = _as_bounds(bounds, dimension)
    pts = _rng(seed, _TAG_RANDOM).uniform(lo, hi, size=(evaluations, dimension))
    values = _evaluator(fitness_fn, batch_fitness_fn)(pts)
    k = int(np.argmin(values))
    return pts[k], float(values[k])


def tnfin_bounds(net, margin=0.5):
    """Per-parameter search box around the network's initialization ranges.

    Interval-initialized parameters (MF centers, rule centers) get their range
    widened by ``margin`` of its span on each side; scalar-initialized ones
    (widths, spreads) get ``[(1 - margin) v0, (1 + margin) v0]``.  The box is
    grown to contain the network's current values.
    """
    shape = net.shape
    lo_f = np.asarray(shape.feature_low)
    hi_f = np.asarray(shape.feature_high)
    span = shape.feature_span
    m = shape.mfs_per_input
    w0 = span if m == 1 else span / (2.0 * (m - 1))
    t_lo, t_hi, t_span = shape.target_low, shape.target_high, shape.target_span
    s0 = t_span / 4.0
    R = shape.n_rules
    low = np.concatenate([
        np.repeat(lo_f - margin * span, m),
        np.repeat((1 - margin) * w0, m),
        np.full(R, t_lo - margin * t_span),
        np.full(R, (1 - margin) * s0),
    ])
    high = np.concatenate([
        np.repeat(hi_f + margin * span, m),
        np.repeat((1 + margin) * w0, m),
        np.full(R, t_hi + margin * t_span),
        np.full(R, (1 + margin) * s0),
    ])
    p = encode_params(net)
    return np.minimum(low, p), np.maximum(high, p)


def train_tnfin_cso(net, X, y, config=None, callback=None):
    """Train every TNFIN parameter with CSO on the sum-of-squares loss.

    The starting network is placed in the swarm, so the result never has a
    higher training loss than ``net``.
    """
    config = config or CsoConfig()
    shape = net.shape
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    report = minimize(
        None,
        shape.n_params,
        tnfin_bounds(net),
        config,
        batch_fitness_fn=lambda P: batch_loss(P, shape, X, y),
        initial_position=encode_params(net),
        callback=callback,
    )
    return decode_params(report.best_position, shape), report
