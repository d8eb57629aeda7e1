"""Tsukamoto-type neural fuzzy inference network (TNFIN).

The network has five layers:

1. bell-shaped antecedent memberships ``1 / (1 + ((x - c) / a)^2)``
2. rule firing strengths, the product of one membership per input
3. normalized firing strengths
4. Tsukamoto defuzzification of each rule's monotone consequent
5. the sum of the layer-4 outputs

Rules enumerate the cartesian product of the per-input membership banks
in mixed-radix order with input 0 as the most significant digit.  Rules
with an even 0-based index carry a decreasing consequent, the others an
increasing one.

All heavy lifting goes through vectorized helpers that evaluate a batch
of flat parameter vectors at once; the per-network API is a thin layer
on top so that optimizers and the estimator share one code path.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field

import numpy as np

from .exceptions import (
    ConfigError,
    DegenerateInputError,
    DivergenceError,
    EmptyDatasetError,
    InputShapeError,
)

EPS_FIRE = 1e-12
MIN_SCALE_FRACTION = 1e-6

# Elements per temporary (batch, samples, rules) block in batched evaluation.
_CHUNK_ELEMENTS = 2_000_000


@dataclass(frozen=True)
class MembershipFunction:
    center: float
    width: float

    def __post_init__(self):
        if not self.width > 0:
            raise ConfigError(f"membership width must be positive, got {self.width}")

    def __call__(self, x):
        return eval_membership(self, x)


class Orientation(enum.Enum):
    DECREASING = -1
    INCREASING = 1

    @classmethod
    def for_rule(cls, k):
        """Orientation of 0-based rule ``k`` (odd in 1-based numbering decreases)."""
        return cls.DECREASING if k % 2 == 0 else cls.INCREASING


@dataclass(frozen=True)
class TsukamotoConsequent:
    center: float
    spread: float
    orientation: Orientation

    def __post_init__(self):
        if not self.spread > 0:
            raise ConfigError(f"consequent spread must be positive, got {self.spread}")


@dataclass(frozen=True)
class NetworkShape:
    """Structure of a network plus the value ranges used for positivity floors.

    ``feature_low``/``feature_high`` and ``target_low``/``target_high`` are the
    ranges the network was initialized over.  Decoded widths are floored at
    ``1e-6 * feature span`` and spreads at ``1e-6 * target span``.
    """

    inputs: int
    mfs_per_input: int
    feature_low: tuple = None
    feature_high: tuple = None
    target_low: float = 0.0
    target_high: float = 1.0

    def __post_init__(self):
        if self.inputs < 1 or self.mfs_per_input < 1:
            raise ConfigError("inputs and mfs_per_input must be >= 1")
        if self.feature_low is None:
            object.__setattr__(self, "feature_low", (0.0,) * self.inputs)
        if self.feature_high is None:
            object.__setattr__(self, "feature_high", (1.0,) * self.inputs)
        object.__setattr__(self, "feature_low", tuple(float(v) for v in self.feature_low))
        object.__setattr__(self, "feature_high", tuple(float(v) for v in self.feature_high))
        if len(self.feature_low) != self.inputs or len(self.feature_high) != self.inputs:
            raise ConfigError("feature range length must equal the number of inputs")

    @property
    def n_rules(self):
        return self.mfs_per_input ** self.inputs

    @property
    def n_antecedent(self):
        return self.inputs * self.mfs_per_input

    @property
    def n_params(self):
        return 2 * self.n_antecedent + 2 * self.n_rules

    @property
    def feature_span(self):
        span = np.asarray(self.feature_high) - np.asarray(self.feature_low)
        return np.where(span > 0, span, 1.0)

    @property
    def target_span(self):
        span = self.target_high - self.target_low
        return span if span > 0 else 1.0

    @property
    def min_width(self):
        return MIN_SCALE_FRACTION * self.feature_span

    @property
    def min_spread(self):
        return MIN_SCALE_FRACTION * self.target_span

    def rule_signs(self):
        return np.where(np.arange(self.n_rules) % 2 == 0, -1.0, 1.0)

    def rule_digits(self, k):
        """MF index per input selected by rule ``k``."""
        digits = []
        for _ in range(self.inputs):
            k, d = divmod(k, self.mfs_per_input)
            digits.append(d)
        return tuple(reversed(digits))


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


class TnfinNetwork:
    """Immutable TNFIN parameter set.

    Parameters
    ----------
    centers, widths : array of shape (inputs, mfs_per_input)
    rule_centers, rule_spreads : array of shape (mfs_per_input ** inputs,)
    shape : NetworkShape, optional
        Inferred from the array shapes when omitted.
    """

    def __init__(self, centers, widths, rule_centers, rule_spreads, shape=None):
        centers = _frozen(centers)
        widths = _frozen(widths)
        if centers.ndim != 2 or centers.shape != widths.shape:
            raise InputShapeError("centers and widths must be equal 2-D arrays")
        if shape is None:
            shape = NetworkShape(*centers.shape)
        if centers.shape != (shape.inputs, shape.mfs_per_input):
            raise InputShapeError("antecedent arrays do not match the network shape")
        rule_centers = _frozen(rule_centers)
        rule_spreads = _frozen(rule_spreads)
        if rule_centers.shape != (shape.n_rules,) or rule_spreads.shape != (shape.n_rules,):
            raise InputShapeError(
                f"expected {shape.n_rules} consequents, got {rule_centers.shape[0]}"
            )
        if not (np.all(widths > 0) and np.all(rule_spreads > 0)):
            raise ConfigError("widths and spreads must be strictly positive")
        self.centers = centers
        self.widths = widths
        self.rule_centers = rule_centers
        self.rule_spreads = rule_spreads
        self.shape = shape

    @classmethod
    def from_components(cls, mf_bank, consequents, shape=None):
        """Build from per-input lists of MembershipFunction and a consequent list."""
        centers = [[mf.center for mf in bank] for bank in mf_bank]
        widths = [[mf.width for mf in bank] for bank in mf_bank]
        for k, cons in enumerate(consequents):
            if cons.orientation is not Orientation.for_rule(k):
                raise ConfigError(f"rule {k} must have orientation {Orientation.for_rule(k).name}")
        return cls(
            centers,
            widths,
            [c.center for c in consequents],
            [c.spread for c in consequents],
            shape=shape,
        )

    @property
    def inputs(self):
        return self.shape.inputs

    @property
    def mfs_per_input(self):
        return self.shape.mfs_per_input

    @property
    def n_rules(self):
        return self.shape.n_rules

    @property
    def n_params(self):
        return self.shape.n_params

    @property
    def mf_bank(self):
        return [
            [MembershipFunction(float(c), float(a)) for c, a in zip(cs, ws)]
            for cs, ws in zip(self.centers, self.widths)
        ]

    @property
    def consequents(self):
        return [
            TsukamotoConsequent(float(c), float(s), Orientation.for_rule(k))
            for k, (c, s) in enumerate(zip(self.rule_centers, self.rule_spreads))
        ]

    def __eq__(self, other):
        if not isinstance(other, TnfinNetwork):
            return NotImplemented
        return self.shape == other.shape and np.array_equal(
            encode_params(self), encode_params(other)
        )

    __hash__ = None

    def __repr__(self):
        return (
            f"TnfinNetwork(inputs={self.inputs}, mfs_per_input={self.mfs_per_input}, "
            f"rules={self.n_rules})"
        )


@dataclass(frozen=True)
class ForwardTrace:
    memberships: np.ndarray
    firing: np.ndarray
    normalized: np.ndarray
    rule_outputs: np.ndarray
    output: float
    rule_values: np.ndarray = field(repr=False, default=None)


# ---------------------------------------------------------------------------
# Single-element operations


def eval_membership(mf, x):
    z = (np.asarray(x, dtype=float) - mf.center) / mf.width
    out = 1.0 / (1.0 + z * z)
    return float(out) if out.ndim == 0 else out


def normalize(firing):
    firing = np.asarray(firing, dtype=float)
    if np.any(firing < 0):
        raise InputShapeError("firing strengths must be nonnegative")
    total = firing.sum(axis=-1, keepdims=True)
    if np.any(total < EPS_FIRE):
        raise DegenerateInputError(f"total firing strength below {EPS_FIRE}")
    return firing / total


def defuzzify_rule(consequent, wbar):
    """Return ``(y_k, w̄·y_k)`` for one rule."""
    wb = min(max(float(wbar), EPS_FIRE), 1.0)
    y = consequent.center + consequent.orientation.value * consequent.spread * np.sqrt(
        1.0 / wb - 1.0
    )
    return float(y), float(wb * y)


# ---------------------------------------------------------------------------
# Vectorized layers.  Leading axis B indexes parameter sets.


def _memberships(centers, widths, X):
    # centers, widths: (B, I, M); X: (n, I) -> (B, n, I, M)
    z = (X[None, :, :, None] - centers[:, None]) / widths[:, None]
    return 1.0 / (1.0 + z * z)


def _firing(mu):
    # (B, n, I, M) -> (B, n, M**I), input 0 most significant.  Built from the
    # last input backwards so the long rule axis stays innermost.
    B, n, n_inputs, _ = mu.shape
    w = mu[:, :, -1, :]
    for i in range(n_inputs - 2, -1, -1):
        w = (mu[:, :, i, :, None] * w[:, :, None, :]).reshape(B, n, -1)
    return w


def _defuzzify(wbar, rule_centers, rule_spreads, signs):
    # wbar: (B, n, R); rule arrays: (B, R)
    wb = np.clip(wbar, EPS_FIRE, 1.0)
    y = rule_centers[:, None, :] + signs * rule_spreads[:, None, :] * np.sqrt(1.0 / wb - 1.0)
    return y, wb * y


def _split(vectors, shape):
    """Split (B, D) parameter vectors into clamped component arrays."""
    B = vectors.shape[0]
    na, R = shape.n_antecedent, shape.n_rules
    centers = vectors[:, :na].reshape(B, shape.inputs, shape.mfs_per_input)
    widths = vectors[:, na : 2 * na].reshape(B, shape.inputs, shape.mfs_per_input)
    widths = np.maximum(widths, shape.min_width[None, :, None])
    rule_centers = vectors[:, 2 * na : 2 * na + R]
    rule_spreads = np.maximum(vectors[:, 2 * na + R :], shape.min_spread)
    return centers, widths, rule_centers, rule_spreads


def _check_X(X, inputs):
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2 or X.shape[1] != inputs:
        raise InputShapeError(f"expected {inputs} features per sample, got shape {X.shape}")
    return X


def _outputs(components, X, shape):
    """Network outputs (B, n) and a (B, n) mask of degenerate samples.

    Uses ``w̄ * y_k = w̄ * c_k ± d_k * sqrt(w̄ * (1 - w̄))`` so the layer-4 sum
    reduces to two matrix-vector products per parameter set.
    """
    centers, widths, rule_centers, rule_spreads = components
    w = _firing(_memberships(centers, widths, X))
    total = w.sum(axis=-1, keepdims=True)
    degenerate = total[..., 0] < EPS_FIRE
    wb = w / np.where(degenerate[..., None], 1.0, total)
    np.clip(wb, EPS_FIRE, 1.0, out=wb)
    root = np.sqrt(wb * (1.0 - wb))
    signed = shape.rule_signs() * rule_spreads
    out = np.matmul(wb, rule_centers[:, :, None])[..., 0]
    out += np.matmul(root, signed[:, :, None])[..., 0]
    return out, degenerate


def _chunk(B, n, R):
    return max(1, _CHUNK_ELEMENTS // max(1, n * R))


def batch_outputs(vectors, shape, X):
    """Outputs of many parameter vectors on ``X``; degenerate samples give NaN."""
    vectors = np.atleast_2d(np.asarray(vectors, dtype=float))
    if vectors.shape[1] != shape.n_params:
        raise InputShapeError(f"parameter vectors must have length {shape.n_params}")
    X = _check_X(X, shape.inputs)
    step = _chunk(vectors.shape[0], X.shape[0], shape.n_rules)
    out = np.empty((vectors.shape[0], X.shape[0]))
    for start in range(0, vectors.shape[0], step):
        comp = _split(vectors[start : start + step], shape)
        o, bad = _outputs(comp, X, shape)
        o[bad] = np.nan
        out[start : start + step] = o
    return out


def batch_loss(vectors, shape, X, y):
    """Sum-of-squares loss ``0.5 * sum((y - O5)^2)`` for each parameter vector.

    Vectors producing degenerate firing or non-finite outputs get ``inf``.
    """
    y = np.asarray(y, dtype=float)
    if y.size == 0:
        raise EmptyDatasetError("loss needs at least one sample")
    out = batch_outputs(vectors, shape, X)
    with np.errstate(over="ignore", invalid="ignore"):
        e = 0.5 * np.sum((y[None, :] - out) ** 2, axis=1)
    e[~np.isfinite(e)] = np.inf
    return e


# ---------------------------------------------------------------------------
# Network-level API


def firing_strengths(net, x):
    x = _check_X(x, net.inputs)
    mu = _memberships(net.centers[None], net.widths[None], x)
    w = _firing(mu)[0]
    return w[0] if w.shape[0] == 1 else w


def forward(net, x):
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise InputShapeError("forward expects a single feature vector")
    X = _check_X(x, net.inputs)
    mu = _memberships(net.centers[None], net.widths[None], X)
    w = _firing(mu)
    wbar = normalize(w)
    y, o4 = _defuzzify(
        wbar, net.rule_centers[None], net.rule_spreads[None], net.shape.rule_signs()
    )
    return ForwardTrace(
        memberships=mu[0, 0],
        firing=w[0, 0],
        normalized=wbar[0, 0],
        rule_outputs=o4[0, 0],
        output=float(o4[0, 0].sum()),
        rule_values=y[0, 0],
    )


def predict(net, X):
    """Network output for each row of ``X``."""
    X = _check_X(X, net.inputs)
    comp = (net.centers[None], net.widths[None], net.rule_centers[None], net.rule_spreads[None])
    out, bad = _outputs(comp, X, net.shape)
    if bad.any():
        raise DegenerateInputError(
            f"total firing strength below {EPS_FIRE} for {int(bad.sum())} sample(s)"
        )
    return out[0]


def loss(net, X, y):
    """Total squared-error loss ``0.5 * sum((y - O5)^2)``."""
    y = np.asarray(y, dtype=float).ravel()
    if y.size == 0:
        raise EmptyDatasetError("loss needs at least one sample")
    X = _check_X(X, net.inputs)
    if X.shape[0] != y.size:
        raise InputShapeError("X and y have different numbers of samples")
    r = y - predict(net, X)
    return float(0.5 * np.sum(r * r))


def mse(net, X, y):
    """Mean squared error, ``mean((y - O5)^2)``."""
    y = np.asarray(y, dtype=float).ravel()
    return 2.0 * loss(net, X, y) / y.size


# ---------------------------------------------------------------------------
# Parameter codec


def encode_params(net):
    """Flat vector: MF centers, MF widths, rule centers, rule spreads."""
    return np.concatenate(
        [net.centers.ravel(), net.widths.ravel(), net.rule_centers, net.rule_spreads]
    )


def decode_params(vector, shape):
    vector = np.asarray(vector, dtype=float)
    if vector.ndim != 1 or vector.size != shape.n_params:
        raise InputShapeError(
            f"parameter vector must have length {shape.n_params}, got {vector.shape}"
        )
    centers, widths, rc, rs = _split(vector[None, :], shape)
    return TnfinNetwork(centers[0], widths[0], rc[0], rs[0], shape=shape)


# ---------------------------------------------------------------------------
# Construction


def init_network(X, mfs_per_input=3, target_range=(0.0, 1.0), random_state=None):
    """Initialize a network over the training feature ranges.

    MF centers are evenly spaced over each feature's min-max range with
    width ``span / (2 * (mfs_per_input - 1))``; consequent centers are
    uniform over ``target_range`` and spreads a quarter of its span.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] == 0:
        raise EmptyDatasetError("initialization needs a nonempty 2-D feature array")
    rng = np.random.default_rng(random_state)
    lo, hi = X.min(axis=0), X.max(axis=0)
    shape = NetworkShape(
        X.shape[1],
        mfs_per_input,
        feature_low=lo,
        feature_high=hi,
        target_low=target_range[0],
        target_high=target_range[1],
    )
    span = shape.feature_span
    if mfs_per_input == 1:
        centers = ((lo + hi) / 2.0)[:, None]
        widths = span[:, None]
    else:
        frac = np.linspace(0.0, 1.0, mfs_per_input)
        centers = lo[:, None] + frac[None, :] * (hi - lo)[:, None]
        widths = np.repeat((span / (2.0 * (mfs_per_input - 1)))[:, None], mfs_per_input, axis=1)
    rule_centers = rng.uniform(target_range[0], target_range[1], shape.n_rules)
    rule_spreads = np.full(shape.n_rules, shape.target_span / 4.0)
    return TnfinNetwork(centers, widths, rule_centers, rule_spreads, shape=shape)


def rule_table(shape):
    """Rows of MF indices, one per rule, in rule order."""
    return list(itertools.product(range(shape.mfs_per_input), repeat=shape.inputs))


# ---------------------------------------------------------------------------
# Gradient-descent baseline


def fd_steps(p, rel_step=1e-6):
    return rel_step * np.maximum(1.0, np.abs(p))


def fd_gradient(batch_fun, p, rel_step=1e-6):
    """Central finite-difference gradient of a batched scalar function.

    ``batch_fun`` maps a (B, D) array of points to B values.  Step sizes are
    ``rel_step * max(1, |p_i|)``.
    """
    p = np.asarray(p, dtype=float)
    h = fd_steps(p, rel_step)
    eye = np.diag(h)
    values = batch_fun(np.concatenate([p + eye, p - eye]))
    return (values[: p.size] - values[p.size :]) / (2.0 * h)


def train_gd(net, X, y, learning_rate=0.01, epochs=100, rel_step=1e-6, callback=None):
    """Full-batch gradient descent on every parameter.

    Returns the trained network and the loss curve (length ``epochs + 1``,
    index 0 being the starting loss).  ``callback(epoch, params)`` runs after
    every epoch with the current flat parameter vector.
    """
    if learning_rate < 0:
        raise ConfigError("learning_rate must be nonnegative")
    X = _check_X(X, net.inputs)
    y = np.asarray(y, dtype=float).ravel()
    if y.size == 0:
        raise EmptyDatasetError("training needs at least one sample")
    shape = net.shape
    p = encode_params(net)

    def fun(vectors):
        return batch_loss(vectors, shape, X, y)

    curve = [float(fun(p[None])[0])]
    if not np.isfinite(curve[0]):
        raise DivergenceError(0, curve[0])
    for epoch in range(1, epochs + 1):
        if learning_rate > 0:
            grad = fd_gradient(fun, p, rel_step)
            if not np.all(np.isfinite(grad)):
                raise DivergenceError(epoch, float("nan"))
            p = encode_params(decode_params(p - learning_rate * grad, shape))
        e = float(fun(p[None])[0])
        if not np.isfinite(e):
            raise DivergenceError(epoch, e)
        curve.append(e)
        if callback is not None:
            callback(epoch, p.copy())
    return decode_params(p, shape), np.array(curve)
