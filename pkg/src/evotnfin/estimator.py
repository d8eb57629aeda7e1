"""scikit-learn compatible TNFIN classifier.

``TnfinClassifier`` trains one single-output network per class on 1/0
targets (one-vs-rest) and predicts the class whose network responds most
strongly.  Training uses CSO (``solver="cso"``) or finite-difference
gradient descent (``solver="gd"``).
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.preprocessing import MinMaxScaler
from sklearn.utils.multiclass import unique_labels
from sklearn.utils.validation import check_is_fitted, validate_data

from .cso import CsoConfig, train_tnfin_cso
from .exceptions import ConfigError
from .metrics import decide_classes
from .network import batch_outputs, encode_params, init_network, predict, train_gd

SOLVERS = ("cso", "gd")


class TnfinClassifier(ClassifierMixin, BaseEstimator):
    """One-vs-rest Tsukamoto neuro-fuzzy classifier.

    Parameters
    ----------
    solver : {"cso", "gd"}
    mfs_per_input : int
        Membership functions per feature; the rule count is
        ``mfs_per_input ** n_features``.
    inertia : "adaptive" or float
        CSO tracing-mode inertia weight.
    smp, srd, cdc, spc, mixture_ratio, c1, w_start, iterations, population,
    epochs_per_iteration, vmax_fraction :
        CSO settings, see :class:`evotnfin.cso.CsoConfig`.
    learning_rate, gd_epochs :
        Gradient-descent settings.
    scale_features : bool
        Min-max scale features with ranges learned in ``fit``.
    target_range : (float, float)
        Range consequent centers are drawn from at initialization.
    random_state : int
    """

    def __init__(
        self,
        solver="cso",
        mfs_per_input=3,
        inertia="adaptive",
        smp=3,
        srd=0.10,
        cdc=1.0,
        spc=True,
        mixture_ratio=0.5,
        c1=2.05,
        w_start=0.15,
        iterations=200,
        population=40,
        epochs_per_iteration=5,
        vmax_fraction=0.2,
        learning_rate=1e-3,
        gd_epochs=100,
        scale_features=True,
        target_range=(-0.25, 1.25),
        random_state=0,
    ):
        self.solver = solver
        self.mfs_per_input = mfs_per_input
        self.inertia = inertia
        self.smp = smp
        self.srd = srd
        self.cdc = cdc
        self.spc = spc
        self.mixture_ratio = mixture_ratio
        self.c1 = c1
        self.w_start = w_start
        self.iterations = iterations
        self.population = population
        self.epochs_per_iteration = epochs_per_iteration
        self.vmax_fraction = vmax_fraction
        self.learning_rate = learning_rate
        self.gd_epochs = gd_epochs
        self.scale_features = scale_features
        self.target_range = target_range
        self.random_state = random_state

    def cso_config(self, seed=None):
        return CsoConfig(
            smp=self.smp,
            srd=self.srd,
            cdc=self.cdc,
            spc=self.spc,
            mixture_ratio=self.mixture_ratio,
            c1=self.c1,
            w_start=self.w_start,
            inertia=self.inertia,
            iterations=self.iterations,
            population=self.population,
            epochs_per_iteration=self.epochs_per_iteration,
            seed=self.random_state if seed is None else seed,
            vmax_fraction=self.vmax_fraction,
        )

    def _scale(self, X):
        return self.scaler_.transform(X) if self.scaler_ is not None else X

    def fit(self, X, y, eval_set=None):
        """Train one network per class.

        ``eval_set=(X_val, y_val)`` additionally records the validation MSE
        after every CSO iteration or GD epoch in ``curves_``.
        """
        if self.solver not in SOLVERS:
            raise ConfigError(f"solver must be one of {SOLVERS}, got {self.solver!r}")
        X, y = validate_data(self, X, y)
        self.classes_ = unique_labels(y)
        self.scaler_ = MinMaxScaler().fit(X) if self.scale_features else None
        Xs = self._scale(X)
        if eval_set is not None:
            Xv = self._scale(np.asarray(eval_set[0], dtype=float))
            yv = np.asarray(eval_set[1])

        self.initial_networks_, self.networks_, self.reports_ = [], [], []
        train_curves, val_curves = [], []
        for k, label in enumerate(self.classes_):
            target = (y == label).astype(float)
            seed = np.random.SeedSequence(self.random_state, spawn_key=(k,))
            net0 = init_network(
                Xs, self.mfs_per_input, self.target_range, random_state=np.random.default_rng(seed)
            )
            history = []
            if self.solver == "cso":
                cfg = self.cso_config(seed=int(seed.generate_state(1)[0]))
                net, report = train_tnfin_cso(
                    net0, Xs, target, cfg, callback=lambda i, pos, fit: history.append(pos)
                )
                history.insert(0, report.initial_best_position)
                train = np.concatenate([[2.0 * report.initial_fitness], 2.0 * report.fitness_curve])
                train /= target.size
            else:
                net, curve = train_gd(
                    net0,
                    Xs,
                    target,
                    self.learning_rate,
                    self.gd_epochs,
                    callback=lambda epoch, p: history.append(p),
                )
                history.insert(0, encode_params(net0))
                report = curve
                train = 2.0 * curve / target.size
            self.initial_networks_.append(net0)
            self.networks_.append(net)
            self.reports_.append(report)
            train_curves.append(train)
            if eval_set is not None:
                tv = (yv == label).astype(float)
                out = batch_outputs(np.array(history), net.shape, Xv)
                val_curves.append(np.mean((tv[None, :] - out) ** 2, axis=1))
        self.curves_ = {"train_mse": np.mean(train_curves, axis=0)}
        if eval_set is not None:
            self.curves_["test_mse"] = np.mean(val_curves, axis=0)
        return self

    def decision_function(self, X):
        """Network outputs, one column per class."""
        check_is_fitted(self, "networks_")
        X = self._validated(X)
        return np.column_stack([predict(net, X) for net in self.networks_])

    def initial_decision_function(self, X):
        """Outputs of the untrained (initialized) networks."""
        check_is_fitted(self, "networks_")
        X = self._validated(X)
        return np.column_stack([predict(net, X) for net in self.initial_networks_])

    def _validated(self, X):
        return self._scale(validate_data(self, X, reset=False))

    def predict(self, X):
        scores = self.decision_function(X)
        return self.classes_[decide_classes(scores)]

    def residuals(self, X, y):
        """One-vs-rest target minus output, shape (n_samples, n_classes)."""
        y = np.asarray(y)
        targets = (y[:, None] == self.classes_[None, :]).astype(float)
        return targets - self.decision_function(X)

    def mse(self, X, y, initial=False):
        """Mean squared one-vs-rest error over all samples and classes."""
        y = np.asarray(y)
        targets = (y[:, None] == self.classes_[None, :]).astype(float)
        out = self.initial_decision_function(X) if initial else self.decision_function(X)
        return float(np.mean((targets - out) ** 2))
