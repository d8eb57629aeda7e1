"""Multi-cycle experiment runner and artifact writer.

A run loads a labeled feature table (from a feature CSV or an image tree),
then for every cycle draws a stratified train/test split, trains each model
variant as a one-vs-rest TNFIN classifier, and records per-class metrics,
MSE curves and test residuals.  Results are aggregated over cycles,
compared with Kruskal-Wallis and Mann-Whitney U tests, and written as CSV.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import math
import os
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from sklearn.model_selection import train_test_split

from .cso import CsoConfig
from .estimator import TnfinClassifier
from .exceptions import ConfigError, DataError, StratificationError, TnfinError
from .glcm import featurize_dataset, list_image_dataset, read_feature_csv
from .metrics import METRIC_NAMES, MetricSet, per_class_metrics
from .stats import kruskal_wallis, mann_whitney_u

VARIANTS = ("gd", "cso-constant", "cso-adaptive")
VARIANT_TITLES = {
    "gd": "TNFIN",
    "cso-constant": "Evolving-TNFIN constant w",
    "cso-adaptive": "Evolving-TNFIN adaptive w",
}
HIST_BINS = 20
LONG_RUN_ITERATIONS = 500

OUTPUT_FILES = (
    "metrics.csv",
    "metrics_per_cycle.csv",
    "stats_kw.csv",
    "stats_mwu.csv",
    "mse_curves.csv",
    "error_hist.csv",
    "config_echo.txt",
)


@dataclass
class ExperimentConfig:
    data: str = ""
    output_dir: str = "results"
    seed: int = 0
    cycles: int = 10
    train_fraction: float = 0.8
    sample_cap: int = 1000
    variants: tuple = VARIANTS
    binary_positive: str = ""
    mfs_per_input: int = 3
    scale_features: bool = True
    constant_weight: float = 0.9
    gd_learning_rate: float = 1e-3
    gd_epochs: int = 0
    long_run: bool = False
    image_side: int = 224
    levels: int = 8
    offset: tuple = (0, 1)
    smp: int = 3
    srd: float = 0.10
    cdc: float = 1.0
    spc: bool = True
    mixture_ratio: float = 0.5
    c1: float = 2.05
    w_start: float = 0.15
    iterations: int = 200
    population: int = 40
    epochs_per_iteration: int = 5
    vmax_fraction: float = 0.2

    def __post_init__(self):
        if isinstance(self.variants, str):
            self.variants = tuple(v.strip() for v in self.variants.split(",") if v.strip())
        else:
            self.variants = tuple(self.variants)
        unknown = set(self.variants) - set(VARIANTS)
        if unknown or not self.variants:
            raise ConfigError(f"variants must be a nonempty subset of {VARIANTS}, got {self.variants}")
        self.variants = tuple(v for v in VARIANTS if v in self.variants)
        if isinstance(self.offset, str):
            self.offset = tuple(int(v) for v in self.offset.split(","))
        self.offset = tuple(self.offset)
        if not 0 < self.train_fraction < 1:
            raise ConfigError("train_fraction must lie in (0, 1)")
        if self.cycles < 1:
            raise ConfigError("cycles must be >= 1")
        if self.sample_cap < 1:
            raise ConfigError("sample_cap must be >= 1")
        if self.long_run:
            self.iterations = LONG_RUN_ITERATIONS
        self.cso_config(0)

    def cso_config(self, seed):
        return CsoConfig(
            smp=self.smp,
            srd=self.srd,
            cdc=self.cdc,
            spc=self.spc,
            mixture_ratio=self.mixture_ratio,
            c1=self.c1,
            w_start=self.w_start,
            iterations=self.iterations,
            population=self.population,
            epochs_per_iteration=self.epochs_per_iteration,
            seed=seed,
            vmax_fraction=self.vmax_fraction,
        )

    def matched_gd_epochs(self, n_params):
        """GD epochs whose loss evaluations match one CSO training run."""
        if self.gd_epochs > 0:
            return self.gd_epochs
        return max(1, cso_evaluations(self.cso_config(0)) // (2 * n_params + 1))

    def as_text(self):
        lines = []
        for f in dataclasses.fields(self):
            lines.append(f"{f.name} = {_format_value(getattr(self, f.name))}")
        return "\n".join(lines) + "\n"


def cso_evaluations(config):
    """Fitness evaluations of one CSO run (without reinitialization retries)."""
    n_trace = math.floor(config.mixture_ratio * config.population + 0.5)
    n_seek = config.population - n_trace
    per_round = n_trace + n_seek * config.smp
    return config.population + config.iterations * config.epochs_per_iteration * per_round


def _format_value(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, tuple):
        return ",".join(str(x) for x in v)
    return str(v)


def _parse_value(name, text, default):
    text = text.strip()
    try:
        if isinstance(default, bool):
            low = text.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(text)
        if isinstance(default, int):
            return int(text)
        if isinstance(default, float):
            return float(text)
    except ValueError:
        raise ConfigError(f"invalid value for {name}: {text!r}") from None
    return text


CONFIG_FIELDS = {f.name: f for f in dataclasses.fields(ExperimentConfig)}


def parse_config_text(text, source="<config>"):
    """Parse ``key = value`` lines (``#`` comments) into a dict of raw strings."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in CONFIG_FIELDS:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        values[key] = value
    return values


def resolve_config(file_values=None, overrides=None):
    """Defaults, then config-file values, then explicit overrides."""
    defaults = ExperimentConfig.__dataclass_fields__
    merged = {}
    for source in (file_values or {}, overrides or {}):
        for key, value in source.items():
            if value is None:
                continue
            if key not in defaults:
                raise ConfigError(f"unknown config key {key!r}")
            default = defaults[key].default
            merged[key] = _parse_value(key, value, default) if isinstance(value, str) else value
    return ExperimentConfig(**merged)


def load_config(path, overrides=None):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    return resolve_config(parse_config_text(text, str(path)), overrides)


# ---------------------------------------------------------------------------
# Data


@dataclass
class Dataset:
    X: np.ndarray
    y: np.ndarray
    class_names: tuple

    def __len__(self):
        return len(self.y)


def _encode_labels(labels, binary_positive=""):
    labels = list(labels)
    if binary_positive:
        if binary_positive not in labels:
            raise DataError(f"positive class {binary_positive!r} not present in the data")
        labels = [l if l == binary_positive else f"non-{binary_positive}" for l in labels]
    names = tuple(sorted(set(labels)))
    index = {name: i for i, name in enumerate(names)}
    return np.array([index[l] for l in labels], dtype=int), names


def load_dataset(config):
    """Feature table from a feature CSV or an image directory tree."""
    source = Path(config.data)
    if not config.data:
        raise ConfigError("no data source configured")
    if source.is_dir():
        items = list_image_dataset(source)
        if len({label for _, label in items}) < 2:
            raise DataError(f"{source} must contain at least two class directories with images")
        X, labels, _ = featurize_dataset(items, config.image_side, config.levels, config.offset)
    else:
        X, labels = read_feature_csv(source)
    if len(labels) == 0:
        raise DataError(f"{source} contains no samples")
    y, names = _encode_labels(labels, config.binary_positive)
    if len(y) > config.sample_cap:
        X, _, y, _ = train_test_split(
            X, y, train_size=config.sample_cap, stratify=y, random_state=config.seed
        )
    return Dataset(np.asarray(X, dtype=float), y, names)


def split(dataset, train_fraction, seed, cycle):
    """Stratified shuffle split for one cycle.

    Each class contributes ``round(fraction * size)`` training samples,
    kept within ``[1, size - 1]``.  Returns sorted index arrays.
    """
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(cycle,)))
    train, test = [], []
    for k in range(len(dataset.class_names)):
        idx = np.flatnonzero(dataset.y == k)
        if idx.size < 2:
            raise StratificationError(
                f"class {dataset.class_names[k]!r} has {idx.size} sample(s); need at least 2"
            )
        idx = rng.permutation(idx)
        n_train = min(max(int(math.floor(train_fraction * idx.size + 0.5)), 1), idx.size - 1)
        train.append(idx[:n_train])
        test.append(idx[n_train:])
    return np.sort(np.concatenate(train)), np.sort(np.concatenate(test))


# ---------------------------------------------------------------------------
# Running


@dataclass
class VariantResult:
    metrics: dict
    train_mse: np.ndarray
    test_mse: np.ndarray
    residuals: np.ndarray
    initial_test_mse: float
    final_test_mse: float
    evaluations: int
    seconds: float
    overall_accuracy: float = math.nan


@dataclass
class CycleResult:
    cycle: int
    variants: dict = field(default_factory=dict)


@dataclass
class ExperimentReport:
    config: ExperimentConfig
    class_names: tuple
    cycles: list

    def values(self, variant, class_name, metric):
        return np.array(
            [getattr(c.variants[variant].metrics[class_name], metric) for c in self.cycles]
        )

    def summary(self):
        """``{(class, metric, variant): (mean, std)}`` over cycles (population std)."""
        out = {}
        for name in self.class_names:
            for metric in METRIC_NAMES:
                for variant in self.config.variants:
                    v = self.values(variant, name, metric)
                    out[(name, metric, variant)] = (float(np.mean(v)), float(np.std(v)))
        return out

    def mean_accuracy(self, variant):
        """Multiclass test accuracy averaged over cycles."""
        return float(np.mean([c.variants[variant].overall_accuracy for c in self.cycles]))


def _classifier(config, variant, seed, n_features):
    cso = config.cso_config(seed)
    kwargs = {k: getattr(cso, k) for k in (
        "smp", "srd", "cdc", "spc", "mixture_ratio", "c1", "w_start",
        "iterations", "population", "epochs_per_iteration", "vmax_fraction",
    )}
    n_params = 2 * n_features * config.mfs_per_input + 2 * config.mfs_per_input**n_features
    if variant == "gd":
        return TnfinClassifier(
            solver="gd",
            mfs_per_input=config.mfs_per_input,
            learning_rate=config.gd_learning_rate,
            gd_epochs=config.matched_gd_epochs(n_params),
            scale_features=config.scale_features,
            random_state=seed,
            **kwargs,
        )
    inertia = "adaptive" if variant == "cso-adaptive" else config.constant_weight
    return TnfinClassifier(
        solver="cso",
        mfs_per_input=config.mfs_per_input,
        inertia=inertia,
        scale_features=config.scale_features,
        random_state=seed,
        **kwargs,
    )


def run_variant(config, variant, dataset, train, test, cycle):
    # Variants share a seed per cycle so they start from identical networks.
    seed = int(np.random.SeedSequence(config.seed, spawn_key=(cycle, 1)).generate_state(1)[0])
    t0 = time.perf_counter()
    clf = _classifier(config, variant, seed, dataset.X.shape[1])
    Xtr, ytr = dataset.X[train], dataset.y[train]
    Xte, yte = dataset.X[test], dataset.y[test]
    clf.fit(Xtr, ytr, eval_set=(Xte, yte))
    pred = clf.predict(Xte)
    classes = range(len(dataset.class_names))
    by_index = per_class_metrics(pred, yte, classes)
    result = VariantResult(
        metrics={dataset.class_names[k]: m for k, m in by_index.items()},
        train_mse=clf.curves_["train_mse"],
        test_mse=clf.curves_["test_mse"],
        residuals=_full_residuals(clf, Xte, yte, len(dataset.class_names)),
        initial_test_mse=clf.mse(Xte, yte, initial=True),
        final_test_mse=clf.mse(Xte, yte),
        evaluations=_evaluations(clf),
        seconds=time.perf_counter() - t0,
        overall_accuracy=float(np.mean(pred == yte)),
    )
    return result


def _full_residuals(clf, X, y, n_classes):
    r = clf.residuals(X, y)
    if r.shape[1] != n_classes:
        raise DataError("a class is missing from the training split")
    return r.ravel()


def _evaluations(clf):
    if clf.solver == "cso":
        return int(sum(r.evaluations for r in clf.reports_))
    n_params = clf.networks_[0].n_params
    return int(len(clf.networks_) * clf.gd_epochs * (2 * n_params + 1))


def run_experiment(config, dataset=None, progress=None):
    """Run every cycle and variant; returns an :class:`ExperimentReport`."""
    dataset = dataset if dataset is not None else load_dataset(config)
    cycles = []
    for cycle in range(config.cycles):
        train, test = split(dataset, config.train_fraction, config.seed, cycle)
        result = CycleResult(cycle)
        for variant in config.variants:
            try:
                result.variants[variant] = run_variant(config, variant, dataset, train, test, cycle)
            except TnfinError as exc:
                exc.args = (f"cycle {cycle}, variant {variant}: {exc}",)
                raise
            if progress is not None:
                progress(cycle, variant, result.variants[variant])
        cycles.append(result)
    return ExperimentReport(config, dataset.class_names, cycles)


# ---------------------------------------------------------------------------
# Output


def check_writable(output_dir):
    path = Path(output_dir)
    try:
        path.mkdir(parents=True, exist_ok=True)
        probe = path / ".write_probe"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise ConfigError(f"output directory {path} is not writable: {exc}") from exc


def _fmt(v):
    return f"{v:.17g}"


def _csv_text(rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerows(rows)
    return buf.getvalue()


def metrics_table(report):
    summary = report.summary()
    rows = [["class", "metric"] + [VARIANT_TITLES[v] for v in report.config.variants]]
    for name in report.class_names:
        for metric in METRIC_NAMES:
            cells = [f"{summary[(name, metric, v)][0]:.6f} ± {summary[(name, metric, v)][1]:.6f}"
                     for v in report.config.variants]
            rows.append([name, metric] + cells)
    return rows


def per_cycle_table(report):
    rows = [["variant", "cycle", "class", "metric", "value"]]
    for c in report.cycles:
        for v in report.config.variants:
            for name in report.class_names:
                for metric in METRIC_NAMES:
                    value = getattr(c.variants[v].metrics[name], metric)
                    rows.append([v, c.cycle, name, metric, _fmt(value)])
    return rows


def kruskal_table(report):
    rows = [["class"] + list(METRIC_NAMES)]
    for name in report.class_names:
        row = [name]
        for metric in METRIC_NAMES:
            groups = [report.values(v, name, metric) for v in report.config.variants]
            if len(groups) < 2 or sum(len(g) for g in groups) < 3:
                row.append("n/a")
            else:
                row.append(_fmt(kruskal_wallis(groups).p_value))
        rows.append(row)
    return rows


def mann_whitney_table(report):
    """Lower-triangular p-value matrix per metric; values pooled over classes."""
    variants = report.config.variants
    titles = [VARIANT_TITLES[v] for v in variants]
    rows = [["metric", "model"] + titles]
    for metric in METRIC_NAMES:
        pooled = {
            v: np.concatenate([report.values(v, name, metric) for name in report.class_names])
            for v in variants
        }
        for i, a in enumerate(variants):
            row = [metric, VARIANT_TITLES[a]]
            for j, b in enumerate(variants):
                if i == j:
                    row.append("n/a")
                elif j < i:
                    row.append(_fmt(mann_whitney_u(pooled[a], pooled[b]).p_value))
                else:
                    row.append("")
            rows.append(row)
    return rows


def curves_table(report):
    rows = [["variant", "cycle", "iteration", "train_mse", "test_mse"]]
    for c in report.cycles:
        for v in report.config.variants:
            r = c.variants[v]
            for it, (tr, te) in enumerate(zip(r.train_mse, r.test_mse)):
                rows.append([v, c.cycle, it, _fmt(tr), _fmt(te)])
    return rows


def error_histogram(residuals, bins=HIST_BINS):
    """``(bin_centers, counts)`` over the residual range with equal-width bins."""
    residuals = np.asarray(residuals, dtype=float)
    counts, edges = np.histogram(residuals, bins=bins)
    return (edges[:-1] + edges[1:]) / 2.0, counts


def histogram_table(report):
    rows = [["variant", "bin_center", "count"]]
    for v in report.config.variants:
        pooled = np.concatenate([c.variants[v].residuals for c in report.cycles])
        centers, counts = error_histogram(pooled)
        rows.extend([v, _fmt(x), int(n)] for x, n in zip(centers, counts))
    return rows


def emit_outputs(report, output_dir):
    """Write every artifact; on failure remove the files already written."""
    output_dir = Path(output_dir)
    check_writable(output_dir)
    contents = {
        "metrics.csv": _csv_text(metrics_table(report)),
        "metrics_per_cycle.csv": _csv_text(per_cycle_table(report)),
        "stats_kw.csv": _csv_text(kruskal_table(report)),
        "stats_mwu.csv": _csv_text(mann_whitney_table(report)),
        "mse_curves.csv": _csv_text(curves_table(report)),
        "error_hist.csv": _csv_text(histogram_table(report)),
        "config_echo.txt": report.config.as_text(),
    }
    written = []
    try:
        for name, text in contents.items():
            path = output_dir / name
            with open(path, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
            written.append(path)
    except OSError:
        for path in written:
            path.unlink(missing_ok=True)
        raise
    return written


def read_per_cycle(path):
    """Parse ``metrics_per_cycle.csv`` into ``{(variant, cycle, class, metric): value}``."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        return {
            (r["variant"], int(r["cycle"]), r["class"], r["metric"]): float(r["value"])
            for r in reader
        }


def summarize_per_cycle(values):
    """Mean and population std per (class, metric, variant) from per-cycle values."""
    groups = {}
    for (variant, _, name, metric), v in values.items():
        groups.setdefault((name, metric, variant), []).append(v)
    return {k: (float(np.mean(v)), float(np.std(v))) for k, v in groups.items()}


def report_from_per_cycle(values, config):
    """Rebuild an :class:`ExperimentReport` holding only metrics from per-cycle values."""
    class_names = tuple(sorted({k[2] for k in values}))
    variants = tuple(v for v in VARIANTS if any(k[0] == v for k in values))
    cfg = dataclasses.replace(config, variants=variants)
    cycles = []
    for cycle in sorted({k[1] for k in values}):
        c = CycleResult(cycle)
        for v in variants:
            ms = {
                name: MetricSet(**{m: values[(v, cycle, name, m)] for m in METRIC_NAMES})
                for name in class_names
            }
            c.variants[v] = VariantResult(ms, None, None, None, math.nan, math.nan, 0, 0.0)
        cycles.append(c)
    return ExperimentReport(cfg, class_names, cycles)


def run_and_emit(config, progress=None):
    """Check the output directory, run the experiment and write all artifacts."""
    check_writable(config.output_dir)
    report = run_experiment(config, progress=progress)
    emit_outputs(report, config.output_dir)
    return report


def remove_outputs(output_dir):
    for name in OUTPUT_FILES:
        try:
            os.remove(Path(output_dir) / name)
        except FileNotFoundError:
            pass
