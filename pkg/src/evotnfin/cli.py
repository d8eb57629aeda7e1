"""Command-line interface.

Subcommands::

    evotnfin featurize IMAGE_DIR -o features.csv
    evotnfin train -c experiment.cfg [--cycles 3 ...]
    evotnfin evaluate RESULTS_DIR
    evotnfin synth-data blobs -o features.csv
    evotnfin synth-data textures -o images/

Exit codes: 0 success, 2 configuration error, 3 data error, 4 numeric error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import synth
from .exceptions import ConfigError, TnfinError
from .experiment import (
    CONFIG_FIELDS,
    ExperimentConfig,
    VARIANT_TITLES,
    kruskal_table,
    load_config,
    metrics_table,
    read_per_cycle,
    remove_outputs,
    report_from_per_cycle,
    resolve_config,
    run_and_emit,
)
from .glcm import featurize_dataset, list_image_dataset, write_feature_csv

log = logging.getLogger("evotnfin")


def _add_config_flags(parser):
    for name, f in CONFIG_FIELDS.items():
        flag = "--" + name.replace("_", "-")
        if f.type in ("bool", bool):
            parser.add_argument(flag, dest=name, action=argparse.BooleanOptionalAction, default=None)
        else:
            parser.add_argument(flag, dest=name, default=None, metavar=name.upper())


def build_parser():
    parser = argparse.ArgumentParser(prog="evotnfin", description=__doc__.split("\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("featurize", help="extract texture features from an image tree")
    p.add_argument("image_dir")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--side", type=int, default=224)
    p.add_argument("--levels", type=int, default=8)
    p.add_argument("--offset", default="0,1", help="dy,dx pixel displacement")

    p = sub.add_parser("train", help="run the multi-cycle experiment and write result CSVs")
    p.add_argument("-c", "--config", help="key = value configuration file")
    _add_config_flags(p)

    p = sub.add_parser("evaluate", help="recompute summary and test tables from a results dir")
    p.add_argument("results_dir")

    p = sub.add_parser("synth-data", help="generate synthetic datasets")
    kind = p.add_subparsers(dest="kind", required=True)
    b = kind.add_parser("blobs", help="3-class Gaussian blobs as a feature CSV")
    b.add_argument("-o", "--output", required=True)
    b.add_argument("--samples", type=int, default=600)
    b.add_argument("--separation", type=float, default=2.0)
    b.add_argument("--std", type=float, default=1.0)
    b.add_argument("--seed", type=int, default=0)
    t = kind.add_parser("textures", help="constant/stripes/noise PNG images in class folders")
    t.add_argument("-o", "--output", required=True)
    t.add_argument("--per-class", type=int, default=10)
    t.add_argument("--size", type=int, default=32)
    t.add_argument("--seed", type=int, default=0)
    return parser


def cmd_featurize(args):
    offset = tuple(int(v) for v in args.offset.split(","))
    items = list_image_dataset(args.image_dir)
    X, labels, _ = featurize_dataset(items, args.side, args.levels, offset)
    write_feature_csv(args.output, X, labels)
    log.info("wrote %d feature rows to %s", len(labels), args.output)


def cmd_train(args):
    overrides = {name: getattr(args, name) for name in CONFIG_FIELDS}
    config = load_config(args.config, overrides) if args.config else resolve_config(None, overrides)

    def progress(cycle, variant, result):
        log.info(
            "cycle %d %-13s accuracy %.4f  test mse %.4f -> %.4f  (%.1fs)",
            cycle, variant, result.overall_accuracy, result.initial_test_mse,
            result.final_test_mse, result.seconds,
        )

    try:
        report = run_and_emit(config, progress=progress)
    except TnfinError:
        remove_outputs(config.output_dir)
        raise
    for variant in config.variants:
        print(f"{VARIANT_TITLES[variant]}: mean accuracy {report.mean_accuracy(variant):.4f}")
    print(f"results written to {config.output_dir}")


def cmd_evaluate(args):
    results = Path(args.results_dir)
    per_cycle = results / "metrics_per_cycle.csv"
    if not per_cycle.is_file():
        raise ConfigError(f"{per_cycle} not found; run `evotnfin train` first")
    echo = results / "config_echo.txt"
    config = load_config(echo) if echo.is_file() else ExperimentConfig()
    report = report_from_per_cycle(read_per_cycle(per_cycle), config)
    for row in metrics_table(report):
        print(",".join(str(c) for c in row))
    print()
    for row in kruskal_table(report):
        print(",".join(str(c) for c in row))


def cmd_synth(args):
    if args.kind == "blobs":
        synth.write_blob_csv(args.output, args.samples, args.separation, args.std, args.seed)
        print(f"wrote {args.samples} blob samples to {args.output}")
    else:
        paths = synth.write_texture_dataset(args.output, args.per_class, args.size, args.seed)
        print(f"wrote {len(paths)} texture images under {args.output}")


COMMANDS = {
    "featurize": cmd_featurize,
    "train": cmd_train,
    "evaluate": cmd_evaluate,
    "synth-data": cmd_synth,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(message)s",
    )
    try:
        COMMANDS[args.command](args)
    except TnfinError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
