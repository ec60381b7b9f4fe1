"""Command-line entry point: synth, run, predict, validate."""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys

from .config import TOOLKIT_VERSION, load_run_config
from .errors import AmrbenchError, ConfigError, DimensionError
from .features import read_features_csv
from .models import load_model
from .runner import run_study, validate_study
from .synth import generate, write_synthetic_files


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="amrbench",
        description="Reproducible AMR prediction study runner on tabular microbiology data.",
    )
    parser.add_argument("--quiet", action="store_true", help="only log warnings and errors")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration file")
    common.add_argument("--seed", type=int, help="override the global seed")
    common.add_argument("--out", dest="out_dir", help="override the output directory")
    common.add_argument("--threads", type=int, help="worker cap (also AMRBENCH_THREADS)")

    synth = sub.add_parser("synth", parents=[common], help="generate a synthetic cohort")
    synth.set_defaults(func=cmd_synth)

    run = sub.add_parser("run", parents=[common], help="execute the full study")
    run.add_argument("--split-mode", choices=["random", "temporal"], help="restrict to one split mode")
    run.add_argument("--cutoff-year", type=int, help="temporal split cutoff year")
    run.add_argument(
        "--min-culture-offset", type=float,
        help="drop cultures taken before this offset (minutes from unit admit); default keeps all",
    )
    run.set_defaults(func=cmd_run)

    predict = sub.add_parser("predict", parents=[common], help="score rows with a saved model")
    predict.add_argument("--model", required=True, help="model JSON file")
    predict.add_argument("--rows", required=True, help="feature matrix CSV")
    predict.add_argument("--scores", required=True, help="output scores CSV")
    predict.set_defaults(func=cmd_predict)

    validate = sub.add_parser("validate", parents=[common], help="check config and input tables")
    validate.add_argument(
        "--min-culture-offset", type=float,
        help="drop cultures taken before this offset (minutes from unit admit)",
    )
    validate.set_defaults(func=cmd_validate)
    return parser


def _overrides(args) -> dict:
    return {
        "seed": getattr(args, "seed", None),
        "out_dir": getattr(args, "out_dir", None),
        "threads": getattr(args, "threads", None),
        "split_mode": getattr(args, "split_mode", None),
        "cutoff_year": getattr(args, "cutoff_year", None),
        "min_culture_offset": getattr(args, "min_culture_offset", None),
    }


def cmd_synth(args) -> int:
    config = load_run_config(args.config, _overrides(args))
    cohort, truth = generate(config.synth)
    paths = write_synthetic_files(
        cohort,
        truth,
        config.out_dir,
        config.header_dict(),
        stays_path=config.stays_path,
        micro_path=config.micro_path,
    )
    print(f"wrote {paths['stays']}, {paths['micro']}, {paths['ground_truth']}")
    print(
        f"{len(cohort.stays)} stays, {len(cohort.tests)} tests, "
        f"prevalence {truth.prevalence:.4f}, bayes AUC {truth.bayes_auc:.4f}"
    )
    return 0


def cmd_run(args) -> int:
    config = load_run_config(args.config, _overrides(args))
    summary = run_study(config)
    for mode, aucs in summary["aucs"].items():
        line = ", ".join(f"{name}={value:.4f}" for name, value in aucs.items())
        print(f"{mode}: {line}")
    print(f"reports in {summary['out_dir']}")
    return 0


def cmd_predict(args) -> int:
    model = load_model(args.model)
    matrix = read_features_csv(args.rows)
    if getattr(model, "feature_names", None):
        expected = list(model.feature_names)
        if matrix.column_names != expected:
            index = {name: j for j, name in enumerate(matrix.column_names)}
            missing = [name for name in expected if name not in index]
            if missing:
                raise DimensionError(
                    f"rows file is missing model features: {missing[:5]}"
                    + ("..." if len(missing) > 5 else "")
                )
            matrix.rows = matrix.rows[:, [index[name] for name in expected]]
            matrix.column_names = expected
    scores = model.predict(matrix)

    config = load_run_config(args.config, _overrides(args)) if args.config else None
    comment = (
        config.header_comment()
        if config
        else f"amrbench {TOOLKIT_VERSION} config_sha256=none seed=none"
    )
    with open(args.scores, "w", newline="\n") as fh:
        fh.write(f"# {comment}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["test_id", "score"])
        for test_id, score in zip(matrix.row_keys, scores):
            writer.writerow([test_id, format(float(score), ".10g")])
    print(f"wrote {len(scores)} scores to {args.scores}")
    return 0


def cmd_validate(args) -> int:
    if not args.config:
        raise ConfigError("validate requires --config")
    config = load_run_config(args.config, _overrides(args))
    diagnostics = validate_study(config)
    print(json.dumps(diagnostics, indent=1))
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING if args.quiet else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except AmrbenchError as exc:
        print(f"error:{exc.category}: {exc}", file=sys.stderr)
        return exc.exit_code
    except Exception as exc:  # pragma: no cover - defensive
        print(f"error:internal: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
