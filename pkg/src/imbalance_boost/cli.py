"""Command-line front end: ``imbalance-boost {train,predict,evaluate,cv,grid}``.

Reports are JSON (to ``--out`` or stdout) with a short table on stderr.
"""
from __future__ import annotations

import argparse
import csv
import sys
import time
from typing import List, Optional

from . import booster
from .booster import TrainConfig
from .data_io import CsvSchema, dumps_report, format_table, load_csv, load_features
from .exceptions import InvalidInputError
from .losses import LossKind, LossParams
from .metrics import MetricMode, all_scores, confusion_from_predictions
from .model_selection import SearchGrid, cross_validate, grid_search, parse_plan, plan_to_dict, refit


def _float_list(text: str) -> List[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _add_data_args(p, label_required=True):
    p.add_argument("--data", required=True, help="CSV file with a header row")
    p.add_argument("--label", required=label_required, help="label column (values 0/1)")
    p.add_argument("--group", help="group id column, required for --cv logo")
    p.add_argument("--features", help="comma-separated feature columns (default: all others)")


def _add_train_args(p):
    p.add_argument("--loss", choices=[k.value for k in LossKind], default="plain")
    p.add_argument("--alpha", type=float, help="imbalance weight for --loss weighted")
    p.add_argument("--gamma", type=float, help="focusing exponent for --loss focal")
    p.add_argument("--rounds", type=int, default=10)
    p.add_argument("--lr", type=float, default=0.3)
    p.add_argument("--depth", type=int, default=6)
    p.add_argument("--lambda", dest="reg_lambda", type=float, default=1.0)
    p.add_argument("--min-split-gain", type=float, default=0.0)
    p.add_argument("--min-child-hessian", type=float, default=1.0)
    p.add_argument("--base-score", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="imbalance-boost",
        description="Newton-boosted trees with weighted and focal losses for imbalanced binary data.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="fit a model and write it as JSON")
    _add_data_args(p)
    _add_train_args(p)
    p.add_argument("--out", required=True, help="model file to write")

    p = sub.add_parser("predict", help="score a CSV with a saved model")
    _add_data_args(p, label_required=False)
    p.add_argument("--model", required=True)
    p.add_argument(
        "--output-mode", "--mode", dest="output_mode", default="raw",
        choices=["raw", "sigmoid", "determine", "onehot"],
    )
    p.add_argument("--out", help="CSV to write (default stdout)")

    p = sub.add_parser("evaluate", help="confusion counts and metrics of a saved model")
    _add_data_args(p)
    p.add_argument("--model", required=True)
    p.add_argument("--out", help="report JSON to write (default stdout)")

    p = sub.add_parser("cv", help="cross-validate one configuration")
    _add_data_args(p)
    _add_train_args(p)
    p.add_argument("--cv", default="kfold:5", help="kfold:k[:seed], loo or logo")
    p.add_argument("--out", help="report JSON to write (default stdout)")

    p = sub.add_parser("grid", help="grid search alpha or gamma by cross-validation")
    _add_data_args(p)
    _add_train_args(p)
    p.add_argument("--alphas", type=_float_list, default=[0.2, 0.4, 0.6, 0.8, 1.0])
    p.add_argument("--gammas", type=_float_list, default=[1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0])
    p.add_argument("--cv", default="kfold:5", help="kfold:k[:seed], loo or logo")
    p.add_argument("--metric", choices=[m.value for m in MetricMode], default="accuracy")
    p.add_argument("--refit-out", help="write a model refit on all data with the best parameters")
    p.add_argument("--out", help="report JSON to write (default stdout)")
    return parser


def _schema(args) -> CsvSchema:
    features = args.features.split(",") if args.features else None
    return CsvSchema(args.label, args.group, features)


def _loss_params(args, require_param=True) -> LossParams:
    kind = LossKind(args.loss)
    if kind is LossKind.WEIGHTED:
        if args.alpha is None:
            if require_param:
                raise InvalidInputError("--alpha is required for --loss weighted")
            return LossParams.weighted(1.0)
        return LossParams.weighted(args.alpha)
    if kind is LossKind.FOCAL:
        if args.gamma is None:
            if require_param:
                raise InvalidInputError("--gamma is required for --loss focal")
            return LossParams.focal(0.0)
        return LossParams.focal(args.gamma)
    return LossParams.plain()


def _config(args, loss: LossParams) -> TrainConfig:
    return TrainConfig(
        num_rounds=args.rounds,
        learning_rate=args.lr,
        max_depth=args.depth,
        reg_lambda=args.reg_lambda,
        min_split_gain=args.min_split_gain,
        min_child_hessian=args.min_child_hessian,
        base_score=args.base_score,
        loss=loss,
        seed=args.seed,
    )


def _emit(report: dict, out: Optional[str], scores: dict, counts: dict) -> None:
    text = dumps_report(report)
    if out:
        with open(out, "w") as f:
            f.write(text)
    else:
        sys.stdout.write(text)
    print(format_table(scores, counts), file=sys.stderr)


def _cmd_train(args, argv):
    config = _config(args, _loss_params(args))
    data = load_csv(args.data, _schema(args))
    model = booster.train(data, config)
    booster.save_model(model, args.out)
    print(f"wrote {len(model.trees)} trees to {args.out}", file=sys.stderr)


def _cmd_predict(args, argv):
    model = booster.load_model(args.model)
    features = args.features.split(",") if args.features else None
    ignore = [c for c in (args.label, args.group) if c]
    X = load_features(args.data, ignore=ignore, feature_columns=features)
    mode = args.output_mode
    if mode == "raw":
        cols, values = ["raw"], booster.predict_raw(model, X)[:, None]
    elif mode == "sigmoid":
        cols, values = ["probability"], booster.predict_sigmoid(model, X)[:, None]
    elif mode == "determine":
        cols, values = ["label"], booster.predict_determine(model, X)[:, None]
    else:
        cols, values = ["class_0", "class_1"], booster.predict_two_classes(model, X)

    out = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(cols)
        for row in values.tolist():
            writer.writerow([repr(v) for v in row])
    finally:
        if args.out:
            out.close()


def _cmd_evaluate(args, argv, started):
    data = load_csv(args.data, _schema(args))
    model = booster.load_model(args.model)
    counts = confusion_from_predictions(data.labels, booster.predict_raw(model, data.features))
    scores = all_scores(counts)
    report = {
        "command": list(argv),
        "config": {"model": args.model, "data": args.data, "label": args.label,
                   "loss": model.loss_params.to_dict()},
        "metrics": scores,
        "confusion": counts.to_dict(),
        "seed": None,
        "wall_clock_seconds": time.perf_counter() - started,
    }
    _emit(report, args.out, scores, counts.to_dict())


def _cmd_cv(args, argv, started):
    config = _config(args, _loss_params(args))
    plan = parse_plan(args.cv)
    data = load_csv(args.data, _schema(args))
    rep = cross_validate(data, config, plan)
    report = {
        "command": list(argv),
        "config": {**config.to_dict(), "cv": plan_to_dict(plan)},
        "metrics": rep.scores,
        "confusion": rep.pooled.to_dict(),
        "folds": [c.to_dict() for c in rep.fold_counts],
        "seed": config.seed,
        "wall_clock_seconds": time.perf_counter() - started,
    }
    _emit(report, args.out, rep.scores, rep.pooled.to_dict())


def _cmd_grid(args, argv, started):
    # the searched parameter comes from --alphas/--gammas, not --alpha/--gamma
    base = _config(args, _loss_params(args, require_param=False))
    grid = SearchGrid(args.alphas, args.gammas, base)
    plan = parse_plan(args.cv)
    data = load_csv(args.data, _schema(args))
    result = grid_search(data, grid, plan, MetricMode(args.metric))
    best_i = grid.candidates().index(result.best_params)
    best = result.reports[best_i]
    if args.refit_out:
        booster.save_model(refit(data, base, result.best_params), args.refit_out)
    report = {
        "command": list(argv),
        "config": {
            **base.to_dict(),
            "cv": plan_to_dict(plan),
            "metric": args.metric,
            "alphas": list(args.alphas),
            "gammas": list(args.gammas),
        },
        "best_params": result.best_params.to_dict(),
        "candidates": [r.to_dict() for r in result.reports],
        "metrics": best.scores,
        "confusion": best.pooled.to_dict(),
        "seed": base.seed,
        "wall_clock_seconds": time.perf_counter() - started,
    }
    _emit(report, args.out, best.scores, best.pooled.to_dict())


def run_command(argv: Optional[List[str]] = None) -> int:
    """Run one subcommand; returns the process exit code."""
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    started = time.perf_counter()
    try:
        if args.command == "train":
            _cmd_train(args, argv)
        elif args.command == "predict":
            _cmd_predict(args, argv)
        elif args.command == "evaluate":
            _cmd_evaluate(args, argv, started)
        elif args.command == "cv":
            _cmd_cv(args, argv, started)
        else:
            _cmd_grid(args, argv, started)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


def main() -> None:
    sys.exit(run_command())


if __name__ == "__main__":
    main()
