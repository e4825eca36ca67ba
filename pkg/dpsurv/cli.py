"""
Command-line interface.

    dpsurv fit --dataset lung [--json]
    dpsurv perturb --dataset lung --method phase1 --eps 1 --out lung_dp.csv
    dpsurv simulate --dataset lung --method phase1 --eps all --iters 200
    dpsurv summarize | thresholds | report [--out DIR]

Exit codes: 0 success, 1 usage error, 2 data or validation error,
3 numerical failure.
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, Sequence

import pandas as pd

from . import __version__, settings
from .converters import DatasetConverter, FitConverter
from .datasets import load_reference, save_dataset
from .exceptions import DpsurvError
from .managers import RecordStore
from .models.concordance import concordance
from .models.cox import fit_cox, linear_predictor
from .perturbation import perturb, sturges_intervals
from .registry import REGISTRY
from .settings import KEYS
from .simulation import report as reporting
from .simulation.runner import dataset_index, epsilon_index, method_index, run
from .simulation.thresholds import thresholds
from .structures import (
    CoxFit,
    MethodTag,
    PerturbationMethod,
    SeedContext,
    SimulationPlan,
)
from .utils import format_epsilon, parse_epsilon


logger = logging.getLogger(settings.LOGGER_NAME)

USAGE_ERROR = 1
ALL = "all"


class _Parser(argparse.ArgumentParser):
    """Argument parser that reports usage errors with exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(USAGE_ERROR, f"{self.prog}: error: {message}\n")


def _epsilons(values: Sequence[str]) -> tuple:
    if ALL in values:
        return settings.EPSILON_GRID

    try:
        return tuple(sorted(set(map(parse_epsilon, values))))
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e))


def _methods(values: Sequence[str]) -> tuple:
    if ALL in values:
        return tuple(MethodTag)

    return tuple(sorted(set(map(MethodTag, values)), key=list(MethodTag).index))


def _datasets(values: Sequence[str]) -> tuple:
    if ALL in values:
        return tuple(REGISTRY)

    return tuple(dict.fromkeys(values))


# commands
def cmd_fit(args) -> int:
    """Print the clean Cox fit of a dataset, as a table or as JSON."""

    dataset = load_reference(args.dataset, args.data_dir)
    fit = fit_cox(dataset)
    c_index = concordance(dataset.T, dataset.delta, linear_predictor(fit, dataset))

    if args.json:
        data = FitConverter().to_data(fit)
        data.update(dataset=dataset.name, c_index=c_index)
        print(json.dumps(data, indent=2))
        return 0

    significant = fit.significant(args.alpha)
    with pd.option_context("display.width", 120, "display.max_columns", None):
        print(f"{dataset.info}")
        print(fit.summary(args.alpha).to_string())
    print(
        f"significant: {len(significant)}/{len(fit.terms)} "
        f"({', '.join(significant)})"
    )
    print(f"C-index: {c_index:.3f}")
    print(f"converged: {fit.converged} in {fit.iterations} iterations")

    return 0


def cmd_perturb(args) -> int:
    """Write one perturbed release of a dataset."""

    dataset = load_reference(args.dataset, args.data_dir)
    tag = MethodTag(args.method)
    rng = SeedContext(
        base_seed=args.seed,
        dataset_index=dataset_index(args.dataset, 0),
        method_index=method_index(tag),
        epsilon_index=epsilon_index(args.eps),
        iteration=args.iteration,
    ).generator()

    grid = sturges_intervals(dataset) if tag is MethodTag.PHASE3 else None
    method = PerturbationMethod(tag, grid.K if grid else None)
    result = perturb(method, dataset, args.eps, rng, grid)
    out = Path(args.out)

    if isinstance(result, CoxFit):
        with open(out, "w") as f:
            json.dump(FitConverter().to_data(result), f, indent=2)
    elif result.exit_interval is not None:
        frame = DatasetConverter.to_frame(result.dataset)
        frame = frame.drop(columns=[KEYS.time, KEYS.status])
        frame["interval"] = result.exit_interval
        frame["event"] = result.event
        frame.to_csv(out, index=False)
    else:
        save_dataset(result.dataset, out)

    logger.info(
        f"Wrote {method.label} release of {dataset.name} "
        f"at eps={format_epsilon(args.eps)} to {out}"
    )

    return 0


def cmd_simulate(args) -> int:
    plan = SimulationPlan(
        datasets=_datasets(args.dataset),
        methods=_methods(args.method),
        epsilons=_epsilons(args.eps),
        iterations=args.iters,
        base_seed=args.seed,
        train_fraction=args.train_fraction,
    )
    store = RecordStore(args.out)
    run(plan, store, workers=args.workers, data_dir=args.data_dir)
    print(f"{len(store.conditions())} conditions in {store.root}")

    return 0


def cmd_summarize(args) -> int:
    store = RecordStore(args.out)
    writer = reporting.ReportWriter(store, args.report_dir, args.alpha)
    writer.output_dir.mkdir(parents=True, exist_ok=True)
    summaries = writer.summaries()
    writer.write_summary(summaries)

    rows = [reporting.summary_row(s) for s in summaries]
    frame = pd.DataFrame(rows, columns=reporting.SUMMARY_COLUMNS)
    with pd.option_context("display.width", 160, "display.max_columns", None):
        print(frame.to_string(index=False))

    return 0


def cmd_thresholds(args) -> int:
    store = RecordStore(args.out)
    writer = reporting.ReportWriter(store, args.report_dir, args.alpha)
    writer.output_dir.mkdir(parents=True, exist_ok=True)
    summaries = writer.summaries()
    rows = thresholds(summaries, settings.EPSILON_GRID)
    writer.write_thresholds(summaries, settings.EPSILON_GRID)

    frame = pd.DataFrame(
        [[getattr(row, c) for c in reporting.THRESHOLD_COLUMNS] for row in rows],
        columns=reporting.THRESHOLD_COLUMNS,
    )
    print(frame.to_string(index=False))

    return 0


def cmd_report(args) -> int:
    store = RecordStore(args.out)
    epsilons = _epsilons(args.eps) if args.eps else None
    paths = reporting.emit_report(store, args.report_dir, args.alpha, epsilons)

    for name in sorted(paths):
        print(paths[name])

    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dpsurv", description=__doc__.strip().splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument(
        "--log-level",
        default=settings.ini_config["logging"]["level"],
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
    )
    commands = parser.add_subparsers(dest="command", required=True)

    def dataset_flag(p, nargs=None):
        p.add_argument(
            "--dataset",
            required=True,
            nargs=nargs,
            help="registry name (" + ", ".join(REGISTRY) + ") or CSV path",
        )
        p.add_argument("--data-dir", type=Path, default=None)

    def store_flags(p):
        p.add_argument("--out", type=Path, default=settings.output_dir())
        p.add_argument("--report-dir", type=Path, default=None)
        p.add_argument("--alpha", type=float, default=settings.ALPHA)

    p = commands.add_parser("fit", help="fit the clean Cox model")
    dataset_flag(p)
    p.add_argument("--json", action="store_true")
    p.add_argument("--alpha", type=float, default=settings.ALPHA)
    p.set_defaults(func=cmd_fit)

    p = commands.add_parser("perturb", help="write one perturbed release")
    dataset_flag(p)
    p.add_argument("--method", required=True, choices=[m.value for m in MethodTag])
    p.add_argument("--eps", required=True, type=parse_epsilon)
    p.add_argument("--seed", type=int, default=settings.BASE_SEED)
    p.add_argument("--iteration", type=int, default=0)
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_perturb)

    p = commands.add_parser("simulate", help="run the Monte Carlo grid")
    dataset_flag(p, nargs="+")
    p.add_argument(
        "--method",
        nargs="+",
        default=[ALL],
        choices=[m.value for m in MethodTag] + [ALL],
    )
    p.add_argument("--eps", nargs="+", default=[ALL])
    p.add_argument("--iters", type=int, default=settings.ITERATIONS)
    p.add_argument("--seed", type=int, default=settings.BASE_SEED)
    p.add_argument("--train-fraction", type=float, default=settings.TRAIN_FRACTION)
    p.add_argument("--workers", type=int, default=settings.WORKERS)
    p.add_argument("--out", type=Path, default=settings.output_dir())
    p.set_defaults(func=cmd_simulate)

    p = commands.add_parser("summarize", help="summarize stored records")
    store_flags(p)
    p.set_defaults(func=cmd_summarize)

    p = commands.add_parser("thresholds", help="practical epsilon thresholds")
    store_flags(p)
    p.set_defaults(func=cmd_thresholds)

    p = commands.add_parser("report", help="summary tables and plot data")
    store_flags(p)
    p.add_argument("--eps", nargs="+", default=None)
    p.set_defaults(func=cmd_report)

    return parser


def main(argv: List[str] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    logging.basicConfig(
        level=args.log_level,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    logger.setLevel(args.log_level)

    try:
        return args.func(args)
    except argparse.ArgumentTypeError as e:
        parser.error(str(e))
    except ValueError as e:
        print(f"dpsurv: error: {e}", file=sys.stderr)
        return USAGE_ERROR
    except DpsurvError as e:
        print(f"dpsurv: {type(e).__name__}: {e}", file=sys.stderr)
        return e.exit_code
