"""
Summary tables and plot data of a record store.

Files written to the report directory (column schemas in docs/Format.md):

  summary.csv, summary.json   one row per (dataset, method, epsilon)
  variables.csv               per-variable metrics of every condition
  thresholds.csv              practical epsilon thresholds (full grid only)
  plot_lsr.csv, plot_fpr.csv  LSR / FPR against epsilon, mean and per variable
  plot_cindex.csv             train and test C-index mean and SD
  plot_hr_distribution.csv    per-iteration HRs of the top covariates
  plot_hr_bias.csv            signed and absolute HR bias
"""

import json
import logging
from dataclasses import asdict
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from .. import settings
from ..exceptions import IncompleteGrid
from ..managers import RecordStore
from ..settings import KEYS
from ..structures import MetricSummary, ThresholdRow
from ..utils import format_float
from .mixins import SummaryMixin
from .thresholds import thresholds


logger = logging.getLogger(settings.LOGGER_NAME)

# covariates shown in the hazard-ratio distribution plot
TOP_COVARIATES = 5

SUMMARY_COLUMNS = (
    KEYS.dataset,
    KEYS.method,
    KEYS.epsilon,
    "iterations",
    "mean_lsr",
    "mean_fpr",
    "train_c_mean",
    "train_c_sd",
    "test_c_mean",
    "test_c_sd",
    "delta_c",
    "overfitting_gap",
    "nonconverged_rate",
    "separation_rate",
)
VARIABLE_COLUMNS = (
    KEYS.dataset,
    KEYS.method,
    KEYS.epsilon,
    KEYS.variable,
    "baseline_p",
    "baseline_hr",
    "significant",
    "excluded",
    "lsr",
    "fpr",
    "retained",
    "nonconverged",
    "signed_bias",
    "abs_bias",
    "hr_mean",
    "hr_sd",
)
RATE_COLUMNS = (
    KEYS.dataset,
    KEYS.method,
    KEYS.epsilon,
    "scope",
    KEYS.variable,
    "value",
)
CINDEX_COLUMNS = (KEYS.dataset, KEYS.method, KEYS.epsilon, "split", "mean", "sd")
HR_DISTRIBUTION_COLUMNS = (
    KEYS.dataset,
    KEYS.method,
    KEYS.epsilon,
    KEYS.iteration,
    KEYS.variable,
    "rank",
    "baseline_beta",
    KEYS.hr,
)
HR_BIAS_COLUMNS = (
    KEYS.dataset,
    KEYS.method,
    KEYS.epsilon,
    KEYS.variable,
    "signed_bias",
    "abs_bias",
)
THRESHOLD_COLUMNS = (
    KEYS.dataset,
    KEYS.method,
    "eps_dc05",
    "eps_lsr50",
    "eps_lsr10",
    "eps_fpr10",
)


def _cell(value):
    if isinstance(value, (bool, np.bool_)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return format_float(value)
    return value


def write_csv(rows: List[list], columns: Sequence[str], path: Path) -> Path:
    """Write rows with round-trip floats; no rows gives a header-only file."""

    frame = pd.DataFrame([[_cell(v) for v in row] for row in rows], columns=columns)
    frame.to_csv(path, index=False, lineterminator="\n")
    logger.info(f"Wrote {len(rows)} rows to {path}")

    return path


def summary_row(summary: MetricSummary) -> list:
    return [
        summary.dataset,
        summary.method,
        summary.epsilon,
        summary.iterations,
        summary.mean_lsr,
        summary.mean_fpr,
        summary.train_c_mean,
        summary.train_c_sd,
        summary.test_c_mean,
        summary.test_c_sd,
        summary.delta_c,
        summary.overfitting_gap,
        summary.nonconverged_rate,
        summary.separation_rate,
    ]


def _summary_data(summary: MetricSummary) -> dict:
    """JSON form; non-finite floats are spelled as in the CSV files."""

    def convert(value):
        if isinstance(value, dict):
            return {k: convert(v) for k, v in value.items()}
        if isinstance(value, (list, tuple)):
            return [convert(v) for v in value]
        if isinstance(value, float) and not np.isfinite(value):
            return format_float(value)
        return value

    data = asdict(summary)
    data["overfitting_gap"] = summary.overfitting_gap

    return convert(data)


class ReportWriter(SummaryMixin):
    """Writes summary tables and plot data of a record store."""

    def __init__(
        self,
        store: RecordStore,
        output_dir: Path = None,
        alpha: float = settings.ALPHA,
    ) -> None:
        self.store = store
        self.output_dir = Path(output_dir) if output_dir else store.root / "report"
        self.alpha = alpha

    def _path(self, name: str) -> Path:
        return self.output_dir / name

    def write_summary(self, summaries: List[MetricSummary]) -> List[Path]:
        path = self._path("summary.json")
        with open(path, "w") as f:
            json.dump([_summary_data(s) for s in summaries], f, indent=2)
            f.write("\n")

        return [
            write_csv(
                [summary_row(s) for s in summaries],
                SUMMARY_COLUMNS,
                self._path("summary.csv"),
            ),
            path,
        ]

    def write_variables(self, summaries: List[MetricSummary]) -> Path:
        rows = [
            [s.dataset, s.method, s.epsilon, v.term]
            + [
                v.baseline_p,
                v.baseline_hr,
                v.significant,
                v.excluded,
                v.lsr,
                v.fpr,
                v.retained,
                v.nonconverged,
                v.signed_bias,
                v.abs_bias,
                v.hr_mean,
                v.hr_sd,
            ]
            for s in summaries
            for v in s.variables
        ]

        return write_csv(rows, VARIABLE_COLUMNS, self._path("variables.csv"))

    def write_rates(self, summaries: List[MetricSummary]) -> List[Path]:
        """LSR and FPR curves: the dataset mean and each variable's rate."""

        lsr_rows, fpr_rows = [], []

        for s in summaries:
            head = [s.dataset, s.method, s.epsilon]
            lsr_rows.append(head + ["mean", "", s.mean_lsr])
            fpr_rows.append(head + ["mean", "", s.mean_fpr])

            for v in s.variables:
                if not np.isnan(v.lsr):
                    lsr_rows.append(head + ["variable", v.term, v.lsr])
                if not np.isnan(v.fpr):
                    fpr_rows.append(head + ["variable", v.term, v.fpr])

        return [
            write_csv(lsr_rows, RATE_COLUMNS, self._path("plot_lsr.csv")),
            write_csv(fpr_rows, RATE_COLUMNS, self._path("plot_fpr.csv")),
        ]

    def write_cindex(self, summaries: List[MetricSummary]) -> Path:
        rows = []

        for s in summaries:
            head = [s.dataset, s.method, s.epsilon]
            rows.append(head + ["train", s.train_c_mean, s.train_c_sd])
            rows.append(head + ["test", s.test_c_mean, s.test_c_sd])

        return write_csv(rows, CINDEX_COLUMNS, self._path("plot_cindex.csv"))

    def write_hr_bias(self, summaries: List[MetricSummary]) -> Path:
        rows = [
            [s.dataset, s.method, s.epsilon, v.term, v.signed_bias, v.abs_bias]
            for s in summaries
            for v in s.variables
        ]

        return write_csv(rows, HR_BIAS_COLUMNS, self._path("plot_hr_bias.csv"))

    def write_hr_distribution(self, epsilons=None) -> Path:
        """Per-iteration HRs of the covariates with the largest baseline beta.

        Only converged iterations contribute.
        """

        rows = []

        for condition in self.conditions(epsilons):
            cox = condition.baseline.cox
            order = np.argsort(-cox.beta, kind="stable")[:TOP_COVARIATES]

            for record in condition.records:
                if not record.converged:
                    continue

                index = {t: i for i, t in enumerate(record.terms)}

                for rank, j in enumerate(order, start=1):
                    term = cox.terms[j]
                    rows.append(
                        [
                            record.dataset,
                            record.method,
                            record.epsilon,
                            record.iteration,
                            term,
                            rank,
                            float(cox.beta[j]),
                            float(record.hr[index[term]]),
                        ]
                    )

        return write_csv(
            rows, HR_DISTRIBUTION_COLUMNS, self._path("plot_hr_distribution.csv")
        )

    def write_thresholds(
        self, summaries: List[MetricSummary], epsilons=settings.EPSILON_GRID
    ) -> Path:
        rows: List[ThresholdRow] = thresholds(summaries, epsilons)

        return write_csv(
            [list(asdict(row).values()) for row in rows],
            THRESHOLD_COLUMNS,
            self._path("thresholds.csv"),
        )

    def write(self, epsilons: Optional[Sequence[float]] = None) -> List[Path]:
        self.output_dir.mkdir(parents=True, exist_ok=True)
        summaries = self.summaries(epsilons)

        paths = self.write_summary(summaries)
        paths.append(self.write_variables(summaries))
        paths.extend(self.write_rates(summaries))
        paths.append(self.write_cindex(summaries))
        paths.append(self.write_hr_bias(summaries))
        paths.append(self.write_hr_distribution(epsilons))

        grid = settings.EPSILON_GRID if epsilons is None else epsilons
        try:
            paths.append(self.write_thresholds(summaries, grid))
        except IncompleteGrid as e:
            logger.warning(f"Thresholds skipped: {e}")

        return paths


def load_summaries(
    store: RecordStore,
    alpha: float = settings.ALPHA,
    epsilons: Optional[Sequence[float]] = None,
) -> List[MetricSummary]:
    """Metric summaries of every stored (dataset, method, epsilon)."""

    return ReportWriter(store, alpha=alpha).summaries(epsilons)


def emit_report(
    store: RecordStore,
    output_dir: Path = None,
    alpha: float = settings.ALPHA,
    epsilons: Optional[Sequence[float]] = None,
) -> Dict[str, Path]:
    """Write the report files; returns them keyed by file name."""

    writer = ReportWriter(store, output_dir, alpha)

    return {path.name: path for path in writer.write(epsilons)}
