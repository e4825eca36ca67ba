import logging
import math
from typing import Iterator, List, NamedTuple, Optional, Sequence

from .. import settings
from ..exceptions import HarnessError
from ..metrics import mean_test_c, summarize
from ..structures import (
    Baseline,
    MethodTag,
    MetricsConfig,
    MetricSummary,
    SimulationRecord,
)


logger = logging.getLogger(settings.LOGGER_NAME)


class StoredCondition(NamedTuple):
    dataset: str
    method: str
    baseline: Baseline
    config: MetricsConfig
    records: List[SimulationRecord]
    baseline_test_c: float


class SummaryMixin:
    """Provides `conditions` and `summaries` over a record store.

    1. Uses `store` to read records and baselines per (dataset, method).
    2. Uses the dataset baseline to build the metrics config of the method.
    """

    store = None
    alpha = settings.ALPHA

    def conditions(
        self, epsilons: Optional[Sequence[float]] = None
    ) -> Iterator[StoredCondition]:
        """Stored (dataset, method) pairs with records filtered to `epsilons`.

        The baseline test C-index is taken from the epsilon=inf records
        before filtering.
        """

        baselines = self.store.read_baselines()

        for dataset, method in self.store.pairs():
            if dataset not in baselines:
                raise HarnessError(f"No baseline stored for dataset '{dataset}'.")

            baseline = baselines[dataset]
            records = self.store.read(dataset, method)
            clean = [r for r in records if math.isinf(r.epsilon)]
            baseline_test_c = mean_test_c(clean) if clean else math.nan

            if epsilons is not None:
                records = [r for r in records if r.epsilon in epsilons]

            if not records:
                continue

            yield StoredCondition(
                dataset=dataset,
                method=method,
                baseline=baseline,
                config=baseline.metrics_config(MethodTag(method), self.alpha),
                records=records,
                baseline_test_c=baseline_test_c,
            )

    def summaries(
        self, epsilons: Optional[Sequence[float]] = None
    ) -> List[MetricSummary]:
        result = []

        for condition in self.conditions(epsilons):
            result.extend(
                summarize(
                    condition.records, condition.config, condition.baseline_test_c
                )
            )

        logger.info(f"Summarized {len(result)} conditions")

        return result
