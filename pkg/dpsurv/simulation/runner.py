"""
Monte Carlo runner.

Every (dataset, method, epsilon, iteration) is an independent work item
with its own random stream, so a pool may run items in any order and the
record store comes out the same. Per item:

  1. Split rows 70/30 stratified on the event indicator. The split stream
     depends on (dataset, iteration) only and is shared by all methods and
     epsilons.
  2. Perturb the full dataset once with the item's stream.
  3. Fit the perturbed full data: p-values and hazard ratios.
  4. Fit the perturbed training rows and score the clean test rows: test
     C-index. Train C-index is measured on the data as fitted.

Output perturbation fits clean data and adds noise to the coefficients,
first to the full-data fit, then to the training fit.
"""

import logging
import math
import multiprocessing
import struct
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, NamedTuple, Optional

import numpy as np

from .. import settings
from ..converters import design_matrix
from ..datasets import fixture_path, load_reference, split_indices, subset
from ..exceptions import NonConvergence
from ..managers import RecordStore
from ..metrics import phase3_exclusions
from ..models.cox import fit_cox, linear_predictor
from ..models.concordance import concordance
from ..perturbation import (
    fit_stacked,
    output_dfbeta,
    perturb,
    stack,
    stack_release,
    sturges_intervals,
)
from ..registry import REGISTRY
from ..structures import (
    Baseline,
    FitOptions,
    MethodTag,
    PerturbationMethod,
    SeedContext,
    SimulationPlan,
    SimulationRecord,
    SurvivalDataset,
)
from ..utils import file_sha256, format_epsilon
from .seeding import split_context
from .shortcuts import concordance_or_nan, failed_record, fit_or_none


logger = logging.getLogger(settings.LOGGER_NAME)

METHOD_ORDER = tuple(MethodTag)


class WorkItem(NamedTuple):
    dataset: str
    method: MethodTag
    epsilon: float
    iteration: int


@dataclass(frozen=True)
class _RunState:
    """Everything a worker needs, shipped once per process."""

    plan: SimulationPlan
    datasets: Dict[str, SurvivalDataset]
    baselines: Dict[str, Baseline]
    dataset_indices: Dict[str, int]
    options: Optional[FitOptions] = None


_STATE: Optional[_RunState] = None


def _init_worker(state: _RunState) -> None:
    global _STATE
    _STATE = state


def dataset_index(reference: str, position: int) -> int:
    """Registry position for registry names, past the registry otherwise."""

    names = list(REGISTRY)

    if reference in names:
        return names.index(reference)

    return len(names) + position


def epsilon_index(eps: float) -> int:
    """Position on the default grid, or the bit pattern of other values."""

    if eps in settings.EPSILON_GRID:
        return settings.EPSILON_GRID.index(eps)

    return struct.unpack("<q", struct.pack("<d", eps))[0]


def method_index(tag: MethodTag) -> int:
    return METHOD_ORDER.index(tag)


def compute_baseline(
    dataset: SurvivalDataset,
    options: FitOptions = None,
    alpha: float = settings.ALPHA,
) -> Baseline:
    """Clean Cox fit, interval grid, clean discrete-time fit and exclusions."""

    cox = fit_cox(dataset, options)

    if not cox.converged:
        raise NonConvergence(f"{dataset.name}: baseline Cox fit did not converge.")

    grid = sturges_intervals(dataset)
    stacked = stack(dataset, grid.exit_interval(dataset.T), dataset.delta, grid.K)
    glm = fit_stacked(stacked, options)

    if not glm.converged:
        logger.warning(f"{dataset.name}: baseline discrete-time fit did not converge")

    c_index = concordance(dataset.T, dataset.delta, linear_predictor(cox, dataset))
    exclusions = phase3_exclusions(cox, glm, alpha)

    logger.info(
        f"{dataset.name}: baseline C={c_index:.3f}, K={grid.K}, "
        f"significant={list(cox.significant(alpha))}, "
        f"phase 3 exclusions={sorted(exclusions)}"
    )

    return Baseline(
        dataset=dataset.name,
        cox=cox,
        glm=glm,
        grid=grid,
        exclusions=exclusions,
        c_index=c_index,
    )


def _cox_outcome(fit):
    """p-values and hazard ratios of a significance fit, NaN unless converged."""

    if fit is None or not fit.converged:
        return None

    return fit.p_value, fit.hr


def _cox_item(item, state, dataset, train, test, rng, context):
    baseline = state.baselines[dataset.name]
    method = PerturbationMethod(item.method)
    options = state.options

    if item.method is MethodTag.OUTPUT:
        full = fit_or_none(
            output_dfbeta, dataset, item.epsilon, rng, baseline.cox, context=context
        )
        train_data = subset(dataset, train)
        clean = fit_or_none(fit_cox, train_data, options, context=context)
        train_fit = None
        if clean is not None:
            train_fit = fit_or_none(
                output_dfbeta, train_data, item.epsilon, rng, clean, context=context
            )
    else:
        release = perturb(method, dataset, item.epsilon, rng)
        full = fit_or_none(fit_cox, release.dataset, options, context=context)
        train_data = release.subset(train).dataset
        train_fit = fit_or_none(fit_cox, train_data, options, context=context)

    train_c = test_c = math.nan

    if train_fit is not None and train_fit.converged:
        test_data = subset(dataset, test)
        train_c = concordance_or_nan(
            train_data.T,
            train_data.delta,
            linear_predictor(train_fit, train_data),
            context=context,
        )
        test_c = concordance_or_nan(
            test_data.T,
            test_data.delta,
            linear_predictor(train_fit, test_data),
            context=context,
        )

    return _cox_outcome(full), train_c, test_c, False


def _phase3_item(item, state, dataset, train, test, rng, context):
    baseline = state.baselines[dataset.name]
    grid = baseline.grid
    terms = baseline.cox.terms
    method = PerturbationMethod(item.method, grid.K)

    release = perturb(method, dataset, item.epsilon, rng, grid)
    stacked = stack_release(release, grid.K)
    full = fit_or_none(fit_stacked, stacked, state.options, context=context)

    outcome = None
    separated = full is not None and full.separated

    if full is not None and full.converged:
        index = [full.terms.index(t) for t in terms]
        with np.errstate(over="ignore"):
            outcome = full.p_value[index], np.exp(full.coefficients[index])

    train_release = release.subset(train)
    train_stacked = stack_release(train_release, grid.K)
    train_fit = fit_or_none(fit_stacked, train_stacked, state.options, context=context)
    train_c = test_c = math.nan

    if train_fit is not None and train_fit.converged:
        coefficients = train_fit.coefficients[grid.K :]
        train_x, _ = design_matrix(train_release.dataset.X, dataset.specs)
        test_data = subset(dataset, test)
        test_x, _ = design_matrix(test_data.X, dataset.specs)

        train_c = concordance_or_nan(
            train_release.exit_interval,
            train_release.event,
            train_x @ coefficients,
            context=context,
        )
        test_c = concordance_or_nan(
            test_data.T, test_data.delta, test_x @ coefficients, context=context
        )

    return outcome, train_c, test_c, separated


def run_item(item: WorkItem, state: _RunState = None) -> SimulationRecord:
    """Run one work item and return its record."""

    state = state or _STATE
    plan = state.plan
    dataset = state.datasets[item.dataset]
    terms = state.baselines[item.dataset].cox.terms
    d = state.dataset_indices[item.dataset]
    key = (item.dataset, item.method.value, item.epsilon, item.iteration)
    context = (
        f"{item.dataset}/{item.method.value}/eps={format_epsilon(item.epsilon)}"
        f"/b={item.iteration}"
    )

    train, test = split_indices(
        dataset.delta,
        plan.train_fraction,
        split_context(plan.base_seed, d, item.iteration),
    )
    rng = SeedContext(
        base_seed=plan.base_seed,
        dataset_index=d,
        method_index=method_index(item.method),
        epsilon_index=epsilon_index(item.epsilon),
        iteration=item.iteration,
    ).generator()

    if item.method is MethodTag.PHASE3:
        handler = _phase3_item
    else:
        handler = _cox_item

    outcome, train_c, test_c, separated = handler(
        item, state, dataset, train, test, rng, context
    )

    if outcome is None:
        return failed_record(
            key, terms, train_c=train_c, test_c=test_c, separated=separated
        )

    p_value, hr = outcome

    return SimulationRecord(
        dataset=item.dataset,
        method=item.method.value,
        epsilon=item.epsilon,
        iteration=item.iteration,
        terms=terms,
        p_value=p_value,
        hr=hr,
        converged=True,
        train_c=train_c,
        test_c=test_c,
        separated=separated,
    )


def _run_item(item: WorkItem) -> SimulationRecord:
    return run_item(item)


def work_items(plan: SimulationPlan, names: List[str]) -> List[WorkItem]:
    return [
        WorkItem(name, method, eps, b)
        for name in names
        for method in plan.methods
        for eps in plan.epsilons
        for b in range(plan.iterations)
    ]


def run(
    plan: SimulationPlan,
    store: RecordStore = None,
    workers: int = 1,
    data_dir: Path = None,
    options: FitOptions = None,
) -> RecordStore:
    """Run a simulation plan into a record store.

    Fixture and schema errors abort the run; numerical failures inside an
    iteration are recorded as non-converged records. The store content
    does not depend on `workers`.
    """

    store = store if store is not None else RecordStore(settings.output_dir())
    datasets, baselines, indices, fixtures = {}, {}, {}, {}

    for position, reference in enumerate(plan.datasets):
        dataset = load_reference(reference, data_dir)
        datasets[dataset.name] = dataset
        baselines[dataset.name] = compute_baseline(dataset, options)
        indices[dataset.name] = dataset_index(reference, position)
        fixtures[dataset.name] = file_sha256(fixture_path(reference, data_dir))

    state = _RunState(plan, datasets, baselines, indices, options)
    items = work_items(plan, list(datasets))
    total = Counter((i.dataset, i.method, i.epsilon) for i in items)
    done = Counter()
    records = []

    logger.info(f"Running {len(items)} iterations with {workers} worker(s)")

    def collect(record):
        records.append(record)
        condition = (record.dataset, MethodTag(record.method), record.epsilon)
        done[condition] += 1

        if done[condition] == total[condition]:
            logger.info(
                f"{record.dataset}/{record.method}/"
                f"eps={format_epsilon(record.epsilon)}: "
                f"{done[condition]}/{total[condition]} iterations done"
            )

    if workers > 1:
        chunksize = max(1, len(items) // (workers * 16))

        with multiprocessing.Pool(workers, _init_worker, (state,)) as pool:
            for record in pool.imap_unordered(_run_item, items, chunksize):
                collect(record)
    else:
        for item in items:
            collect(run_item(item, state))

    store.write(records)
    store.write_baselines(baselines)
    store.write_manifest(plan, fixtures)

    return store
