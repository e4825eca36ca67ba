"""
Loading, validation and splitting of survival datasets.
"""

import json
import logging
import math
from dataclasses import replace
from pathlib import Path
from typing import Optional, Tuple, Union

import numpy as np
import pandas as pd

from . import settings
from .converters import DatasetConverter
from .exceptions import (
    DegenerateRange,
    MissingFixture,
    ParseError,
    SchemaMismatch,
    TooSmall,
    ValidationFailure,
)
from .registry import REGISTRY, get_entry
from .settings import KEYS
from .structures import (
    CovariateKind,
    DatasetRegistryEntry,
    SeedContext,
    SurvivalDataset,
)
from .utils import format_float


logger = logging.getLogger(settings.LOGGER_NAME)

# guards floor() against products like 0.7 * 30 = 20.999999999999996
_FLOOR_SLACK = 1e-9


def metadata_path(path: Path) -> Path:
    return Path(path).with_suffix(".json")


def _read_metadata(path: Path) -> dict:
    path = metadata_path(path)

    if not path.exists():
        return {}

    try:
        with open(path) as f:
            return json.load(f)
    except (OSError, ValueError) as e:
        raise ParseError(f"Cannot read metadata {path}: {e}")


def _read_frame(path: Path, columns) -> pd.DataFrame:
    try:
        frame = pd.read_csv(path, float_precision="round_trip")
    except (OSError, ValueError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise ParseError(f"Cannot read {path}: {e}")

    if sorted(frame.columns) != sorted(columns):
        raise SchemaMismatch(
            f"Columns of {path} are {list(frame.columns)}, expected {list(columns)}."
        )

    try:
        frame = frame.apply(pd.to_numeric)
    except (ValueError, TypeError) as e:
        raise ParseError(f"Non-numeric value in {path}: {e}")

    return frame


def validate(dataset: SurvivalDataset) -> None:
    """Check the value domains of a dataset.

    Raises `ValidationFailure` on the first violated domain.
    """

    if not np.all(np.isfinite(dataset.X)) or not np.all(np.isfinite(dataset.T)):
        raise ValidationFailure(f"{dataset.name}: non-finite values.")

    if np.any(dataset.T <= 0):
        raise ValidationFailure(f"{dataset.name}: observation times must be positive.")

    if not np.all(np.isin(dataset.delta, (0, 1))):
        raise ValidationFailure(f"{dataset.name}: status must be 0 or 1.")

    for j, spec in enumerate(dataset.specs):
        values = dataset.X[:, j]

        if spec.kind is CovariateKind.BINARY:
            valid = np.isin(values, (0, 1))
        elif spec.kind is CovariateKind.CATEGORICAL:
            valid = np.isin(values, np.arange(1, spec.k + 1))
        else:
            continue

        if not np.all(valid):
            raise ValidationFailure(
                f"{dataset.name}: invalid levels of '{spec.name}': "
                f"{sorted(set(values[~valid]))}."
            )


def check_registry(dataset: SurvivalDataset, expected: dict) -> None:
    """Compare size, events and q against expected values."""

    actual = {"n": dataset.n, "events": dataset.events, "q": dataset.q}
    diff = {
        key: (actual[key], expected[key])
        for key in actual
        if key in expected and actual[key] != expected[key]
    }

    if diff:
        listed = ", ".join(f"{k}={a} (expected {e})" for k, (a, e) in diff.items())
        raise ValidationFailure(f"{dataset.name}: {listed}.")


def derive_bounds(dataset: SurvivalDataset) -> SurvivalDataset:
    """Return the dataset with bounds set to observed min/max.

    Continuous covariates get clipping bounds, the dataset gets time
    bounds. A constant continuous covariate raises `DegenerateRange`.
    """

    if dataset.n == 0:
        raise TooSmall(f"{dataset.name}: cannot derive bounds of an empty dataset.")

    specs = []

    for j, spec in enumerate(dataset.specs):
        if spec.kind is CovariateKind.CONTINUOUS:
            lower, upper = dataset.X[:, j].min(), dataset.X[:, j].max()

            if lower == upper:
                raise DegenerateRange(
                    f"{dataset.name}: covariate '{spec.name}' is constant ({lower})."
                )

            spec = spec.with_bounds(lower, upper)

        specs.append(spec)

    return replace(
        dataset,
        specs=tuple(specs),
        time_lower=float(dataset.T.min()),
        time_upper=float(dataset.T.max()),
    )


def load_dataset(
    path: Union[str, Path], entry: Optional[DatasetRegistryEntry] = None
) -> SurvivalDataset:
    """Load a canonical CSV fixture and its JSON sidecar.

    Covariates are declared by the registry entry when given, by the
    sidecar otherwise. Rows with missing values are dropped. The result
    carries data-driven bounds and is checked against the sidecar's
    `registry` block and the registry entry, the entry taking precedence.
    """

    path = Path(path)
    converter = DatasetConverter()
    metadata = _read_metadata(path)

    if entry is not None and entry.covariates:
        declarations = entry.covariates

        if "covariates" in metadata:
            declared = converter.to_declarations(metadata)
            if declared != tuple(declarations):
                raise SchemaMismatch(
                    f"Metadata of {path} disagrees with registry entry '{entry.name}'."
                )
    else:
        declarations = converter.to_declarations(metadata)

    name = entry.name if entry is not None else metadata.get("name", path.stem)
    columns = [d.name for d in declarations] + [KEYS.time, KEYS.status]
    frame = _read_frame(path, columns)

    complete = frame.dropna().reset_index(drop=True)
    dropped = len(frame) - len(complete)
    if dropped:
        logger.info(f"{name}: dropped {dropped} incomplete rows")

    dataset = converter.to_dataset(complete, declarations, name)
    validate(dataset)
    dataset = derive_bounds(dataset)

    expected = dict(metadata.get("registry", {}))
    if entry is not None:
        expected.update(entry.expected)
    check_registry(dataset, expected)

    logger.info(f"Loaded {dataset.info}")

    return dataset


def load_registry_dataset(name: str, data_dir: Path = None) -> SurvivalDataset:
    """Load a registry dataset from `<data_dir>/<name>.csv`."""

    entry = get_entry(name)
    data_dir = Path(data_dir) if data_dir is not None else settings.DATA_DIR

    path = data_dir / f"{name}.csv"
    if not path.exists():
        raise MissingFixture(
            f"{path} not found; export it with docs/scripts/export_fixtures.py {name}"
        )

    return load_dataset(path, entry)


def fixture_path(reference: str, data_dir: Path = None) -> Path:
    """CSV path of a registry name or an explicit path.

    Raises `UnknownDataset` naming the registry entries when the
    reference is neither.
    """

    if reference in REGISTRY:
        data_dir = Path(data_dir) if data_dir is not None else settings.DATA_DIR
        return data_dir / f"{reference}.csv"

    path = Path(reference)
    if path.suffix == ".csv" or path.exists():
        return path

    get_entry(reference)


def load_reference(reference: str, data_dir: Path = None) -> SurvivalDataset:
    """Load a dataset given a registry name or a CSV path."""

    if reference in REGISTRY:
        return load_registry_dataset(reference, data_dir)

    return load_dataset(fixture_path(reference, data_dir))


def save_dataset(dataset: SurvivalDataset, path: Union[str, Path]) -> None:
    """Write the canonical CSV and its sidecar.

    Floats are written in shortest round-trip form, so `load_dataset`
    gives back the same values bit for bit.
    """

    path = Path(path)
    converter = DatasetConverter()
    frame = converter.to_frame(dataset)

    for column in frame.columns:
        if frame[column].dtype.kind == "f":
            frame[column] = frame[column].map(format_float)

    frame.to_csv(path, index=False)

    with open(metadata_path(path), "w") as f:
        json.dump(converter.to_metadata(dataset), f, indent=2)


def subset(dataset: SurvivalDataset, indices) -> SurvivalDataset:
    """Rows of a dataset; specs and bounds are those of the parent."""

    indices = np.asarray(indices, dtype=np.intp)

    return replace(
        dataset,
        X=dataset.X[indices],
        T=dataset.T[indices],
        delta=dataset.delta[indices],
    )


def split_indices(
    delta: np.ndarray,
    train_fraction: float,
    seed: Union[SeedContext, np.random.Generator],
) -> Tuple[np.ndarray, np.ndarray]:
    """Stratified train/test row indices.

    Within events and within censored rows, floor(fraction * count) rows
    go to train and the rest to test. Indices are returned sorted.
    """

    if not 0 < train_fraction < 1:
        raise ValueError("train fraction must be in (0, 1)")

    rng = seed.generator() if isinstance(seed, SeedContext) else seed
    delta = np.asarray(delta)
    train, test = [], []

    for status in (1, 0):
        rows = np.flatnonzero(delta == status)
        size = math.floor(train_fraction * len(rows) + _FLOOR_SLACK)

        if size == 0 or size == len(rows):
            raise TooSmall(
                f"Stratum status={status} with {len(rows)} rows cannot be split "
                f"at fraction {train_fraction}."
            )

        rows = rng.permutation(rows)
        train.append(rows[:size])
        test.append(rows[size:])

    return np.sort(np.concatenate(train)), np.sort(np.concatenate(test))


def stratified_split(
    dataset: SurvivalDataset,
    train_fraction: float,
    seed: Union[SeedContext, np.random.Generator],
) -> Tuple[SurvivalDataset, SurvivalDataset]:
    """Split a dataset 'train/test' stratified on the event indicator."""

    train, test = split_indices(dataset.delta, train_fraction, seed)

    return subset(dataset, train), subset(dataset, test)
