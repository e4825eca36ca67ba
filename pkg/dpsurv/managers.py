"""
Record store for simulation output.

The store abstracts the on-disk layout of a run:

    <root>/records/<dataset>__<method>.csv   long-format simulation records
    <root>/baselines.json                    clean reference fits per dataset
    <root>/manifest.json                     plan, fixture hashes, version

Files are written sorted and without timestamps, so a store is a pure
function of the plan and the fixtures.
"""

import json
import logging
from collections import defaultdict
from pathlib import Path
from typing import Dict, Iterable, List, Optional

import pandas as pd

from . import __version__, settings
from .converters import FitConverter
from .settings import KEYS
from .structures import Baseline, SimulationPlan, SimulationRecord
from .utils import format_float


logger = logging.getLogger(settings.LOGGER_NAME)

RECORD_COLUMNS = (
    KEYS.dataset,
    KEYS.method,
    KEYS.epsilon,
    KEYS.iteration,
    KEYS.variable,
    KEYS.p_value,
    KEYS.hr,
    KEYS.converged,
    KEYS.train_c,
    KEYS.test_c,
    KEYS.separated,
)

_FLOAT_COLUMNS = (KEYS.p_value, KEYS.hr, KEYS.train_c, KEYS.test_c)

_SEPARATOR = "__"


def _dump_json(data, path: Path) -> None:
    with open(path, "w") as f:
        json.dump(data, f, indent=2, sort_keys=True)
        f.write("\n")


def _load_json(path: Path, default=None):
    if not path.exists():
        return default

    with open(path) as f:
        return json.load(f)


class _Writer:
    """Write operations on a store."""

    def __init__(self, root: Path) -> None:
        self.root = root
        self.converter = FitConverter()

    @staticmethod
    def _to_rows(record: SimulationRecord) -> List[list]:
        eps = format_float(record.epsilon)
        train_c = format_float(record.train_c)
        test_c = format_float(record.test_c)

        return [
            [
                record.dataset,
                record.method,
                eps,
                record.iteration,
                term,
                format_float(p),
                format_float(hr),
                int(record.converged),
                train_c,
                test_c,
                int(record.separated),
            ]
            for term, p, hr in zip(record.terms, record.p_value, record.hr)
        ]

    def write_shard(self, path: Path, records: Iterable[SimulationRecord]) -> None:
        rows = []
        for record in sorted(records, key=lambda r: r.key):
            rows.extend(self._to_rows(record))

        path.parent.mkdir(parents=True, exist_ok=True)
        frame = pd.DataFrame(rows, columns=RECORD_COLUMNS)
        frame.to_csv(path, index=False, lineterminator="\n")

    def write_baselines(self, baselines: Dict[str, Baseline]) -> None:
        path = self.root / "baselines.json"
        data = _load_json(path, {})

        for name, baseline in baselines.items():
            data[name] = self.converter.baseline_to_data(baseline)

        _dump_json(data, path)

    def write_manifest(self, plan: SimulationPlan, fixtures: Dict[str, str]) -> None:
        """Merge a plan into the manifest; conditions accumulate over runs."""

        path = self.root / "manifest.json"
        data = _load_json(path, {})
        previous = data.get("plan", {})

        def union(key, values, sort_key=None):
            return sorted(set(previous.get(key, [])) | set(values), key=sort_key)

        data["version"] = __version__
        data["plan"] = {
            "datasets": union("datasets", plan.datasets),
            "methods": union("methods", [m.value for m in plan.methods]),
            "epsilons": union(
                "epsilons", map(format_float, plan.epsilons), sort_key=float
            ),
            "iterations": plan.iterations,
            "base_seed": plan.base_seed,
            "train_fraction": plan.train_fraction,
        }
        data["fixtures"] = {**data.get("fixtures", {}), **fixtures}

        _dump_json(data, path)


class _Reader:
    """Read operations on a store."""

    def __init__(self, root: Path) -> None:
        self.root = root
        self.converter = FitConverter()

    @staticmethod
    def _to_records(frame: pd.DataFrame) -> List[SimulationRecord]:
        records = []
        keys = [KEYS.dataset, KEYS.method, KEYS.epsilon, KEYS.iteration]

        for (dataset, method, eps, b), rows in frame.groupby(keys, sort=True):
            first = rows.iloc[0]
            records.append(
                SimulationRecord(
                    dataset=str(dataset),
                    method=str(method),
                    epsilon=float(eps),
                    iteration=int(b),
                    terms=tuple(rows[KEYS.variable].astype(str)),
                    p_value=rows[KEYS.p_value].to_numpy(dtype=float),
                    hr=rows[KEYS.hr].to_numpy(dtype=float),
                    converged=bool(first[KEYS.converged]),
                    train_c=float(first[KEYS.train_c]),
                    test_c=float(first[KEYS.test_c]),
                    separated=bool(first[KEYS.separated]),
                )
            )

        return records

    def read_shard(self, path: Path) -> List[SimulationRecord]:
        if not path.exists():
            return []

        frame = pd.read_csv(
            path,
            float_precision="round_trip",
            dtype={KEYS.dataset: str, KEYS.method: str, KEYS.variable: str},
            keep_default_na=False,
            na_values={c: ["nan"] for c in _FLOAT_COLUMNS},
        )

        for column in (KEYS.epsilon,) + _FLOAT_COLUMNS:
            frame[column] = frame[column].astype(float)

        return self._to_records(frame)

    def read_baselines(self) -> Dict[str, Baseline]:
        data = _load_json(self.root / "baselines.json", {})

        return {name: self.converter.to_baseline(item) for name, item in data.items()}

    def read_manifest(self) -> dict:
        return _load_json(self.root / "manifest.json", {})


class RecordStore:
    """Record store manager."""

    def __init__(self, root) -> None:
        self.root = Path(root)
        self._writer = _Writer(self.root)
        self._reader = _Reader(self.root)

    @property
    def records_dir(self) -> Path:
        return self.root / "records"

    def shard_path(self, dataset: str, method: str) -> Path:
        return self.records_dir / f"{dataset}{_SEPARATOR}{method}.csv"

    def write(self, records: Iterable[SimulationRecord]) -> None:
        """Write records, replacing stored records with the same key.

        Records of other conditions already in a shard are kept.
        """

        shards = defaultdict(dict)
        for record in records:
            shards[(record.dataset, record.method)][record.key] = record

        for (dataset, method), new in shards.items():
            path = self.shard_path(dataset, method)
            merged = {r.key: r for r in self._reader.read_shard(path)}
            merged.update(new)
            self._writer.write_shard(path, merged.values())
            logger.info(f"Wrote {len(merged)} records to {path}")

    def read(
        self, dataset: Optional[str] = None, method: Optional[str] = None
    ) -> List[SimulationRecord]:
        """Records sorted by key, optionally of one dataset and/or method."""

        if not self.records_dir.exists():
            return []

        records = []

        for path in sorted(self.records_dir.glob("*.csv")):
            name, _, tag = path.stem.partition(_SEPARATOR)

            if dataset is not None and name != dataset:
                continue
            if method is not None and tag != method:
                continue

            records.extend(self._reader.read_shard(path))

        return sorted(records, key=lambda r: r.key)

    def pairs(self) -> List[tuple]:
        """(dataset, method) pairs present in the store."""

        if not self.records_dir.exists():
            return []

        return [
            tuple(path.stem.partition(_SEPARATOR)[::2])
            for path in sorted(self.records_dir.glob("*.csv"))
        ]

    def write_baselines(self, baselines: Dict[str, Baseline]) -> None:
        self.root.mkdir(parents=True, exist_ok=True)
        self._writer.write_baselines(baselines)

    def read_baselines(self) -> Dict[str, Baseline]:
        return self._reader.read_baselines()

    def write_manifest(self, plan: SimulationPlan, fixtures: Dict[str, str]) -> None:
        self.root.mkdir(parents=True, exist_ok=True)
        self._writer.write_manifest(plan, fixtures)

    def read_manifest(self) -> dict:
        return self._reader.read_manifest()

    def conditions(self) -> Dict[tuple, int]:
        """Record count per (dataset, method, epsilon)."""

        counts = defaultdict(int)
        for record in self.read():
            counts[(record.dataset, record.method, record.epsilon)] += 1

        return dict(counts)
