"""
Helper script freezes the five clinical fixtures from the public R
`survival` datasets into `<data_dir>/<name>.csv` plus JSON sidecars.

Needs network access and statsmodels (see requirements/local.txt). The
covariate selection and encoding follow the registry entries. Rows with
a missing value in a selected column are dropped, never imputed.
"""

import argparse
from pathlib import Path

import pandas as pd

from dpsurv import settings
from dpsurv.converters import DatasetConverter
from dpsurv.datasets import check_registry, derive_bounds, save_dataset
from dpsurv.registry import REGISTRY
from dpsurv.settings import KEYS
from dpsurv.structures import SurvivalDataset


def _codes(values: pd.Series, labels) -> pd.Series:
    """Integer level codes 1..k of a factor."""

    return values.astype(str).map({label: i for i, label in enumerate(labels, 1)})


def lung(raw: pd.DataFrame) -> pd.DataFrame:
    frame = raw.copy()
    frame["sex"] = frame["sex"] - 1
    frame[KEYS.status] = (frame["status"] == 2).astype(int)
    return frame


def pbc(raw: pd.DataFrame) -> pd.DataFrame:
    # the randomized trial participants only
    frame = raw[raw["trt"].notna()].copy()
    frame["trt"] = frame["trt"] - 1
    frame["sex"] = (frame["sex"] == "f").astype(int)
    frame[KEYS.status] = (frame["status"] == 2).astype(int)
    return frame


def colon(raw: pd.DataFrame) -> pd.DataFrame:
    # recurrence records
    frame = raw[raw["etype"] == 1].copy()
    frame["rx"] = _codes(frame["rx"], ("Obs", "Lev", "Lev+5FU"))
    return frame


def rotterdam(raw: pd.DataFrame) -> pd.DataFrame:
    frame = raw.copy()
    frame["size"] = _codes(frame["size"], ("<=20", "20-50", ">50"))
    frame[KEYS.time] = frame["rtime"]
    frame[KEYS.status] = frame["recur"]
    return frame


def flchain(raw: pd.DataFrame) -> pd.DataFrame:
    frame = raw.copy()
    frame["sex"] = (frame["sex"] == "M").astype(int)
    # zero follow-up is recorded on the day of sampling
    frame[KEYS.time] = frame["futime"].where(frame["futime"] > 0, 0.5)
    frame[KEYS.status] = frame["death"]
    return frame


PREPARE = {
    "lung": lung,
    "pbc": pbc,
    "colon": colon,
    "rotterdam": rotterdam,
    "flchain": flchain,
}


def prepare(name: str, raw: pd.DataFrame) -> pd.DataFrame:
    """Registry columns of the complete cases of a raw R dataset."""

    entry = REGISTRY[name]
    frame = PREPARE[name](raw)
    columns = [c.name for c in entry.covariates] + [KEYS.time, KEYS.status]

    return frame[columns].dropna().reset_index(drop=True)


def export(name: str, data_dir: Path) -> SurvivalDataset:
    from statsmodels.datasets import get_rdataset

    entry = REGISTRY[name]
    frame = prepare(name, get_rdataset(name, "survival").data)

    dataset = DatasetConverter().to_dataset(frame, entry.covariates, name)
    dataset = derive_bounds(dataset)
    check_registry(dataset, entry.expected)
    path = data_dir / f"{name}.csv"
    save_dataset(dataset, path)

    return dataset


def main():
    parser = argparse.ArgumentParser(description=__doc__.strip().splitlines()[0])
    parser.add_argument("names", nargs="*", default=list(REGISTRY))
    parser.add_argument("--data-dir", type=Path, default=settings.DATA_DIR)
    args = parser.parse_args()

    args.data_dir.mkdir(parents=True, exist_ok=True)

    for name in args.names:
        dataset = export(name, args.data_dir)
        print(f"Exported {dataset.info} to {args.data_dir}.")


if __name__ == "__main__":
    main()
