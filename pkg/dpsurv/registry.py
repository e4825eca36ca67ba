"""
Registry of the vendored clinical datasets.

Each entry freezes the covariate selection and encoding of one fixture
together with its expected size and baseline. Fixtures are produced by
`docs/scripts/export_fixtures.py`.
"""

from typing import Dict

from .exceptions import UnknownDataset
from .structures import CovariateDeclaration, CovariateKind, DatasetRegistryEntry


_C = CovariateKind.CONTINUOUS
_B = CovariateKind.BINARY
_K = CovariateKind.CATEGORICAL


def _covariates(*items):
    result = []

    for item in items:
        if isinstance(item, str):
            item = (item, _C)
        result.append(CovariateDeclaration(*item))

    return tuple(result)


LUNG = DatasetRegistryEntry(
    name="lung",
    n=168,
    events=121,
    q=7,
    event_rate=0.720,
    significant=("sex", "ph.ecog", "ph.karno"),
    covariates=_covariates(
        "age",
        ("sex", _B),
        "ph.ecog",
        "ph.karno",
        "pat.karno",
        "meal.cal",
        "wt.loss",
    ),
    c_index=0.651,
    test_c_index=0.614,
    intervals=8,
)

PBC = DatasetRegistryEntry(
    name="pbc",
    # complete cases of the 312 trial participants; counts live in the sidecar
    n=None,
    events=None,
    q=17,
    event_rate=None,
    significant=(
        "age",
        "edema",
        "bili",
        "albumin",
        "copper",
        "ast",
        "protime",
        "stage",
    ),
    covariates=_covariates(
        ("trt", _B),
        "age",
        ("sex", _B, ("m", "f")),
        ("ascites", _B),
        ("hepato", _B),
        ("spiders", _B),
        "edema",
        "bili",
        "chol",
        "albumin",
        "copper",
        "alk.phos",
        "ast",
        "trig",
        "platelet",
        "protime",
        "stage",
    ),
    c_index=0.857,
    test_c_index=0.831,
    intervals=9,
)

COLON = DatasetRegistryEntry(
    name="colon",
    # complete cases of the 929 recurrence records; counts live in the sidecar
    n=None,
    events=None,
    q=11,
    event_rate=None,
    significant=("nodes", "extent", "surg", "node4", "rxLev+5FU"),
    covariates=_covariates(
        ("rx", _K, ("Obs", "Lev", "Lev+5FU")),
        ("sex", _B),
        "age",
        ("obstruct", _B),
        ("perfor", _B),
        ("adhere", _B),
        "nodes",
        "differ",
        "extent",
        ("surg", _B),
        ("node4", _B),
    ),
    c_index=0.671,
    test_c_index=0.659,
    intervals=10,
)

ROTTERDAM = DatasetRegistryEntry(
    name="rotterdam",
    n=2982,
    events=1518,
    q=9,
    event_rate=0.509,
    significant=("age", "meno", "size>50", "size20-50", "grade", "nodes"),
    covariates=_covariates(
        "age",
        ("meno", _B),
        ("size", _K, ("<=20", "20-50", ">50")),
        "grade",
        "nodes",
        "pgr",
        "er",
        ("hormon", _B),
        ("chemo", _B),
    ),
    c_index=0.679,
    test_c_index=0.675,
    intervals=12,
)

FLCHAIN = DatasetRegistryEntry(
    name="flchain",
    n=6524,
    events=1962,
    q=7,
    event_rate=0.301,
    significant=("age", "sexM", "sample.yr", "lambda"),
    covariates=_covariates(
        "age",
        ("sex", _B, ("F", "M")),
        "sample.yr",
        "kappa",
        "lambda",
        "creatinine",
        ("mgus", _B),
    ),
    c_index=0.790,
    test_c_index=0.791,
    intervals=13,
)

REGISTRY: Dict[str, DatasetRegistryEntry] = {
    entry.name: entry for entry in (LUNG, PBC, COLON, ROTTERDAM, FLCHAIN)
}


def get_entry(name: str) -> DatasetRegistryEntry:
    """Return the registry entry with the given name.

    Raises `UnknownDataset` naming the valid entries otherwise.
    """

    try:
        return REGISTRY[name]
    except KeyError:
        valid = ", ".join(REGISTRY)
        raise UnknownDataset(f"Unknown dataset '{name}'; valid names: {valid}.")
