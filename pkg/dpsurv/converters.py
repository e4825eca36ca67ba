"""
This module contains converter classes.
"""

import math
from typing import Iterable, List, Sequence, Tuple

import numpy as np
import pandas as pd

from .exceptions import SchemaMismatch
from .settings import KEYS
from .structures import (
    Baseline,
    CovariateDeclaration,
    CovariateKind,
    CovariateSpec,
    CoxFit,
    GlmFit,
    IntervalGrid,
    SurvivalDataset,
    Term,
)


class DatasetConverter:
    """Supports conversion between tabular fixtures and datasets.

    A fixture is a frame with one column per covariate plus `time` and
    `status`, and a metadata dict (the JSON sidecar) that declares the
    covariates.
    """

    @staticmethod
    def _to_declaration(data: dict) -> CovariateDeclaration:
        try:
            kind = CovariateKind(data["kind"])
            return CovariateDeclaration(
                name=data["name"], kind=kind, labels=tuple(data.get("labels", ()))
            )
        except (KeyError, ValueError) as e:
            raise SchemaMismatch(f"Invalid covariate declaration {data}: {e}")

    @staticmethod
    def _from_declaration(declaration: CovariateDeclaration) -> dict:
        data = {"name": declaration.name, "kind": declaration.kind.value}

        if declaration.labels:
            data["labels"] = list(declaration.labels)

        return data

    @staticmethod
    def _to_spec(declaration: CovariateDeclaration) -> CovariateSpec:
        kind = declaration.kind

        if kind is CovariateKind.CATEGORICAL and len(declaration.labels) < 3:
            raise SchemaMismatch(
                f"Categorical covariate '{declaration.name}' needs at least 3 labels."
            )
        if kind is CovariateKind.BINARY and len(declaration.labels) not in (0, 2):
            raise SchemaMismatch(
                f"Binary covariate '{declaration.name}' takes 0 or 2 labels."
            )

        if kind is CovariateKind.BINARY:
            lower, upper = 0.0, 1.0
        elif kind is CovariateKind.CATEGORICAL:
            lower, upper = 1.0, float(len(declaration.labels))
        else:
            lower = upper = math.nan

        return CovariateSpec(
            name=declaration.name,
            kind=kind,
            lower=lower,
            upper=upper,
            category_labels=declaration.labels,
        )

    @staticmethod
    def _from_spec(spec: CovariateSpec) -> CovariateDeclaration:
        return CovariateDeclaration(
            name=spec.name, kind=spec.kind, labels=spec.category_labels
        )

    def to_declarations(self, metadata: dict) -> Tuple[CovariateDeclaration, ...]:
        """Covariate declarations of a sidecar metadata dict."""

        if "covariates" not in metadata:
            raise SchemaMismatch("Metadata does not declare covariates.")

        return tuple(map(self._to_declaration, metadata["covariates"]))

    def to_metadata(self, dataset: SurvivalDataset) -> dict:
        """Sidecar metadata of a dataset."""

        return {
            "name": dataset.name,
            "covariates": [
                self._from_declaration(self._from_spec(spec)) for spec in dataset.specs
            ],
            "registry": {
                "n": dataset.n,
                "events": dataset.events,
                "q": dataset.q,
            },
        }

    def to_dataset(
        self,
        frame: pd.DataFrame,
        declarations: Iterable[CovariateDeclaration],
        name: str,
    ) -> SurvivalDataset:
        """Convert a complete-case frame to a dataset with unset bounds."""

        specs = tuple(map(self._to_spec, declarations))
        names = [spec.name for spec in specs]
        expected = names + [KEYS.time, KEYS.status]

        if sorted(frame.columns) != sorted(expected):
            raise SchemaMismatch(
                f"Columns {list(frame.columns)} do not match {expected}."
            )

        return SurvivalDataset(
            name=name,
            X=frame[names].to_numpy(dtype=float),
            T=frame[KEYS.time].to_numpy(dtype=float),
            delta=frame[KEYS.status].to_numpy(dtype=np.int64),
            specs=specs,
        )

    @staticmethod
    def to_frame(dataset: SurvivalDataset) -> pd.DataFrame:
        """Canonical frame of a dataset; discrete covariates as integers."""

        columns = {}

        for j, spec in enumerate(dataset.specs):
            values = dataset.X[:, j]

            if spec.kind is CovariateKind.CONTINUOUS:
                columns[spec.name] = values
            else:
                columns[spec.name] = values.astype(np.int64)

        columns[KEYS.time] = dataset.T
        columns[KEYS.status] = dataset.delta

        return pd.DataFrame(columns)


def design_matrix(
    X: np.ndarray, specs: Sequence[CovariateSpec]
) -> Tuple[np.ndarray, Tuple[Term, ...]]:
    """Expand covariates to model columns.

    Continuous and binary covariates give one column each. A categorical
    covariate with levels 1..k gives k - 1 indicators of levels 2..k,
    contrasted with the first level.
    """

    columns: List[np.ndarray] = []
    terms: List[Term] = []

    for j, spec in enumerate(specs):
        values = X[:, j]

        if spec.kind is CovariateKind.CATEGORICAL:
            for level in range(2, spec.k + 1):
                columns.append((values == level).astype(float))
        else:
            columns.append(values.astype(float))

        terms.extend(spec.terms)

    matrix = np.column_stack(columns) if columns else np.empty((len(X), 0))

    return matrix, tuple(terms)


class FitConverter:
    """Supports conversion between fits, baselines and JSON-ready data."""

    @staticmethod
    def _floats(values) -> list:
        return [float(v) for v in np.ravel(values)]

    def to_data(self, fit: CoxFit) -> dict:
        p = len(fit.terms)
        covariance = np.reshape(fit.covariance, (p, p))
        data = {
            "terms": list(fit.terms),
            "beta": self._floats(fit.beta),
            "se": self._floats(fit.se),
            "z": self._floats(fit.wald_z),
            "p_value": self._floats(fit.p_value),
            "hr": self._floats(fit.hr),
            "covariance": [self._floats(row) for row in covariance],
            "log_partial_likelihood": float(fit.log_partial_likelihood),
            "converged": bool(fit.converged),
            "iterations": int(fit.iterations),
            "ties": fit.ties,
        }

        return data

    @staticmethod
    def to_fit(data: dict) -> CoxFit:
        def array(key):
            return np.asarray(data[key], dtype=float)

        return CoxFit(
            terms=tuple(data["terms"]),
            beta=array("beta"),
            covariance=array("covariance"),
            se=array("se"),
            wald_z=array("z"),
            p_value=array("p_value"),
            hr=array("hr"),
            log_partial_likelihood=float(data["log_partial_likelihood"]),
            converged=bool(data["converged"]),
            iterations=int(data["iterations"]),
            ties=data.get("ties", "efron"),
        )

    def glm_to_data(self, fit: GlmFit) -> dict:
        d = len(fit.terms)
        covariance = np.reshape(fit.covariance, (d, d))

        return {
            "terms": list(fit.terms),
            "coefficients": self._floats(fit.coefficients),
            "se": self._floats(fit.se),
            "p_value": self._floats(fit.p_value),
            "covariance": [self._floats(row) for row in covariance],
            "deviance": float(fit.deviance),
            "converged": bool(fit.converged),
            "separated": bool(fit.separated),
            "iterations": int(fit.iterations),
        }

    @staticmethod
    def to_glm(data: dict) -> GlmFit:
        def array(key):
            return np.asarray(data[key], dtype=float)

        return GlmFit(
            terms=tuple(data["terms"]),
            coefficients=array("coefficients"),
            covariance=array("covariance"),
            se=array("se"),
            p_value=array("p_value"),
            deviance=float(data["deviance"]),
            log_likelihood=-float(data["deviance"]) / 2,
            converged=bool(data["converged"]),
            separated=bool(data["separated"]),
            iterations=int(data["iterations"]),
        )

    def baseline_to_data(self, baseline: Baseline) -> dict:
        return {
            "dataset": baseline.dataset,
            "cox": self.to_data(baseline.cox),
            "glm": self.glm_to_data(baseline.glm),
            "boundaries": self._floats(baseline.grid.boundaries),
            "exclusions": sorted(baseline.exclusions),
            "c_index": float(baseline.c_index),
        }

    def to_baseline(self, data: dict) -> Baseline:
        return Baseline(
            dataset=data["dataset"],
            cox=self.to_fit(data["cox"]),
            glm=self.to_glm(data["glm"]),
            grid=IntervalGrid(np.asarray(data["boundaries"], dtype=float)),
            exclusions=frozenset(data["exclusions"]),
            c_index=float(data["c_index"]),
        )
