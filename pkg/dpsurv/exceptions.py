"""
Custom exceptions.

Every error carries a default message and the process exit code the
command-line interface reports for it.
"""


class DpsurvError(Exception):
    """Base class for all library errors."""

    default_detail = "dpsurv error."
    exit_code = 2

    def __init__(self, detail: str = None):
        self.detail = detail if detail is not None else self.default_detail
        super().__init__(self.detail)


# data errors
class DataError(DpsurvError):
    default_detail = "Invalid data."
    exit_code = 2


class SchemaMismatch(DataError):
    """Columns of a fixture do not match its covariate list."""

    default_detail = "Columns do not match the dataset schema."


class ValidationFailure(DataError):
    """Loaded dataset differs from the registry."""

    default_detail = "Dataset does not match its registry entry."


class ParseError(DataError):
    default_detail = "Cannot parse dataset file."


class DegenerateRange(DataError):
    """A clipping range has zero width."""

    default_detail = "Lower and upper bounds coincide."


class TooSmall(DataError):
    default_detail = "Too few rows to split."


class UnknownDataset(DataError):
    default_detail = "Unknown dataset."


class MissingFixture(DataError):
    """A registry fixture has not been exported yet."""

    default_detail = "Dataset fixture not found."


# numerical errors
class NumericalError(DpsurvError):
    default_detail = "Numerical failure."
    exit_code = 3


class NonConvergence(NumericalError):
    default_detail = "Iteration limit reached before convergence."


class NotConverged(NumericalError):
    """An operation needs a converged fit."""

    default_detail = "The fit has not converged."


class SingularInformation(NumericalError):
    default_detail = "Information matrix is singular; design is rank deficient."


class NoEvents(NumericalError):
    default_detail = "Dataset has no events."


class NumericOverflow(NumericalError):
    default_detail = "Linear predictor exceeds the representable exponent range."


class NoComparablePairs(NumericalError):
    default_detail = "No comparable pairs for the concordance index."


class InvalidSE(NumericalError):
    default_detail = "Standard error must be positive and finite."


class NoSignificantBaseline(NumericalError):
    """Mean LSR is undefined without baseline-significant variables."""

    default_detail = "No variable is significant at baseline."


class NoNonsignificantBaseline(NoSignificantBaseline):
    """Mean FPR is undefined without baseline-nonsignificant variables."""

    default_detail = "No variable is non-significant at baseline."


# mechanism errors
class MechanismError(DpsurvError):
    default_detail = "Invalid mechanism input."
    exit_code = 2


class InvalidLevel(MechanismError):
    default_detail = "Level is outside the category domain."


# harness errors
class HarnessError(DpsurvError):
    default_detail = "Simulation harness error."
    exit_code = 2


class IncompleteGrid(HarnessError):
    """Summaries do not cover the full epsilon grid."""

    default_detail = "Epsilon grid is incomplete."

    def __init__(self, missing=(), detail: str = None):
        self.missing = list(missing)

        if detail is None and self.missing:
            listed = "; ".join(
                f"{dataset}/{method}: eps={eps}"
                for dataset, method, eps in self.missing
            )
            detail = f"{self.default_detail} Missing conditions: {listed}"

        super().__init__(detail)
