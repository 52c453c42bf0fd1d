"""Exception hierarchy shared across the package.

Three branches matter for the CLI exit-code mapping: usage problems are
left to argparse, `DataError` maps to exit code 3, `EstimationError` to 4.
"""


class PrefmixError(Exception):
    """Base class for all package-specific errors."""


class DataError(PrefmixError):
    """Problems with input data or artifact compatibility."""


class EstimationError(PrefmixError):
    """Problems arising while estimating a model."""


# -- data ingestion / coding --------------------------------------------------

class MissingColumn(DataError):
    pass


class NonNumericAttribute(DataError):
    pass


class TaskWithoutChoice(DataError):
    pass


class TaskWithMultipleChoices(DataError):
    pass


class UnknownAttribute(DataError):
    pass


class UnknownLevel(DataError):
    pass


class InvalidIndicator(DataError):
    """An outcome indicator column holds something other than 0/1."""


# -- draws ---------------------------------------------------------------------

class ZeroCount(DataError):
    pass


class WrongKind(DataError):
    """Draw block kind does not match what the operation expects."""


# -- mixing --------------------------------------------------------------------

class ArityMismatch(DataError):
    pass


class WrongDrawKind(DataError):
    pass


class DegenerateSupport(EstimationError):
    """Lower bound of a bounded mixing family is not below the upper bound."""


class ModeOutOfSupport(EstimationError):
    pass


# -- model evaluation ----------------------------------------------------------

class MissingCoefficient(DataError):
    pass


class DrawDimensionMismatch(DataError):
    pass


class MissingIndicator(DataError):
    pass


# -- optimization --------------------------------------------------------------

class NonFiniteObjectiveAtStart(EstimationError):
    pass


class NoImprovingStep(EstimationError):
    pass


# -- averaging -----------------------------------------------------------------

class PersonSetMismatch(DataError):
    pass


class MissingPersonLikelihoods(DataError):
    pass


class NonPositiveLikelihood(DataError):
    pass


# -- post-estimation -----------------------------------------------------------

class SpecDataMismatch(DataError):
    pass


class NotWTPSpace(DataError):
    pass


class GridMismatch(DataError):
    pass


class ConstituentMismatch(DataError):
    pass


# -- simulation ----------------------------------------------------------------

class InvalidLevels(DataError):
    pass
