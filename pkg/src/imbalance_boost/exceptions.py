"""Exception types raised across the package."""


class InvalidInputError(ValueError):
    """Bad argument values: non-finite scores, labels outside {0, 1}, empty data."""


class DimensionError(ValueError):
    """Array lengths or column counts do not agree."""


class InvalidPlanError(ValueError):
    """A cross-validation plan cannot be applied to the given dataset."""


class UndefinedMetricError(ValueError):
    """A metric was requested on an empty confusion matrix."""


class SchemaError(ValueError):
    """A CSV file does not match the requested column layout."""


class ModelFormatError(ValueError):
    """A serialized model could not be parsed.

    ``location`` is a JSON path (``trees[2].left.threshold``) or a
    ``line:column`` pair for syntax errors.
    """

    def __init__(self, message, location=None):
        self.location = location
        if location is not None:
            message = f"{message} (at {location})"
        super().__init__(message)
