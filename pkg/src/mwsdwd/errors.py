"""Exception types shared across the package."""


class DimensionError(ValueError):
    """Shapes or axis counts are inconsistent with what an operation requires."""


class DataError(ValueError):
    """Input values are malformed: bad labels, non-finite entries, unparseable files."""


class NumericalError(ArithmeticError):
    """A computation produced non-finite values or an undefined quantity."""
