"""Exception and warning types raised across the package."""


class CultureNetError(Exception):
    """Base class for all package errors."""


class InputError(CultureNetError):
    """Problem with user-supplied data or configuration."""


class MissingColumn(InputError):
    def __init__(self, code):
        super().__init__(f"missing column {code!r}")
        self.code = code


class InvalidValue(InputError):
    def __init__(self, row, code, value):
        super().__init__(f"row {row}: value {value!r} not in support of {code!r}")
        self.row = row
        self.code = code
        self.value = value


class EmptyCountry(InputError):
    def __init__(self, code):
        super().__init__(f"country {code!r} has no rows")
        self.code = code


class AllMissing(InputError):
    def __init__(self, variable, country=None):
        where = f" in country {country!r}" if country is not None else ""
        super().__init__(f"variable {variable!r} has no observed values{where}")
        self.variable = variable
        self.country = country


class DimensionMismatch(CultureNetError, ValueError):
    pass


class CountryMismatch(CultureNetError, ValueError):
    pass


class NumericalFailure(CultureNetError, ArithmeticError):
    pass


class ConvergenceFailure(NumericalFailure):
    def __init__(self, max_cycles):
        super().__init__(f"G-Wishart completion did not converge in {max_cycles} cycles")
        self.max_cycles = max_cycles


class InvalidPrecision(NumericalFailure, ValueError):
    pass


class EmptyChain(CultureNetError, ValueError):
    pass


class NoCommonSupport(CultureNetError, ValueError):
    pass


class DegenerateRange(CultureNetError, ValueError):
    pass


class DegenerateData(CultureNetError, ValueError):
    pass


class NotEnoughPositiveEigenvalues(NumericalFailure):
    pass


class MissingArtifact(CultureNetError):
    """An upstream pipeline stage has not been run."""


class ZeroParcorrOnEdge(UserWarning):
    pass


class RankDeficient(UserWarning):
    pass


class SingletonGroup(UserWarning):
    pass
