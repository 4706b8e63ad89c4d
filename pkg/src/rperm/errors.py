"""Exception types shared across the package."""


class RPermError(Exception):
    pass


class MissingVariable(RPermError, KeyError):
    def __init__(self, var):
        super().__init__(var)
        self.var = var

    def __str__(self):
        return f"no value assigned to variable {self.var}"


class BudgetExceeded(RPermError):
    """An enumeration or expansion ran past its caller-supplied cap."""


class TermBudgetExceeded(BudgetExceeded):
    pass


class StateBudgetExceeded(BudgetExceeded):
    pass


class SizeBudgetExceeded(BudgetExceeded):
    pass


class ParseError(RPermError, ValueError):
    pass


class NotLayered(RPermError, ValueError):
    pass


class YVariableMisplaced(RPermError, ValueError):
    pass


class InvalidDecomposition(RPermError, ValueError):
    pass
