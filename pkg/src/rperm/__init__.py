"""Restricted permanents, gadget reductions and tree-decomposition circuits."""

from .algebra import Poly, Var, var
from .errors import (BudgetExceeded, InvalidDecomposition, MissingVariable, NotLayered, ParseError,
                     RPermError, SizeBudgetExceeded, StateBudgetExceeded, TermBudgetExceeded,
                     YVariableMisplaced)

__version__ = "0.1.0"
