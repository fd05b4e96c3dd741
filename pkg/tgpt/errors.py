"""Errors module -- exceptions raised by the tgpt package"""


__all__ = [
    "ContractError",
    "DivergenceError",
    "DomainError",
    "EimError",
    "GridError",
    "NonFiniteError",
    "SizingError",
    "TGPTError",
]


class TGPTError(Exception):
    """Base class for all errors raised by the package."""


class SizingError(TGPTError, ValueError):
    """Two lengths that must agree do not."""

    def __init__(self, what: str, expected: int, actual: int):
        """Initializer
           Params
           ------
           what (str)     : name of the mismatched quantity
           expected (int) : required length
           actual (int)   : length received
        """
        self.what, self.expected, self.actual = what, expected, actual
        super().__init__(f"{what} has length {actual}, expected {expected}")


class DomainError(TGPTError, ValueError):
    """Input outside of its domain, or a degenerate domain."""


class ContractError(TGPTError):
    """A caller did not provide what an operation requires."""


class GridError(TGPTError, ValueError):
    """Grid does not have the required structure."""


class EimError(TGPTError):
    """Empirical interpolation failed."""


class NonFiniteError(TGPTError, ArithmeticError):
    """A loss term, gradient entry or intermediate value is not finite."""

    def __init__(self, message: str, term=None, index=None):
        """Initializer
           Params
           ------
           message (str)           : description
           term (int|str, optional): offending loss term (index or name)
           index (int, optional)   : offending vector entry
        """
        self.term, self.index = term, index
        details = []
        if term is not None:
            details.append(f"term {term}")
        if index is not None:
            details.append(f"index {index}")
        if details:
            message = f"{message} ({', '.join(details)})"
        super().__init__(message)


class DivergenceError(TGPTError):
    """Training loss blew up."""

    def __init__(self, message: str, history: list=None):
        """Initializer
           Params
           ------
           message (str)  : description
           history (list) : (iteration, loss) pairs recorded so far
        """
        self.history = list(history or [])
        super().__init__(message)
