"""Exception types shared across the library.

Every domain failure raises a subclass of :class:`QsspError` so the CLI can
map any library error to a machine-readable JSON envelope and exit code 1.
"""

from __future__ import annotations


class QsspError(Exception):
    """Base class for all domain errors raised by this library."""

    def __init__(self, message: str, **context):
        super().__init__(message)
        self.message = message
        self.context = context

    def to_dict(self) -> dict:
        out = {"type": type(self).__name__, "message": self.message}
        if self.context:
            out["context"] = {k: v for k, v in self.context.items()}
        return out


class ValidationError(QsspError):
    """A labeled-HMC structural invariant is violated."""


class NonStochasticRow(ValidationError):
    """A state's total outgoing probability differs from 1."""


class NegativeEntry(ValidationError):
    """A transition-matrix entry is below zero (beyond tolerance)."""


class ReducibleChain(ValidationError):
    """The internal chain is not a single communicating class."""


class ConvergenceFailure(QsspError):
    """An iterative solver exhausted its iteration budget."""


class UnknownSymbol(QsspError):
    """A symbol is not part of the machine's alphabet."""


class BlockTooLarge(QsspError):
    """Exact word enumeration would exceed the configured guard."""


class NotUnifilar(QsspError):
    """A closed-form unifilar computation was requested on a nonunifilar machine."""


class ZeroProbabilitySymbol(QsspError):
    """A belief update was requested for a symbol of zero probability."""


class IdenticalStates(QsspError):
    """Two quantum states required to be distinct coincide."""


class AlphabetMismatch(QsspError):
    """Quantum alphabet and machine alphabet do not line up."""


class SampledKindUnsupported(QsspError):
    """Closed-form presentation metrics were requested on a sampled presentation."""


class InsufficientLinearRegime(QsspError):
    """No scaling window of acceptable linearity was found for a dimension fit."""


class InputError(QsspError):
    """A model file or CLI input violates the schema.

    ``pointer`` carries a JSON-pointer-style path to the offending element.
    """

    def __init__(self, message: str, pointer: str = "", **context):
        super().__init__(message, pointer=pointer, **context)
        self.pointer = pointer


class NoisyObjectiveWarning(UserWarning):
    """Optimization stopped refining because objective differences fell below noise."""
