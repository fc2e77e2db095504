"""Exception hierarchy shared by the library and the CLI."""

from __future__ import annotations


class ModalError(Exception):
    """Base class for all library errors."""


class ParseError(ModalError, ValueError):
    def __init__(self, message: str, offset: int | None = None):
        self.offset = offset
        if offset is not None:
            message = f"{message} at offset {offset}"
        super().__init__(message)


class UnknownModality(ModalError, ValueError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"unknown modality {name!r}")


class FormatError(ModalError, ValueError):
    """Malformed model, gamma, axiom or certificate file."""


class PreconditionError(ModalError, ValueError):
    pass


class CapExceeded(ModalError, RuntimeError):
    def __init__(self, message: str, reached: int):
        self.reached = reached
        super().__init__(f"{message} (reached {reached})")


class BudgetExceeded(ModalError, RuntimeError):
    def __init__(self, message: str, coverage: dict):
        self.coverage = coverage
        super().__init__(message)


class StrategyFailed(ModalError, RuntimeError):
    def __init__(self, message: str, report: dict | None = None):
        self.report = report or {}
        super().__init__(message)


class FusionError(StrategyFailed):
    def __init__(self, message: str, side: str, report: dict | None = None):
        self.side = side
        super().__init__(f"component {side}: {message}", report)
