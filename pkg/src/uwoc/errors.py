"""Exception taxonomy shared by all modules.

Three kinds of failure are distinguished so the command-line front end can
map them to exit codes: configuration/schema problems, violated call
contracts (bad shapes, lengths, enum values), and physical-domain errors
(arguments outside the model's domain, e.g. negative distance).
"""


class UwocError(ValueError):
    """Base class for all errors raised by this package."""


class DomainError(UwocError):
    """An argument lies outside the physical domain of the model."""


class ContractError(UwocError):
    """A call violated an interface contract (shape, length, enum, range)."""


class SchemaError(UwocError):
    """A configuration document failed validation.

    ``pointer`` holds a JSON-pointer-style path to the offending key.
    """

    def __init__(self, message, pointer=""):
        super().__init__(f"{pointer}: {message}" if pointer else message)
        self.pointer = pointer


class ParseError(UwocError):
    """A data file could not be parsed; carries the 1-based line number."""

    def __init__(self, message, line=None):
        suffix = f" (line {line})" if line is not None else ""
        super().__init__(message + suffix)
        self.line = line
