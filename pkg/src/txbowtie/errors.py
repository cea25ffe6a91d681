"""Exception hierarchy shared across the toolkit.

Two branches matter to the CLI: ``DataError`` maps to exit code 2,
``CapacityError`` to exit code 3.
"""

from __future__ import annotations


class ToolkitError(Exception):
    """Base class for all errors raised by this package."""


class DataError(ToolkitError):
    """Input data violates a contract (bad rows, empty populations, ...)."""


class CapacityError(ToolkitError):
    """A configured size bound was exceeded."""


class UnknownFormatError(DataError):
    def __init__(self, name: object) -> None:
        super().__init__(f"unknown input format: {name!r}")
        self.name = name


class MalformedRowError(DataError):
    def __init__(self, line_no: int, reason: str) -> None:
        super().__init__(f"line {line_no}: {reason}")
        self.line_no = line_no
        self.reason = reason


class ValueOverflowError(MalformedRowError):
    def __init__(self, line_no: int) -> None:
        super().__init__(line_no, "value exceeds 256 bits")


class NoDestinationError(DataError):
    """Both the target and the contract address are absent."""


class EmptyGraphError(DataError):
    """The operation needs at least one node."""


class EmptyPopulationError(DataError):
    """An average was requested over an empty node population."""


class NodeOutOfRangeError(DataError):
    def __init__(self, node: int, node_count: int) -> None:
        super().__init__(f"node {node} out of range for graph of {node_count} nodes")
        self.node = node
        self.node_count = node_count


class InconsistentUniverseError(DataError):
    """The address universe does not cover a snapshot's membership."""


class InfeasibleSpecError(DataError):
    """A synthetic-data spec asks for a structure that cannot exist."""


class CapacityExceededError(CapacityError):
    def __init__(self, what: str, limit: int) -> None:
        super().__init__(f"{what} exceeds configured bound of {limit}")
        self.what = what
        self.limit = limit


class OracleTooLargeError(CapacityError):
    def __init__(self, node_count: int, bound: int) -> None:
        super().__init__(
            f"brute-force oracle limited to {bound} nodes, got {node_count}"
        )
        self.node_count = node_count
        self.bound = bound
