"""Exception hierarchy.

Structural problems found by :func:`ucm_importance.model.validate_model` are
reported as data, not raised. Everything here is a hard failure.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class SourceLocation:
    file: str
    line: int
    column: int

    def __str__(self) -> str:
        return f"{self.file}:{self.line}:{self.column}"


class UcmError(Exception):
    """Base class for all errors raised by this package."""


# --- ingestion -------------------------------------------------------------


class IngestError(UcmError):
    def __init__(self, message: str, location: SourceLocation | None = None):
        self.message = message
        self.location = location
        super().__init__(f"{location}: {message}" if location else message)


class UcmSyntaxError(IngestError):
    def __init__(self, expected: str, location: SourceLocation | None = None, found: str | None = None):
        self.expected = expected
        msg = f"expected {expected}"
        if found is not None:
            msg += f", found {found}"
        super().__init__(msg, location)


class _NamedIngestError(IngestError):
    what = "reference"

    def __init__(self, name: str, location: SourceLocation | None = None, detail: str = ""):
        self.name = name
        msg = f"{self.what} {name!r}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg, location)


class UnknownReference(_NamedIngestError):
    what = "unknown reference"


class DuplicateId(_NamedIngestError):
    what = "duplicate id"


class UnknownStub(_NamedIngestError):
    what = "unknown stub"


class UnknownPlugin(_NamedIngestError):
    what = "unknown plug-in"


class UnknownVariable(_NamedIngestError):
    what = "unknown variable"


class DuplicateScenarioName(_NamedIngestError):
    what = "duplicate scenario name"


class UnknownObject(_NamedIngestError):
    what = "unknown object"


class CycleDetected(_NamedIngestError):
    what = "containment cycle through"


class MultipleParents(_NamedIngestError):
    what = "multiple parents for"


# --- conversion ------------------------------------------------------------


class RecursivePlugin(UcmError):
    def __init__(self, map_name: str):
        self.map_name = map_name
        super().__init__(f"plug-in map {map_name!r} (transitively) contains itself")


# --- scenario resolution ---------------------------------------------------


class ScenarioError(UcmError):
    """A scenario could not be resolved to a path."""


class UnresolvedChoice(ScenarioError):
    """A choice state was reached that the definition does not decide.

    ``variables`` lists unassigned condition variables on an OR-fork, ``stub``
    names an unbound dynamic stub. Both empty means the fork carries no
    conditions at all.
    """

    def __init__(self, state: str, variables: tuple[str, ...] = (), stub: str | None = None):
        self.state = state
        self.variables = variables
        self.stub = stub
        if stub is not None:
            why = f"stub {stub!r} is not bound"
        elif variables:
            why = "unassigned " + ", ".join(variables)
        else:
            why = "fork has no conditions"
        super().__init__(f"unresolved choice at {state!r}: {why}")


class ConditionConflict(ScenarioError):
    def __init__(self, state: str, matching: int):
        self.state = state
        self.matching = matching
        super().__init__(f"{matching} branches of {state!r} satisfy the conditions, expected exactly 1")


class LoopBoundExceeded(ScenarioError):
    def __init__(self, state: str, bound: int):
        self.state = state
        self.bound = bound
        super().__init__(f"state {state!r} entered more than {bound} times")


class PostConditionFailed(ScenarioError):
    def __init__(self, expected: frozenset[str], reached: frozenset[str]):
        self.expected = expected
        self.reached = reached
        super().__init__(
            f"post-condition failed: expected {sorted(expected)}, reached {sorted(reached)}"
        )


class JoinDeadlock(ScenarioError):
    def __init__(self, states: tuple[str, ...]):
        self.states = states
        super().__init__("AND-join never synchronized: " + ", ".join(states))
