"""Scenario definitions and their resolution into concrete paths."""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .errors import (
    ConditionConflict,
    JoinDeadlock,
    LoopBoundExceeded,
    PostConditionFailed,
    ScenarioError,
    UnresolvedChoice,
)
from .model import UcmModel
from .usage import CHOICE_KINDS, COUNTED_KINDS, DEFAULT_LOOP_BOUND, FlatChain, State, Transition


@dataclass(frozen=True)
class ScenarioDefinition:
    """A named scenario: start point, stub bindings and condition values.

    ``post``, when set, lists end points the scenario must reach.
    """

    name: str
    start: str
    bindings: Mapping[str, str] = field(default_factory=dict)
    conditions: Mapping[str, bool] = field(default_factory=dict)
    post: frozenset[str] | None = None


@dataclass(frozen=True)
class ScenarioPath:
    name: str
    start: str
    trigger: float
    transitions: tuple[Transition, ...]
    visits: Mapping[str, int]
    reached_ends: frozenset[str]


def _pick_branch(sid: str, out: Sequence[Transition], conditions: Mapping[str, bool]) -> Transition:
    if any(t.condition is None for t in out):
        raise UnresolvedChoice(sid)
    missing = sorted({t.condition.variable for t in out} - set(conditions))
    if missing:
        raise UnresolvedChoice(sid, tuple(missing))
    matches = [t for t in out if t.condition.holds(conditions)]
    if len(matches) != 1:
        raise ConditionConflict(sid, len(matches))
    return matches[0]


def _pick_plugin(state: State, out: Sequence[Transition], bindings: Mapping[str, str]) -> Transition:
    plugin = bindings.get(state.source)
    if plugin is None:
        if len(out) == 1:
            return out[0]
        raise UnresolvedChoice(state.id, stub=state.source)
    for t in out:
        if t.plugin == plugin:
            return t
    raise ScenarioError(f"stub {state.source!r} has no plug-in {plugin!r}")


def resolve_scenario(
    definition: ScenarioDefinition, chain: FlatChain, loop_bound: int = DEFAULT_LOOP_BOUND
) -> ScenarioPath:
    """Walk ``chain`` from the definition's start, deciding every choice by it.

    An OR-fork follows the one branch whose condition holds and a stub
    selection follows the bound plug-in. AND-forks run every branch.
    """
    start = chain.start_state(definition.start)
    if start is None:
        raise ScenarioError(f"{definition.start!r} is not a start point of the chain")

    stack = [start]
    taken: list[Transition] = []
    visits: Counter[str] = Counter()
    entries: Counter[str] = Counter()
    joins: Counter[str] = Counter()
    reached: set[str] = set()
    while stack:
        sid = stack.pop()
        entries[sid] += 1
        if entries[sid] > loop_bound:
            raise LoopBoundExceeded(sid, loop_bound)
        state = chain.state(sid)
        if state.kind in COUNTED_KINDS:
            visits[state.source] += 1
        if state.kind == "end":
            reached.add(state.source)
        out = chain.outgoing(sid)
        if not out:
            continue
        if state.kind == "and_fork":
            taken.extend(out)
            stack.extend(t.target for t in reversed(out))
            continue
        if state.kind == "and_join":
            joins[sid] += 1
            if joins[sid] < chain.in_degree(sid):
                continue
            joins[sid] = 0
        if state.kind == "or_fork":
            t = _pick_branch(sid, out, definition.conditions)
        elif state.kind == "select":
            t = _pick_plugin(state, out, definition.bindings)
        else:
            t = out[0]
        taken.append(t)
        stack.append(t.target)

    stuck = tuple(sorted(s for s, n in joins.items() if n))
    if stuck:
        raise JoinDeadlock(stuck)
    if definition.post is not None and not definition.post <= reached:
        raise PostConditionFailed(frozenset(definition.post), frozenset(reached))
    return ScenarioPath(
        definition.name,
        start,
        chain.trigger(start),
        tuple(taken),
        dict(visits),
        frozenset(reached),
    )


def path_signature(path: ScenarioPath, chain: FlatChain) -> tuple[tuple[str, str], ...]:
    """The probabilistic choices a path makes, in traversal order."""
    return tuple(
        (t.source, t.target) for t in path.transitions if chain.state(t.source).kind in CHOICE_KINDS
    )


def scenario_chain(path: ScenarioPath, chain: FlatChain) -> FlatChain:
    """The sub-chain induced by exactly the states and transitions of ``path``."""
    used = {path.start} | {t.target for t in path.transitions} | {t.source for t in path.transitions}
    states = tuple(s for s in chain.states if s.id in used)
    transitions: list[Transition] = []
    for t in path.transitions:
        if t not in transitions:
            transitions.append(t)
    return FlatChain(states, tuple(transitions), ((path.start, path.trigger),))


def _assignment_for(
    target: Transition, out: Sequence[Transition], conditions: Mapping[str, bool], free: Sequence[str]
) -> dict[str, bool] | None:
    # first assignment (False before True) of the free variables selecting exactly `target`
    for values in itertools.product((False, True), repeat=len(free)):
        trial = {**conditions, **dict(zip(free, values))}
        if [t for t in out if t.condition.holds(trial)] == [target]:
            return dict(zip(free, values))
    return None


def _scenario_name(start: str, choices: Sequence[str]) -> str:
    return f"{start}[{','.join(choices)}]" if choices else start


def enumerate_scenarios(
    model: UcmModel, chain: FlatChain, loop_bound: int = DEFAULT_LOOP_BOUND
) -> list[ScenarioDefinition]:
    """One definition per distinct resolvable combination of choices.

    Starting from each root start point with nothing decided, resolution is
    retried with every way of deciding the first undecided choice it hits.
    Only choices actually reached are decided, so each definition yields a
    distinct path. Combinations that fail to resolve are dropped.
    """
    found: list[ScenarioDefinition] = []

    def explore(start: str, bindings: dict, conditions: dict, choices: tuple[str, ...]) -> None:
        definition = ScenarioDefinition(_scenario_name(start, choices), start, bindings, conditions)
        try:
            resolve_scenario(definition, chain, loop_bound)
        except UnresolvedChoice as exc:
            out = chain.outgoing(exc.state)
            if exc.stub is not None:
                for t in out:
                    explore(start, {**bindings, exc.stub: t.plugin}, conditions, choices + (f"{exc.stub}={t.plugin}",))
            elif exc.variables:
                for t in out:
                    assignment = _assignment_for(t, out, conditions, exc.variables)
                    if assignment is None:
                        continue
                    label = ",".join(f"{k}={str(v).lower()}" for k, v in assignment.items())
                    explore(start, bindings, {**conditions, **assignment}, choices + (label,))
            return
        except ScenarioError:
            return
        found.append(definition)

    for node in model.root.nodes_of("start"):
        explore(node.id, {}, {}, ())
    return found
