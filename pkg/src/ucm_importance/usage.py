"""Hierarchical Markov usage models built from UCM maps.

:func:`convert` maps each UCM map onto one chain, node for state and edge for
transition. :func:`flatten` inlines plug-in sub-chains into their stubs and
yields a single walkable :class:`FlatChain`.

Every traversal in the package shares one walk semantics. OR-forks and stub
selections pick a single outgoing transition. AND-forks spawn one token per
branch and process them depth-first in declaration order, and an AND-join
fires once each of its incoming transitions has delivered a token.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .errors import RecursivePlugin
from .model import (
    PROBABILITY_TOLERANCE,
    Condition,
    Issue,
    MapGraph,
    StubDetail,
    UcmModel,
    ValidationReport,
    fmt_number,
)

CHOICE_KINDS = frozenset({"or_fork", "select"})
COUNTED_KINDS = frozenset({"start", "end", "responsibility"})
DEFAULT_LOOP_BOUND = 1000


@dataclass(frozen=True)
class State:
    id: str
    kind: str
    source: str


@dataclass(frozen=True)
class Transition:
    source: str
    target: str
    probability: float = 1.0
    condition: Condition | None = None
    plugin: str | None = None  # plug-in picked by a stub-selection transition
    source_port: str | None = None
    target_port: str | None = None


class _Indexed:
    states: tuple[State, ...]
    transitions: tuple[Transition, ...]

    def _index(self) -> None:
        by_id = {s.id: s for s in self.states}
        out: dict[str, list[Transition]] = {s.id: [] for s in self.states}
        inc: dict[str, int] = {s.id: 0 for s in self.states}
        for t in self.transitions:
            out.setdefault(t.source, []).append(t)
            inc[t.target] = inc.get(t.target, 0) + 1
        object.__setattr__(self, "_by_id", by_id)
        object.__setattr__(self, "_out", {k: tuple(v) for k, v in out.items()})
        object.__setattr__(self, "_in_degree", inc)

    def state(self, state_id: str) -> State:
        return self._by_id[state_id]

    def has_state(self, state_id: str) -> bool:
        return state_id in self._by_id

    def outgoing(self, state_id: str) -> tuple[Transition, ...]:
        return self._out.get(state_id, ())

    def in_degree(self, state_id: str) -> int:
        return self._in_degree.get(state_id, 0)


@dataclass(frozen=True)
class ChainGraph(_Indexed):
    name: str
    states: tuple[State, ...]
    transitions: tuple[Transition, ...]

    def __post_init__(self) -> None:
        self._index()


@dataclass(frozen=True)
class UsageModel:
    top: ChainGraph
    subs: Mapping[str, ChainGraph]
    stub_states: Mapping[str, StubDetail]
    triggers: Mapping[str, float] = field(default_factory=dict)

    def chains(self) -> list[ChainGraph]:
        return [self.top, *self.subs.values()]

    def chain_of(self, name: str) -> ChainGraph:
        if name == self.top.name:
            return self.top
        return self.subs[name]

    def selections(self, stub: str) -> list[tuple[str, float]]:
        return [(b.plugin, b.probability) for b in self.stub_states[stub].bindings]


@dataclass(frozen=True)
class FlatChain(_Indexed):
    """A single chain with every stub replaced by its inlined plug-ins.

    Inlined state ids are qualified ``stub/plugin/node``, nested per level,
    so a plug-in reused in several places yields distinct states. ``starts``
    pairs each entry state with its trigger probability.
    """

    states: tuple[State, ...]
    transitions: tuple[Transition, ...]
    starts: tuple[tuple[str, float], ...] = ()

    def __post_init__(self) -> None:
        self._index()

    def start_state(self, source: str) -> str | None:
        for sid, _ in self.starts:
            if self.state(sid).source == source:
                return sid
        return None

    def trigger(self, state_id: str) -> float:
        return dict(self.starts)[state_id]


def _map_chain(m: MapGraph) -> ChainGraph:
    states = tuple(State(n.id, n.kind, n.id) for n in m.nodes)
    transitions = tuple(
        Transition(e.source, e.target, e.probability, e.condition, None, e.source_port, e.target_port)
        for e in m.edges
    )
    return ChainGraph(m.name, states, transitions)


def convert(model: UcmModel) -> UsageModel:
    """One chain per map: the root becomes the top chain, plug-ins sub-chains."""
    top = _map_chain(model.root)
    subs = {m.name: _map_chain(m) for m in model.maps if not m.root}
    triggers = {n.id: n.trigger for n in model.root.nodes_of("start")}
    return UsageModel(top, subs, dict(model.stubs()), triggers)


def flatten(um: UsageModel) -> FlatChain:
    states: list[State] = []
    transitions: list[Transition] = []

    def instantiate(chain: ChainGraph, prefix: str, stack: tuple[str, ...]) -> None:
        kinds = {s.id: s.kind for s in chain.states}

        def entry(node: str, port: str | None) -> str:
            if kinds[node] != "stub":
                return prefix + node
            detail = um.stub_states[node]
            return f"{prefix}{node}.{detail.resolve_input(port)}"

        plugin_prefix: dict[tuple[str, str], str] = {}
        for s in chain.states:
            if s.kind != "stub":
                states.append(State(prefix + s.id, s.kind, s.source))
                continue
            detail = um.stub_states[s.id]
            for port in detail.inputs:
                states.append(State(f"{prefix}{s.id}.{port}", "select", s.source))
            for b in detail.bindings:
                if b.plugin in stack:
                    raise RecursivePlugin(b.plugin)
                sub_prefix = f"{prefix}{s.id}/{b.plugin}/"
                plugin_prefix[(s.id, b.plugin)] = sub_prefix
                instantiate(um.subs[b.plugin], sub_prefix, stack + (b.plugin,))
            for port in detail.inputs:
                for b in detail.bindings:
                    transitions.append(
                        Transition(
                            f"{prefix}{s.id}.{port}",
                            plugin_prefix[(s.id, b.plugin)] + b.inputs[port],
                            b.probability,
                            plugin=b.plugin,
                        )
                    )

        exits: dict[tuple[str, str], str] = {}
        for t in chain.transitions:
            target = entry(t.target, t.target_port)
            if kinds[t.source] == "stub":
                port = um.stub_states[t.source].resolve_output(t.source_port)
                exits[(t.source, port)] = target
            else:
                transitions.append(Transition(prefix + t.source, target, t.probability, t.condition))

        for s in chain.states:
            if s.kind != "stub":
                continue
            for b in um.stub_states[s.id].bindings:
                for end, port in b.outputs.items():
                    if (s.id, port) in exits:
                        transitions.append(
                            Transition(plugin_prefix[(s.id, b.plugin)] + end, exits[(s.id, port)], 1.0)
                        )

    instantiate(um.top, "", (um.top.name,))
    starts = tuple((s.id, um.triggers.get(s.id, 1.0)) for s in um.top.states if s.kind == "start")
    return FlatChain(tuple(states), tuple(transitions), starts)


def build_flat_chain(model: UcmModel) -> FlatChain:
    return flatten(convert(model))


def check_stochastic(chain: FlatChain | ChainGraph) -> ValidationReport:
    """One issue per state whose outgoing probabilities do not sum to 1.

    AND-fork branches must each carry probability 1. States without outgoing
    transitions are absorbing and exempt, as are stub states of unflattened
    chains, which leave through whichever output port the plug-in reaches.
    """
    issues = []
    for s in chain.states:
        out = chain.outgoing(s.id)
        if not out or s.kind == "stub":
            continue
        if s.kind == "and_fork":
            for t in out:
                if t.probability != 1.0:
                    issues.append(Issue(f"state {s.id}", f"AND branch to {t.target} has probability {fmt_number(t.probability)}"))
            continue
        total = sum(t.probability for t in out)
        if abs(total - 1.0) > PROBABILITY_TOLERANCE:
            issues.append(Issue(f"state {s.id}", f"outgoing probability sum {fmt_number(total)} ≠ 1"))
    return ValidationReport(tuple(issues))


# --- exhaustive enumeration (oracle) ----------------------------------------


@dataclass(frozen=True)
class CompletePath:
    """One complete run of the chain with its probability mass."""

    start: str
    signature: tuple[tuple[str, str], ...]
    mass: float
    visits: Mapping[str, int]
    transitions: tuple[Transition, ...]


def enumerate_paths(chain: FlatChain, loop_bound: int = DEFAULT_LOOP_BOUND) -> list[CompletePath]:
    """Every complete run from every start state, by branching on each choice.

    Runs that enter some state more than ``loop_bound`` times are cut off and
    dropped, so masses only sum to 1 on acyclic chains.
    """
    results: list[CompletePath] = []

    def run(start, stack, joins, entries, visits, mass, signature, taken):
        while stack:
            sid = stack[-1]
            stack = stack[:-1]
            entries[sid] += 1
            if entries[sid] > loop_bound:
                return
            state = chain.state(sid)
            if state.kind in COUNTED_KINDS:
                visits[state.source] += 1
            out = chain.outgoing(sid)
            if not out:
                continue
            if state.kind in CHOICE_KINDS:
                for t in out:
                    run(
                        start,
                        stack + (t.target,),
                        Counter(joins),
                        Counter(entries),
                        Counter(visits),
                        mass * t.probability,
                        signature + ((sid, t.target),),
                        taken + (t,),
                    )
                return
            if state.kind == "and_join":
                joins[sid] += 1
                if joins[sid] < chain.in_degree(sid):
                    continue
                joins[sid] = 0
            if state.kind == "and_fork":
                stack = stack + tuple(t.target for t in reversed(out))
                taken = taken + out
            else:
                stack = stack + (out[0].target,)
                taken = taken + (out[0],)
        results.append(CompletePath(start, signature, mass, dict(visits), taken))

    for sid, trigger in chain.starts:
        run(sid, (sid,), Counter(), Counter(), Counter(), trigger, (), ())
    return results


# --- DOT -------------------------------------------------------------------


def _q(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def chain_to_dot(chain: FlatChain | ChainGraph, name: str) -> str:
    lines = [f"digraph {_q(name)} {{"]
    for s in chain.states:
        shape = {
            "start": "circle",
            "end": "doublecircle",
            "stub": "diamond",
            "select": "point",
        }.get(s.kind, "box" if s.kind == "responsibility" else "circle")
        lines.append(f"  {_q(s.id)} [label={_q(s.source)}, shape={shape}];")
    for t in chain.transitions:
        parts = []
        if t.probability != 1.0:
            parts.append(fmt_number(t.probability))
        if t.condition is not None:
            parts.append(str(t.condition))
        attr = f" [label={_q(' '.join(parts))}]" if parts else ""
        lines.append(f"  {_q(t.source)} -> {_q(t.target)}{attr};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def usage_model_to_dot(um: UsageModel) -> str:
    return "".join(chain_to_dot(c, c.name) for c in um.chains())


def probabilities(chain: FlatChain | ChainGraph) -> Iterable[float]:
    return (t.probability for t in chain.transitions)
