"""Domain types for UCM specifications and the containment object model.

A :class:`UcmModel` is a set of maps, exactly one of them the root. Non-root
maps are plug-ins, bound into stubs. Node ids are unique across the whole
model, so a node id alone identifies an object.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping

PROBABILITY_TOLERANCE = 1e-9

NODE_KINDS = frozenset(
    {"start", "end", "responsibility", "stub", "or_fork", "or_join", "and_fork", "and_join"}
)
FORK_KINDS = frozenset({"or_fork", "and_fork"})
JOIN_KINDS = frozenset({"or_join", "and_join"})

OBJECT_TYPES = ("responsibility", "point", "plugin", "stub", "component")
PRIMITIVE_TYPES = frozenset({"responsibility", "point"})
CONTAINER_TYPES = frozenset({"plugin", "stub", "component"})


@dataclass(frozen=True)
class Condition:
    variable: str
    value: bool

    def holds(self, assignment: Mapping[str, bool]) -> bool:
        return assignment[self.variable] == self.value

    def __str__(self) -> str:
        return f"[{self.variable}]" if self.value else f"[!{self.variable}]"


@dataclass(frozen=True)
class PluginBinding:
    """Binds one plug-in map into a stub.

    ``inputs`` maps each stub input to a start point of the plug-in;
    ``outputs`` maps plug-in end points to stub outputs. Plug-in end points
    missing from ``outputs`` terminate the path.
    """

    plugin: str
    probability: float = 1.0
    inputs: Mapping[str, str] = field(default_factory=dict)
    outputs: Mapping[str, str] = field(default_factory=dict)


@dataclass(frozen=True)
class StubDetail:
    dynamic: bool
    inputs: tuple[str, ...]
    outputs: tuple[str, ...]
    bindings: tuple[PluginBinding, ...]

    def binding(self, plugin: str) -> PluginBinding | None:
        for b in self.bindings:
            if b.plugin == plugin:
                return b
        return None

    def resolve_input(self, port: str | None) -> str | None:
        if port is None:
            return self.inputs[0] if len(self.inputs) == 1 else None
        return port if port in self.inputs else None

    def resolve_output(self, port: str | None) -> str | None:
        if port is None:
            return self.outputs[0] if len(self.outputs) == 1 else None
        return port if port in self.outputs else None


@dataclass(frozen=True)
class Node:
    id: str
    kind: str
    component: str | None = None
    trigger: float = 1.0
    stub: StubDetail | None = None


@dataclass(frozen=True)
class Edge:
    source: str
    target: str
    probability: float = 1.0
    condition: Condition | None = None
    # stub output / input the edge leaves / enters; optional when the stub has one
    source_port: str | None = None
    target_port: str | None = None


@dataclass(frozen=True)
class MapGraph:
    name: str
    root: bool
    nodes: tuple[Node, ...]
    edges: tuple[Edge, ...]

    def node(self, node_id: str) -> Node:
        for n in self.nodes:
            if n.id == node_id:
                return n
        raise KeyError(node_id)

    def has_node(self, node_id: str) -> bool:
        return any(n.id == node_id for n in self.nodes)

    def outgoing(self, node_id: str) -> list[Edge]:
        return [e for e in self.edges if e.source == node_id]

    def incoming(self, node_id: str) -> list[Edge]:
        return [e for e in self.edges if e.target == node_id]

    def nodes_of(self, *kinds: str) -> list[Node]:
        return [n for n in self.nodes if n.kind in kinds]


@dataclass(frozen=True)
class Component:
    name: str
    parent: str | None = None


@dataclass(frozen=True)
class UcmModel:
    maps: tuple[MapGraph, ...]
    components: tuple[Component, ...] = ()
    variables: tuple[str, ...] = ()

    @property
    def root(self) -> MapGraph:
        roots = [m for m in self.maps if m.root]
        if len(roots) != 1:
            raise ValueError(f"model has {len(roots)} root maps")
        return roots[0]

    @property
    def plugins(self) -> list[MapGraph]:
        return [m for m in self.maps if not m.root]

    def map(self, name: str) -> MapGraph:
        for m in self.maps:
            if m.name == name:
                return m
        raise KeyError(name)

    def has_map(self, name: str) -> bool:
        return any(m.name == name for m in self.maps)

    def locate(self, node_id: str) -> tuple[MapGraph, Node]:
        for m in self.maps:
            for n in m.nodes:
                if n.id == node_id:
                    return m, n
        raise KeyError(node_id)

    def iter_nodes(self) -> Iterator[tuple[MapGraph, Node]]:
        for m in self.maps:
            for n in m.nodes:
                yield m, n

    def stubs(self) -> dict[str, StubDetail]:
        return {n.id: n.stub for _, n in self.iter_nodes() if n.stub is not None}


def object_type_of(node: Node) -> str | None:
    """Object type of a node, or None for forks and joins (not objects)."""
    if node.kind == "responsibility":
        return "responsibility"
    if node.kind in ("start", "end"):
        return "point"
    if node.kind == "stub":
        return "stub"
    return None


def model_objects(model: UcmModel) -> dict[str, str]:
    """All objects of a model mapped to their object type.

    Plug-in maps, stubs, components, responsibilities and start/end points
    are objects; the root map and fork/join nodes are not.
    """
    objects: dict[str, str] = {}
    for _, node in model.iter_nodes():
        kind = object_type_of(node)
        if kind is not None:
            objects.setdefault(node.id, kind)
    for m in model.maps:
        if not m.root:
            objects.setdefault(m.name, "plugin")
    for c in model.components:
        objects.setdefault(c.name, "component")
    return objects


@dataclass(frozen=True)
class ObjectModel:
    """Single-parent containment tree over a model's objects.

    ``parents`` maps every known object to its container, or None for roots.
    Iteration order of ``parents`` is the child order used by :meth:`children`.
    """

    parents: Mapping[str, str | None]
    types: Mapping[str, str]

    @classmethod
    def from_model(cls, model: UcmModel, parents: Mapping[str, str | None] | None = None) -> ObjectModel:
        types = model_objects(model)
        assigned = dict(parents or {})
        full: dict[str, str | None] = {}
        for obj in assigned:
            full[obj] = assigned[obj]
        for obj in types:
            full.setdefault(obj, None)
        return cls(parents=full, types=types)

    def children(self, container: str) -> list[str]:
        return [obj for obj, parent in self.parents.items() if parent == container]

    def roots(self) -> list[str]:
        return [obj for obj, parent in self.parents.items() if parent is None]

    def is_container(self, obj: str) -> bool:
        return self.types.get(obj) in CONTAINER_TYPES

    def descendants(self, container: str) -> list[str]:
        out: list[str] = []
        stack = list(reversed(self.children(container)))
        while stack:
            obj = stack.pop()
            out.append(obj)
            stack.extend(reversed(self.children(obj)))
        return out

    def find_cycle(self) -> list[str] | None:
        for start in self.parents:
            seen = [start]
            cur = self.parents.get(start)
            while cur is not None:
                if cur in seen:
                    return seen[seen.index(cur):]
                seen.append(cur)
                cur = self.parents.get(cur)
        return None


def default_object_model(model: UcmModel) -> ObjectModel:
    """Containment derived from the model when no object-model file is given.

    Plug-in nodes belong to their plug-in map; a plug-in bound by exactly one
    stub belongs to that stub; root-map nodes belong to their component;
    components nest per their declared parent.
    """
    parents: dict[str, str | None] = {}
    users: dict[str, list[str]] = {}
    for stub_id, detail in model.stubs().items():
        for b in detail.bindings:
            users.setdefault(b.plugin, []).append(stub_id)
    for m in model.maps:
        for node in m.nodes:
            if object_type_of(node) is None:
                continue
            if not m.root:
                parents[node.id] = m.name
            elif node.component is not None:
                parents[node.id] = node.component
        if not m.root:
            stubs = sorted(set(users.get(m.name, ())))
            if len(stubs) == 1:
                parents[m.name] = stubs[0]
    for c in model.components:
        if c.parent is not None:
            parents[c.name] = c.parent
    return ObjectModel.from_model(model, parents)


# --- validation --------------------------------------------------------------


@dataclass(frozen=True)
class Issue:
    location: str
    message: str

    def __str__(self) -> str:
        return f"{self.location}: {self.message}"


@dataclass(frozen=True)
class ValidationReport:
    issues: tuple[Issue, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.issues

    def __iter__(self) -> Iterator[Issue]:
        return iter(self.issues)

    def __len__(self) -> int:
        return len(self.issues)

    def __str__(self) -> str:
        return "\n".join(str(i) for i in self.issues)


def fmt_number(x: float) -> str:
    return f"{x:.9g}"


def _prob_ok(p: float) -> bool:
    return isinstance(p, (int, float)) and not isinstance(p, bool) and 0.0 < p <= 1.0


def validate_model(model: UcmModel, objects: ObjectModel | None = None) -> ValidationReport:
    """Check every structural rule of a model (and optionally its object model).

    Returns one :class:`Issue` per violation; an empty report means every
    downstream stage accepts the model.
    """
    issues: list[Issue] = []

    def add(where: str, msg: str) -> None:
        issues.append(Issue(where, msg))

    roots = [m.name for m in model.maps if m.root]
    if len(roots) > 1:
        add("model", "multiple root maps: " + ", ".join(roots))
    elif not roots:
        add("model", "no root map")

    for name, n in Counter(m.name for m in model.maps).items():
        if n > 1:
            add(f"map {name}", "duplicate map name")
    node_counts = Counter(node.id for _, node in model.iter_nodes())
    for node_id, n in node_counts.items():
        if n > 1:
            add(f"node {node_id}", f"node id declared {n} times")
    component_names = [c.name for c in model.components]
    for name, n in Counter(component_names).items():
        if n > 1:
            add(f"component {name}", "duplicate component name")
    plugin_names = {m.name for m in model.maps if not m.root}
    for name in sorted(set(node_counts) & plugin_names):
        add(f"node {name}", "id clashes with a plug-in map name")
    for name in sorted(set(node_counts) & set(component_names)):
        add(f"node {name}", "id clashes with a component name")
    for name in sorted(plugin_names & set(component_names)):
        add(f"map {name}", "name clashes with a component name")

    components = {c.name: c for c in model.components}
    for c in model.components:
        if c.parent is not None and c.parent not in components:
            add(f"component {c.name}", f"unknown parent component {c.parent!r}")
    for c in model.components:
        seen = {c.name}
        cur = components[c.name].parent
        while cur is not None and cur in components:
            if cur in seen:
                add(f"component {c.name}", "component parents form a cycle")
                break
            seen.add(cur)
            cur = components[cur].parent

    variables = set(model.variables)
    for m in model.maps:
        _validate_map(model, m, components, variables, plugin_names, add)

    cycle = _plugin_cycle(model)
    if cycle:
        add(f"map {cycle[0]}", "plug-in recursion: " + " -> ".join(cycle))

    if objects is not None:
        _validate_objects(model, objects, add)
    return ValidationReport(tuple(issues))


def _validate_map(model, m: MapGraph, components, variables, plugin_names, add) -> None:
    ids = {n.id for n in m.nodes}
    by_id = {n.id: n for n in m.nodes}
    for node in m.nodes:
        where = f"map {m.name}: node {node.id}"
        if node.kind not in NODE_KINDS:
            add(where, f"unknown node kind {node.kind!r}")
        if node.component is not None and node.component not in components:
            add(where, f"unknown component {node.component!r}")
        if (node.stub is not None) != (node.kind == "stub"):
            add(where, "stub detail must be present exactly on stub nodes")
        if node.kind == "start" and not _prob_ok(node.trigger):
            add(where, f"trigger probability {node.trigger!r} outside (0, 1]")
        if node.kind != "start" and node.trigger != 1.0:
            add(where, "trigger probability on a non-start node")

    for i, e in enumerate(m.edges):
        where = f"map {m.name}: edge #{i} {e.source}->{e.target}"
        for end in (e.source, e.target):
            if end not in ids:
                add(where, f"edge references {end!r}, not a node of this map")
        if not _prob_ok(e.probability):
            add(where, f"probability {e.probability!r} outside (0, 1]")
        src = by_id.get(e.source)
        if src is None:
            continue
        if e.probability != 1.0 and src.kind != "or_fork":
            add(where, "probability below 1 on an edge not leaving an OR-fork")
        if e.condition is not None:
            if src.kind != "or_fork":
                add(where, "condition on an edge not leaving an OR-fork")
            if e.condition.variable not in variables:
                add(where, f"condition references undeclared variable {e.condition.variable!r}")
        if e.source_port is not None and src.kind != "stub":
            add(where, "source port on an edge not leaving a stub")
        tgt = by_id.get(e.target)
        if e.target_port is not None and (tgt is None or tgt.kind != "stub"):
            add(where, "target port on an edge not entering a stub")

    for node in m.nodes:
        where = f"map {m.name}: node {node.id}"
        out = m.outgoing(node.id)
        inc = m.incoming(node.id)
        if node.kind == "start" and inc:
            add(where, "start point has incoming edges")
        if node.kind == "end" and out:
            add(where, "end point has outgoing edges")
        if node.kind in FORK_KINDS and len(out) < 2:
            add(where, f"{node.kind} needs at least 2 outgoing edges, has {len(out)}")
        if node.kind in JOIN_KINDS and len(inc) < 2:
            add(where, f"{node.kind} needs at least 2 incoming edges, has {len(inc)}")
        if node.kind in ("start", "responsibility") or node.kind in JOIN_KINDS:
            if len(out) > 1:
                add(where, f"{node.kind} has {len(out)} outgoing edges, at most 1 allowed")
        if node.kind == "or_fork" and out:
            total = sum(e.probability for e in out)
            if abs(total - 1.0) > PROBABILITY_TOLERANCE:
                add(where, f"probability sum {fmt_number(total)} ≠ 1")
        if node.stub is not None:
            _validate_stub(model, m, node, inc, out, plugin_names, add)


def _validate_stub(model, m: MapGraph, node: Node, inc, out, plugin_names, add) -> None:
    where = f"map {m.name}: stub {node.id}"
    detail = node.stub
    for port, n in Counter(detail.inputs).items():
        if n > 1:
            add(where, f"duplicate stub input {port!r}")
    for port, n in Counter(detail.outputs).items():
        if n > 1:
            add(where, f"duplicate stub output {port!r}")
    for e in inc:
        if detail.resolve_input(e.target_port) is None:
            add(where, f"incoming edge from {e.source} does not name a stub input")
    used: Counter[str] = Counter()
    for e in out:
        port = detail.resolve_output(e.source_port)
        if port is None:
            add(where, f"outgoing edge to {e.target} does not name a stub output")
        else:
            used[port] += 1
    for port, n in used.items():
        if n > 1:
            add(where, f"stub output {port!r} has {n} outgoing edges")

    if not detail.bindings:
        add(where, "stub has no plug-in bindings")
    if not detail.dynamic:
        if len(detail.bindings) != 1:
            add(where, f"static stub needs exactly one plug-in, has {len(detail.bindings)}")
        elif detail.bindings[0].probability != 1.0:
            add(where, "static stub binding probability must be 1")
    else:
        total = 0.0
        for b in detail.bindings:
            if not _prob_ok(b.probability):
                add(where, f"binding {b.plugin!r} probability {b.probability!r} outside (0, 1]")
            else:
                total += b.probability
        if detail.bindings and abs(total - 1.0) > PROBABILITY_TOLERANCE:
            add(where, f"binding probability sum {fmt_number(total)} ≠ 1")
    for plugin, n in Counter(b.plugin for b in detail.bindings).items():
        if n > 1:
            add(where, f"plug-in {plugin!r} bound twice")

    for b in detail.bindings:
        if b.plugin not in plugin_names:
            add(where, f"plug-in {b.plugin!r} is not a non-root map")
            continue
        pm = model.map(b.plugin)
        starts = {n.id for n in pm.nodes_of("start")}
        ends = {n.id for n in pm.nodes_of("end")}
        for port in detail.inputs:
            if port not in b.inputs:
                add(where, f"binding {b.plugin!r} leaves stub input {port!r} unmapped")
        for port, start in b.inputs.items():
            if port not in detail.inputs:
                add(where, f"binding {b.plugin!r} maps unknown stub input {port!r}")
            if start not in starts:
                add(where, f"binding {b.plugin!r}: {start!r} is not a start point of the plug-in")
        for end, port in b.outputs.items():
            if end not in ends:
                add(where, f"binding {b.plugin!r}: {end!r} is not an end point of the plug-in")
            if port not in detail.outputs:
                add(where, f"binding {b.plugin!r} maps to unknown stub output {port!r}")


def _plugin_cycle(model: UcmModel) -> list[str] | None:
    names = {m.name for m in model.maps}
    uses: dict[str, list[str]] = {}
    for m in model.maps:
        uses[m.name] = [
            b.plugin
            for n in m.nodes
            if n.stub is not None
            for b in n.stub.bindings
            if b.plugin in names
        ]
    state: dict[str, int] = {}

    def visit(name: str, path: list[str]) -> list[str] | None:
        state[name] = 1
        path.append(name)
        for nxt in uses.get(name, ()):
            if state.get(nxt) == 1:
                return path[path.index(nxt):] + [nxt]
            if nxt not in state:
                found = visit(nxt, path)
                if found:
                    return found
        path.pop()
        state[name] = 2
        return None

    for name in uses:
        if name not in state:
            found = visit(name, [])
            if found:
                return found
    return None


def _validate_objects(model: UcmModel, objects: ObjectModel, add) -> None:
    known = model_objects(model)
    for obj, parent in objects.parents.items():
        where = f"object {obj}"
        if obj not in known:
            add(where, "not an object of the model")
        if parent is None:
            continue
        if parent not in known:
            add(where, f"unknown parent {parent!r}")
        elif known[parent] in PRIMITIVE_TYPES:
            add(where, f"parent {parent!r} is a primitive object and cannot contain others")
    cycle = objects.find_cycle()
    if cycle:
        add(f"object {cycle[0]}", "containment cycle: " + " -> ".join(cycle + [cycle[0]]))


def iter_probabilities(model: UcmModel) -> Iterable[float]:
    """Every probability literal in the model (edges, triggers, bindings)."""
    for m in model.maps:
        for e in m.edges:
            yield e.probability
        for n in m.nodes:
            if n.kind == "start":
                yield n.trigger
            if n.stub is not None:
                for b in n.stub.bindings:
                    yield b.probability


def is_close(a: float, b: float, tol: float = PROBABILITY_TOLERANCE) -> bool:
    return math.isclose(a, b, rel_tol=0.0, abs_tol=tol)
