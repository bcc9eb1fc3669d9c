"""Readers and writers for the three JSON file kinds.

* model file: ``{"maps": [...], "components": [...], "variables": [...]}``
* scenario file: ``[{"name", "start", "bindings", "conditions", "post"?}, ...]``
* object-model file: ``[{"object", "parent"}, ...]``

Every error carries a :class:`~ucm_importance.errors.SourceLocation` pointing
at the offending JSON value.
"""

from __future__ import annotations

import json
import json.decoder
import json.scanner
from os import PathLike
from pathlib import Path
from typing import Any

from .errors import (
    CycleDetected,
    DuplicateId,
    DuplicateScenarioName,
    MultipleParents,
    SourceLocation,
    UcmSyntaxError,
    UnknownObject,
    UnknownPlugin,
    UnknownReference,
    UnknownStub,
    UnknownVariable,
)
from .model import (
    NODE_KINDS,
    Component,
    Condition,
    Edge,
    MapGraph,
    Node,
    ObjectModel,
    PluginBinding,
    StubDetail,
    UcmModel,
    model_objects,
)
from .scenarios import ScenarioDefinition


class _Obj(dict):
    pos = 0


class _Arr(list):
    pos = 0


def _decoder() -> json.JSONDecoder:
    """A JSONDecoder whose objects and arrays remember their source offset."""
    dec = json.JSONDecoder()

    def parse_object(s_and_end, strict, scan_once, object_hook, object_pairs_hook, memo=None):
        s, end = s_and_end
        pairs, new_end = json.decoder.JSONObject(s_and_end, strict, scan_once, None, list, memo)
        obj = _Obj()
        for key, value in pairs:
            if key in obj:
                raise json.JSONDecodeError(f"Expecting unique member name, {key!r} repeated", s, end - 1)
            obj[key] = value
        obj.pos = end - 1
        return obj, new_end

    def parse_array(s_and_end, scan_once):
        s, end = s_and_end
        values, new_end = json.decoder.JSONArray(s_and_end, scan_once)
        arr = _Arr(values)
        arr.pos = end - 1
        return arr, new_end

    dec.parse_object = parse_object
    dec.parse_array = parse_array
    dec.memo = {}
    dec.scan_once = json.scanner.py_make_scanner(dec)
    return dec


def _describe(value: Any) -> str:
    if value is None:
        return "null"
    if isinstance(value, bool):
        return "boolean"
    if isinstance(value, (int, float)):
        return "number"
    if isinstance(value, str):
        return "string"
    if isinstance(value, list):
        return "array"
    return "object"


class _Document:
    def __init__(self, text: str, filename: str):
        self.text = text
        self.filename = filename

    def load(self, empty_expected: str) -> Any:
        if not self.text.strip():
            raise UcmSyntaxError(empty_expected, self.at(0))
        try:
            return _decoder().decode(self.text)
        except json.JSONDecodeError as exc:
            msg = exc.msg
            if msg.startswith("Expecting "):
                msg = msg[len("Expecting "):]
            raise UcmSyntaxError(msg, SourceLocation(self.filename, exc.lineno, exc.colno)) from None

    def at(self, pos: int) -> SourceLocation:
        line = self.text.count("\n", 0, pos) + 1
        column = pos - (self.text.rfind("\n", 0, pos) + 1) + 1
        return SourceLocation(self.filename, line, column)

    def loc(self, value: Any, parent: Any = None) -> SourceLocation:
        pos = getattr(value, "pos", None)
        if pos is None:
            pos = getattr(parent, "pos", 0)
        return self.at(pos)

    def obj(self, value: Any, what: str, parent: Any, required: tuple[str, ...], optional: tuple[str, ...] = ()) -> dict:
        if not isinstance(value, dict):
            raise UcmSyntaxError(what, self.loc(value, parent), _describe(value))
        for key in required:
            if key not in value:
                raise UcmSyntaxError(f"member {key!r} in {what}", self.loc(value))
        allowed = set(required) | set(optional)
        for key in value:
            if key not in allowed:
                raise UcmSyntaxError(
                    f"one of {sorted(allowed)} in {what}", self.loc(value), f"member {key!r}"
                )
        return value

    def arr(self, value: Any, what: str, parent: Any) -> list:
        if not isinstance(value, list):
            raise UcmSyntaxError(f"array of {what}", self.loc(value, parent), _describe(value))
        return value

    def string(self, d: dict, key: str, what: str) -> str:
        value = d[key]
        if not isinstance(value, str) or not value:
            raise UcmSyntaxError(f"non-empty string for {what}.{key}", self.loc(d), _describe(value))
        return value

    def opt_string(self, d: dict, key: str, what: str) -> str | None:
        if d.get(key) is None:
            return None
        return self.string(d, key, what)

    def boolean(self, d: dict, key: str, what: str, default: bool | None = None) -> bool:
        if key not in d and default is not None:
            return default
        value = d[key]
        if not isinstance(value, bool):
            raise UcmSyntaxError(f"boolean for {what}.{key}", self.loc(d), _describe(value))
        return value

    def number(self, d: dict, key: str, what: str, default: float) -> float:
        if key not in d:
            return default
        value = d[key]
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise UcmSyntaxError(f"number for {what}.{key}", self.loc(d), _describe(value))
        return float(value)

    def strings(self, value: Any, what: str, parent: Any) -> list[str]:
        items = self.arr(value, what, parent)
        for item in items:
            if not isinstance(item, str) or not item:
                raise UcmSyntaxError(f"non-empty string in {what}", self.loc(items), _describe(item))
        return list(items)

    def string_map(self, value: Any, what: str, parent: Any) -> dict[str, str]:
        if not isinstance(value, dict):
            raise UcmSyntaxError(f"object for {what}", self.loc(value, parent), _describe(value))
        for k, v in value.items():
            if not isinstance(v, str) or not v:
                raise UcmSyntaxError(f"string value for {what}[{k!r}]", self.loc(value), _describe(v))
        return dict(value)


# --- model -----------------------------------------------------------------


def parse_model(text: str, filename: str = "<model>") -> UcmModel:
    doc = _Document(text, filename)
    data = doc.load("'map'")
    top = doc.obj(data, "model object", None, ("maps",), ("components", "variables"))

    variables = doc.strings(top.get("variables", []), "variables", top)
    seen_vars: set[str] = set()
    for v in variables:
        if v in seen_vars:
            raise DuplicateId(v, doc.loc(top["variables"]), "variable")
        seen_vars.add(v)

    components: list[Component] = []
    raw_components = doc.arr(top.get("components", []), "components", top)
    names: set[str] = set()
    for raw in raw_components:
        c = doc.obj(raw, "component", raw_components, ("name",), ("parent",))
        name = doc.string(c, "name", "component")
        if name in names:
            raise DuplicateId(name, doc.loc(c), "component")
        names.add(name)
        components.append(Component(name, doc.opt_string(c, "parent", "component")))
    for raw, comp in zip(raw_components, components):
        if comp.parent is not None and comp.parent not in names:
            raise UnknownReference(comp.parent, doc.loc(raw), "component parent")

    raw_maps = doc.arr(top["maps"], "maps", top)
    map_names: set[str] = set()
    for raw in raw_maps:
        m = doc.obj(raw, "map", raw_maps, ("name", "nodes"), ("root", "edges"))
        name = doc.string(m, "name", "map")
        if name in map_names:
            raise DuplicateId(name, doc.loc(m), "map")
        map_names.add(name)

    node_ids: set[str] = set()
    maps = [
        _parse_map(doc, raw, names, seen_vars, map_names, node_ids) for raw in raw_maps
    ]
    return UcmModel(maps=tuple(maps), components=tuple(components), variables=tuple(variables))


def _parse_map(doc: _Document, m: dict, components, variables, map_names, node_ids) -> MapGraph:
    name = m["name"]
    root = doc.boolean(m, "root", "map", default=False)
    raw_nodes = doc.arr(m["nodes"], "nodes", m)
    nodes: list[Node] = []
    local: set[str] = set()
    for raw in raw_nodes:
        n = doc.obj(raw, "node", raw_nodes, ("id", "kind"), ("component", "trigger", "stub"))
        node_id = doc.string(n, "id", "node")
        if node_id in node_ids:
            raise DuplicateId(node_id, doc.loc(n), "node")
        node_ids.add(node_id)
        local.add(node_id)
        kind = doc.string(n, "kind", "node")
        if kind not in NODE_KINDS:
            raise UcmSyntaxError(f"node kind, one of {sorted(NODE_KINDS)}", doc.loc(n), repr(kind))
        component = doc.opt_string(n, "component", "node")
        if component is not None and component not in components:
            raise UnknownReference(component, doc.loc(n), "component")
        trigger = doc.number(n, "trigger", "node", 1.0)
        stub = None
        if "stub" in n:
            stub = _parse_stub(doc, n["stub"], n, map_names)
        nodes.append(Node(node_id, kind, component, trigger, stub))

    edges: list[Edge] = []
    raw_edges = doc.arr(m.get("edges", []), "edges", m)
    for raw in raw_edges:
        e = doc.obj(raw, "edge", raw_edges, ("from", "to"), ("probability", "condition", "from_port", "to_port"))
        src = doc.string(e, "from", "edge")
        dst = doc.string(e, "to", "edge")
        for ref in (src, dst):
            if ref not in local:
                raise UnknownReference(ref, doc.loc(e), f"node of map {name!r}")
        condition = None
        if e.get("condition") is not None:
            c = doc.obj(e["condition"], "condition", e, ("var", "value"))
            var = doc.string(c, "var", "condition")
            if var not in variables:
                raise UnknownReference(var, doc.loc(c), "variable")
            condition = Condition(var, doc.boolean(c, "value", "condition"))
        edges.append(
            Edge(
                src,
                dst,
                doc.number(e, "probability", "edge", 1.0),
                condition,
                doc.opt_string(e, "from_port", "edge"),
                doc.opt_string(e, "to_port", "edge"),
            )
        )
    return MapGraph(name, root, tuple(nodes), tuple(edges))


def _parse_stub(doc: _Document, raw: Any, parent: Any, map_names) -> StubDetail:
    s = doc.obj(raw, "stub", parent, ("bindings",), ("dynamic", "inputs", "outputs"))
    raw_bindings = doc.arr(s["bindings"], "bindings", s)
    bindings = []
    for rb in raw_bindings:
        b = doc.obj(rb, "binding", raw_bindings, ("plugin",), ("probability", "in", "out"))
        plugin = doc.string(b, "plugin", "binding")
        if plugin not in map_names:
            raise UnknownReference(plugin, doc.loc(b), "plug-in map")
        bindings.append(
            PluginBinding(
                plugin,
                doc.number(b, "probability", "binding", 1.0),
                doc.string_map(b.get("in", {}), "in", b),
                doc.string_map(b.get("out", {}), "out", b),
            )
        )
    return StubDetail(
        dynamic=doc.boolean(s, "dynamic", "stub", default=False),
        inputs=tuple(doc.strings(s.get("inputs", []), "inputs", s)),
        outputs=tuple(doc.strings(s.get("outputs", []), "outputs", s)),
        bindings=tuple(bindings),
    )


def model_to_data(model: UcmModel) -> dict:
    maps = []
    for m in model.maps:
        nodes = []
        for n in m.nodes:
            node: dict[str, Any] = {"id": n.id, "kind": n.kind}
            if n.component is not None:
                node["component"] = n.component
            if n.kind == "start" or n.trigger != 1.0:
                node["trigger"] = n.trigger
            if n.stub is not None:
                node["stub"] = {
                    "dynamic": n.stub.dynamic,
                    "inputs": list(n.stub.inputs),
                    "outputs": list(n.stub.outputs),
                    "bindings": [
                        {"plugin": b.plugin, "probability": b.probability, "in": dict(b.inputs), "out": dict(b.outputs)}
                        for b in n.stub.bindings
                    ],
                }
            nodes.append(node)
        edges = []
        for e in m.edges:
            edge: dict[str, Any] = {"from": e.source, "to": e.target}
            if e.probability != 1.0:
                edge["probability"] = e.probability
            if e.condition is not None:
                edge["condition"] = {"var": e.condition.variable, "value": e.condition.value}
            if e.source_port is not None:
                edge["from_port"] = e.source_port
            if e.target_port is not None:
                edge["to_port"] = e.target_port
            edges.append(edge)
        maps.append({"name": m.name, "root": m.root, "nodes": nodes, "edges": edges})
    components = []
    for c in model.components:
        comp: dict[str, Any] = {"name": c.name}
        if c.parent is not None:
            comp["parent"] = c.parent
        components.append(comp)
    return {"maps": maps, "components": components, "variables": list(model.variables)}


def dump_model(model: UcmModel) -> str:
    return json.dumps(model_to_data(model), indent=2, ensure_ascii=False) + "\n"


# --- scenarios -------------------------------------------------------------


def parse_scenarios(text: str, model: UcmModel, filename: str = "<scenarios>") -> list[ScenarioDefinition]:
    """Parse scenario definitions and check every name they reference.

    Completeness (every reachable dynamic stub bound, every needed variable
    assigned) is checked when the scenario is resolved.
    """
    doc = _Document(text, filename)
    items = doc.arr(doc.load("array of scenario definitions"), "scenario definitions", None)
    root_starts = {n.id for n in model.root.nodes_of("start")}
    ends = {n.id for _, n in model.iter_nodes() if n.kind == "end"}
    stubs = model.stubs()
    variables = set(model.variables)

    out: list[ScenarioDefinition] = []
    seen: set[str] = set()
    for raw in items:
        d = doc.obj(raw, "scenario definition", items, ("name", "start"), ("bindings", "conditions", "post"))
        name = doc.string(d, "name", "scenario")
        if name in seen:
            raise DuplicateScenarioName(name, doc.loc(d))
        seen.add(name)
        start = doc.string(d, "start", "scenario")
        if start not in root_starts:
            raise UnknownReference(start, doc.loc(d), "start point of the root map")

        bindings = doc.string_map(d.get("bindings", {}), "bindings", d)
        for stub, plugin in bindings.items():
            if stub not in stubs:
                raise UnknownStub(stub, doc.loc(d.get("bindings"), d))
            if stubs[stub].binding(plugin) is None:
                raise UnknownPlugin(plugin, doc.loc(d.get("bindings"), d), f"not a plug-in of stub {stub!r}")

        raw_cond = d.get("conditions", {})
        if not isinstance(raw_cond, dict):
            raise UcmSyntaxError("object for conditions", doc.loc(raw_cond, d), _describe(raw_cond))
        conditions: dict[str, bool] = {}
        for var, value in raw_cond.items():
            if var not in variables:
                raise UnknownVariable(var, doc.loc(raw_cond))
            if not isinstance(value, bool):
                raise UcmSyntaxError(f"boolean for condition {var!r}", doc.loc(raw_cond), _describe(value))
            conditions[var] = value

        post = None
        if d.get("post") is not None:
            post_ids = doc.strings(d["post"], "post", d)
            for end in post_ids:
                if end not in ends:
                    raise UnknownReference(end, doc.loc(d["post"]), "end point")
            post = frozenset(post_ids)
        out.append(ScenarioDefinition(name, start, bindings, conditions, post))
    return out


def scenarios_to_data(definitions: list[ScenarioDefinition]) -> list[dict]:
    out = []
    for d in definitions:
        item: dict[str, Any] = {
            "name": d.name,
            "start": d.start,
            "bindings": dict(d.bindings),
            "conditions": dict(d.conditions),
        }
        if d.post is not None:
            item["post"] = sorted(d.post)
        out.append(item)
    return out


def dump_scenarios(definitions: list[ScenarioDefinition]) -> str:
    return json.dumps(scenarios_to_data(definitions), indent=2, ensure_ascii=False) + "\n"


# --- object model ----------------------------------------------------------


def parse_object_model(text: str, model: UcmModel, filename: str = "<objects>") -> ObjectModel:
    doc = _Document(text, filename)
    items = doc.arr(doc.load("array of containment entries"), "containment entries", None)
    known = model_objects(model)
    parents: dict[str, str | None] = {}
    where: dict[str, SourceLocation] = {}
    for raw in items:
        e = doc.obj(raw, "containment entry", items, ("object", "parent"))
        obj = doc.string(e, "object", "entry")
        parent = doc.opt_string(e, "parent", "entry")
        for name in (obj, parent):
            if name is not None and name not in known:
                raise UnknownObject(name, doc.loc(e))
        if obj in parents:
            raise MultipleParents(obj, doc.loc(e), f"{parents[obj]!r} and {parent!r}")
        parents[obj] = parent
        where[obj] = doc.loc(e)

    for obj in parents:
        seen = [obj]
        cur = parents.get(obj)
        while cur is not None:
            if cur in seen:
                raise CycleDetected(cur, where[obj], " -> ".join(seen + [cur]))
            seen.append(cur)
            cur = parents.get(cur)
    return ObjectModel.from_model(model, parents)


def dump_object_model(objects: ObjectModel) -> str:
    entries = [{"object": o, "parent": p} for o, p in objects.parents.items() if p is not None]
    return json.dumps(entries, indent=2, ensure_ascii=False) + "\n"


# --- files -----------------------------------------------------------------


def _read(path: str | PathLike) -> tuple[str, str]:
    p = Path(path)
    return p.read_text(encoding="utf-8"), str(p)


def load_model(path: str | PathLike) -> UcmModel:
    text, name = _read(path)
    return parse_model(text, name)


def load_scenarios(path: str | PathLike, model: UcmModel) -> list[ScenarioDefinition]:
    text, name = _read(path)
    return parse_scenarios(text, model, name)


def load_object_model(path: str | PathLike, model: UcmModel) -> ObjectModel:
    text, name = _read(path)
    return parse_object_model(text, model, name)
