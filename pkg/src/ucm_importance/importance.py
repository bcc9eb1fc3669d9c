"""Importance of scenarios and of the objects they touch.

A scenario's importance is the product of every probability along its path,
the start-point trigger included. A primitive object (responsibility, start
or end point) scores the importance-weighted count of its appearances across
scenarios. A container scores the sum of its direct children.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .model import CONTAINER_TYPES, PRIMITIVE_TYPES, ObjectModel
from .scenarios import ScenarioPath

# start/end points are ranked together with responsibilities
REPORT_GROUPS = {"responsibility": "responsibility", "point": "responsibility",
                 "plugin": "plugin", "stub": "stub", "component": "component"}
GROUP_ORDER = ("responsibility", "plugin", "stub", "component")


def scenario_importance(path: ScenarioPath) -> float:
    result = path.trigger
    for t in path.transitions:
        result *= t.probability
    return result


def primitive_importance(obj: str, scenarios: Iterable[tuple[ScenarioPath, float]]) -> float:
    return sum(importance * path.visits.get(obj, 0) for path, importance in scenarios)


def container_importance(
    container: str,
    objects: ObjectModel,
    primitives: Mapping[str, float],
    _memo: dict[str, float] | None = None,
) -> float:
    memo = {} if _memo is None else _memo
    if container in memo:
        return memo[container]
    total = 0.0
    for child in objects.children(container):
        if objects.is_container(child):
            total += container_importance(child, objects, primitives, memo)
        else:
            total += primitives.get(child, 0.0)
    memo[container] = total
    return total


@dataclass(frozen=True)
class ImportanceReport:
    scenario_importance: Mapping[str, float]
    object_importance: Mapping[str, float]
    object_type: Mapping[str, str]
    rankings: Mapping[str, tuple[str, ...]]
    percents: Mapping[str, Mapping[str, float]]

    def group_of(self, obj: str) -> str:
        return REPORT_GROUPS[self.object_type[obj]]


def rank(values: Mapping[str, float]) -> list[str]:
    """Descending by value, ties by ascending id."""
    return sorted(values, key=lambda k: (-values[k], k))


def build_report(paths: Sequence[ScenarioPath], objects: ObjectModel) -> ImportanceReport:
    scenarios = {p.name: scenario_importance(p) for p in paths}
    weighted = [(p, scenarios[p.name]) for p in paths]

    primitives = {
        obj: primitive_importance(obj, weighted)
        for obj, kind in objects.types.items()
        if kind in PRIMITIVE_TYPES
    }
    memo: dict[str, float] = {}
    values: dict[str, float] = {}
    for obj, kind in objects.types.items():
        if kind in CONTAINER_TYPES:
            values[obj] = container_importance(obj, objects, primitives, memo)
        else:
            values[obj] = primitives[obj]

    rankings: dict[str, tuple[str, ...]] = {}
    for group in GROUP_ORDER:
        members = {o: v for o, v in values.items() if REPORT_GROUPS[objects.types[o]] == group}
        if members:
            rankings[group] = tuple(rank(members))
    partial = ImportanceReport(scenarios, values, dict(objects.types), rankings, {})
    return ImportanceReport(scenarios, values, dict(objects.types), rankings, percent_by_type(partial))


def percent_by_type(report: ImportanceReport) -> dict[str, dict[str, float]]:
    """Share of each object in its group's total, in percent.

    Groups whose total importance is zero are left out.
    """
    out: dict[str, dict[str, float]] = {}
    for group, members in report.rankings.items():
        total = math.fsum(report.object_importance[o] for o in members)
        if total <= 0.0:
            continue
        out[group] = {o: 100.0 * report.object_importance[o] / total for o in members}
    return out


def filter_overall(report: ImportanceReport, threshold: float) -> list[str]:
    """Scenarios whose importance reaches ``threshold``, most important first."""
    _check_threshold(threshold)
    keep = {n: v for n, v in report.scenario_importance.items() if v >= threshold}
    return rank(keep)


def filter_alternative(paths: Sequence[ScenarioPath], threshold: float) -> list[str]:
    """Scenarios in which every single transition probability reaches ``threshold``."""
    _check_threshold(threshold)
    keep = {
        p.name: scenario_importance(p)
        for p in paths
        if all(t.probability >= threshold for t in p.transitions)
    }
    return rank(keep)


def _check_threshold(threshold: float) -> None:
    if not 0.0 <= threshold <= 1.0:
        raise ValueError(f"threshold {threshold} outside [0, 1]")

