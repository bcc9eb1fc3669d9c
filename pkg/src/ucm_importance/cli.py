"""Command-line front end.

Exit codes: 0 success, 1 validation issues, 2 usage or parse errors,
3 analysis or runtime errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .errors import IngestError, UcmError
from .importance import ImportanceReport, build_report, filter_alternative, filter_overall, rank
from .ingest import load_model, load_object_model, load_scenarios
from .model import ObjectModel, UcmModel, default_object_model, validate_model
from .scenarios import ScenarioDefinition, enumerate_scenarios, path_signature, resolve_scenario, scenario_chain
from .simulate import estimate
from .usage import DEFAULT_LOOP_BOUND, FlatChain, build_flat_chain, chain_to_dot, convert, usage_model_to_dot

EXIT_OK, EXIT_ISSUES, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2, 3


class CommandError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


@dataclass
class RunConfig:
    model: Path
    scenarios: Path | None = None
    objects: Path | None = None
    enumerate: bool = False
    overall_threshold: float | None = None
    alt_threshold: float | None = None
    format: str = "text"
    flat: bool = False
    scenario: str | None = None
    seed: int = 0
    walks: int = 10000
    loop_bound: int = DEFAULT_LOOP_BOUND
    round: int | None = None

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> RunConfig:
        fields = cls.__dataclass_fields__
        return cls(**{k: v for k, v in vars(args).items() if k in fields})


def fmt(x: float, digits: int | None = None) -> str:
    if digits is None:
        return f"{x:.9g}"
    text = f"{round(x, digits):.{digits}f}"
    if "." in text:
        text = text.rstrip("0").rstrip(".")
    return "0" if text == "-0" else text


# --- loading ---------------------------------------------------------------


def _load(config: RunConfig) -> tuple[UcmModel, ObjectModel]:
    try:
        model = load_model(config.model)
        objects = (
            load_object_model(config.objects, model)
            if config.objects is not None
            else default_object_model(model)
        )
    except OSError as exc:
        raise CommandError(f"cannot read {exc.filename}: {exc.strerror}", EXIT_USAGE) from None
    except IngestError as exc:
        raise CommandError(str(exc), EXIT_USAGE) from None
    report = validate_model(model, objects)
    if not report.ok:
        raise CommandError(str(report), EXIT_ISSUES)
    return model, objects


def _definitions(config: RunConfig, model: UcmModel, chain: FlatChain, required: bool = True) -> list[ScenarioDefinition]:
    if config.scenarios is not None:
        try:
            return load_scenarios(config.scenarios, model)
        except OSError as exc:
            raise CommandError(f"cannot read {exc.filename}: {exc.strerror}", EXIT_USAGE) from None
        except IngestError as exc:
            raise CommandError(str(exc), EXIT_USAGE) from None
    if config.enumerate or not required:
        return enumerate_scenarios(model, chain, config.loop_bound)
    raise CommandError("either --scenarios or --enumerate is required", EXIT_USAGE)


def _resolve_all(definitions, chain, loop_bound):
    try:
        return [resolve_scenario(d, chain, loop_bound) for d in definitions]
    except UcmError as exc:
        raise CommandError(f"scenario resolution failed: {exc}", EXIT_RUNTIME) from None


# --- commands --------------------------------------------------------------


def cmd_validate(config: RunConfig) -> str:
    _load(config)
    return "ok: 0 issues\n"


def analysis_tables(config: RunConfig) -> list[tuple[str, list[tuple[str, str, float]]]]:
    """Sections of the analysis as ``(title, [(name, type, value), ...])``."""
    model, objects = _load(config)
    chain = build_flat_chain(model)
    definitions = _definitions(config, model, chain)
    paths = _resolve_all(definitions, chain, config.loop_bound)
    report: ImportanceReport = build_report(paths, objects)

    sections = [("scenarios", [(p.name, "scenario", report.scenario_importance[p.name]) for p in paths])]
    if config.overall_threshold is not None:
        keep = filter_overall(report, config.overall_threshold)
        sections.append(
            (f"overall-threshold {fmt(config.overall_threshold)}",
             [(n, "scenario", report.scenario_importance[n]) for n in keep])
        )
    if config.alt_threshold is not None:
        keep = filter_alternative(paths, config.alt_threshold)
        sections.append(
            (f"alternative-threshold {fmt(config.alt_threshold)}",
             [(n, "scenario", report.scenario_importance[n]) for n in keep])
        )
    for group, members in report.rankings.items():
        sections.append(
            (f"objects {group}", [(o, report.object_type[o], report.object_importance[o]) for o in members])
        )
    for group, shares in report.percents.items():
        sections.append(
            (f"percent {group}", [(o, report.object_type[o], shares[o]) for o in report.rankings[group]])
        )
    return sections


def cmd_analyze(config: RunConfig) -> str:
    return render(analysis_tables(config), config)


def cmd_export_dot(config: RunConfig) -> str:
    model, _ = _load(config)
    if config.scenario is not None:
        chain = build_flat_chain(model)
        definitions = {d.name: d for d in _definitions(config, model, chain)}
        if config.scenario not in definitions:
            raise CommandError(f"no scenario named {config.scenario!r}", EXIT_USAGE)
        path = _resolve_all([definitions[config.scenario]], chain, config.loop_bound)[0]
        return chain_to_dot(scenario_chain(path, chain), config.scenario)
    if config.flat:
        return chain_to_dot(build_flat_chain(model), "flat")
    return usage_model_to_dot(convert(model))


def simulation_tables(config: RunConfig) -> tuple[list[tuple[str, str]], list[tuple[str, list[tuple[str, str, float]]]]]:
    if config.walks < 1:
        raise CommandError("--walks must be at least 1", EXIT_USAGE)
    model, _ = _load(config)
    chain = build_flat_chain(model)
    definitions = _definitions(config, model, chain, required=False)
    names = {path_signature(p, chain): p.name for p in _resolve_all(definitions, chain, config.loop_bound)}
    try:
        est = estimate(chain, config.walks, config.seed, config.loop_bound)
    except UcmError as exc:
        raise CommandError(f"simulation failed: {exc}", EXIT_RUNTIME) from None

    def label(sig) -> str:
        if sig in names:
            return names[sig]
        return "|".join(f"{a}>{b}" for a, b in sig) or "(no choices)"

    freqs = {label(sig): f for sig, f in est.frequencies.items()}
    header = [
        ("generator", est.generator),
        ("seed", str(est.seed)),
        ("walks", str(est.walks)),
        ("loop-bound", str(config.loop_bound)),
    ]
    sections = [
        ("frequencies", [(n, "scenario", freqs[n]) for n in rank(freqs)]),
        ("mean-visits", [(o, "object", v) for o, v in sorted(est.mean_visits.items())]),
    ]
    return header, sections


def cmd_simulate(config: RunConfig) -> str:
    header, sections = simulation_tables(config)
    return render(sections, config, header)


# --- rendering -------------------------------------------------------------


def render(sections, config: RunConfig, header: Sequence[tuple[str, str]] = ()) -> str:
    d = config.round
    if config.format == "json":
        doc: dict = dict(header)
        doc["sections"] = [
            {"title": title, "rows": [{"name": n, "type": t, "value": float(fmt(v, d))} for n, t, v in rows]}
            for title, rows in sections
        ]
        return json.dumps(doc, indent=2) + "\n"
    if config.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["section", "name", "type", "value"])
        for key, value in header:
            w.writerow(["header", key, "", value])
        for title, rows in sections:
            for n, t, v in rows:
                w.writerow([title, n, t, fmt(v, d)])
        return buf.getvalue()
    lines = [f"{key} {value}" for key, value in header]
    for title, rows in sections:
        lines.append(f"[{title}]")
        lines.extend(f"{n} {fmt(v, d)}" for n, _, v in rows)
    return "\n".join(lines) + "\n"


# --- argument parsing ------------------------------------------------------


def _threshold(text: str) -> float:
    value = float(text)
    if not 0.0 <= value <= 1.0:
        raise argparse.ArgumentTypeError(f"threshold {text} outside [0, 1]")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ucm-importance",
        description="Usage-model importance analysis of Use Case Maps.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--model", type=Path, required=True, help="model JSON file")
    common.add_argument("--objects", type=Path, help="object-model JSON file")
    common.add_argument("--loop-bound", type=int, default=DEFAULT_LOOP_BOUND)

    scen = argparse.ArgumentParser(add_help=False)
    scen.add_argument("--scenarios", type=Path, help="scenario definitions JSON file")
    scen.add_argument("--enumerate", action="store_true", help="generate all scenarios automatically")

    output = argparse.ArgumentParser(add_help=False)
    output.add_argument("--format", choices=("text", "json", "csv"), default="text")
    output.add_argument("--round", type=int, metavar="D", help="round displayed numbers to D decimals")

    sub.add_parser("validate", parents=[common], help="check model structure")
    p = sub.add_parser("analyze", parents=[common, scen, output], help="importance report")
    p.add_argument("--overall-threshold", type=_threshold, metavar="R")
    p.add_argument("--alt-threshold", type=_threshold, metavar="R")
    p = sub.add_parser("export-dot", parents=[common, scen], help="usage model as Graphviz DOT")
    p.add_argument("--flat", action="store_true", help="one flattened chain")
    p.add_argument("--scenario", metavar="NAME", help="chain of one scenario")
    p = sub.add_parser("simulate", parents=[common, scen, output], help="Monte Carlo usage walks")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--walks", type=int, default=10000)
    return parser


COMMANDS = {
    "validate": cmd_validate,
    "analyze": cmd_analyze,
    "export-dot": cmd_export_dot,
    "simulate": cmd_simulate,
}


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    config = RunConfig.from_args(args)
    if config.loop_bound < 0:
        print("error: --loop-bound must be non-negative", file=sys.stderr)
        return EXIT_USAGE
    try:
        text = COMMANDS[args.command](config)
    except CommandError as exc:
        print(exc, file=sys.stdout if exc.code == EXIT_ISSUES else sys.stderr)
        return exc.code
    sys.stdout.write(text)
    return EXIT_OK
