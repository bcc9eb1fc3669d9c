"""Importance analysis of Use Case Maps with Markov usage models.

Typical use::

    model = load_model("model.json")
    chain = build_flat_chain(model)
    paths = [resolve_scenario(d, chain) for d in load_scenarios("scenarios.json", model)]
    report = build_report(paths, load_object_model("objects.json", model))
"""

from .errors import UcmError
from .importance import (
    ImportanceReport,
    build_report,
    container_importance,
    filter_alternative,
    filter_overall,
    percent_by_type,
    primitive_importance,
    scenario_importance,
)
from .ingest import (
    dump_model,
    load_model,
    load_object_model,
    load_scenarios,
    parse_model,
    parse_object_model,
    parse_scenarios,
)
from .model import ObjectModel, UcmModel, ValidationReport, default_object_model, validate_model
from .scenarios import (
    ScenarioDefinition,
    ScenarioPath,
    enumerate_scenarios,
    resolve_scenario,
    scenario_chain,
)
from .simulate import estimate, random_walk
from .usage import (
    FlatChain,
    UsageModel,
    build_flat_chain,
    check_stochastic,
    convert,
    enumerate_paths,
    flatten,
)

__version__ = "0.1.0"
