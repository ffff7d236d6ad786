import itertools
import logging

import numpy as np

from artifacts import ExperimentRecord
from commands import show_frame, show_metrics
from ontology import (
    PBR_PAIRS,
    born_deviation,
    build_shared_reality_model,
    load_model,
    monte_carlo_onto,
    overlap,
    pbr_min_violation,
    product_model,
    scenario,
    single_qubit_min_violation,
    with_responses,
)
from pbr import OUTCOMES

log = logging.getLogger(__name__)


def _monte_carlo_summary(result):
    return {"scenario": result.scenario, "trials": result.trials, "max_forbidden_frequency": result.max_forbidden_frequency}


def run_onto(config):
    if config.model:
        return _run_user_model(config)
    shared = build_shared_reality_model(config.q)
    bound = pbr_min_violation(config.q, config.resolution)
    single = single_qubit_min_violation(config.q)
    summary = {
        "q": config.q,
        "resolution": config.resolution,
        "overlaps": [overlap(shared, "0", "+").to_json()],
        "bound": bound.to_json(),
        "single_qubit_bound": single.to_json(),
        "monte_carlo": None,
    }
    record = ExperimentRecord("onto", config.seed, config.echo(), summary)
    record = record.with_table("responses", bound.witnessing_responses.reset_index())
    if np.isfinite(bound.witnessing_responses.to_numpy()).all():
        pairs = with_responses(product_model(shared, PBR_PAIRS), "pbr", bound.witnessing_responses.to_numpy(), OUTCOMES)
        result = monte_carlo_onto(pairs, scenario("pbr"), config.trials, config.seed)
        summary["monte_carlo"] = _monte_carlo_summary(result)
        record = record.with_table("monte_carlo", result.tidy())
    else:
        log.warning("no witnessing response table; Monte Carlo skipped")
    show_metrics(
        "Shared-reality cost",
        {
            "q": config.q,
            "min worst-case forbidden probability": bound.violation_lower_bound,
            "certificate": bound.status,
            "duality gap": bound.duality_gap,
            "single-qubit deviation": single.violation_lower_bound,
        },
    )
    show_frame("Witnessing responses", bound.witnessing_responses.reset_index())
    return record


def _run_user_model(config):
    model = load_model(config.model)
    case = scenario(config.scenario)
    result = monte_carlo_onto(model, case, config.trials, config.seed)
    overlaps = [overlap(model, a, b).to_json() for a, b in itertools.combinations(sorted(model.preparations), 2)]
    expected = {p: dist for p, dist in case.born.items() if p in model.preparations}
    summary = {
        "q": config.q,
        "resolution": config.resolution,
        "model": config.model,
        "overlaps": overlaps,
        "born_deviation": born_deviation(model, case.measurement, expected),
        "monte_carlo": _monte_carlo_summary(result),
    }
    show_metrics("User model", {"scenario": case.name, "max forbidden frequency": result.max_forbidden_frequency})
    return ExperimentRecord("onto", config.seed, config.echo(), summary).with_table("monte_carlo", result.tidy())
