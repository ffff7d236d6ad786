import logging

from artifacts import ExperimentRecord
from commands import show_frame, show_metrics
from measurement import born_probabilities
from pbr import OUTCOMES, pbr_basis, pbr_contingency, pbr_experiment

log = logging.getLogger(__name__)


def run_pbr(config):
    basis = pbr_basis()
    log.info("PBR experiment: %d trials, mixture %s", config.trials, list(config.mixture))
    result = pbr_experiment(config.trials, config.mixture, config.seed)
    summary = result.to_json()
    summary["forbidden_counts"] = {p: int(result.counts[p][i]) for p, i in result.forbidden_map.items()}
    summary["born"] = {p: born_probabilities(state, basis.decomposition).tolist() for p, state in basis.preparations.items()}
    contingency = pbr_contingency(result)
    show_frame("Contingency (preparation x outcome)", contingency)
    show_metrics("Forbidden cells", {f"{p} -> {OUTCOMES[i]}": int(result.counts[p][i]) for p, i in result.forbidden_map.items()})
    return ExperimentRecord("pbr", config.seed, config.echo(), summary).with_table("contingency", contingency)
