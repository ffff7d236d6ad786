import logging

from artifacts import ExperimentRecord
from commands import show_metrics
from hilbert import PAULIS, ZERO, inner_product, qubit_state, state_to_json
from measurement import default_grid, substream
from protective import leak_ensemble, protection_leak, survivor_expectations

log = logging.getLogger(__name__)


def run_leak(config):
    """Prepare cos(theta)|0> + sin(theta)|1>, protect |0>, and follow the survivors."""
    prepared = qubit_state(config.theta)
    grid = default_grid(config.width, config.grid_points)
    leak = protection_leak(prepared, ZERO, config.n, config.g, grid, config.width)
    ensemble = leak_ensemble(prepared, ZERO, config.trials, config.n, config.g, substream(config.seed, "leak", "ensemble"), grid, config.width)
    expected = abs(inner_product(ZERO, prepared)) ** 2
    survivors = {}
    if leak.surviving_state is not None:
        survivors = dict(zip("XYZ", survivor_expectations(leak, PAULIS, config.n, config.g, grid, config.width)))
    else:
        log.info("no system survives protection onto |0>")

    summary = {
        "prepared": state_to_json(prepared),
        "protected": state_to_json(ZERO),
        "survival": leak.survival,
        "expected_survival": expected,
        "surviving_state": state_to_json(leak.surviving_state) if leak.surviving_state is not None else None,
        "survivor_expectations": survivors,
        "ensemble": {
            "systems": ensemble.systems,
            "survivors": ensemble.survivors,
            "fraction": ensemble.fraction,
            "expected_fraction": ensemble.expected_fraction,
            "standard_error": ensemble.standard_error,
        },
    }
    show_metrics(
        "Protection leak",
        {"survival": leak.survival, "|<0|prepared>|^2": expected, "ensemble fraction": ensemble.fraction, "standard error": ensemble.standard_error},
    )
    return ExperimentRecord("leak", config.seed, config.echo(), summary).with_table("per_step", leak.run.log_table())
