import logging

from artifacts import ExperimentRecord
from commands import show_frame, show_metrics
from hilbert import MINUS, ONE, PAULIS, PLUS, ZERO, SIGMA_X, SIGMA_Y, SIGMA_Z, expectation, fidelity, qubit_state, state_to_json
from measurement import attach_pointer, couple_pointer, default_grid, joint_to_json, make_pointer, substream
from protective import coupling_sweep, protective_measure, protective_signature, protective_tomography

log = logging.getLogger(__name__)

OBSERVABLES = {"X": SIGMA_X, "Y": SIGMA_Y, "Z": SIGMA_Z}


def run_protective(config):
    psi = qubit_state(config.theta)
    A = OBSERVABLES[config.observable]
    grid = default_grid(config.width, config.grid_points)
    log.info("protective measurement of sigma_%s: n=%d g=%g", config.observable.lower(), config.n, config.g)
    run = protective_measure(psi, A, config.n, config.g, grid, config.width, config.mode, substream(config.seed, "protective", "protection"))
    tomography = protective_tomography(psi, PAULIS, config.n, config.g, grid, config.width)
    signature = protective_signature(psi, {"psi": psi, "0": ZERO, "1": ONE, "+": PLUS, "-": MINUS}, config.n, config.g, grid, config.width)
    sweep_steps = [s for s in (config.n // 4, config.n // 2, config.n, 2 * config.n) if s > 0]
    sweep = coupling_sweep(psi, A, config.n * config.g, sweep_steps, grid, config.width) if config.n * config.g else None

    summary = {
        "state": state_to_json(psi),
        "observable": config.observable,
        "run": run.to_json(),
        "exact_expectation": expectation(A, psi),
        "tomography": {
            "operators": ["X", "Y", "Z"],
            "expectations": list(tomography.expectations),
            "total_survival": tomography.total_survival,
            "reconstructed": state_to_json(tomography.reconstructed),
            "fidelity": fidelity(tomography.reconstructed, psi),
        },
    }
    show_metrics(
        "Protective measurement",
        {
            "inferred <A>": run.inferred_expectation,
            "exact <A>": summary["exact_expectation"],
            "survival": run.survival_probability,
            "survival constant K": run.survival_constant,
            "tomography fidelity": summary["tomography"]["fidelity"],
        },
    )
    show_frame("Protective readings of |psi><psi|", signature)
    if sweep is not None:
        show_frame("Fixed n*g sweep", sweep)

    record = ExperimentRecord("protective", config.seed, config.echo(), summary)
    record = record.with_table("per_step", run.log_table()).with_table("signature", signature)
    if sweep is not None:
        record = record.with_table("sweep", sweep)
    if config.dump_joint:
        joint = couple_pointer(attach_pointer(psi, make_pointer(grid, config.width)), A, config.g)
        record = record.with_document("joint", joint_to_json(joint))
    return record
