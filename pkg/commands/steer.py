import pandas as pd

from artifacts import ExperimentRecord
from commands import show_frame
from measurement import substream
from pbr import bob_label, epr_steering, steering_batch


def run_steer(config):
    bases = ("Z", "X") if config.alice_basis == "both" else (config.alice_basis,)
    frames = []
    per_basis = {}
    for basis in bases:
        frame, check = steering_batch(basis, config.trials, config.seed)
        single = epr_steering(basis, substream(config.seed, "steer", basis, "example"))
        frames.append(frame)
        per_basis[basis] = {
            "marginal_trace_distance": check,
            "branch_probabilities": list(single.branch_probabilities),
            "example": {"alice_outcome": single.alice_outcome, "bob_state": bob_label(single.bob_conditional)},
        }
    table = pd.concat(frames, ignore_index=True)
    show_frame("Steering: Alice outcome -> Bob's state", table)
    summary = {"trials": config.trials, "bases": per_basis}
    return ExperimentRecord("steer", config.seed, config.echo(), summary).with_table("steering", table)
