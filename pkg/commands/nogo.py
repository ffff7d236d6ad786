from artifacts import ExperimentRecord
from commands import show_metrics
from hilbert import PLUS, ZERO, inner_product
from pbr import nogo_sweep


def run_nogo(config):
    frame = nogo_sweep(config.trials, ZERO, PLUS, config.device_dim, config.seed)
    summary = {
        "trials": config.trials,
        "device_dim": config.device_dim,
        "before": abs(inner_product(ZERO, PLUS)),
        "max_difference": float(frame["difference"].max()),
    }
    show_metrics("Overlap under device unitaries", {"|<0|+>|": summary["before"], "max |after - before|": summary["max_difference"]})
    return ExperimentRecord("nogo", config.seed, config.echo(), summary).with_table("nogo", frame)
