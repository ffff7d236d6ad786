import numpy as np

from artifacts import ExperimentRecord
from commands import show_metrics
from measurement import default_grid
from weak import gaussian_wavefunction, scan_table, zero_momentum_component


def run_scan(config):
    grid = default_grid(config.width, config.grid_points)
    psi = gaussian_wavefunction(grid, config.width, momentum=config.momentum)
    table = scan_table(psi)
    error = np.hypot(table["re_scan"] - table["re_psi_true"], table["im_scan"] - table["im_psi_true"])
    component = zero_momentum_component(psi)
    summary = {
        "grid": grid.to_json(),
        "width": config.width,
        "momentum": config.momentum,
        "max_error": float(error.max()),
        "zero_momentum_component": {"re": component.real, "im": component.imag},
    }
    show_metrics("Direct wavefunction scan", {"grid points": grid.n_points, "max |scan - psi|": summary["max_error"]})
    return ExperimentRecord("scan", config.seed, config.echo(), summary).with_table("scan", table)
