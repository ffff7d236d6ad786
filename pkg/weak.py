"""Weak values with pre- and postselection, and the direct wavefunction scan.

On a grid the position projector becomes a cell projector carrying weight
1/spacing, and zero-momentum postselection is the uniform grid state.  With
that convention the scan of Psi equals Psi(x) / <p=0|Psi> point by point.
"""
import logging

import numpy as np
import pandas as pd
from attrs import field, frozen

from errors import ConsistencyError, DimensionMismatch, PostselectionError, PreconditionError, ScanUndefined, UndefinedWeakValue
from hilbert import HermitianOperator, StateVector, inner_product, same_ray
from measurement import JOINT_NORM_TOL, PointerGrid, attach_pointer, couple_pointer, make_pointer

log = logging.getLogger(__name__)

OVERLAP_TOL = 1e-12
REAL_WEAK_VALUE_TOL = 1e-10
SCAN_MOMENTUM_TOL = 1e-10
MIN_POSTSELECTION = 1e-15


@frozen(eq=False)
class WeakValueResult:
    value: complex
    pre: StateVector
    post: StateVector
    overlap: complex


def _readonly(values):
    arr = np.array(values, dtype=np.complex128)
    arr.setflags(write=False)
    return arr


@frozen(eq=False)
class GridWavefunction:
    grid: PointerGrid
    amplitudes: np.ndarray = field(converter=_readonly)

    def __attrs_post_init__(self):
        if self.amplitudes.shape != (self.grid.n_points,):
            raise PreconditionError(f"wavefunction needs {self.grid.n_points} amplitudes, got {self.amplitudes.shape}")
        norm = float(np.sum(np.abs(self.amplitudes) ** 2) * self.grid.spacing)
        if abs(norm - 1.0) > JOINT_NORM_TOL:
            raise PreconditionError(f"wavefunction is not normalized: norm = {norm!r}")

    @classmethod
    def from_unnormalized(cls, grid, values):
        values = np.asarray(values, dtype=np.complex128)
        norm = np.sqrt(np.sum(np.abs(values) ** 2) * grid.spacing)
        if norm == 0:
            raise PreconditionError("cannot normalize a vanishing wavefunction")
        return cls(grid, values / norm)


def gaussian_wavefunction(grid, width, center=0.0, momentum=0.0):
    x = grid.positions()
    values = np.exp(-((x - center) ** 2) / (4 * width**2) + 1j * momentum * x)
    return GridWavefunction.from_unnormalized(grid, values)


def weak_value(A, pre, post):
    if not (A.dim == pre.dim == post.dim):
        raise DimensionMismatch(f"dimension mismatch: operator {A.dim}, pre {pre.dim}, post {post.dim}")
    overlap = inner_product(post, pre)
    if abs(overlap) <= OVERLAP_TOL:
        raise UndefinedWeakValue(abs(overlap))
    value = complex(np.vdot(post.amplitudes, A.matrix @ pre.amplitudes)) / overlap
    if same_ray(pre, post) and abs(value.imag) >= REAL_WEAK_VALUE_TOL:
        raise ConsistencyError(f"weak value with equal pre/post has imaginary part {value.imag:.3e}")
    return WeakValueResult(value, pre, post, overlap)


def zero_momentum_state(grid):
    return StateVector(np.full(grid.n_points, 1 / np.sqrt(grid.n_points)))


def grid_state(psi):
    """Normalized vector of cell amplitudes Psi(x) * sqrt(spacing)."""
    return StateVector.from_unnormalized(psi.amplitudes * np.sqrt(psi.grid.spacing))


def cell_projector(grid, index):
    m = np.zeros((grid.n_points, grid.n_points))
    m[index, index] = 1 / grid.spacing
    return HermitianOperator(m)


def zero_momentum_component(psi):
    return complex(np.sum(psi.amplitudes) * psi.grid.spacing)


def direct_wavefunction_scan(psi):
    """Weak values of every cell projector with postselection on p = 0."""
    component = zero_momentum_component(psi)
    if abs(component) <= SCAN_MOMENTUM_TOL:
        raise ScanUndefined(f"wavefunction has no zero-momentum component: |<p=0|Psi>| = {abs(component):.3e}")
    pre = grid_state(psi).amplitudes
    post = zero_momentum_state(psi.grid).amplitudes
    overlap = np.vdot(post, pre)
    return post.conj() * pre / (overlap * psi.grid.spacing)


def recover_wavefunction(scan, grid):
    """Rescale a scan by a single constant to a normalized wavefunction.

    The constant is fixed by the norm and by making <p=0|Psi> real and
    positive, so inputs are recovered up to that phase convention.
    """
    scan = np.asarray(scan, dtype=np.complex128)
    component = np.sum(scan) * grid.spacing
    return GridWavefunction.from_unnormalized(grid, scan * np.conj(component) / abs(component))


def scan_table(psi, scan=None):
    scan = direct_wavefunction_scan(psi) if scan is None else scan
    recovered = recover_wavefunction(scan, psi.grid).amplitudes
    # express the input in the same phase convention
    component = zero_momentum_component(psi)
    truth = psi.amplitudes * np.conj(component) / abs(component)
    return pd.DataFrame(
        {
            "x": psi.grid.positions(),
            "re_scan": recovered.real,
            "im_scan": recovered.imag,
            "re_psi_true": truth.real,
            "im_psi_true": truth.imag,
        }
    )


def weak_pointer_shift(psi, A, post, g, grid, width):
    """Conditional pointer shift after one coupling and postselection on ``post``."""
    if abs(inner_product(post, psi)) <= OVERLAP_TOL:
        raise UndefinedWeakValue(abs(inner_product(post, psi)))
    joint = couple_pointer(attach_pointer(psi, make_pointer(grid, width)), A, g)
    conditional = post.amplitudes.conj() @ joint.amplitudes
    density = np.abs(conditional) ** 2
    probability = float(np.sum(density) * grid.spacing)
    if probability < MIN_POSTSELECTION:
        raise PostselectionError(f"postselection probability {probability:.3e} too small to condition on")
    mean = float(np.sum(grid.positions() * density) * grid.spacing) / probability
    return mean - grid.center, probability
