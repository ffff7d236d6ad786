"""Protective measurement: a weak measurement repeated on one protected system.

Protection is a projective measurement {|Psi><Psi|, 1 - |Psi><Psi|} applied
after every weak coupling.  In deterministic mode the joint state is
renormalized onto the success branch and the branch weights are multiplied
into the survival probability; in sampled mode a failed protection ends the
run.
"""
import logging

import numpy as np
import pandas as pd
from attrs import field, frozen

from errors import DimensionMismatch, NotInformationallyComplete, NotPureError, PreconditionError, WraparoundError
from hilbert import HermitianOperator, StateVector, eigendecompose, expectation, fidelity, hermitian_basis, inner_product, projector
from measurement import (
    JointSystemPointerState,
    as_generator,
    attach_pointer,
    couple_pointer,
    default_grid,
    make_pointer,
    pointer_position_mean,
    reduced_system_state,
)

log = logging.getLogger(__name__)

DETERMINISTIC = "deterministic"
SAMPLED = "sampled"
MIN_BRANCH_WEIGHT = 1e-15
PURITY_TOL = 1e-3
DEFAULT_STEPS = 400
DEFAULT_COUPLING = 5e-3


@frozen(eq=False)
class ProtectiveRunResult:
    steps: int
    coupling: float
    pointer_mean_shift: float
    survival_probability: float
    inferred_expectation: float
    per_step_log: tuple
    mode: str = DETERMINISTIC
    aborted: bool = False
    aborted_at: int | None = None
    final_state: StateVector | None = None

    @property
    def survival_constant(self):
        exposure = self.steps * self.coupling**2
        return (1 - self.survival_probability) / exposure if exposure else float("nan")

    def log_table(self):
        return pd.DataFrame(list(self.per_step_log), columns=["step", "survival", "pointer_mean"])

    def to_json(self):
        return {
            "steps": self.steps,
            "coupling": self.coupling,
            "mode": self.mode,
            "pointer_mean_shift": self.pointer_mean_shift,
            "survival_probability": self.survival_probability,
            "survival_constant": self.survival_constant if np.isfinite(self.survival_constant) else None,
            "inferred_expectation": self.inferred_expectation if np.isfinite(self.inferred_expectation) else None,
            "aborted": self.aborted,
            "aborted_at": self.aborted_at,
        }


@frozen(eq=False)
class LeakResult:
    survival: float
    surviving_state: StateVector | None
    run: ProtectiveRunResult


@frozen(eq=False)
class EnsembleLeak:
    systems: int
    survivors: int
    expected_fraction: float

    @property
    def fraction(self):
        return self.survivors / self.systems if self.systems else 0.0

    @property
    def standard_error(self):
        p = self.expected_fraction
        return float(np.sqrt(p * (1 - p) / self.systems)) if self.systems else 0.0


def _operator_tuple(values):
    return tuple(values)


def _expectation_array(values):
    arr = np.array(values, dtype=float)
    arr.setflags(write=False)
    return arr


@frozen(eq=False)
class TomographySet:
    operators: tuple = field(converter=_operator_tuple)
    expectations: np.ndarray = field(converter=_expectation_array)

    def __attrs_post_init__(self):
        if len(self.operators) != len(self.expectations):
            raise PreconditionError(f"{len(self.operators)} operators but {len(self.expectations)} expectation values")
        if not self.operators:
            raise NotInformationallyComplete("empty operator set")
        dim = self.operators[0].dim
        if any(op.dim != dim for op in self.operators):
            raise DimensionMismatch("tomography operators have mixed dimensions")
        rank = spanned_dimension(self.operators)
        if rank < dim * dim:
            raise NotInformationallyComplete(f"operators span {rank} of {dim * dim} Hermitian directions")

    @property
    def dim(self):
        return self.operators[0].dim


@frozen(eq=False)
class TomographyRun:
    reconstructed: StateVector
    total_survival: float
    expectations: tuple
    runs: tuple


def spanned_dimension(operators):
    """Real rank of the operators together with the identity (fixed by the trace)."""
    dim = operators[0].dim
    rows = [np.eye(dim).reshape(-1)] + [op.matrix.reshape(-1) for op in operators]
    real = np.array([np.concatenate([r.real, r.imag]) for r in rows])
    return int(np.linalg.matrix_rank(real, tol=1e-10))


def spanning_operators(dim):
    """Traceless generalized Gell-Mann set; the Pauli matrices for a qubit."""
    return [HermitianOperator(np.sqrt(2) * b.matrix) for b in hermitian_basis(dim)[1:]]


def _protect(joint, protected, A, steps, g, mode, rng):
    """Alternate weak coupling and protection; returns the final joint state and bookkeeping."""
    decomposition = eigendecompose(A)
    target = protected.amplitudes
    spacing = joint.grid.spacing
    survival = 1.0
    per_step = []
    for step in range(1, steps + 1):
        joint = couple_pointer(joint, A, g, decomposition)
        branch = target.conj() @ joint.amplitudes
        weight = min(1.0, float(np.sum(np.abs(branch) ** 2) * spacing))
        if weight < MIN_BRANCH_WEIGHT:
            log.debug("protection branch vanished at step %d (weight %.3e)", step, weight)
            return None, 0.0, tuple(per_step), step
        survival *= weight
        if mode == SAMPLED and rng.random() >= weight:
            log.debug("sampled protection failed at step %d", step)
            return joint, survival, tuple(per_step), step
        joint = JointSystemPointerState(joint.grid, np.outer(target, branch / np.sqrt(weight)))
        per_step.append((step, survival, pointer_position_mean(joint)))
    return joint, survival, tuple(per_step), None


def _check_total_shift(A, steps, g, grid):
    max_eigenvalue = float(np.max(np.abs(np.linalg.eigvalsh(A.matrix))))
    total = steps * abs(g) * max_eigenvalue
    if total > grid.extent / 4:
        raise WraparoundError(4 * total, grid.extent)


def _check_mode(mode):
    if mode not in (DETERMINISTIC, SAMPLED):
        raise PreconditionError(f"unknown protection mode {mode!r}")


def protective_measure(psi, A, n=DEFAULT_STEPS, g=DEFAULT_COUPLING, grid=None, width=1.0, mode=DETERMINISTIC, seed=None):
    if psi.dim != A.dim:
        raise DimensionMismatch(f"state dim {psi.dim} does not match operator dim {A.dim}")
    if n < 0:
        raise PreconditionError(f"step count must be non-negative, got {n}")
    _check_mode(mode)
    grid = grid or default_grid(width)
    _check_total_shift(A, n, g, grid)
    joint = attach_pointer(psi, make_pointer(grid, width))
    final, survival, per_step, stopped_at = _protect(joint, psi, A, n, g, mode, as_generator(seed))
    aborted = stopped_at is not None
    if final is None or (aborted and mode == SAMPLED):
        shift = per_step[-1][2] - grid.center if per_step else 0.0
        final_state = None
    else:
        shift = pointer_position_mean(final) - grid.center
        final_state = reduced_system_state(final)[0]
    inferred = shift / (n * g) if n * g != 0 else float("nan")
    log.debug("protective run: n=%d g=%g shift=%.6g survival=%.6g", n, g, shift, survival)
    return ProtectiveRunResult(
        steps=n,
        coupling=g,
        pointer_mean_shift=shift,
        survival_probability=survival,
        inferred_expectation=inferred,
        per_step_log=per_step,
        mode=mode,
        aborted=aborted,
        aborted_at=stopped_at,
        final_state=final_state,
    )


def protection_leak(prepared, protected_state, n=DEFAULT_STEPS, g=DEFAULT_COUPLING, grid=None, width=1.0, A=None):
    """Protect ``protected_state`` on a system prepared in ``prepared``.

    Without an explicit observable the protector itself is coupled, so
    survivors read 1 on it.
    """
    if prepared.dim != protected_state.dim:
        raise DimensionMismatch(f"prepared dim {prepared.dim} vs protected dim {protected_state.dim}")
    A = A if A is not None else projector(protected_state)
    grid = grid or default_grid(width)
    _check_total_shift(A, n, g, grid)
    joint = attach_pointer(prepared, make_pointer(grid, width))
    final, survival, per_step, stopped_at = _protect(joint, protected_state, A, n, g, DETERMINISTIC, None)
    if final is None:
        run = ProtectiveRunResult(n, g, 0.0, 0.0, float("nan"), per_step, aborted=True, aborted_at=stopped_at)
        return LeakResult(0.0, None, run)
    shift = pointer_position_mean(final) - grid.center
    surviving = reduced_system_state(final)[0]
    inferred = shift / (n * g) if n * g != 0 else float("nan")
    run = ProtectiveRunResult(n, g, shift, survival, inferred, per_step, final_state=surviving)
    return LeakResult(survival, surviving, run)


def leak_ensemble(prepared, protected_state, systems, n=DEFAULT_STEPS, g=DEFAULT_COUPLING, seed=None, grid=None, width=1.0, A=None):
    """Sampled protection over an ensemble; system i consumes draw i at every step."""
    leak = protection_leak(prepared, protected_state, n, g, grid, width, A)
    survivals = [1.0] + [entry[1] for entry in leak.run.per_step_log]
    if leak.surviving_state is None:
        return EnsembleLeak(systems, 0, 0.0)
    weights = np.divide(survivals[1:], survivals[:-1])
    rng = as_generator(seed)
    alive = np.ones(systems, dtype=bool)
    for weight in weights:
        alive &= rng.random(systems) < weight
    return EnsembleLeak(systems, int(alive.sum()), leak.survival)


def survivor_expectations(leak, operators, n=DEFAULT_STEPS, g=DEFAULT_COUPLING, grid=None, width=1.0):
    if leak.surviving_state is None:
        raise PreconditionError("no system survived the protection")
    return [protective_measure(leak.surviving_state, A, n, g, grid, width).inferred_expectation for A in operators]


def fit_density(t):
    """Least-squares density matrix matching the expectations, with unit trace."""
    basis = hermitian_basis(t.dim)
    rows = [[np.trace(op.matrix @ b.matrix).real for b in basis] for op in t.operators]
    rows.append([np.trace(b.matrix).real for b in basis])
    targets = np.append(t.expectations, 1.0)
    coefficients, *_ = np.linalg.lstsq(np.array(rows), targets, rcond=None)
    return sum(c * b.matrix for c, b in zip(coefficients, basis))


def reconstruct_state(t):
    rho = fit_density(t)
    values, vectors = np.linalg.eigh((rho + rho.conj().T) / 2)
    if values[-1] < 1 - PURITY_TOL:
        raise NotPureError(f"reconstructed density matrix is not pure: largest eigenvalue {values[-1]:.6f}")
    return StateVector.from_unnormalized(vectors[:, -1])


def protective_tomography(psi, operators=None, n=DEFAULT_STEPS, g=DEFAULT_COUPLING, grid=None, width=1.0):
    """Protectively measure each operator on one evolving system, then reconstruct it.

    A fresh pointer is used per observable; the system is carried over.
    """
    operators = list(operators) if operators is not None else spanning_operators(psi.dim)
    if spanned_dimension(operators) < psi.dim**2:
        raise NotInformationallyComplete(f"operators do not span the {psi.dim}-level Hermitian matrices")
    current = psi
    total_survival = 1.0
    runs = []
    for A in operators:
        run = protective_measure(current, A, n, g, grid, width)
        total_survival *= run.survival_probability
        current = run.final_state
        runs.append(run)
    expectations = tuple(run.inferred_expectation for run in runs)
    reconstructed = reconstruct_state(TomographySet(operators, expectations))
    log.debug("tomography fidelity %.12f", fidelity(reconstructed, psi))
    return TomographyRun(reconstructed, total_survival, expectations, tuple(runs))


def protective_signature(reference, candidates, n=DEFAULT_STEPS, g=DEFAULT_COUPLING, grid=None, width=1.0):
    """Protective readings of |ref><ref| on each candidate: 1 on the reference, |<ref|c>|^2 otherwise."""
    P = projector(reference)
    records = []
    for label, state in candidates.items():
        run = protective_measure(state, P, n, g, grid, width)
        records.append(
            {
                "candidate": label,
                "protective_value": run.inferred_expectation,
                "exact_value": expectation(P, state),
                "overlap_squared": abs(inner_product(reference, state)) ** 2,
            }
        )
    return pd.DataFrame(records)


def coupling_sweep(psi, A, total_coupling, steps, grid=None, width=1.0):
    # n*g is held fixed across the sweep
    if total_coupling == 0:
        raise PreconditionError("a coupling sweep needs a non-zero total coupling n*g")
    records = []
    for n in sorted(set(steps)):
        if n < 1:
            raise PreconditionError(f"sweep step counts must be positive, got {n}")
        run = protective_measure(psi, A, n, total_coupling / n, grid, width)
        records.append(
            {
                "n": n,
                "g": run.coupling,
                "inferred": run.inferred_expectation,
                "exact": expectation(A, psi),
                "survival": run.survival_probability,
                "survival_constant": run.survival_constant,
            }
        )
    return pd.DataFrame(records, columns=["n", "g", "inferred", "exact", "survival", "survival_constant"])
