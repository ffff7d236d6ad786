import logging

import numpy as np
import pandas as pd
from attrs import frozen

from errors import ConsistencyError, DimensionMismatch, NonUnitaryError, PreconditionError
from hilbert import (
    EIGEN_TOL,
    MINUS,
    ONE,
    PLUS,
    ZERO,
    EigenDecomposition,
    HermitianOperator,
    StateVector,
    eigendecompose,
    haar_unitary,
    inner_product,
    projector,
    same_ray,
    tensor,
    tensor_operator,
    unitarity_deviation,
)
from measurement import born_probabilities, sample_outcomes, strong_measure, substream

log = logging.getLogger(__name__)

BASIS_TOL = 1e-12
UNITARY_TOL = 1e-10
PREPARATIONS = ("00", "0+", "+0", "++")
OUTCOMES = ("xi1", "xi2", "xi3", "xi4")
_KETS = {"0": ZERO, "1": ONE, "+": PLUS, "-": MINUS}


@frozen(eq=False)
class PbrBasis:
    states: tuple
    forbidden_map: dict
    preparations: dict

    @property
    def decomposition(self):
        return EigenDecomposition.from_basis(self.states)


@frozen(eq=False)
class PbrCounts:
    counts: dict
    trials: int
    seed: int
    mixture: tuple
    forbidden_map: dict

    def prepared(self, label):
        return int(self.counts[label].sum())

    def table(self):
        return pbr_contingency(self)

    def to_json(self):
        return {
            "trials": self.trials,
            "seed": self.seed,
            "mixture": list(self.mixture),
            "outcomes": list(OUTCOMES),
            "forbidden": {p: OUTCOMES[i] for p, i in self.forbidden_map.items()},
            "counts": {p: self.counts[p].tolist() for p in PREPARATIONS},
        }


@frozen(eq=False)
class SteeringResult:
    alice_outcome: float
    bob_conditional: StateVector
    bob_marginal_check: float
    branch_probabilities: tuple


@frozen
class OverlapCheck:
    before: float
    after: float


def _pair(label):
    return tensor(_KETS[label[0]], _KETS[label[1]])


def _superpose(*terms):
    return StateVector(sum(tensor(_KETS[a], _KETS[b]).amplitudes for a, b in terms) / np.sqrt(2))


def pbr_basis():
    states = (
        _superpose("01", "10"),
        _superpose("0-", "1+"),
        _superpose("+1", "-0"),
        _superpose("+-", "-+"),
    )
    vectors = np.column_stack([s.amplitudes for s in states])
    if np.max(np.abs(vectors.conj().T @ vectors - np.eye(4))) > BASIS_TOL:
        raise ConsistencyError("antidistinguishing basis is not orthonormal")
    if np.max(np.abs(vectors @ vectors.conj().T - np.eye(4))) > BASIS_TOL:
        raise ConsistencyError("antidistinguishing basis is not complete")
    preparations = {label: _pair(label) for label in PREPARATIONS}
    forbidden = {}
    for label, prep in preparations.items():
        zeros = [i for i, xi in enumerate(states) if abs(inner_product(xi, prep)) < BASIS_TOL]
        if len(zeros) != 1:
            raise ConsistencyError(f"preparation {label} is orthogonal to {len(zeros)} basis states, expected 1")
        forbidden[label] = zeros[0]
    if sorted(forbidden.values()) != list(range(4)):
        raise ConsistencyError(f"forbidden outcomes do not form a permutation: {forbidden}")
    return PbrBasis(states, forbidden, preparations)


def pbr_experiment(trials, mixture_weights=(0.25, 0.25, 0.25, 0.25), seed=0):
    """Sample preparations from the mixture and measure each pair in the xi basis.

    Trial i uses draw i of the preparation stream and draw i of the outcome
    stream derived from ``seed``.
    """
    weights = np.asarray(mixture_weights, dtype=float)
    if weights.shape != (4,) or np.any(weights < 0) or abs(weights.sum() - 1) > 1e-12:
        raise PreconditionError(f"mixture weights must be four non-negative numbers summing to 1, got {mixture_weights}")
    if trials < 0:
        raise PreconditionError(f"trial count must be non-negative, got {trials}")
    basis = pbr_basis()
    counts = {label: np.zeros(4, dtype=np.int64) for label in PREPARATIONS}
    if trials:
        chosen = sample_outcomes(weights, substream(seed, "pbr", "preparation").random(trials))
        draws = substream(seed, "pbr", "outcome").random(trials)
        decomposition = basis.decomposition
        for index, label in enumerate(PREPARATIONS):
            mask = chosen == index
            if not mask.any():
                continue
            born = born_probabilities(basis.preparations[label], decomposition)
            outcomes = sample_outcomes(born, draws[mask])
            counts[label] = np.bincount(outcomes, minlength=4).astype(np.int64)
    for label, index in basis.forbidden_map.items():
        if counts[label][index] != 0:
            raise ConsistencyError(f"forbidden outcome {OUTCOMES[index]} observed for preparation {label}")
    return PbrCounts(counts, trials, seed, tuple(float(w) for w in weights), dict(basis.forbidden_map))


def pbr_contingency(result):
    frame = pd.DataFrame([result.counts[p] for p in PREPARATIONS], index=list(PREPARATIONS), columns=list(OUTCOMES))
    frame.index.name = "preparation"
    return frame.reset_index()


def singlet():
    return StateVector((tensor(ZERO, ONE).amplitudes - tensor(ONE, ZERO).amplitudes) / np.sqrt(2))


def alice_observable(basis):
    """|1><1| - |0><0| for Z, |+><+| - |-><-| for X."""
    if basis == "Z":
        return HermitianOperator(projector(ONE).matrix - projector(ZERO).matrix)
    if basis == "X":
        return HermitianOperator(projector(PLUS).matrix - projector(MINUS).matrix)
    raise PreconditionError(f"Alice measures in Z or X, got {basis!r}")


def _bob_factor(pair):
    _, s, vh = np.linalg.svd(pair.amplitudes.reshape(2, 2))
    if s[1] > EIGEN_TOL:
        raise ConsistencyError("post-measurement state is not a product state")
    return StateVector.from_unnormalized(vh[0])


def _bob_average(decomposition, state):
    rho = np.zeros((2, 2), dtype=np.complex128)
    probabilities = []
    for value, indices in decomposition.eigenspaces():
        v = decomposition.vectors()[:, list(indices)]
        branch = v @ (v.conj().T @ state.amplitudes)
        weight = float(np.vdot(branch, branch).real)
        probabilities.append(weight)
        if weight > 0:
            bob = _bob_factor(StateVector(branch / np.sqrt(weight)))
            rho += weight * np.outer(bob.amplitudes, bob.amplitudes.conj())
    return rho, tuple(probabilities)


def epr_steering(alice_basis="Z", seed=0):
    state = singlet()
    decomposition = eigendecompose(tensor_operator(alice_observable(alice_basis), HermitianOperator(np.eye(2))))
    sample = strong_measure(state, decomposition, seed)
    rho, probabilities = _bob_average(decomposition, state)
    check = 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(rho - np.eye(2) / 2))))
    return SteeringResult(sample.eigenvalue, _bob_factor(sample.collapsed), check, probabilities)


def bob_label(bob):
    for label, ket in _KETS.items():
        if same_ray(bob, ket):
            return label
    return "?"


def steering_batch(alice_basis, trials, seed=0):
    """Counts of (Alice outcome, Bob's conditional state); trial i consumes draw i of the steering stream."""
    state = singlet()
    decomposition = eigendecompose(tensor_operator(alice_observable(alice_basis), HermitianOperator(np.eye(2))))
    rho, probabilities = _bob_average(decomposition, state)
    check = 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(rho - np.eye(2) / 2))))
    branches = []
    for value, indices in decomposition.eigenspaces():
        v = decomposition.vectors()[:, list(indices)]
        bob = _bob_factor(StateVector.from_unnormalized(v @ (v.conj().T @ state.amplitudes)))
        branches.append((int(round(value)), bob_label(bob)))
    outcomes = sample_outcomes(probabilities, substream(seed, "steer", alice_basis).random(trials))
    counts = np.bincount(outcomes, minlength=len(branches))
    frame = pd.DataFrame(
        [
            {"alice_basis": alice_basis, "alice_outcome": a, "bob_state": b, "probability": p, "count": int(c)}
            for (a, b), p, c in zip(branches, probabilities, counts)
        ],
        columns=["alice_basis", "alice_outcome", "bob_state", "probability", "count"],
    )
    return frame, check


def overlap_preservation_check(u, s1, s2, ready):
    u = np.asarray(u, dtype=np.complex128)
    if s1.dim != s2.dim:
        raise DimensionMismatch(f"system states differ in dimension: {s1.dim} vs {s2.dim}")
    joint_dim = ready.dim * s1.dim
    if u.shape != (joint_dim, joint_dim):
        raise DimensionMismatch(f"unitary shape {u.shape} does not act on device (x) system of dim {joint_dim}")
    deviation = unitarity_deviation(u)
    if deviation > UNITARY_TOL:
        raise NonUnitaryError(deviation)
    first = tensor(ready, s1).amplitudes
    second = tensor(ready, s2).amplitudes
    before = abs(np.vdot(first, second))
    after = abs(np.vdot(u @ first, u @ second))
    return OverlapCheck(float(before), float(after))


def nogo_sweep(trials, s1=ZERO, s2=PLUS, device_dim=2, seed=0):
    ready = StateVector(np.eye(device_dim)[0])
    rng = substream(seed, "nogo", device_dim, s1.dim)
    rows = []
    for trial in range(trials):
        check = overlap_preservation_check(haar_unitary(device_dim * s1.dim, rng), s1, s2, ready)
        rows.append({"trial": trial, "before": check.before, "after": check.after, "difference": abs(check.after - check.before)})
    return pd.DataFrame(rows, columns=["trial", "before", "after", "difference"])
