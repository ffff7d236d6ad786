import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import seeds
from errors import DegenerateInput, DimensionMismatch, PreconditionError, WraparoundError
from hilbert import (
    IDENTITY_2,
    ONE,
    PLUS,
    SIGMA_X,
    SIGMA_Z,
    ZERO,
    EigenDecomposition,
    eigendecompose,
    expectation,
    haar_state,
    random_hermitian,
    same_ray,
    tensor,
    tensor_operator,
)
from measurement import (
    JointSystemPointerState,
    PointerGrid,
    attach_pointer,
    born_probabilities,
    couple_pointer,
    default_grid,
    joint_to_json,
    make_pointer,
    pointer_marginal,
    pointer_position_mean,
    pointer_position_variance,
    reduced_system_state,
    sample_outcomes,
    strong_measure,
    substream,
    total_norm,
)
from pbr import pbr_basis

Z_BASIS = EigenDecomposition.from_basis((ZERO, ONE), (-1.0, 1.0))
GRID = PointerGrid(512, 0.05)


def test_born_probabilities_examples():
    assert np.allclose(born_probabilities(PLUS, Z_BASIS), [0.5, 0.5])
    assert np.allclose(born_probabilities(ONE, Z_BASIS), [0, 1])
    basis = pbr_basis()
    assert born_probabilities(tensor(ZERO, ZERO), basis.decomposition)[0] < 1e-30
    with pytest.raises(DimensionMismatch):
        born_probabilities(tensor(ZERO, ZERO), Z_BASIS)


def test_strong_measure_on_eigenstate():
    sample = strong_measure(ONE, Z_BASIS, seed=3)
    assert sample.eigenvalue == 1.0
    assert sample.probability == pytest.approx(1.0)
    assert same_ray(sample.collapsed, ONE)


def test_strong_measure_is_reproducible():
    first = [strong_measure(PLUS, Z_BASIS, np.random.default_rng(9)).outcome_index for _ in range(5)]
    assert len(set(first)) == 1
    rng_a, rng_b = np.random.default_rng(4), np.random.default_rng(4)
    assert [strong_measure(PLUS, Z_BASIS, rng_a).eigenvalue for _ in range(200)] == [
        strong_measure(PLUS, Z_BASIS, rng_b).eigenvalue for _ in range(200)
    ]


def test_strong_measure_matches_vectorized_sampling():
    rng = substream(11, "check")
    sequential = [strong_measure(PLUS, Z_BASIS, rng).outcome_index for _ in range(1000)]
    vectorized = sample_outcomes(born_probabilities(PLUS, Z_BASIS), substream(11, "check").random(1000))
    assert sequential == vectorized.tolist()


def test_plus_in_z_basis_frequencies():
    trials = 100_000
    outcomes = sample_outcomes(born_probabilities(PLUS, Z_BASIS), substream(1, "plus").random(trials))
    frequency = outcomes.mean()
    assert abs(frequency - 0.5) < 5 * np.sqrt(0.25 / trials)


@pytest.mark.parametrize("dim", [2, 3, 4])
def test_strong_measure_frequencies_follow_born(dim):
    trials = 20_000
    psi = haar_state(dim, dim)
    basis = eigendecompose(random_hermitian(dim, 10 + dim))
    rng = substream(dim, "strong")
    counts = np.bincount([strong_measure(psi, basis, rng).outcome_index for _ in range(trials)], minlength=dim)
    born = born_probabilities(psi, basis)
    assert np.all(np.abs(counts / trials - born) < 5 * np.sqrt(born * (1 - born) / trials) + 1e-12)


def test_strong_measure_collapses_onto_eigenspace():
    degenerate = eigendecompose(tensor_operator(SIGMA_Z, IDENTITY_2))
    state = haar_state(4, 2)
    sample = strong_measure(state, degenerate, seed=0)
    assert len(degenerate.eigenspaces()) == 2
    v = degenerate.vectors()[:, list(degenerate.eigenspaces()[sample.outcome_index][1])]
    expected = v @ (v.conj().T @ state.amplitudes)
    assert abs(np.vdot(expected, sample.collapsed.amplitudes)) ** 2 == pytest.approx(np.vdot(expected, expected).real)


def test_sample_outcomes_never_draws_zero_weight():
    probabilities = [0.0, 0.5, 0.0, 0.5]
    edges = np.array([0.0, 0.25, 0.5, 0.999999])
    assert set(sample_outcomes(probabilities, edges).tolist()) <= {1, 3}
    assert sample_outcomes([1e-25, 1.0], np.array([0.0]))[0] == 1
    with pytest.raises(DegenerateInput):
        sample_outcomes([0.0, 1e-30], np.array([0.5]))


def test_substreams_are_keyed():
    assert substream(3, "a").random() == substream(3, "a").random()
    assert substream(3, "a").random() != substream(3, "b").random()
    assert substream(3, "a").random() != substream(4, "a").random()


def test_make_pointer_examples():
    pointer = make_pointer(GRID, 1.0)
    joint = attach_pointer(ZERO, pointer)
    assert total_norm(joint) == pytest.approx(1.0, abs=1e-10)
    assert pointer_position_mean(joint) == pytest.approx(0.0, abs=1e-12)
    assert pointer_position_variance(joint) == pytest.approx(1.0, rel=1e-2)


def test_make_pointer_rejects_poor_grids():
    with pytest.raises(PreconditionError):
        make_pointer(GRID, 0.1)
    with pytest.raises(PreconditionError):
        make_pointer(PointerGrid(64, 0.05), 1.0)
    with pytest.raises(PreconditionError):
        PointerGrid(500, 0.05)


def test_default_grid_covers_forty_widths():
    grid = default_grid(0.5)
    assert grid.n_points == 512
    assert grid.extent == pytest.approx(20.0)


def test_coupling_translates_eigenstates():
    joint = attach_pointer(ONE, make_pointer(GRID, 1.0))
    shifted = couple_pointer(joint, SIGMA_Z, 0.3)
    assert pointer_position_mean(shifted) == pytest.approx(-0.3, abs=GRID.spacing / 100)
    assert total_norm(shifted) == pytest.approx(1.0, abs=1e-10)


def test_zero_coupling_is_identity():
    joint = attach_pointer(PLUS, make_pointer(GRID, 1.0))
    assert np.array_equal(couple_pointer(joint, SIGMA_X, 0.0).amplitudes, joint.amplitudes)


def test_superposition_splits_the_pointer():
    g = 2.0
    joint = couple_pointer(attach_pointer(PLUS, make_pointer(GRID, 1.0)), SIGMA_Z, g)
    x = GRID.positions()

    def gaussian(center):
        return np.exp(-((x - center) ** 2) / 2) / np.sqrt(2 * np.pi)

    assert np.max(np.abs(pointer_marginal(joint) - 0.5 * (gaussian(g) + gaussian(-g)))) < 1e-8


couplings = st.floats(min_value=-0.8, max_value=0.8)


@given(seeds, seeds, couplings, couplings)
def test_consecutive_couplings_add(state_seed, operator_seed, g1, g2):
    A = random_hermitian(2, operator_seed, scale=0.5)
    joint = attach_pointer(haar_state(2, state_seed), make_pointer(GRID, 1.0))
    twice = couple_pointer(couple_pointer(joint, A, g1), A, g2)
    assert np.max(np.abs(twice.amplitudes - couple_pointer(joint, A, g1 + g2).amplitudes)) < 1e-10


@given(seeds, seeds, couplings, st.integers(min_value=2, max_value=4))
def test_coupling_preserves_the_norm(state_seed, operator_seed, g, dim):
    joint = attach_pointer(haar_state(dim, state_seed), make_pointer(GRID, 1.0))
    coupled = couple_pointer(joint, random_hermitian(dim, operator_seed, scale=0.5), g)
    assert total_norm(coupled) == pytest.approx(total_norm(joint), abs=1e-10)


@given(seeds, seeds)
def test_unprotected_mean_shift_is_exact(state_seed, operator_seed):
    psi = haar_state(2, state_seed)
    A = random_hermitian(2, operator_seed)
    g = 0.5
    joint = couple_pointer(attach_pointer(psi, make_pointer(GRID, 1.0)), A, g)
    assert pointer_position_mean(joint) == pytest.approx(g * expectation(A, psi), abs=1e-8)


def test_wraparound_is_rejected():
    joint = attach_pointer(ZERO, make_pointer(GRID, 1.0))
    with pytest.raises(WraparoundError) as info:
        couple_pointer(joint, SIGMA_Z, 7.0)
    assert info.value.extent == pytest.approx(GRID.extent)


def test_couple_pointer_dimension_check():
    joint = attach_pointer(ZERO, make_pointer(GRID, 1.0))
    with pytest.raises(DimensionMismatch):
        couple_pointer(joint, random_hermitian(3, 0), 0.1)


def test_joint_state_validation():
    with pytest.raises(PreconditionError):
        JointSystemPointerState(GRID, np.ones((2, GRID.n_points)))
    with pytest.raises(PreconditionError):
        JointSystemPointerState(GRID, np.ones(GRID.n_points))


def test_reduced_state_of_product():
    joint = couple_pointer(attach_pointer(ONE, make_pointer(GRID, 1.0)), SIGMA_Z, 0.5)
    state, weight = reduced_system_state(joint)
    assert same_ray(state, ONE)
    assert weight == pytest.approx(1.0)


def test_joint_dump_has_grid_and_amplitudes():
    grid = PointerGrid(128, 0.25)
    joint = attach_pointer(PLUS, make_pointer(grid, 1.0))
    data = joint_to_json(joint)
    assert data["grid"] == {"n_points": 128, "spacing": 0.25, "center": 0.0}
    assert data["system_dim"] == 2
    assert np.array(data["re"]).shape == (2, 128)
