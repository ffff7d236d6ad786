import numpy as np
import pytest
from hypothesis import given

from conftest import seeds
from errors import DimensionMismatch, NotInformationallyComplete, NotPureError, PreconditionError, WraparoundError
from hilbert import (
    MINUS,
    ONE,
    PAULIS,
    PLUS,
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    ZERO,
    HermitianOperator,
    expectation,
    fidelity,
    haar_state,
    projector,
    qubit_state,
    random_hermitian,
    same_ray,
)
from protective import (
    SAMPLED,
    TomographySet,
    coupling_sweep,
    leak_ensemble,
    protection_leak,
    protective_measure,
    protective_signature,
    protective_tomography,
    reconstruct_state,
    spanning_operators,
    survivor_expectations,
)

PSI = qubit_state(np.pi / 6)


def test_protective_measure_reads_the_expectation():
    run = protective_measure(PSI, SIGMA_Z, n=400, g=5e-3)
    assert run.inferred_expectation == pytest.approx(0.5, abs=2e-3)
    assert run.survival_probability >= 0.99
    assert not run.aborted
    assert same_ray(run.final_state, PSI)
    assert list(run.log_table().columns) == ["step", "survival", "pointer_mean"]
    assert len(run.log_table()) == 400


def test_survival_decreases_monotonically():
    run = protective_measure(PSI, SIGMA_Z, n=50, g=0.05)
    survivals = run.log_table().survival
    assert (np.diff(survivals) <= 0).all()
    assert survivals.iloc[-1] == pytest.approx(run.survival_probability)


def test_zero_steps_leave_the_pointer_alone():
    run = protective_measure(PSI, SIGMA_Z, n=0)
    assert run.pointer_mean_shift == pytest.approx(0.0, abs=1e-12)
    assert run.survival_probability == 1.0
    assert np.isnan(run.inferred_expectation)
    assert run.to_json()["inferred_expectation"] is None


def test_eigenstate_is_read_exactly():
    run = protective_measure(ONE, SIGMA_Z, n=100, g=0.01)
    assert run.inferred_expectation == pytest.approx(-1.0, abs=1e-9)
    assert run.survival_probability == pytest.approx(1.0, abs=1e-12)


def test_bias_is_quadratic_in_the_coupling():
    biases = [abs(protective_measure(PSI, SIGMA_Z, n=20, g=g).inferred_expectation - 0.5) for g in (0.04, 0.02)]
    order = np.log2(biases[0] / biases[1])
    assert 1.8 <= order <= 2.2


@given(seeds, seeds)
def test_weak_protection_tracks_random_expectations(state_seed, operator_seed):
    psi = haar_state(2, state_seed)
    A = random_hermitian(2, operator_seed)
    run = protective_measure(psi, A, n=40, g=5e-3)
    assert run.inferred_expectation == pytest.approx(expectation(A, psi), abs=1e-3)


def test_sampled_mode_aborts_consistently():
    aborted = 0
    for seed in range(200):
        run = protective_measure(PLUS, SIGMA_Z, n=3, g=2.0, mode=SAMPLED, seed=seed)
        if run.aborted:
            aborted += 1
            assert run.aborted_at == len(run.per_step_log) + 1
            assert run.final_state is None
    survival = protective_measure(PLUS, SIGMA_Z, n=3, g=2.0).survival_probability
    completed = 1 - aborted / 200
    assert abs(completed - survival) < 5 * np.sqrt(survival * (1 - survival) / 200)


def test_sampled_mode_is_reproducible():
    first = protective_measure(PLUS, SIGMA_Z, n=3, g=2.0, mode=SAMPLED, seed=17)
    second = protective_measure(PLUS, SIGMA_Z, n=3, g=2.0, mode=SAMPLED, seed=17)
    assert first.aborted_at == second.aborted_at
    assert first.pointer_mean_shift == second.pointer_mean_shift


def test_protective_measure_validation():
    with pytest.raises(WraparoundError):
        protective_measure(ZERO, SIGMA_Z, n=400, g=1.0)
    with pytest.raises(DimensionMismatch):
        protective_measure(ZERO, random_hermitian(3, 0))
    with pytest.raises(PreconditionError):
        protective_measure(ZERO, SIGMA_Z, n=-1)
    with pytest.raises(PreconditionError):
        protective_measure(ZERO, SIGMA_Z, mode="lazy")


def test_leak_from_plus_into_zero():
    leak = protection_leak(PLUS, ZERO, n=400, g=1e-4)
    assert leak.survival == pytest.approx(0.5, abs=1e-6)
    assert same_ray(leak.surviving_state, ZERO)


def test_leak_edge_cases():
    assert protection_leak(ZERO, ZERO, n=50, g=1e-3).survival == pytest.approx(1.0)
    orthogonal = protection_leak(ONE, ZERO, n=50, g=1e-3)
    assert orthogonal.survival == 0.0
    assert orthogonal.surviving_state is None
    with pytest.raises(PreconditionError):
        survivor_expectations(orthogonal, PAULIS)


def test_leak_survivors_report_the_protected_state():
    leak = protection_leak(qubit_state(0.5), ZERO, n=50, g=1e-3)
    values = survivor_expectations(leak, [SIGMA_X, SIGMA_Y, SIGMA_Z], n=50, g=1e-3)
    assert np.allclose(values, [0.0, 0.0, 1.0], atol=1e-6)


def test_leak_ensemble_fraction():
    ensemble = leak_ensemble(PLUS, ZERO, systems=10_000, n=20, g=1e-3, seed=5)
    assert ensemble.expected_fraction == pytest.approx(0.5, abs=1e-6)
    assert abs(ensemble.fraction - 0.5) < 5 * ensemble.standard_error
    again = leak_ensemble(PLUS, ZERO, systems=10_000, n=20, g=1e-3, seed=5)
    assert again.survivors == ensemble.survivors
    assert leak_ensemble(ONE, ZERO, systems=100, n=5, g=1e-3, seed=5).survivors == 0


def test_reconstruct_state_examples():
    assert same_ray(reconstruct_state(TomographySet(PAULIS, [0, 0, 1])), ZERO)
    assert same_ray(reconstruct_state(TomographySet(PAULIS, [1, 0, 0])), PLUS)
    assert same_ray(reconstruct_state(TomographySet(PAULIS, [-1, 0, 0])), MINUS)


@given(seeds)
def test_reconstruct_qutrit_from_exact_expectations(seed):
    psi = haar_state(3, seed)
    operators = spanning_operators(3)
    t = TomographySet(operators, [expectation(A, psi) for A in operators])
    assert fidelity(reconstruct_state(t), psi) >= 1 - 1e-9


def test_reconstruct_rejects_incomplete_or_mixed_data():
    with pytest.raises(NotInformationallyComplete):
        TomographySet([SIGMA_X, SIGMA_Z], [0, 1])
    with pytest.raises(PreconditionError):
        TomographySet(PAULIS, [0, 1])
    with pytest.raises(NotPureError):
        reconstruct_state(TomographySet(PAULIS, [0, 0, 0]))


def test_spanning_operators_for_a_qubit_are_the_paulis():
    operators = spanning_operators(2)
    assert [np.allclose(a.matrix, b.matrix) for a, b in zip(operators, (SIGMA_Z, SIGMA_X, SIGMA_Y))] == [True] * 3
    assert len(spanning_operators(3)) == 8


@pytest.mark.parametrize("psi", [ZERO, PLUS], ids=["zero", "plus"])
def test_tomography_of_axis_states(psi):
    result = protective_tomography(psi)
    assert fidelity(result.reconstructed, psi) >= 1 - 1e-6
    assert len(result.runs) == 3
    assert 0 < result.total_survival <= 1


def test_tomography_needs_a_spanning_set():
    with pytest.raises(NotInformationallyComplete):
        protective_tomography(PLUS, [SIGMA_X, projector(ZERO)])


@pytest.mark.slow
def test_tomography_of_random_qubits():
    rng = np.random.default_rng(99)
    for _ in range(50):
        psi = haar_state(2, rng)
        assert fidelity(protective_tomography(psi).reconstructed, psi) >= 1 - 1e-4


def test_signature_matches_overlaps():
    candidates = {"psi": PSI, "0": ZERO, "1": ONE, "+": PLUS}
    table = protective_signature(PSI, candidates, n=100, g=5e-3)
    assert list(table.columns) == ["candidate", "protective_value", "exact_value", "overlap_squared"]
    assert np.allclose(table.exact_value, table.overlap_squared)
    assert np.allclose(table.protective_value, table.exact_value, atol=1e-3)
    assert table.set_index("candidate").loc["psi", "protective_value"] == pytest.approx(1.0, abs=1e-9)


def test_fixed_total_coupling_sweep():
    rng = np.random.default_rng(7)
    sweep = ((10, 0.04), (20, 0.02), (40, 0.01))
    checked = 0
    while checked < 20:
        psi, A = haar_state(2, rng), random_hermitian(2, rng)
        runs = [protective_measure(psi, A, n=n, g=g) for n, g in sweep]
        survivals = [run.survival_probability for run in runs]
        for (n, g), run in zip(sweep, runs):
            assert run.survival_constant >= -1e-9
            assert run.survival_probability == pytest.approx(1 - n * g**2 * run.survival_constant, abs=1e-12)
        constants = [run.survival_constant for run in runs]
        if min(constants) > 1e-6:
            assert max(constants) / min(constants) < 1.5
        assert survivals[0] <= survivals[1] + 1e-12
        assert survivals[1] <= survivals[2] + 1e-12
        errors = [abs(run.inferred_expectation - expectation(A, psi)) for run in runs]
        if errors[-1] < 1e-10:
            continue
        order = np.polyfit(np.log([g for _, g in sweep]), np.log(errors), 1)[0]
        assert order >= 1
        checked += 1


def test_random_qubits_at_the_working_point():
    rng = np.random.default_rng(2024)
    for _ in range(20):
        psi = haar_state(2, rng)
        m = random_hermitian(2, rng).matrix
        A = HermitianOperator(m / np.max(np.abs(np.linalg.eigvalsh(m))))
        run = protective_measure(psi, A, n=400, g=5e-3)
        assert abs(run.inferred_expectation - expectation(A, psi)) < 2e-3
        assert run.survival_probability >= 0.99
        assert run.to_json()["survival_constant"] == pytest.approx(run.survival_constant)


def test_survival_constant_is_undefined_without_coupling():
    run = protective_measure(PSI, SIGMA_Z, n=0)
    assert np.isnan(run.survival_constant)
    assert run.to_json()["survival_constant"] is None


def test_coupling_sweep_table():
    sweep = coupling_sweep(PSI, SIGMA_Z, 0.4, [40, 10, 20, 20])
    assert list(sweep.columns) == ["n", "g", "inferred", "exact", "survival", "survival_constant"]
    assert sweep.n.tolist() == [10, 20, 40]
    assert np.allclose(sweep.n * sweep.g, 0.4)
    assert sweep.survival.is_monotonic_increasing
    errors = (sweep.inferred - sweep.exact).abs()
    assert errors.is_monotonic_decreasing
    with pytest.raises(PreconditionError):
        coupling_sweep(PSI, SIGMA_Z, 0.0, [10])
    with pytest.raises(PreconditionError):
        coupling_sweep(PSI, SIGMA_Z, 0.4, [0, 10])
