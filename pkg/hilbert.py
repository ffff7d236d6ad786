"""Finite-dimensional state vectors and Hermitian operators.

Tensor products use the row-major convention: the leftmost factor is the most
significant index, so |a>|b> has amplitude a[i] * b[j] at position i * dim(b) + j.
States that differ by a global phase are compared with ``same_ray``, never
componentwise.
"""
import logging

import numpy as np
from attrs import field, frozen
from scipy.stats import unitary_group

from errors import ConsistencyError, DimensionMismatch, PreconditionError

log = logging.getLogger(__name__)

NORM_TOL = 1e-12
HERMITIAN_TOL = 1e-12
EIGEN_TOL = 1e-10
IMAG_DISCARD_TOL = 1e-12
IMAG_FAIL_TOL = 1e-10
PHASE_TOL = 1e-10
MAX_DIM = 4096


def _readonly(values, ndim):
    arr = np.array(values, dtype=np.complex128)
    if arr.ndim != ndim:
        raise PreconditionError(f"expected a {ndim}-d array, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


def _vector(values):
    return _readonly(values, 1)


def _matrix(values):
    return _readonly(values, 2)


@frozen(eq=False)
class StateVector:
    amplitudes: np.ndarray = field(converter=_vector)

    def __attrs_post_init__(self):
        dim = self.amplitudes.shape[0]
        if dim < 1 or dim > MAX_DIM:
            raise PreconditionError(f"state dimension {dim} outside [1, {MAX_DIM}]")
        norm = float(np.vdot(self.amplitudes, self.amplitudes).real)
        if abs(norm - 1.0) > NORM_TOL:
            raise PreconditionError(f"state is not normalized: <psi|psi> = {norm!r}")

    @property
    def dim(self):
        return self.amplitudes.shape[0]

    @classmethod
    def from_unnormalized(cls, values):
        arr = np.asarray(values, dtype=np.complex128)
        norm = np.linalg.norm(arr)
        if norm == 0:
            raise PreconditionError("cannot normalize the zero vector")
        return cls(arr / norm)

    def __repr__(self):
        return f"StateVector(dim={self.dim}, amplitudes={np.round(self.amplitudes, 6).tolist()})"


@frozen(eq=False)
class HermitianOperator:
    matrix: np.ndarray = field(converter=_matrix)

    def __attrs_post_init__(self):
        m = self.matrix
        if m.shape[0] != m.shape[1]:
            raise PreconditionError(f"operator must be square, got shape {m.shape}")
        if m.shape[0] < 1 or m.shape[0] > MAX_DIM:
            raise PreconditionError(f"operator dimension {m.shape[0]} outside [1, {MAX_DIM}]")
        deviation = float(np.max(np.abs(m - m.conj().T)))
        if deviation > HERMITIAN_TOL:
            raise PreconditionError(f"operator is not Hermitian: max |A - A^H| = {deviation:.3e}")
        # store the exactly Hermitian part
        exact = (m + m.conj().T) / 2
        exact.setflags(write=False)
        object.__setattr__(self, "matrix", exact)

    @property
    def dim(self):
        return self.matrix.shape[0]

    def __add__(self, other):
        return HermitianOperator(self.matrix + other.matrix)

    def __rmul__(self, scalar):
        if np.iscomplexobj(scalar) and np.imag(scalar) != 0:
            raise PreconditionError("Hermitian operators only scale by real numbers")
        return HermitianOperator(float(np.real(scalar)) * self.matrix)


@frozen(eq=False)
class EigenDecomposition:
    """Ascending real eigenvalues with an orthonormal eigenvector list."""

    eigenvalues: np.ndarray
    eigenvectors: tuple

    @classmethod
    def from_basis(cls, states, eigenvalues=None):
        """Measurement basis given directly as orthonormal states (nondegenerate)."""
        states = tuple(states)
        if eigenvalues is None:
            eigenvalues = np.arange(1, len(states) + 1, dtype=float)
        eigenvalues = np.asarray(eigenvalues, dtype=float)
        if np.any(np.diff(eigenvalues) < 0):
            raise PreconditionError("eigenvalues must be ascending")
        gram = np.array([[inner_product(a, b) for b in states] for a in states])
        deviation = float(np.max(np.abs(gram - np.eye(len(states)))))
        if deviation > EIGEN_TOL:
            raise PreconditionError(f"basis is not orthonormal: max deviation {deviation:.3e}")
        return cls(eigenvalues, states)

    @property
    def dim(self):
        return self.eigenvectors[0].dim

    def vectors(self):
        return np.column_stack([v.amplitudes for v in self.eigenvectors])

    def reconstruct(self):
        v = self.vectors()
        return (v * self.eigenvalues) @ v.conj().T

    def eigenspaces(self, tol=EIGEN_TOL):
        groups = []
        for i, value in enumerate(self.eigenvalues):
            if groups and abs(value - groups[-1][0]) <= tol:
                groups[-1][1].append(i)
            else:
                groups.append((float(value), [i]))
        return [(value, tuple(indices)) for value, indices in groups]


def _check_dims(a, b):
    if a.dim != b.dim:
        raise DimensionMismatch(f"dimension mismatch: {a.dim} vs {b.dim}")


def inner_product(a, b):
    # conjugate-linear in a
    _check_dims(a, b)
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def tensor(a, b):
    return StateVector(np.kron(a.amplitudes, b.amplitudes))


def tensor_operator(a, b):
    return HermitianOperator(np.kron(a.matrix, b.matrix))


def fidelity(a, b):
    return abs(inner_product(a, b)) ** 2


def same_ray(a, b, tol=PHASE_TOL):
    return abs(abs(inner_product(a, b)) - 1.0) < tol


def expectation(A, psi):
    """<psi|A|psi>; the imaginary residue is checked and then dropped."""
    _check_dims(A, psi)
    value = complex(np.vdot(psi.amplitudes, A.matrix @ psi.amplitudes))
    if abs(value.imag) >= IMAG_FAIL_TOL:
        raise ConsistencyError(f"expectation value has imaginary residue {value.imag:.3e}")
    if abs(value.imag) >= IMAG_DISCARD_TOL:
        log.debug("discarding imaginary residue %.3e in expectation", value.imag)
    return value.real


def projector(psi):
    return HermitianOperator(np.outer(psi.amplitudes, psi.amplitudes.conj()))


def eigendecompose(A):
    try:
        values, vectors = np.linalg.eigh(A.matrix)
    except np.linalg.LinAlgError as exc:
        raise ConsistencyError(f"eigensolver did not converge for matrix:\n{A.matrix!r}") from exc
    states = tuple(StateVector.from_unnormalized(vectors[:, i]) for i in range(vectors.shape[1]))
    decomposition = EigenDecomposition(values.astype(float), states)
    error = float(np.max(np.abs(decomposition.reconstruct() - A.matrix)))
    if error > EIGEN_TOL * max(1.0, float(np.max(np.abs(values)))):
        raise ConsistencyError(f"eigendecomposition reconstruction error {error:.3e} for matrix:\n{A.matrix!r}")
    return decomposition


def basis_state(index, dim):
    amplitudes = np.zeros(dim, dtype=np.complex128)
    amplitudes[index] = 1.0
    return StateVector(amplitudes)


ZERO = basis_state(0, 2)
ONE = basis_state(1, 2)
PLUS = StateVector(np.array([1.0, 1.0]) / np.sqrt(2))
MINUS = StateVector(np.array([1.0, -1.0]) / np.sqrt(2))

IDENTITY_2 = HermitianOperator(np.eye(2))
SIGMA_X = HermitianOperator([[0, 1], [1, 0]])
SIGMA_Y = HermitianOperator([[0, -1j], [1j, 0]])
SIGMA_Z = HermitianOperator([[1, 0], [0, -1]])
PAULIS = (SIGMA_X, SIGMA_Y, SIGMA_Z)


def qubit_state(theta, phi=0.0):
    """cos(theta)|0> + e^{i phi} sin(theta)|1>."""
    return StateVector([np.cos(theta), np.exp(1j * phi) * np.sin(theta)])


def haar_state(dim, rng):
    rng = np.random.default_rng(rng)
    return StateVector.from_unnormalized(rng.standard_normal(dim) + 1j * rng.standard_normal(dim))


def random_hermitian(dim, rng, scale=1.0):
    rng = np.random.default_rng(rng)
    m = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return HermitianOperator(scale * (m + m.conj().T) / 2)


def haar_unitary(dim, rng):
    rng = np.random.default_rng(rng)
    return unitary_group.rvs(dim, random_state=rng)


def unitarity_deviation(u):
    u = np.asarray(u, dtype=np.complex128)
    return float(np.linalg.norm(u.conj().T @ u - np.eye(u.shape[0])))


def is_unitary(u, tol=1e-10):
    u = np.asarray(u)
    return u.ndim == 2 and u.shape[0] == u.shape[1] and unitarity_deviation(u) <= tol


def hermitian_basis(dim):
    """Hilbert-Schmidt orthonormal basis of the d*d Hermitian matrices, identity direction first."""
    basis = [np.eye(dim, dtype=np.complex128) / np.sqrt(dim)]
    for k in range(1, dim):
        # traceless diagonal (generalized Gell-Mann)
        diag = np.zeros(dim)
        diag[:k] = 1.0
        diag[k] = -k
        basis.append(np.diag(diag / np.sqrt(k * (k + 1))).astype(np.complex128))
    for k in range(dim):
        for j in range(k + 1, dim):
            sym = np.zeros((dim, dim), dtype=np.complex128)
            sym[k, j] = sym[j, k] = 1 / np.sqrt(2)
            anti = np.zeros((dim, dim), dtype=np.complex128)
            anti[k, j] = -1j / np.sqrt(2)
            anti[j, k] = 1j / np.sqrt(2)
            basis.extend([sym, anti])
    return [HermitianOperator(m) for m in basis]


def state_to_json(psi):
    return {"dim": psi.dim, "re": psi.amplitudes.real.tolist(), "im": psi.amplitudes.imag.tolist()}


def state_from_json(data):
    amplitudes = np.asarray(data["re"], dtype=float) + 1j * np.asarray(data["im"], dtype=float)
    if amplitudes.shape != (data["dim"],):
        raise PreconditionError(f"state JSON declares dim {data['dim']} but carries {amplitudes.size} amplitudes")
    return StateVector(amplitudes)


def operator_to_json(A):
    flat = A.matrix.reshape(-1)
    return {"dim": A.dim, "re": flat.real.tolist(), "im": flat.imag.tolist()}


def operator_from_json(data):
    dim = data["dim"]
    flat = np.asarray(data["re"], dtype=float) + 1j * np.asarray(data["im"], dtype=float)
    if flat.size != dim * dim:
        raise PreconditionError(f"operator JSON declares dim {dim} but carries {flat.size} entries")
    return HermitianOperator(flat.reshape(dim, dim))
