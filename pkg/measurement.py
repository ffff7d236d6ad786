"""Born-rule sampling and the von Neumann pointer coupling on a periodic grid.

The pointer is a Gaussian wavepacket on ``PointerGrid``.  Coupling implements
exp(-i g A (x) p) exactly (hbar = 1): in the eigenbasis of A each component's
pointer wavefunction is translated by g * a, the translation being a phase
multiplication in the discrete Fourier basis.
"""
import hashlib
import logging

import numpy as np
from attrs import field, frozen

from errors import DegenerateInput, DimensionMismatch, PreconditionError, WraparoundError
from hilbert import MAX_DIM, StateVector, eigendecompose

log = logging.getLogger(__name__)

JOINT_NORM_TOL = 1e-10
BORN_SUM_TOL = 1e-12
ZERO_PROBABILITY = 1e-20
MIN_GRID_POINTS = 16
EXTENT_PER_WIDTH = 20
DEFAULT_GRID_POINTS = 512
DEFAULT_EXTENT_WIDTHS = 40


def _power_of_two(instance, attribute, value):
    if value < MIN_GRID_POINTS or value & (value - 1):
        raise PreconditionError(f"n_points must be a power of two >= {MIN_GRID_POINTS}, got {value}")


def _positive(instance, attribute, value):
    if not value > 0:
        raise PreconditionError(f"{attribute.name} must be positive, got {value}")


@frozen
class PointerGrid:
    n_points: int = field(validator=_power_of_two)
    spacing: float = field(validator=_positive)
    center: float = 0.0

    @property
    def extent(self):
        return self.n_points * self.spacing

    def positions(self):
        return self.center + (np.arange(self.n_points) - self.n_points // 2) * self.spacing

    def momenta(self):
        return 2 * np.pi * np.fft.fftfreq(self.n_points, d=self.spacing)

    def to_json(self):
        return {"n_points": self.n_points, "spacing": self.spacing, "center": self.center}


def default_grid(width=1.0, n_points=DEFAULT_GRID_POINTS, center=0.0):
    return PointerGrid(n_points, DEFAULT_EXTENT_WIDTHS * width / n_points, center)


def _readonly_array(values):
    arr = np.array(values, dtype=np.complex128)
    arr.setflags(write=False)
    return arr


@frozen(eq=False)
class PointerState:
    grid: PointerGrid
    amplitudes: np.ndarray = field(converter=_readonly_array)
    width: float


@frozen(eq=False)
class JointSystemPointerState:
    grid: PointerGrid
    amplitudes: np.ndarray = field(converter=_readonly_array)

    def __attrs_post_init__(self):
        if self.amplitudes.ndim != 2 or self.amplitudes.shape[1] != self.grid.n_points:
            raise PreconditionError(f"joint amplitudes must be (system_dim, {self.grid.n_points}), got {self.amplitudes.shape}")
        if self.amplitudes.size > MAX_DIM:
            raise PreconditionError(f"joint dimension {self.amplitudes.size} exceeds {MAX_DIM}")
        norm = total_norm(self)
        if abs(norm - 1.0) > JOINT_NORM_TOL:
            raise PreconditionError(f"joint state is not normalized: norm = {norm!r}")

    @property
    def system_dim(self):
        return self.amplitudes.shape[0]


@frozen(eq=False)
class OutcomeSample:
    eigenvalue: float
    outcome_index: int
    collapsed: StateVector
    probability: float


def total_norm(joint):
    return float(np.sum(np.abs(joint.amplitudes) ** 2) * joint.grid.spacing)


def make_pointer(grid, width):
    """Gaussian ready state whose position density has standard deviation ``width``."""
    if width < 4 * grid.spacing:
        raise PreconditionError(f"pointer width {width} under-resolved by grid spacing {grid.spacing} (need >= 4 spacings)")
    if grid.extent < EXTENT_PER_WIDTH * width:
        raise PreconditionError(f"grid extent {grid.extent} is below {EXTENT_PER_WIDTH} pointer widths ({EXTENT_PER_WIDTH * width})")
    x = grid.positions() - grid.center
    amplitudes = np.exp(-(x**2) / (4 * width**2)).astype(np.complex128)
    amplitudes /= np.sqrt(np.sum(np.abs(amplitudes) ** 2) * grid.spacing)
    return PointerState(grid, amplitudes, width)


def attach_pointer(psi, pointer):
    """psi (x) chi as a joint amplitude array indexed [system, x]."""
    return JointSystemPointerState(pointer.grid, np.outer(psi.amplitudes, pointer.amplitudes))


def couple_pointer(joint, A, g, decomposition=None):
    if A.dim != joint.system_dim:
        raise DimensionMismatch(f"operator dim {A.dim} does not match system dim {joint.system_dim}")
    decomposition = decomposition or eigendecompose(A)
    max_shift = abs(g) * float(np.max(np.abs(decomposition.eigenvalues)))
    if max_shift > joint.grid.extent / 4:
        raise WraparoundError(4 * max_shift, joint.grid.extent)
    if g == 0:
        return joint
    v = decomposition.vectors()
    spectrum = np.fft.fft(v.conj().T @ joint.amplitudes, axis=1)
    spectrum *= np.exp(-1j * np.outer(g * decomposition.eigenvalues, joint.grid.momenta()))
    shifted = v @ np.fft.ifft(spectrum, axis=1)
    return JointSystemPointerState(joint.grid, shifted)


def pointer_marginal(joint):
    return np.sum(np.abs(joint.amplitudes) ** 2, axis=0)


def pointer_position_mean(joint):
    density = pointer_marginal(joint)
    return float(np.sum(joint.grid.positions() * density) * joint.grid.spacing)


def pointer_position_variance(joint):
    density = pointer_marginal(joint)
    x = joint.grid.positions()
    mean = np.sum(x * density) * joint.grid.spacing
    return float(np.sum((x - mean) ** 2 * density) * joint.grid.spacing)


def reduced_system_state(joint):
    """Dominant Schmidt vector of the system factor and its weight (1 for a product state)."""
    u, s, _ = np.linalg.svd(joint.amplitudes, full_matrices=False)
    weight = float(s[0] ** 2 * joint.grid.spacing)
    return StateVector.from_unnormalized(u[:, 0]), weight


def joint_to_json(joint):
    return {
        "grid": joint.grid.to_json(),
        "system_dim": joint.system_dim,
        "re": joint.amplitudes.real.tolist(),
        "im": joint.amplitudes.imag.tolist(),
    }


def born_probabilities(psi, basis):
    if psi.dim != basis.dim:
        raise DimensionMismatch(f"state dim {psi.dim} does not match basis dim {basis.dim}")
    probabilities = np.abs(basis.vectors().conj().T @ psi.amplitudes) ** 2
    total = float(np.sum(probabilities))
    if abs(total - 1.0) > BORN_SUM_TOL:
        log.debug("Born probabilities sum to %r", total)
    return probabilities


def clean_probabilities(probabilities):
    p = np.array(probabilities, dtype=float)
    p[p < ZERO_PROBABILITY] = 0.0
    return p


def sample_outcomes(probabilities, uniforms):
    """Inverse-CDF sampling; one uniform per trial, zero-weight outcomes never drawn."""
    p = clean_probabilities(probabilities)
    cdf = np.cumsum(p)
    if cdf[-1] <= 0:
        raise DegenerateInput("all outcome probabilities are numerically zero")
    cdf /= cdf[-1]
    indices = np.searchsorted(cdf, uniforms, side="right")
    return np.minimum(indices, len(p) - 1)


def substream(seed, *key):
    spawn_key = tuple(k if isinstance(k, int) else int.from_bytes(hashlib.sha256(str(k).encode()).digest()[:4], "big") for k in key)
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy=seed, spawn_key=spawn_key)))


def as_generator(seed):
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def strong_measure(psi, basis, seed=None):
    rng = as_generator(seed)
    per_vector = born_probabilities(psi, basis)
    spaces = basis.eigenspaces()
    weights = np.array([per_vector[list(indices)].sum() for _, indices in spaces])
    index = int(sample_outcomes(weights, rng.random()))
    value, indices = spaces[index]
    v = basis.vectors()[:, list(indices)]
    collapsed = StateVector.from_unnormalized(v @ (v.conj().T @ psi.amplitudes))
    return OutcomeSample(value, index, collapsed, float(weights[index]))
