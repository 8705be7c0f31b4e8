"""Dense statevector simulation for small qubit registers.

Conventions, fixed across the package:

* Qubit 0 is the most significant bit of a basis-state index: in a
  register of ``n`` qubits, qubit ``q`` occupies bit ``n - 1 - q`` of
  the index, so ``basis_state(4, 5)`` is ``|0101>``.
* States carry unit 2-norm; measurements renormalize, and every
  operation is required to keep the norm within 1e-12.
* All randomness flows through an explicit ``numpy.random.Generator``
  (PCG64, from ``new_rng``).  A projective measurement consumes exactly
  one uniform draw, compared against cumulative Born probabilities, so
  any run is reproducible bit-for-bit from its seed.
* In the X basis, outcome bit 0 means ``|+>`` and bit 1 means ``|->``.

Registers are capped at 8 qubits; the protocol layers above never need
more (the largest system that occurs is a five-qubit carrier register
joined with a four-dimensional attack probe).
"""

from __future__ import annotations

import math
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

Rng = np.random.Generator

MAX_QUBITS = 8
NORM_ATOL = 1e-12
UNITARY_ATOL = 1e-10

SQRT1_2 = 1.0 / math.sqrt(2.0)

ID2 = np.array([[1, 0], [0, 1]], dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
I_SIGMA_Y = np.array([[0, 1], [-1, 0]], dtype=complex)  # |0><1| - |1><0|
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) * SQRT1_2


def new_rng(seed: int | np.random.SeedSequence | None) -> Rng:
    """Create the package's deterministic random generator (PCG64)."""
    return np.random.default_rng(seed)


class Basis(Enum):
    """Single-qubit measurement basis."""

    Z = "Z"
    X = "X"


class BellState(Enum):
    """The four Bell states of a qubit pair.

    The classical-bit encoding used throughout the protocol is
    phi+ -> 00, phi- -> 01, psi+ -> 10, psi- -> 11.
    """

    PHI_PLUS = "phi+"
    PHI_MINUS = "phi-"
    PSI_PLUS = "psi+"
    PSI_MINUS = "psi-"

    @property
    def index(self) -> int:
        return _BELL_INDEX[self]

    @property
    def bits(self) -> tuple[int, int]:
        i = self.index
        return (i >> 1, i & 1)

    @classmethod
    def from_bits(cls, high: int, low: int) -> "BellState":
        return _BELL_ORDER[(high << 1) | low]

    @classmethod
    def from_index(cls, index: int) -> "BellState":
        return _BELL_ORDER[index]

    @property
    def vector(self) -> np.ndarray:
        """Two-qubit amplitude vector (first qubit of the pair = MSB)."""
        return BELL_MATRIX[:, self.index].copy()


_BELL_ORDER = (
    BellState.PHI_PLUS,
    BellState.PHI_MINUS,
    BellState.PSI_PLUS,
    BellState.PSI_MINUS,
)
_BELL_INDEX = {b: i for i, b in enumerate(_BELL_ORDER)}

# Columns: phi+ = (|00>+|11>)/sqrt2, phi- = (|00>-|11>)/sqrt2,
#          psi+ = (|01>+|10>)/sqrt2, psi- = (|01>-|10>)/sqrt2.
BELL_MATRIX = np.array(
    [
        [1, 1, 0, 0],
        [0, 0, 1, 1],
        [0, 0, 1, -1],
        [1, -1, 0, 0],
    ],
    dtype=complex,
) * SQRT1_2


class PauliCorrection(Enum):
    """Single-qubit recovery operation applied by the receiver."""

    I = "I"
    X = "sigma_x"
    IY = "i_sigma_y"
    Z = "sigma_z"

    @property
    def matrix(self) -> np.ndarray:
        return _PAULI_MATRICES[self].copy()


_PAULI_MATRICES = {
    PauliCorrection.I: ID2,
    PauliCorrection.X: SIGMA_X,
    PauliCorrection.IY: I_SIGMA_Y,
    PauliCorrection.Z: SIGMA_Z,
}


class StateVector:
    """Immutable normalized amplitude vector over ``num_qubits`` qubits.

    Treat instances as read-only: operations return new states and may
    share no storage with their inputs.
    """

    __slots__ = ("num_qubits", "amps")

    def __init__(self, num_qubits: int, amplitudes: Iterable[complex], *, validate: bool = True):
        amps = np.asarray(amplitudes, dtype=complex)
        if validate:
            if not 1 <= num_qubits <= MAX_QUBITS:
                raise ValueError(f"num_qubits must be in 1..{MAX_QUBITS}, got {num_qubits}")
            if amps.shape != (1 << num_qubits,):
                raise ValueError(
                    f"amplitude vector has length {amps.size}, expected {1 << num_qubits}"
                )
            norm = float(np.sum(np.abs(amps) ** 2))
            if abs(norm - 1.0) > 1e-9:
                raise ValueError(f"state is not normalized: |amps|^2 = {norm}")
        self.num_qubits = num_qubits
        self.amps = amps

    @property
    def dim(self) -> int:
        return self.amps.size

    def norm_squared(self) -> float:
        return float(np.sum(np.abs(self.amps) ** 2))

    def probability(self, index: int) -> float:
        return float(np.abs(self.amps[index]) ** 2)

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"StateVector(num_qubits={self.num_qubits}, amps={np.round(self.amps, 6)!r})"


def _sv(num_qubits: int, amps: np.ndarray) -> StateVector:
    """Internal constructor that skips validation (hot path)."""
    return StateVector(num_qubits, amps, validate=False)


def basis_state(num_qubits: int, index: int) -> StateVector:
    """Computational basis state ``|index>`` under the MSB-first convention."""
    if not 1 <= num_qubits <= MAX_QUBITS:
        raise ValueError(f"num_qubits must be in 1..{MAX_QUBITS}, got {num_qubits}")
    if not 0 <= index < (1 << num_qubits):
        raise ValueError(f"basis index {index} out of range for {num_qubits} qubits")
    amps = np.zeros(1 << num_qubits, dtype=complex)
    amps[index] = 1.0
    return _sv(num_qubits, amps)


def from_amplitudes(amplitudes: Sequence[complex]) -> StateVector:
    """Build a state from an explicit amplitude vector (must be unit norm)."""
    amps = np.asarray(amplitudes, dtype=complex)
    n = int(round(math.log2(amps.size)))
    if 1 << n != amps.size:
        raise ValueError(f"amplitude vector length {amps.size} is not a power of two")
    return StateVector(n, amps)


def ket_zero() -> StateVector:
    return basis_state(1, 0)


def ket_one() -> StateVector:
    return basis_state(1, 1)


def ket_plus() -> StateVector:
    return _sv(1, np.array([SQRT1_2, SQRT1_2], dtype=complex))


def ket_minus() -> StateVector:
    return _sv(1, np.array([SQRT1_2, -SQRT1_2], dtype=complex))


def tensor(a: StateVector, b: StateVector) -> StateVector:
    """Kronecker product; ``a``'s qubits become the most significant ones."""
    n = a.num_qubits + b.num_qubits
    if n > MAX_QUBITS:
        raise ValueError(f"tensor product would need {n} qubits (max {MAX_QUBITS})")
    return _sv(n, np.kron(a.amps, b.amps))


def _check_targets(n: int, targets: Sequence[int]) -> None:
    if len(set(targets)) != len(targets):
        raise ValueError(f"target qubits must be distinct, got {list(targets)}")
    for q in targets:
        if not 0 <= q < n:
            raise ValueError(f"qubit {q} out of range for {n}-qubit state")


def is_unitary(matrix: np.ndarray, atol: float = UNITARY_ATOL) -> bool:
    m = np.asarray(matrix, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        return False
    return bool(np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0]))) <= atol)


def _qubit_view(amps: np.ndarray, n: int, qubit: int) -> np.ndarray:
    """No-copy view shaped (left, 2, right) with ``qubit`` on the middle axis."""
    return amps.reshape(1 << qubit, 2, 1 << (n - qubit - 1))


def _apply_1q(amps: np.ndarray, n: int, qubit: int, matrix: np.ndarray) -> np.ndarray:
    t = _qubit_view(amps, n, qubit)
    a0 = t[:, 0, :]
    a1 = t[:, 1, :]
    out = np.empty_like(t)
    out[:, 0, :] = matrix[0, 0] * a0 + matrix[0, 1] * a1
    out[:, 1, :] = matrix[1, 0] * a0 + matrix[1, 1] * a1
    return out.reshape(-1)


def apply_unitary(
    state: StateVector,
    targets: Sequence[int],
    matrix: np.ndarray,
    *,
    validate: bool = True,
) -> StateVector:
    """Apply ``matrix`` to the ordered ``targets``, identity elsewhere.

    ``targets[0]`` is the most significant bit of the matrix's index
    space.  ``matrix`` must be unitary within 1e-10.
    """
    n = state.num_qubits
    k = len(targets)
    matrix = np.asarray(matrix, dtype=complex)
    if validate:
        _check_targets(n, targets)
        if matrix.shape != (1 << k, 1 << k):
            raise ValueError(f"matrix shape {matrix.shape} does not act on {k} qubits")
        if not is_unitary(matrix):
            raise ValueError("matrix is not unitary within 1e-10")
    if k == 1:
        return _sv(n, _apply_1q(state.amps, n, targets[0], matrix))
    t = state.amps.reshape((2,) * n)
    t = np.moveaxis(t, targets, range(k))
    block = t.reshape(1 << k, -1)
    block = matrix @ block
    t = block.reshape((2,) * n)
    t = np.moveaxis(t, range(k), targets)
    return _sv(n, np.ascontiguousarray(t).reshape(-1))


def z_probabilities(state: StateVector, qubit: int) -> tuple[float, float]:
    """Born probabilities (p0, p1) for a Z measurement of one qubit."""
    t = _qubit_view(state.amps, state.num_qubits, qubit)
    p0 = float(np.sum(t[:, 0, :].real ** 2 + t[:, 0, :].imag ** 2))
    p1 = float(np.sum(t[:, 1, :].real ** 2 + t[:, 1, :].imag ** 2))
    return p0, p1


def _sumsq(block: np.ndarray) -> float:
    return float(np.sum(block.real**2 + block.imag**2))


def _basis_components(state: StateVector, qubit: int, basis: Basis) -> tuple[np.ndarray, np.ndarray]:
    """Component blocks of the state along ``qubit`` in the given basis."""
    t = _qubit_view(state.amps, state.num_qubits, qubit)
    a0 = t[:, 0, :]
    a1 = t[:, 1, :]
    if basis is Basis.Z:
        return a0, a1
    return (a0 + a1) * SQRT1_2, (a0 - a1) * SQRT1_2


def _compose_collapsed(
    state: StateVector, qubit: int, basis: Basis, outcome: int, component: np.ndarray, prob: float
) -> StateVector:
    """Rebuild the full collapsed state from the surviving component block."""
    n = state.num_qubits
    v = component * (1.0 / math.sqrt(prob))
    out = np.zeros((component.shape[0], 2, component.shape[1]), dtype=complex)
    if basis is Basis.Z:
        out[:, outcome, :] = v
    else:
        out[:, 0, :] = v * SQRT1_2
        out[:, 1, :] = v * (SQRT1_2 if outcome == 0 else -SQRT1_2)
    return _sv(n, out.reshape(-1))


def postselect(state: StateVector, qubit: int, basis: Basis, outcome: int) -> tuple[float, StateVector | None]:
    """Probability of ``outcome`` and the renormalized projected state.

    Returns ``(prob, None)`` when the outcome has (numerically) zero
    probability.  Deterministic; used by oracles to force branches.
    """
    _check_targets(state.num_qubits, [qubit])
    if outcome not in (0, 1):
        raise ValueError(f"outcome must be 0 or 1, got {outcome}")
    c0, c1 = _basis_components(state, qubit, basis)
    component = (c0, c1)[outcome]
    prob = _sumsq(component)
    if prob < 1e-15:
        return prob, None
    return prob, _compose_collapsed(state, qubit, basis, outcome, component, prob)


def measure(state: StateVector, qubit: int, basis: Basis, rng: Rng) -> tuple[int, StateVector]:
    """Projective single-qubit measurement in the Z or X basis.

    Samples via a single uniform draw against the cumulative Born
    probabilities and returns ``(bit, collapsed_state)``.  In the X
    basis, bit 0 corresponds to ``|+>`` and bit 1 to ``|->``.
    """
    _check_targets(state.num_qubits, [qubit])
    c0, c1 = _basis_components(state, qubit, basis)
    p0 = _sumsq(c0)
    outcome = 0 if rng.random() < p0 else 1
    component = (c0, c1)[outcome]
    prob = p0 if outcome == 0 else _sumsq(c1)
    return outcome, _compose_collapsed(state, qubit, basis, outcome, component, prob)


def _pair_shape(n: int, qubit_a: int, qubit_b: int) -> tuple[tuple[int, int, int], tuple, tuple]:
    """Reshape geometry and (forward, inverse) axis permutations for a pair."""
    lo, hi = (qubit_a, qubit_b) if qubit_a < qubit_b else (qubit_b, qubit_a)
    dims = (1 << lo, 1 << (hi - lo - 1), 1 << (n - hi - 1))
    if qubit_a < qubit_b:
        return dims, (1, 3, 0, 2, 4), (2, 0, 3, 1, 4)
    return dims, (3, 1, 0, 2, 4), (2, 1, 3, 0, 4)


def _bell_components(state: StateVector, qubit_a: int, qubit_b: int) -> np.ndarray:
    """Amplitudes of the pair (a, b) in the Bell basis: a 4 x rest block."""
    (da, db, dc), forward, _ = _pair_shape(state.num_qubits, qubit_a, qubit_b)
    t = state.amps.reshape(da, 2, db, 2, dc).transpose(forward).reshape(4, -1)
    return BELL_MATRIX.conj().T @ t


def _bell_collapse(
    state: StateVector, qubit_a: int, qubit_b: int, components: np.ndarray, index: int, prob: float
) -> StateVector:
    n = state.num_qubits
    (da, db, dc), _, inverse = _pair_shape(n, qubit_a, qubit_b)
    block = np.outer(BELL_MATRIX[:, index], components[index] / math.sqrt(prob))
    t = block.reshape(2, 2, da, db, dc).transpose(inverse)
    return _sv(n, np.ascontiguousarray(t).reshape(-1))


def bell_probabilities(state: StateVector, qubit_a: int, qubit_b: int) -> np.ndarray:
    """Born probabilities of the four Bell outcomes on a qubit pair."""
    _check_targets(state.num_qubits, [qubit_a, qubit_b])
    comp = _bell_components(state, qubit_a, qubit_b)
    return np.sum(np.abs(comp) ** 2, axis=1)


def postselect_bell(
    state: StateVector, qubit_a: int, qubit_b: int, outcome: BellState
) -> tuple[float, StateVector | None]:
    """Probability of a Bell outcome on (a, b) and the projected state."""
    _check_targets(state.num_qubits, [qubit_a, qubit_b])
    comp = _bell_components(state, qubit_a, qubit_b)
    probs = np.sum(np.abs(comp) ** 2, axis=1)
    prob = float(probs[outcome.index])
    if prob < 1e-15:
        return prob, None
    return prob, _bell_collapse(state, qubit_a, qubit_b, comp, outcome.index, prob)


def measure_bell(state: StateVector, qubit_a: int, qubit_b: int, rng: Rng) -> tuple[BellState, StateVector]:
    """Projective measurement of a qubit pair in the Bell basis."""
    _check_targets(state.num_qubits, [qubit_a, qubit_b])
    comp = _bell_components(state, qubit_a, qubit_b)
    probs = np.sum(np.abs(comp) ** 2, axis=1)
    u = rng.random()
    acc = 0.0
    index = 3
    for i in range(4):
        acc += probs[i]
        if u < acc:
            index = i
            break
    outcome = BellState.from_index(index)
    return outcome, _bell_collapse(state, qubit_a, qubit_b, comp, index, float(probs[index]))


def fidelity_up_to_phase(a: StateVector, b: StateVector) -> float:
    """|<a|b>|^2 — equality predicate that ignores global phase."""
    if a.num_qubits != b.num_qubits:
        raise ValueError(
            f"dimension mismatch: {a.num_qubits} vs {b.num_qubits} qubits"
        )
    return float(abs(np.vdot(a.amps, b.amps)) ** 2)


def overlap(a: StateVector, b: StateVector) -> complex:
    """Inner product <a|b> (phase-sensitive; oracles use it to report phases)."""
    if a.num_qubits != b.num_qubits:
        raise ValueError(
            f"dimension mismatch: {a.num_qubits} vs {b.num_qubits} qubits"
        )
    return complex(np.vdot(a.amps, b.amps))
