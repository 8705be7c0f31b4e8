"""Channel adversaries: intercept-resend and entangle-measure probes.

Both adversaries expose ``intercept(qubit, rng)`` and are invoked once
per qubit crossing an attacked channel (forward leg).

The entangle-measure attacker couples a private probe to each transiting
qubit with a joint unitary E defined by its action on the computational
basis (probe started in a reference state |e>):

    E |0>|e> = a00 |0>|p00> + a01 |1>|p01>
    E |1>|e> = a10 |0>|p10> + a11 |1>|p11>

with |a00|^2 + |a01|^2 = |a10|^2 + |a11|^2 = 1.  Unitarity additionally
forces the two right-hand sides to be orthogonal; the constructor
validates this and completes E to a full unitary on (qubit x probe).

Such an attacker escapes decoy detection on all four decoy states if
and only if a01 = a10 = 0 and a00|p00> = a11|p11>; its probe then ends
in the same state regardless of the transmitted qubit, so measuring it
yields nothing.  ``expected_error_rates`` and ``probe_states`` make this
dichotomy computable exactly, and ``violation_norm`` measures how far a
parameter set is from the undetectable manifold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .registers import Qubit, apply_to_qubits, measure_qubit
from .statevec import (
    Basis,
    Rng,
    StateVector,
    _sv,
    apply_unitary,
    is_unitary,
    ket_minus,
    ket_plus,
    postselect,
    tensor,
)


class InterceptResend:
    """Measure each transiting qubit and resend the collapsed state.

    ``basis`` is ``"random"`` (fresh coin per qubit), ``"z"`` or ``"x"``.
    The random-basis attacker disturbs each decoy state with probability
    1/4 and produces the textbook 25% sifted error rate against BB84.
    """

    def __init__(self, basis: str = "random"):
        if basis not in ("random", "z", "x"):
            raise ValueError(f"basis must be 'random', 'z' or 'x', got {basis!r}")
        self.basis = basis

    def intercept(self, qubit: Qubit, rng: Rng) -> None:
        if self.basis == "random":
            choice = Basis.X if rng.integers(0, 2) else Basis.Z
        else:
            choice = Basis.X if self.basis == "x" else Basis.Z
        measure_qubit(qubit, choice, rng)  # collapse is the resend


def _as_probe_vector(v, dim: int) -> np.ndarray:
    vec = np.asarray(v, dtype=complex).reshape(-1)
    if vec.size > dim:
        raise ValueError(f"probe vector of dimension {vec.size} exceeds probe space {dim}")
    out = np.zeros(dim, dtype=complex)
    out[: vec.size] = vec
    return out


@dataclass(frozen=True)
class EveParams:
    """Parameters of an entangle-measure attack.

    ``alpha`` entries are the four coupling amplitudes (a00, a01, a10,
    a11); ``eps_*`` are the probe states they multiply, given in any
    dimension up to 4 (padded to the probe space).  The probe space
    dimension is the smallest power of two covering the given vectors.
    """

    alpha_00: complex
    alpha_01: complex
    alpha_10: complex
    alpha_11: complex
    eps_00: tuple[complex, ...]
    eps_01: tuple[complex, ...]
    eps_10: tuple[complex, ...]
    eps_11: tuple[complex, ...]
    _unitary: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        for name in ("alpha_00", "alpha_01", "alpha_10", "alpha_11"):
            object.__setattr__(self, name, complex(getattr(self, name)))
        raw = [self.eps_00, self.eps_01, self.eps_10, self.eps_11]
        dim = max(len(np.asarray(e).reshape(-1)) for e in raw)
        if dim > 4:
            raise ValueError(f"probe vectors of dimension {dim} > 4 are not supported")
        dim = 2 if dim <= 2 else 4
        vecs = [_as_probe_vector(e, dim) for e in raw]
        for label, vec, amp in zip(
            ("eps_00", "eps_01", "eps_10", "eps_11"),
            vecs,
            (self.alpha_00, self.alpha_01, self.alpha_10, self.alpha_11),
        ):
            norm = float(np.linalg.norm(vec))
            if abs(amp) > 1e-12 and abs(norm - 1.0) > 1e-10:
                raise ValueError(f"{label} must be normalized (|{label}| = {norm})")
        for pair, total in (
            (("alpha_00", "alpha_01"), abs(self.alpha_00) ** 2 + abs(self.alpha_01) ** 2),
            (("alpha_10", "alpha_11"), abs(self.alpha_10) ** 2 + abs(self.alpha_11) ** 2),
        ):
            if abs(total - 1.0) > 1e-10:
                raise ValueError(f"|{pair[0]}|^2 + |{pair[1]}|^2 must be 1, got {total}")
        object.__setattr__(self, "eps_00", tuple(vecs[0]))
        object.__setattr__(self, "eps_01", tuple(vecs[1]))
        object.__setattr__(self, "eps_10", tuple(vecs[2]))
        object.__setattr__(self, "eps_11", tuple(vecs[3]))
        object.__setattr__(self, "_unitary", self._build_unitary(vecs, dim))

    def _build_unitary(self, vecs: list[np.ndarray], dim: int) -> np.ndarray:
        col0 = np.concatenate([self.alpha_00 * vecs[0], self.alpha_01 * vecs[1]])
        col1 = np.concatenate([self.alpha_10 * vecs[2], self.alpha_11 * vecs[3]])
        cross = np.vdot(col0, col1)
        if abs(cross) > 1e-10:
            raise ValueError(
                f"parameters do not extend to a unitary coupling (<E0|E1> = {cross:.3e})"
            )
        total = 2 * dim
        columns = [col0, col1]
        for cand_index in range(total):
            if len(columns) == total:
                break
            cand = np.zeros(total, dtype=complex)
            cand[cand_index] = 1.0
            for c in columns:
                cand = cand - np.vdot(c, cand) * c
            norm = float(np.linalg.norm(cand))
            if norm > 1e-8:
                columns.append(cand / norm)
        u = np.zeros((total, total), dtype=complex)
        # Defining columns occupy |0>|e0> (index 0) and |1>|e0> (index dim).
        u[:, 0] = columns[0]
        u[:, dim] = columns[1]
        spare = iter(columns[2:])
        for j in range(total):
            if j not in (0, dim):
                u[:, j] = next(spare)
        if not is_unitary(u):
            raise ValueError("internal error: completed coupling is not unitary")
        return u

    @property
    def probe_dim(self) -> int:
        return len(self.eps_00)

    @property
    def probe_qubits(self) -> int:
        return int(math.log2(self.probe_dim))

    def initial_probe(self) -> StateVector:
        """Probe reference state |e> = first basis vector of the probe space."""
        amps = np.zeros(self.probe_dim, dtype=complex)
        amps[0] = 1.0
        return _sv(self.probe_qubits, amps)

    def coupling_unitary(self) -> np.ndarray:
        """The completed joint unitary on (qubit x probe)."""
        return self._unitary.copy()

    # -- exact analysis helpers (no sampling) --------------------------------

    def joint_state_after(self, qubit_state: StateVector) -> StateVector:
        """E (|qubit> x |e>) for an arbitrary single-qubit input."""
        joint = tensor(qubit_state, self.initial_probe())
        targets = list(range(joint.num_qubits))
        return apply_unitary(joint, targets, self._unitary, validate=False)

    def expected_error_rates(self) -> dict[str, float]:
        """Exact disturbance probability for each of the four decoy states.

        The rate for a state is the Born probability that the receiver,
        measuring in the preparation basis after the coupling, sees the
        orthogonal outcome.
        """
        rates: dict[str, float] = {}
        for label, state, basis, wrong in (
            ("0", _sv(1, np.array([1, 0], dtype=complex)), Basis.Z, 1),
            ("1", _sv(1, np.array([0, 1], dtype=complex)), Basis.Z, 0),
            ("+", ket_plus(), Basis.X, 1),
            ("-", ket_minus(), Basis.X, 0),
        ):
            joint = self.joint_state_after(state)
            prob, _ = postselect(joint, 0, basis, wrong)
            rates[label] = float(prob)
        return rates

    def probe_states(self) -> dict[str, np.ndarray]:
        """Reduced probe density matrix after coupling, per input state."""
        out: dict[str, np.ndarray] = {}
        for label, state in (
            ("0", _sv(1, np.array([1, 0], dtype=complex))),
            ("1", _sv(1, np.array([0, 1], dtype=complex))),
            ("+", ket_plus()),
            ("-", ket_minus()),
        ):
            joint = self.joint_state_after(state)
            t = joint.amps.reshape(2, self.probe_dim)
            out[label] = t.conj().T @ t  # trace out the qubit
        return out

    def max_probe_trace_distance(self) -> float:
        """Largest trace distance between probe states across the four inputs."""
        states = list(self.probe_states().values())
        worst = 0.0
        for i in range(len(states)):
            for j in range(i + 1, len(states)):
                diff = states[i] - states[j]
                eigs = np.linalg.eigvalsh(diff)
                worst = max(worst, 0.5 * float(np.sum(np.abs(eigs))))
        return worst

    def violation_norm(self) -> float:
        """Distance proxy from the undetectable-parameter manifold.

        sqrt(|a01|^2 + |a10|^2 + ||a00 p00 - a11 p11||^2 / 2); zero
        exactly on the manifold.
        """
        d = self.alpha_00 * np.asarray(self.eps_00) - self.alpha_11 * np.asarray(self.eps_11)
        return math.sqrt(
            abs(self.alpha_01) ** 2
            + abs(self.alpha_10) ** 2
            + 0.5 * float(np.linalg.norm(d) ** 2)
        )

    def is_undetectable(self, atol: float = 1e-10) -> bool:
        return all(rate <= atol for rate in self.expected_error_rates().values())

    # -- constructors for the named attack families --------------------------

    @classmethod
    def undetectable(cls, tau: tuple[complex, ...] | None = None) -> "EveParams":
        """The only family that passes every decoy check: trivial coupling."""
        t = (1.0, 0.0) if tau is None else tau
        return cls(1.0, 0.0, 0.0, 1.0, eps_00=t, eps_01=t, eps_10=t, eps_11=t)

    @classmethod
    def rotation(cls, theta: float) -> "EveParams":
        """Bit-flipping coupling that never marks the probe (detectable in Z and X)."""
        c, s = math.cos(theta), math.sin(theta)
        e = (1.0, 0.0)
        return cls(c, s, -s, c, eps_00=e, eps_01=e, eps_10=e, eps_11=e)

    @classmethod
    def probe_marking(cls, phi: float) -> "EveParams":
        """Coupling that copies Z information into the probe (detectable in X)."""
        e0 = (1.0, 0.0)
        e1 = (math.cos(phi), math.sin(phi))
        return cls(1.0, 0.0, 0.0, 1.0, eps_00=e0, eps_01=e0, eps_10=e0, eps_11=e1)

    def to_json_dict(self) -> dict:
        def c2(z: complex) -> list[float]:
            return [float(z.real), float(z.imag)]

        def v2(v: tuple[complex, ...]) -> list[list[float]]:
            return [c2(complex(z)) for z in v]

        return {
            "alpha": [c2(self.alpha_00), c2(self.alpha_01), c2(self.alpha_10), c2(self.alpha_11)],
            "eps": [v2(self.eps_00), v2(self.eps_01), v2(self.eps_10), v2(self.eps_11)],
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "EveParams":
        def c1(pair) -> complex:
            return complex(pair[0], pair[1])

        def v1(vec) -> tuple[complex, ...]:
            return tuple(c1(p) for p in vec)

        a = [c1(p) for p in data["alpha"]]
        e = [v1(v) for v in data["eps"]]
        return cls(a[0], a[1], a[2], a[3], eps_00=e[0], eps_01=e[1], eps_10=e[2], eps_11=e[3])


class EntangleMeasure:
    """Attack hook that couples a fresh probe to every transiting qubit."""

    def __init__(self, params: EveParams):
        self.params = params
        self.probes: list[list[Qubit]] = []

    def intercept(self, qubit: Qubit, rng: Rng) -> None:
        probe_qubits = qubit.register.extend(self.params.initial_probe())
        apply_to_qubits([qubit, *probe_qubits], self.params.coupling_unitary(), validate=False)
        self.probes.append(probe_qubits)


def violation_grid(points_per_family: int = 10) -> list[EveParams]:
    """A grid of detectable entangle-measure parameter sets.

    Two families: coupling rotations (violating the zero-crosstalk
    condition) and probe markings (violating the equal-probe condition).
    All points sit at violation norm >= 0.1.
    """
    grid: list[EveParams] = []
    for k in range(points_per_family):
        theta = 0.1 + 0.9 * k / max(points_per_family - 1, 1)
        grid.append(EveParams.rotation(theta))
    for k in range(points_per_family):
        phi = 0.15 + 1.35 * k / max(points_per_family - 1, 1)
        grid.append(EveParams.probe_marking(phi))
    return grid
