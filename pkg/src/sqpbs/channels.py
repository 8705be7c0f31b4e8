"""Quantum channels with decoy-particle eavesdropping protection.

Two check styles, matching who sits at the receiving end:

* ``check_decoys`` — receiver has full quantum capability: the preparer
  announces decoy positions and bases, the receiver measures each decoy
  in its announced basis, and the preparer compares outcomes against
  what was sent.
* ``semiquantum_return_check`` — receiver can only Z-measure, reflect
  and reorder: each decoy is either SIFTed (Z-measured, outcome
  published) or CTRLed (reflected back in a random order revealed after
  the preparer has collected everything).  The preparer measures the
  reflected particles in their preparation bases and separately checks
  the published Z outcomes on decoys it prepared in Z.

Decoy qubits live in their own 1-qubit registers; payload qubits stay
inside whatever register they already inhabit.  Honest operations never
entangle the two, so the factorization is exact.  Adversary hooks act on
the forward leg of each transmission; return legs are modeled clean.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

from .errors import EavesdroppingDetected
from .registers import Qubit, measure_qubit, new_qubit
from .statevec import Basis, Rng, StateVector, basis_state, ket_minus, ket_plus


class DecoyState(Enum):
    """The four decoy preparations, sampled uniformly."""

    ZERO = "0"
    ONE = "1"
    PLUS = "+"
    MINUS = "-"

    @property
    def basis(self) -> Basis:
        return Basis.Z if self in (DecoyState.ZERO, DecoyState.ONE) else Basis.X

    @property
    def bit(self) -> int:
        """Expected outcome when measured in the preparation basis."""
        return 0 if self in (DecoyState.ZERO, DecoyState.PLUS) else 1

    def make_state(self) -> StateVector:
        if self is DecoyState.ZERO:
            return basis_state(1, 0)
        if self is DecoyState.ONE:
            return basis_state(1, 1)
        if self is DecoyState.PLUS:
            return ket_plus()
        return ket_minus()

    @classmethod
    def sample(cls, rng: Rng) -> "DecoyState":
        return _DECOY_ORDER[int(rng.integers(0, 4))]


_DECOY_ORDER = (DecoyState.ZERO, DecoyState.ONE, DecoyState.PLUS, DecoyState.MINUS)


@dataclass
class DecoyRecord:
    """Preparer-side record of one inserted decoy."""

    position: int
    state: DecoyState
    qubit: Qubit


@dataclass
class TransmittedSequence:
    """A payload interleaved with decoys, as it crossed the channel."""

    channel: str
    slots: list[Qubit]
    payload_positions: list[int]
    decoys: list[DecoyRecord]

    @property
    def decoy_count(self) -> int:
        return len(self.decoys)

    def payload(self) -> list[Qubit]:
        """Payload qubits back in their original order."""
        return [self.slots[p] for p in self.payload_positions]


def send_with_decoys(
    payload: Sequence[Qubit],
    decoy_count: int,
    rng: Rng,
    adversary=None,
    *,
    channel: str = "",
) -> TransmittedSequence:
    """Interleave fresh decoys into ``payload`` and push it through the channel.

    Decoy positions are uniform over all interleavings; decoy states are
    sampled independently and uniformly from the four preparations.  The
    adversary, when present, acts once on every transmitted qubit (decoy
    and payload alike) in transmission order.
    """
    if decoy_count < 1:
        raise ValueError(f"decoy_count must be >= 1, got {decoy_count}")
    total = len(payload) + decoy_count
    decoy_positions = sorted(int(p) for p in rng.choice(total, size=decoy_count, replace=False))
    decoy_set = set(decoy_positions)
    slots: list[Qubit] = []
    decoys: list[DecoyRecord] = []
    payload_iter = iter(payload)
    payload_positions: list[int] = []
    for pos in range(total):
        if pos in decoy_set:
            state = DecoyState.sample(rng)
            decoys.append(DecoyRecord(position=pos, state=state, qubit=new_qubit(state.make_state())))
            slots.append(decoys[-1].qubit)
        else:
            slots.append(next(payload_iter))
            payload_positions.append(pos)
    if adversary is not None:
        for q in slots:
            adversary.intercept(q, rng)
    return TransmittedSequence(
        channel=channel, slots=slots, payload_positions=payload_positions, decoys=decoys
    )


@dataclass
class DecoyCheckResult:
    channel: str
    decoy_count: int
    errors: int
    error_rate: float
    passed: bool


def check_decoys(
    seq: TransmittedSequence,
    rng: Rng,
    *,
    threshold: float = 0.0,
    measure=None,
) -> DecoyCheckResult:
    """Announced-basis decoy comparison for a fully quantum receiver.

    ``measure`` customizes who measures (callable ``(qubit, basis, rng)
    -> bit``, e.g. a capability-checked party method); defaults to a
    plain projective measurement.  Raises
    :class:`EavesdroppingDetected` when the error rate exceeds
    ``threshold``.
    """
    do_measure = measure if measure is not None else measure_qubit
    errors = 0
    for record in seq.decoys:
        outcome = do_measure(record.qubit, record.state.basis, rng)
        errors += outcome != record.state.bit
    rate = errors / len(seq.decoys)
    result = DecoyCheckResult(
        channel=seq.channel,
        decoy_count=len(seq.decoys),
        errors=errors,
        error_rate=rate,
        passed=rate <= threshold,
    )
    if not result.passed:
        raise EavesdroppingDetected(seq.channel, "decoy", rate, threshold)
    return result


@dataclass
class ReturnCheckResult:
    channel: str
    reflected_count: int
    reflected_errors: int
    reflected_error_rate: float
    z_sift_count: int
    z_sift_errors: int
    z_sift_error_rate: float
    sifted_count: int
    passed: bool
    detail: dict = field(default_factory=dict)


def semiquantum_return_check(
    seq: TransmittedSequence,
    rng: Rng,
    *,
    threshold: float = 0.0,
    z_measure=None,
) -> ReturnCheckResult:
    """SIFT/CTRL/reorder check for a semiquantum receiver.

    Per decoy the receiver flips a fair coin: SIFT (Z-measure, publish
    the outcome later) or CTRL (reflect).  Reflected particles travel
    back in a random order which the receiver reveals only after the
    preparer has collected them; the preparer then measures each in its
    preparation basis.  Two error rates result: on reflected particles,
    and on the published Z outcomes of decoys the preparer prepared in
    Z.  ``z_measure`` customizes the receiver's Z measurement (for
    capability-checked parties).  Raises :class:`EavesdroppingDetected`
    when either rate exceeds ``threshold``.
    """
    do_z = z_measure if z_measure is not None else (lambda q, rng_: measure_qubit(q, Basis.Z, rng_))
    sifted: list[tuple[DecoyRecord, int]] = []
    reflected: list[DecoyRecord] = []
    for record in seq.decoys:
        if rng.integers(0, 2):  # SIFT
            sifted.append((record, do_z(record.qubit, rng)))
        else:  # CTRL
            reflected.append(record)
    # Reflected particles travel back shuffled; once the receiver reveals
    # the order, the preparer re-associates each particle with its
    # original slot, so measuring record-by-record in arrival order is
    # exact bookkeeping.
    order = rng.permutation(len(reflected)) if reflected else []
    returned = [reflected[int(i)] for i in order]
    reflected_errors = 0
    subset = {Basis.Z: [0, 0], Basis.X: [0, 0]}  # basis -> [count, errors]
    for rec in returned:
        outcome = measure_qubit(rec.qubit, rec.state.basis, rng)
        mismatch = outcome != rec.state.bit
        reflected_errors += mismatch
        subset[rec.state.basis][0] += 1
        subset[rec.state.basis][1] += mismatch
    z_sift = [(rec, bit) for rec, bit in sifted if rec.state.basis is Basis.Z]
    z_sift_errors = sum(1 for rec, bit in z_sift if bit != rec.state.bit)
    reflected_rate = reflected_errors / len(returned) if returned else 0.0
    z_rate = z_sift_errors / len(z_sift) if z_sift else 0.0
    passed = reflected_rate <= threshold and z_rate <= threshold
    result = ReturnCheckResult(
        channel=seq.channel,
        reflected_count=len(returned),
        reflected_errors=reflected_errors,
        reflected_error_rate=reflected_rate,
        z_sift_count=len(z_sift),
        z_sift_errors=z_sift_errors,
        z_sift_error_rate=z_rate,
        sifted_count=len(sifted),
        passed=passed,
        detail={
            "permutation": [int(i) for i in order],
            "reflected_z_count": subset[Basis.Z][0],
            "reflected_z_errors": subset[Basis.Z][1],
            "reflected_x_count": subset[Basis.X][0],
            "reflected_x_errors": subset[Basis.X][1],
        },
    )
    if reflected_rate > threshold:
        raise EavesdroppingDetected(seq.channel, "reflected", reflected_rate, threshold)
    if z_rate > threshold:
        raise EavesdroppingDetected(seq.channel, "z-sift", z_rate, threshold)
    return result
