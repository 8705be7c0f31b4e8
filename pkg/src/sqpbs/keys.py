"""Classical key material and simulated key establishment.

Covers the four pre-shared keys the signing protocol consumes (one
2n-bit key agreed over simulated BB84, two n-bit keys agreed over a
simulated semiquantum exchange, and the owner's locally generated n-bit
blinding key), the one-time-pad encryption of measurement records, and
the keyed hash shared between the message owner and the verifier.

Key establishment is simulated honestly at the single-qubit level and
accepts an optional adversary hook acting on each forward transmission.
Runs that do not care about the key-agreement channel may skip it
entirely and draw pre-shared keys ("stubbed" mode in the protocol
layer), since the agreed keys of an honest noiseless exchange are
uniform random strings either way.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

from .bits import Bits
from .errors import KeyEstablishmentError
from .registers import Qubit, measure_qubit, new_qubit
from .statevec import Basis, Rng, basis_state, ket_minus, ket_plus, measure

__all__ = [
    "HashConfig",
    "KeyRing",
    "KeyExchangeResult",
    "OtpKey",
    "establish_key_bb84",
    "establish_key_sqkd",
    "keyed_hash",
    "otp_decrypt",
    "otp_encrypt",
    "xor_blind",
]


def xor_blind(message: Bits, key: Bits) -> Bits:
    """Blind a classical message by XOR with an equal-length private key."""
    if len(message) != len(key):
        raise ValueError(f"blinding key length {len(key)} != message length {len(message)}")
    return message ^ key


def otp_encrypt(key: Bits, message: Bits) -> Bits:
    """One-time-pad encryption: ciphertext = message XOR key prefix."""
    if len(key) < len(message):
        raise ValueError(f"one-time-pad key too short: {len(key)} < {len(message)}")
    return message ^ key[: len(message)]


def otp_decrypt(key: Bits, ciphertext: Bits) -> Bits:
    """Inverse of :func:`otp_encrypt` (XOR is self-inverse)."""
    return otp_encrypt(key, ciphertext)


class OtpKey:
    """A one-time-pad key that refuses to encrypt twice within a run."""

    def __init__(self, key: Bits, label: str):
        self._key = key
        self.label = label
        self._used = False

    def __len__(self) -> int:
        return len(self._key)

    def encrypt(self, message: Bits) -> Bits:
        if self._used:
            raise ValueError(f"one-time-pad key {self.label!r} already used in this run")
        self._used = True
        return otp_encrypt(self._key, message)

    def decrypt(self, ciphertext: Bits) -> Bits:
        return otp_decrypt(self._key, ciphertext)


@dataclass(frozen=True)
class HashConfig:
    """Keyed-hash configuration; recorded in transcripts for replay."""

    output_bits: int = 128
    algorithm: str = "sha256"

    def __post_init__(self):
        if self.output_bits < 1:
            raise ValueError(f"hash output length must be >= 1 bit, got {self.output_bits}")
        if self.algorithm not in hashlib.algorithms_available:
            raise ValueError(f"unknown hash algorithm {self.algorithm!r}")


def keyed_hash(config: HashConfig, secret: Bits, message: Bits) -> Bits:
    """Deterministic keyed digest of ``message``, ``output_bits`` long.

    Modeled as digest(secret || message) with unambiguous length framing,
    extended by counter blocks when the configured output exceeds one
    digest.  The secret models a hash function shared only between two
    parties; without it the digest is unpredictable.
    """
    header = (
        b"sqpbs-keyed-hash\x00"
        + len(secret).to_bytes(8, "big")
        + secret.to_bytes()
        + len(message).to_bytes(8, "big")
        + message.to_bytes()
    )
    out = bytearray()
    counter = 0
    while len(out) * 8 < config.output_bits:
        h = hashlib.new(config.algorithm)
        h.update(header + counter.to_bytes(4, "big"))
        out.extend(h.digest())
        counter += 1
    return Bits.from_bytes(bytes(out), config.output_bits)


@dataclass(frozen=True)
class KeyRing:
    """All key material for one protocol run of message length ``n``.

    Lengths are fixed by the protocol: the owner's blinding key and the
    two semiquantum keys are n bits, the proxy's key is 2n bits (it must
    pad a 2n-bit record of Bell outcomes).
    """

    n: int
    k_a: Bits      # owner's private blinding key, never transmitted
    k_bt: Bits     # original signer <-> arbiter
    k_ct: Bits     # verifier <-> arbiter
    k_dt: Bits     # proxy signer <-> arbiter
    hash_secret: Bits

    def __post_init__(self):
        expected = {"k_a": self.n, "k_bt": self.n, "k_ct": self.n, "k_dt": 2 * self.n}
        for name, want in expected.items():
            got = len(getattr(self, name))
            if got != want:
                raise ValueError(f"{name} must be {want} bits for n={self.n}, got {got}")


@dataclass
class KeyExchangeResult:
    """Outcome of one simulated key agreement."""

    kind: str
    sender_key: Bits
    receiver_key: Bits
    error_rate: float
    raw_count: int
    sifted_count: int
    detail: dict = field(default_factory=dict)

    @property
    def keys_match(self) -> bool:
        return self.sender_key == self.receiver_key


_BB84_STATES = {
    (Basis.Z, 0): basis_state(1, 0),
    (Basis.Z, 1): basis_state(1, 1),
    (Basis.X, 0): ket_plus(),
    (Basis.X, 1): ket_minus(),
}


class _Channel:
    """One-qubit transmissions, with or without an attached adversary.

    The honest path works on bare statevectors; the attacked path wraps
    each qubit in a register so the adversary hook can act on it.  Both
    paths consume identical generator draws, so seeds replay the same
    way regardless of attack presence.
    """

    def __init__(self, adversary, rng: Rng):
        self.adversary = adversary
        self.rng = rng

    def send(self, state):
        if self.adversary is None:
            return state
        qubit = new_qubit(state)
        self.adversary.intercept(qubit, self.rng)
        return qubit

    def measure(self, carrier, basis: Basis) -> int:
        if isinstance(carrier, Qubit):
            return measure_qubit(carrier, basis, self.rng)
        outcome, _ = measure(carrier, 0, basis, self.rng)
        return outcome


def establish_key_bb84(
    length: int,
    rng: Rng,
    adversary=None,
    *,
    check_bits: int | None = None,
    error_threshold: float = 0.0,
) -> KeyExchangeResult:
    """Qubit-level BB84: random bases, sifting, sampled error estimate.

    Generates sifted bits until ``length`` key bits plus ``check_bits``
    sacrificial bits are available; the check sample (chosen at random
    among the sifted positions) estimates the channel error rate.  An
    honest noiseless channel yields identical keys and error rate 0; a
    full intercept-resend attacker pushes the sifted error rate to ~25%.
    Raises :class:`KeyEstablishmentError` above ``error_threshold``.
    """
    if length < 1:
        raise ValueError(f"key length must be >= 1, got {length}")
    if check_bits is None:
        check_bits = min(length, 64)
    needed = length + check_bits
    channel = _Channel(adversary, rng)
    sender_bits: list[int] = []
    receiver_bits: list[int] = []
    raw = 0
    while len(sender_bits) < needed:
        batch = max(16, 2 * (needed - len(sender_bits)) + 8)
        send_bases = rng.integers(0, 2, size=batch)
        send_values = rng.integers(0, 2, size=batch)
        recv_bases = rng.integers(0, 2, size=batch)
        for sb, sv, rb in zip(send_bases, send_values, recv_bases):
            raw += 1
            basis_s = Basis.X if sb else Basis.Z
            basis_r = Basis.X if rb else Basis.Z
            carrier = channel.send(_BB84_STATES[(basis_s, int(sv))])
            outcome = channel.measure(carrier, basis_r)
            if basis_s is basis_r:
                sender_bits.append(int(sv))
                receiver_bits.append(outcome)
            if len(sender_bits) >= needed:
                break
    errors = 0
    check_positions: set[int] = set()
    if check_bits:
        check_positions = set(int(i) for i in rng.choice(needed, size=check_bits, replace=False))
        errors = sum(1 for i in check_positions if sender_bits[i] != receiver_bits[i])
    error_rate = errors / check_bits if check_bits else 0.0
    if error_rate > error_threshold:
        raise KeyEstablishmentError("bb84", error_rate, error_threshold)
    keep = [i for i in range(needed) if i not in check_positions][:length]
    return KeyExchangeResult(
        kind="bb84",
        sender_key=Bits(sender_bits[i] for i in keep),
        receiver_key=Bits(receiver_bits[i] for i in keep),
        error_rate=error_rate,
        raw_count=raw,
        sifted_count=needed,
        detail={"check_bits": check_bits, "check_errors": errors},
    )


def establish_key_sqkd(
    length: int,
    rng: Rng,
    adversary=None,
    *,
    error_threshold: float = 0.0,
) -> KeyExchangeResult:
    """Qubit-level semiquantum key agreement with a classical receiver.

    The quantum party sends qubits prepared in a random basis (Z or X)
    with a random value.  The classical party flips a fair coin per
    qubit: SIFT (measure in Z, resend a fresh Z qubit carrying the
    outcome) or CTRL (reflect untouched).  Key bits are the SIFT
    positions where the quantum party prepared in Z.  The quantum party
    measures everything that comes back in the original preparation
    basis; mismatches on CTRL (reflected) positions are the detection
    statistic.  The adversary hook acts on the forward leg of each
    transmission; the return leg is modeled clean.
    """
    if length < 1:
        raise ValueError(f"key length must be >= 1, got {length}")
    channel = _Channel(adversary, rng)
    sender_key: list[int] = []
    receiver_key: list[int] = []
    raw = 0
    ctrl_errors = 0
    ctrl_total = 0
    ctrl_x_errors = 0
    ctrl_x_total = 0
    while len(sender_key) < length:
        batch = max(16, 4 * (length - len(sender_key)) + 8)
        prep_bases = rng.integers(0, 2, size=batch)
        prep_values = rng.integers(0, 2, size=batch)
        sift_coins = rng.integers(0, 2, size=batch)
        for pb, pv, coin in zip(prep_bases, prep_values, sift_coins):
            raw += 1
            basis = Basis.X if pb else Basis.Z
            carrier = channel.send(_BB84_STATES[(basis, int(pv))])
            if coin:  # SIFT: classical party measures in Z and resends the result
                measured = channel.measure(carrier, Basis.Z)
                channel.measure(_BB84_STATES[(Basis.Z, measured)], Basis.Z)  # read the resend
                if basis is Basis.Z:
                    sender_key.append(int(pv))
                    receiver_key.append(measured)
                    if len(sender_key) >= length:
                        break
            else:  # CTRL: reflected untouched; checked in the preparation basis
                echoed = channel.measure(carrier, basis)
                ctrl_total += 1
                mismatch = echoed != int(pv)
                ctrl_errors += mismatch
                if basis is Basis.X:
                    ctrl_x_total += 1
                    ctrl_x_errors += mismatch
    error_rate = ctrl_errors / ctrl_total if ctrl_total else 0.0
    if error_rate > error_threshold:
        raise KeyEstablishmentError("sqkd", error_rate, error_threshold)
    return KeyExchangeResult(
        kind="sqkd",
        sender_key=Bits(sender_key[:length]),
        receiver_key=Bits(receiver_key[:length]),
        error_rate=error_rate,
        raw_count=raw,
        sifted_count=len(sender_key),
        detail={
            "ctrl_total": ctrl_total,
            "ctrl_errors": ctrl_errors,
            "ctrl_x_total": ctrl_x_total,
            "ctrl_x_errors": ctrl_x_errors,
            "ctrl_x_error_rate": ctrl_x_errors / ctrl_x_total if ctrl_x_total else 0.0,
        },
    )
