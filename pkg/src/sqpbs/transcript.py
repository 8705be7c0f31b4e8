"""Run configuration and the replayable protocol transcript.

A :class:`Transcript` is the ordered public record of one protocol run:
every classical message, measurement record, check outcome, and the
final verdict, plus resource-accounting counters.  Its canonical JSON
form is byte-stable: two runs of the same configuration and seed
serialize identically, which is what the replay and blindness checks
compare.

The owner's private inputs (the message ``g_a`` and blinding key
``k_a``) are deliberately *not* part of the transcript; they live only
in the :class:`RunConfig`.  Transcript files written by the CLI embed
the config next to the transcript so any file can be replayed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Any

import numpy as np

from .adversary import EveParams
from .bits import Bits
from .errors import ConfigError

TOOL_VERSION = "0.1.0"
TRANSCRIPT_FORMAT = "sqpbs-transcript"

ATTACK_KINDS = ("none", "intercept-resend", "entangle-measure", "forge-md", "tamper-md", "withhold")
QUANTUM_CHANNELS = ("xi_m", "w1", "w2", "w4", "g_prime", "bb84_dt", "sqkd_bt", "sqkd_ct")
WITHHOLDABLE = ("M_B", "M_D", "M_C")
KEY_MODES = ("simulated", "stubbed")


@dataclass(frozen=True)
class AttackSpec:
    """What the adversary does, and where."""

    kind: str = "none"
    channel: str = "xi_m"          # quantum attacks: which transmission is tapped
    basis: str = "random"          # intercept-resend measurement basis
    eve: EveParams | None = None   # entangle-measure parameters
    bit_index: int = 1             # tamper-md: ciphertext bit to flip
    record: str = "M_D"            # withhold: which record never reaches the arbiter

    def validate(self) -> None:
        if self.kind not in ATTACK_KINDS:
            raise ConfigError(f"unknown attack kind {self.kind!r} (choose from {ATTACK_KINDS})")
        if self.kind in ("intercept-resend", "entangle-measure") and self.channel not in QUANTUM_CHANNELS:
            raise ConfigError(f"unknown channel {self.channel!r} (choose from {QUANTUM_CHANNELS})")
        if self.kind == "entangle-measure" and self.eve is None:
            raise ConfigError("entangle-measure attack requires eve parameters")
        if self.kind == "withhold" and self.record not in WITHHOLDABLE:
            raise ConfigError(f"withholdable records are {WITHHOLDABLE}, got {self.record!r}")
        if self.basis not in ("random", "z", "x"):
            raise ConfigError(f"intercept-resend basis must be random/z/x, got {self.basis!r}")

    def to_json_dict(self) -> dict:
        out: dict[str, Any] = {"kind": self.kind}
        if self.kind in ("intercept-resend", "entangle-measure"):
            out["channel"] = self.channel
        if self.kind == "intercept-resend":
            out["basis"] = self.basis
        if self.kind == "entangle-measure" and self.eve is not None:
            out["eve"] = self.eve.to_json_dict()
        if self.kind == "tamper-md":
            out["bit_index"] = self.bit_index
        if self.kind == "withhold":
            out["record"] = self.record
        return out

    @classmethod
    def from_json_dict(cls, data: dict) -> "AttackSpec":
        eve = EveParams.from_json_dict(data["eve"]) if data.get("eve") else None
        return cls(
            kind=data.get("kind", "none"),
            channel=data.get("channel", "xi_m"),
            basis=data.get("basis", "random"),
            eve=eve,
            bit_index=data.get("bit_index", 1),
            record=data.get("record", "M_D"),
        )


@dataclass(frozen=True)
class RunConfig:
    """Everything needed to reproduce one protocol run bit-for-bit."""

    n: int
    seed: int
    g_a: Bits | None = None        # owner's message; drawn from the seed when None
    k_a: Bits | None = None        # owner's blinding key; drawn from the seed when None
    decoy_count: int | None = None  # per-channel decoys; defaults to n
    error_threshold: float = 0.0
    hash_bits: int = 128
    hash_algorithm: str = "sha256"
    key_mode: str = "simulated"
    attack: AttackSpec = field(default_factory=AttackSpec)

    def validate(self) -> None:
        if self.n < 1:
            raise ConfigError(f"n must be >= 1, got {self.n}")
        if self.g_a is not None and len(self.g_a) != self.n:
            raise ConfigError(f"g_a has {len(self.g_a)} bits, expected n={self.n}")
        if self.k_a is not None and len(self.k_a) != self.n:
            raise ConfigError(f"k_a has {len(self.k_a)} bits, expected n={self.n}")
        if self.decoy_count is not None and self.decoy_count < 1:
            raise ConfigError(f"decoy_count must be >= 1, got {self.decoy_count}")
        if not 0.0 <= self.error_threshold < 1.0:
            raise ConfigError(f"error_threshold must be in [0, 1), got {self.error_threshold}")
        if self.hash_bits < 1:
            raise ConfigError(f"hash_bits must be >= 1, got {self.hash_bits}")
        if self.key_mode not in KEY_MODES:
            raise ConfigError(f"key_mode must be one of {KEY_MODES}, got {self.key_mode!r}")
        self.attack.validate()

    @property
    def resolved_decoy_count(self) -> int:
        return self.decoy_count if self.decoy_count is not None else self.n

    def to_json_dict(self) -> dict:
        return {
            "n": self.n,
            "seed": self.seed,
            "g_a": str(self.g_a) if self.g_a is not None else None,
            "k_a": str(self.k_a) if self.k_a is not None else None,
            "decoy_count": self.decoy_count,
            "error_threshold": self.error_threshold,
            "hash_bits": self.hash_bits,
            "hash_algorithm": self.hash_algorithm,
            "key_mode": self.key_mode,
            "attack": self.attack.to_json_dict(),
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "RunConfig":
        return cls(
            n=data["n"],
            seed=data["seed"],
            g_a=Bits(data["g_a"]) if data.get("g_a") is not None else None,
            k_a=Bits(data["k_a"]) if data.get("k_a") is not None else None,
            decoy_count=data.get("decoy_count"),
            error_threshold=data.get("error_threshold", 0.0),
            hash_bits=data.get("hash_bits", 128),
            hash_algorithm=data.get("hash_algorithm", "sha256"),
            key_mode=data.get("key_mode", "simulated"),
            attack=AttackSpec.from_json_dict(data.get("attack", {"kind": "none"})),
        )


def _jsonify(value: Any) -> Any:
    """Coerce protocol values into stable JSON-native types."""
    if isinstance(value, Bits):
        return str(value)
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, complex):
        return [value.real, value.imag]
    if isinstance(value, dict):
        return {str(k): _jsonify(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonify(v) for v in value]
    if value is None or isinstance(value, (bool, int, float, str)):
        return value
    raise TypeError(f"cannot serialize {type(value).__name__} into a transcript event")


class Transcript:
    """Append-only public record of one protocol run."""

    def __init__(self, meta: dict):
        self.meta = _jsonify(meta)
        self.events: list[dict] = []
        self.accounting: dict[str, int] = {}
        self.verdict: str | None = None

    def add(self, event_type: str, **fields: Any) -> dict:
        event = {"type": event_type}
        for key, value in fields.items():
            event[key] = _jsonify(value)
        self.events.append(event)
        return event

    def count(self, counter: str, amount: int) -> None:
        self.accounting[counter] = self.accounting.get(counter, 0) + int(amount)

    def set_verdict(self, verdict: str) -> None:
        self.verdict = verdict

    @property
    def aborted(self) -> bool:
        return self.verdict is not None and self.verdict.startswith("aborted")

    def to_dict(self) -> dict:
        return {
            "meta": self.meta,
            "events": self.events,
            "accounting": dict(sorted(self.accounting.items())),
            "verdict": self.verdict,
        }

    def canonical_json(self) -> str:
        """Byte-stable serialization used for replay and blindness checks."""
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    def events_of(self, event_type: str) -> list[dict]:
        return [e for e in self.events if e["type"] == event_type]
