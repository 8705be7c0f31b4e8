"""Five-party orchestration: phases, verdicts, attacks, determinism."""

import json

import pytest

from sqpbs.bits import Bits
from sqpbs.errors import ConfigError, SemiquantumCapabilityError
from sqpbs.protocol import Party, ProtocolRun, replay_matches, run_full
from sqpbs.registers import new_qubit, new_z_qubit
from sqpbs.statevec import Basis, ket_plus, new_rng
from sqpbs.transcript import AttackSpec, RunConfig


def honest(n, seed, **kwargs):
    return RunConfig(n=n, seed=seed, **kwargs)


class TestHonestRuns:
    def test_smallest_instance(self):
        run = ProtocolRun(honest(1, 1))
        transcript = run.run()
        assert transcript.verdict == "valid"
        assert run.g_prime == run.g

    @pytest.mark.parametrize("n", [1, 2, 5, 8])
    @pytest.mark.parametrize("key_mode", ["simulated", "stubbed"])
    def test_valid_across_sizes_and_key_modes(self, n, key_mode):
        run = ProtocolRun(honest(n, 7 * n + 1, key_mode=key_mode))
        transcript = run.run()
        assert transcript.verdict == "valid"
        assert run.g_prime == run.g == run.g_a ^ run.k_a

    def test_key_lengths(self):
        run = ProtocolRun(honest(6, 3))
        run.run()
        assert len(run.keys.k_a) == 6
        assert len(run.keys.k_bt) == 6
        assert len(run.keys.k_ct) == 6
        assert len(run.keys.k_dt) == 12

    def test_explicit_message_and_key(self):
        g_a, k_a = Bits("1010"), Bits("0111")
        run = ProtocolRun(honest(4, 11, g_a=g_a, k_a=k_a))
        transcript = run.run()
        assert transcript.verdict == "valid"
        assert run.g == g_a ^ k_a
        assert run.g_prime == g_a ^ k_a

    def test_recovery_fidelities_are_one(self):
        run = ProtocolRun(honest(5, 13))
        transcript = run.run()
        record = transcript.events_of("recovery_record")[0]
        assert all(abs(f - 1.0) < 1e-10 for f in record["fidelities"])

    def test_channel_checks_all_pass(self):
        transcript = run_full(honest(4, 17))
        checks = transcript.events_of("decoy_check") + transcript.events_of("return_check")
        assert len(checks) == 5  # xi_m, w2 decoy checks; w1, w4, g_prime return checks
        assert all(c["passed"] for c in checks)

    def test_counted_classical_bits_follow_the_accounting_rule(self):
        n = 6
        transcript = run_full(honest(n, 19, hash_bits=64))
        assert transcript.accounting["classical_bits_counted"] == 64 + 4 * n
        assert transcript.accounting["chi_qubits"] == 4 * n
        assert transcript.accounting["xi_qubits"] == n
        assert transcript.accounting["g_prime_qubits"] == n
        assert transcript.accounting["signature_bits"] == 2 * n
        assert transcript.accounting["bb84_key_bits"] == 2 * n
        assert transcript.accounting["sqkd_key_bits"] == 2 * n


class TestDeterminismAndReplay:
    def test_same_seed_bit_identical(self):
        a = run_full(honest(4, 23))
        b = run_full(honest(4, 23))
        assert a.canonical_json() == b.canonical_json()

    def test_different_seed_differs(self):
        a = run_full(honest(4, 23))
        b = run_full(honest(4, 24))
        assert a.canonical_json() != b.canonical_json()

    def test_replay_matches_round_trip(self):
        config = honest(3, 29, attack=AttackSpec("tamper-md", bit_index=3))
        transcript = run_full(config)
        assert replay_matches(config, transcript.to_dict())

    def test_replay_detects_tampering(self):
        config = honest(3, 31)
        recorded = run_full(config).to_dict()
        recorded["verdict"] = "invalid"
        assert not replay_matches(config, recorded)

    def test_transcript_is_json_serializable(self):
        payload = run_full(honest(3, 37)).to_dict()
        round_tripped = json.loads(json.dumps(payload))
        assert round_tripped["verdict"] == "valid"


class TestBlindness:
    @pytest.mark.parametrize("delta", ["0000", "1111", "0110"])
    def test_paired_flip_leaves_transcript_unchanged(self, delta):
        g_a, k_a, d = Bits("1001"), Bits("0101"), Bits(delta)
        base = run_full(honest(4, 41, g_a=g_a, k_a=k_a))
        flipped = run_full(honest(4, 41, g_a=g_a ^ d, k_a=k_a ^ d))
        assert base.canonical_json() == flipped.canonical_json()

    def test_transcript_never_carries_private_inputs(self):
        g_a, k_a = Bits("110010"), Bits("101011")
        transcript = run_full(honest(6, 43, g_a=g_a, k_a=k_a))
        text = transcript.canonical_json()
        assert "g_a" not in text
        assert "k_a" not in text


class TestSemiquantumEnforcement:
    def test_party_capability_errors(self):
        bob = Party("bob", quantum=False)
        rng = new_rng(0)
        q1, q2 = new_qubit(ket_plus()), new_z_qubit(0)
        with pytest.raises(SemiquantumCapabilityError):
            bob.measure_bell(q1, q2, rng)
        with pytest.raises(SemiquantumCapabilityError):
            bob.measure_qubit(q1, Basis.X, rng)
        with pytest.raises(SemiquantumCapabilityError):
            bob.prepare_state(ket_plus())
        assert bob.measure_qubit(q2, Basis.Z, rng) == 0
        assert bob.prepare_z(1).register.state.probability(1) == 1.0

    def test_quantum_party_allowed(self):
        david = Party("david", quantum=True)
        rng = new_rng(0)
        assert david.measure_qubit(new_qubit(ket_plus()), Basis.X, rng) in (0, 1)
        david.measure_bell(new_z_qubit(0), new_z_qubit(0), rng)

    @pytest.mark.parametrize("n", [2, 6])
    def test_transcript_attributes_only_z_to_semiquantum_parties(self, n):
        transcript = run_full(honest(n, 47))
        for event in transcript.events_of("measurement_record"):
            if event["party"] in ("bob", "charlie"):
                assert event["basis"] == "Z"
        for event in transcript.events_of("decoy_check"):
            assert event["by"] not in ("bob", "charlie")  # announced-basis checks need X
        for event in transcript.events_of("return_check"):
            assert event["by"] in ("bob", "charlie")


class TestAttacks:
    def test_intercept_resend_on_message_channel_aborts(self):
        for seed in (1, 2, 3):
            transcript = run_full(
                honest(2, seed, decoy_count=20, attack=AttackSpec("intercept-resend", "xi_m"))
            )
            assert transcript.verdict == "aborted:eavesdropping"
            abort = transcript.events_of("abort")[0]
            assert abort["channel"] == "xi_m"

    @pytest.mark.parametrize("channel", ["w1", "w2", "w4", "g_prime"])
    def test_intercept_resend_on_carrier_channels_aborts(self, channel):
        transcript = run_full(
            honest(2, 5, decoy_count=24, attack=AttackSpec("intercept-resend", channel))
        )
        assert transcript.verdict == "aborted:eavesdropping"
        assert transcript.events_of("abort")[0]["channel"] == channel

    def test_intercept_resend_on_key_channels_aborts(self):
        # n large enough that the tapped exchange checks a real sample
        for channel in ("bb84_dt", "sqkd_bt", "sqkd_ct"):
            transcript = run_full(honest(16, 7, attack=AttackSpec("intercept-resend", channel)))
            assert transcript.verdict == "aborted:key-establishment", channel

    def test_forged_signature_record_rejected(self):
        rejected = 0
        for seed in range(30):
            transcript = run_full(
                honest(8, 100 + seed, key_mode="stubbed", attack=AttackSpec("forge-md"))
            )
            assert transcript.verdict in ("valid", "invalid")
            rejected += transcript.verdict == "invalid"
        assert rejected >= 28  # acceptance probability is 2^-8 per run

    def test_low_bit_tamper_deterministically_invalidates(self):
        for seed in (3, 9, 27):
            transcript = run_full(honest(4, seed, attack=AttackSpec("tamper-md", bit_index=1)))
            assert transcript.verdict == "invalid"
            fidelities = transcript.events_of("recovery_record")[0]["fidelities"]
            assert fidelities[0] == pytest.approx(0.0, abs=1e-10)  # instance 0 flipped
            assert all(abs(f - 1.0) < 1e-10 for f in fidelities[1:])

    def test_high_bit_tamper_is_invisible_for_blinded_states(self):
        # Swapping the Bell pair within {phi+, psi+} confuses I with sigma_x,
        # which |+>/|-> messages cannot see: the signature still verifies.
        transcript = run_full(honest(4, 9, attack=AttackSpec("tamper-md", bit_index=0)))
        assert transcript.verdict == "valid"

    @pytest.mark.parametrize("record", ["M_B", "M_D", "M_C"])
    def test_withholding_any_record_blocks_recovery(self, record):
        transcript = run_full(honest(2, 11, attack=AttackSpec("withhold", record=record)))
        assert transcript.verdict == f"aborted:missing:{record}"
        assert record in transcript.events_of("withheld")[0]["label"]

    def test_undetectable_entangle_measure_passes(self):
        from sqpbs.adversary import EveParams

        transcript = run_full(
            honest(3, 13, decoy_count=16,
                   attack=AttackSpec("entangle-measure", "xi_m", eve=EveParams.undetectable((0.6, 0.8))))
        )
        assert transcript.verdict == "valid"

    def test_detectable_entangle_measure_aborts(self):
        from sqpbs.adversary import EveParams

        transcript = run_full(
            honest(3, 13, decoy_count=24,
                   attack=AttackSpec("entangle-measure", "xi_m", eve=EveParams.rotation(0.8)))
        )
        assert transcript.verdict == "aborted:eavesdropping"


class TestTranscriptRecord:
    def test_counted_classical_messages_follow_the_flow_diagram(self):
        transcript = run_full(honest(4, 53))
        counted = [e for e in transcript.events_of("classical_send") if e["counted"]]
        assert [(e["label"], e["sender"], e["receiver"]) for e in counted] == [
            ("H(g)", "alice", "charlie"),
            ("E_KBT[M_B]", "bob", "trent"),
            ("E_KDT[M_D]", "david", "trent"),
            ("E_KCT[M_C]", "charlie", "trent"),
        ]
        assert len(counted[0]["bits"]) == 128
        assert len(counted[2]["bits"]) == 8  # 2n bits under the 2n-bit pad

    def test_quantum_sends_cover_all_five_channels(self):
        transcript = run_full(honest(3, 59))
        sends = {e["channel"]: (e["sender"], e["receiver"]) for e in transcript.events_of("quantum_send")}
        assert sends == {
            "w1": ("trent", "bob"),
            "w2": ("trent", "david"),
            "w4": ("trent", "charlie"),
            "xi_m": ("alice", "david"),
            "g_prime": ("trent", "charlie"),
        }

    def test_meta_is_self_describing(self):
        transcript = run_full(honest(3, 61, hash_bits=64, key_mode="stubbed"))
        meta = transcript.meta
        assert meta["version"]
        assert meta["hash"] == {"algorithm": "sha256", "output_bits": 64}
        assert meta["key_mode"] == "stubbed"
        assert meta["attack"] == {"kind": "none"}

    def test_empty_classical_payload_logged(self):
        from sqpbs.transcript import Transcript

        t = Transcript(meta={})
        t.add("classical_send", sender="a", receiver="b", label="empty", bits=Bits(""))
        assert t.events[-1]["bits"] == ""
        json.loads(t.canonical_json())

    def test_unserializable_event_value_rejected(self):
        from sqpbs.transcript import Transcript

        t = Transcript(meta={})
        with pytest.raises(TypeError):
            t.add("oops", payload=object())


class TestConfigValidation:
    def test_n_must_be_positive(self):
        with pytest.raises(ConfigError):
            RunConfig(n=0, seed=1).validate()

    def test_message_length_must_match(self):
        with pytest.raises(ConfigError):
            RunConfig(n=4, seed=1, g_a=Bits("101")).validate()

    def test_attack_kind_checked(self):
        with pytest.raises(ConfigError):
            RunConfig(n=4, seed=1, attack=AttackSpec("laser")).validate()

    def test_attack_channel_checked(self):
        with pytest.raises(ConfigError):
            RunConfig(n=4, seed=1, attack=AttackSpec("intercept-resend", "w9")).validate()

    def test_entangle_measure_needs_params(self):
        with pytest.raises(ConfigError):
            RunConfig(n=4, seed=1, attack=AttackSpec("entangle-measure")).validate()

    def test_config_json_round_trip(self):
        config = RunConfig(
            n=4, seed=99, g_a=Bits("1100"), decoy_count=7, error_threshold=0.1,
            hash_bits=64, key_mode="stubbed", attack=AttackSpec("tamper-md", bit_index=2),
        )
        clone = RunConfig.from_json_dict(json.loads(json.dumps(config.to_json_dict())))
        assert clone == config
