"""Intercept-resend and entangle-measure attackers, and the
undetectability dichotomy for probe couplings."""

import math

import numpy as np
import pytest

from sqpbs.adversary import EntangleMeasure, EveParams, InterceptResend, violation_grid
from sqpbs.channels import DecoyState
from sqpbs.registers import measure_qubit, new_qubit
from sqpbs.statevec import (
    Basis,
    apply_unitary,
    fidelity_up_to_phase,
    ket_plus,
    new_rng,
    tensor,
    StateVector,
)


def closed_form_rates(params: EveParams) -> dict[str, float]:
    """Independent route to the decoy error rates, straight from the
    coupling's branch amplitudes (no simulation)."""
    a00, a01, a10, a11 = params.alpha_00, params.alpha_01, params.alpha_10, params.alpha_11
    e00 = np.asarray(params.eps_00)
    e01 = np.asarray(params.eps_01)
    e10 = np.asarray(params.eps_10)
    e11 = np.asarray(params.eps_11)
    minus_branch = a00 * e00 - a01 * e01 + a10 * e10 - a11 * e11
    plus_branch = a00 * e00 + a01 * e01 - a10 * e10 - a11 * e11
    return {
        "0": abs(a01) ** 2,
        "1": abs(a10) ** 2,
        "+": 0.25 * float(np.linalg.norm(minus_branch) ** 2),
        "-": 0.25 * float(np.linalg.norm(plus_branch) ** 2),
    }


class TestInterceptResend:
    def test_basis_validation(self):
        with pytest.raises(ValueError):
            InterceptResend("diagonal")

    def test_z_tap_never_disturbs_z_states(self):
        rng = new_rng(1)
        attacker = InterceptResend("z")
        for bit in (0, 1):
            for _ in range(20):
                qubit = new_qubit(DecoyState.ONE.make_state() if bit else DecoyState.ZERO.make_state())
                attacker.intercept(qubit, rng)
                assert measure_qubit(qubit, Basis.Z, rng) == bit

    def test_x_tap_never_disturbs_x_states(self):
        rng = new_rng(2)
        attacker = InterceptResend("x")
        for _ in range(20):
            qubit = new_qubit(DecoyState.MINUS.make_state())
            attacker.intercept(qubit, rng)
            assert measure_qubit(qubit, Basis.X, rng) == 1

    def test_random_tap_consumes_fresh_coin_per_qubit(self):
        rng = new_rng(3)
        attacker = InterceptResend("random")
        flips = 0
        trials = 400
        for _ in range(trials):
            qubit = new_qubit(ket_plus())
            attacker.intercept(qubit, rng)
            flips += measure_qubit(qubit, Basis.X, rng)
        sigma = math.sqrt(0.25 * 0.75 / trials)
        assert abs(flips / trials - 0.25) < 3 * sigma


class TestEveParamsValidation:
    def test_alpha_norms_enforced(self):
        with pytest.raises(ValueError, match="alpha"):
            EveParams(1.0, 0.5, 0.0, 1.0, eps_00=(1, 0), eps_01=(1, 0), eps_10=(1, 0), eps_11=(1, 0))

    def test_probe_norms_enforced(self):
        with pytest.raises(ValueError, match="eps_00"):
            EveParams(1.0, 0.0, 0.0, 1.0, eps_00=(2, 0), eps_01=(1, 0), eps_10=(1, 0), eps_11=(1, 0))

    def test_unnormalized_probe_ignored_when_amplitude_zero(self):
        # eps_01/eps_10 are irrelevant when their amplitudes vanish.
        params = EveParams(1.0, 0.0, 0.0, 1.0, eps_00=(1, 0), eps_01=(0, 0), eps_10=(0, 0), eps_11=(1, 0))
        assert params.is_undetectable()

    def test_non_unitary_coupling_rejected(self):
        s = 1 / math.sqrt(2)
        with pytest.raises(ValueError, match="unitary"):
            EveParams(s, s, s, s, eps_00=(1, 0), eps_01=(1, 0), eps_10=(1, 0), eps_11=(1, 0))

    def test_probe_dimension_cap(self):
        with pytest.raises(ValueError, match="dimension"):
            EveParams(
                1.0, 0.0, 0.0, 1.0,
                eps_00=(1, 0, 0, 0, 0), eps_01=(1, 0), eps_10=(1, 0), eps_11=(1, 0),
            )

    def test_coupling_unitary_is_unitary(self):
        for params in (EveParams.undetectable(), EveParams.rotation(0.4), EveParams.probe_marking(0.7)):
            u = params.coupling_unitary()
            np.testing.assert_allclose(u.conj().T @ u, np.eye(u.shape[0]), atol=1e-10)

    def test_json_round_trip(self):
        params = EveParams.probe_marking(0.6)
        clone = EveParams.from_json_dict(params.to_json_dict())
        np.testing.assert_allclose(clone.coupling_unitary(), params.coupling_unitary(), atol=1e-12)


class TestUndetectableCoupling:
    def test_identity_family_has_zero_rates(self):
        for tau in (None, (0.6, 0.8), (1j, 0)):
            params = EveParams.undetectable(tau)
            assert params.is_undetectable()
            assert all(r <= 1e-12 for r in params.expected_error_rates().values())

    def test_plus_state_passes_through_with_probe_in_tau(self):
        # The trivial coupling maps |+>|e> to |+>|tau> exactly.
        tau = (0.6, 0.8)
        params = EveParams.undetectable(tau)
        joint = tensor(ket_plus(), params.initial_probe())
        out = apply_unitary(joint, [0, 1], params.coupling_unitary())
        expected = tensor(ket_plus(), StateVector(1, tau))
        assert fidelity_up_to_phase(out, expected) == pytest.approx(1.0, abs=1e-12)

    def test_probe_carries_no_information(self):
        params = EveParams.undetectable((0.28, 0.96))
        assert params.max_probe_trace_distance() <= 1e-10
        assert params.violation_norm() <= 1e-10

    def test_z_copy_probe_marks_x_states_only(self):
        # eps_00 = |0>, eps_11 = |1>: perfect Z copy, invisible in Z.
        params = EveParams(1.0, 0.0, 0.0, 1.0, eps_00=(1, 0), eps_01=(1, 0), eps_10=(1, 0), eps_11=(0, 1))
        rates = params.expected_error_rates()
        assert rates["0"] == pytest.approx(0.0, abs=1e-12)
        assert rates["1"] == pytest.approx(0.0, abs=1e-12)
        # P(flip) = (1 - Re<e00|e11>)/2 = 1/2 on both X states
        assert rates["+"] == pytest.approx(0.5, abs=1e-12)
        assert rates["-"] == pytest.approx(0.5, abs=1e-12)
        # and its probe does distinguish Z inputs
        assert params.max_probe_trace_distance() == pytest.approx(1.0, abs=1e-10)


class TestDetectionDichotomy:
    def test_closed_form_matches_simulated_rates(self):
        for params in violation_grid(5) + [EveParams.undetectable((0.6, 0.8))]:
            simulated = params.expected_error_rates()
            formula = closed_form_rates(params)
            for key in simulated:
                assert simulated[key] == pytest.approx(formula[key], abs=1e-10), key

    def test_grid_points_are_all_detectable(self):
        grid = violation_grid(10)
        assert len(grid) == 20
        for params in grid:
            rates = params.expected_error_rates()
            assert params.violation_norm() >= 0.05
            assert sum(rates.values()) / 4 >= 1e-3
            assert max(rates.values()) >= 1e-3

    def test_violation_norm_zero_iff_undetectable(self):
        assert EveParams.undetectable((0.8, 0.6)).violation_norm() <= 1e-12
        for params in violation_grid(4):
            assert params.violation_norm() > 0.05
            assert not params.is_undetectable()

    def test_rotation_rates_are_sin_squared(self):
        theta = 0.37
        rates = EveParams.rotation(theta).expected_error_rates()
        for value in rates.values():
            assert value == pytest.approx(math.sin(theta) ** 2, abs=1e-12)

    def test_marking_rates_are_sin_squared_half_angle(self):
        phi = 0.9
        rates = EveParams.probe_marking(phi).expected_error_rates()
        assert rates["0"] == pytest.approx(0.0, abs=1e-12)
        assert rates["+"] == pytest.approx(math.sin(phi / 2) ** 2, abs=1e-12)


class TestEntangleMeasureHook:
    def test_probe_attached_and_tracked(self):
        params = EveParams.probe_marking(0.8)
        attacker = EntangleMeasure(params)
        rng = new_rng(4)
        qubit = new_qubit(ket_plus())
        attacker.intercept(qubit, rng)
        assert qubit.register.num_qubits == 1 + params.probe_qubits
        assert len(attacker.probes) == 1

    def test_undetectable_attack_never_disturbs_decoys(self):
        params = EveParams.undetectable((0.6, 0.8))
        rng = new_rng(5)
        attacker = EntangleMeasure(params)
        for _ in range(200):
            state = DecoyState.sample(rng)
            qubit = new_qubit(state.make_state())
            attacker.intercept(qubit, rng)
            assert measure_qubit(qubit, state.basis, rng) == state.bit

    def test_marking_attack_flips_x_decoys_half_the_time(self):
        params = EveParams(1.0, 0.0, 0.0, 1.0, eps_00=(1, 0), eps_01=(1, 0), eps_10=(1, 0), eps_11=(0, 1))
        rng = new_rng(6)
        attacker = EntangleMeasure(params)
        flips = 0
        trials = 600
        for _ in range(trials):
            qubit = new_qubit(ket_plus())
            attacker.intercept(qubit, rng)
            flips += measure_qubit(qubit, Basis.X, rng)
        sigma = math.sqrt(0.5 * 0.5 / trials)
        assert abs(flips / trials - 0.5) < 3 * sigma

    def test_marking_attack_never_flips_z_decoys(self):
        params = EveParams(1.0, 0.0, 0.0, 1.0, eps_00=(1, 0), eps_01=(1, 0), eps_10=(1, 0), eps_11=(0, 1))
        rng = new_rng(7)
        attacker = EntangleMeasure(params)
        for bit, state in ((0, DecoyState.ZERO), (1, DecoyState.ONE)):
            for _ in range(50):
                qubit = new_qubit(state.make_state())
                attacker.intercept(qubit, rng)
                assert measure_qubit(qubit, Basis.Z, rng) == bit
