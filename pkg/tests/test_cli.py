"""Command-line interface: subcommands, exit codes, file formats."""

import json

import pytest

from sqpbs.adversary import EveParams
from sqpbs.cli import (
    EXIT_ABORTED,
    EXIT_CONFIG,
    EXIT_FAILURE,
    EXIT_INVALID,
    EXIT_VALID,
    main,
)


def run_cli(*argv):
    return main(list(argv))


class TestRun:
    def test_honest_run_exits_zero(self, capsys):
        assert run_cli("run", "--n", "4", "--seed", "7") == EXIT_VALID
        out = capsys.readouterr().out
        assert "verdict: valid" in out

    def test_transcript_file_roundtrip(self, tmp_path):
        out = tmp_path / "run.json"
        assert run_cli("run", "--n", "4", "--seed", "7", "--out", str(out)) == EXIT_VALID
        data = json.loads(out.read_text())
        assert data["format"] == "sqpbs-transcript"
        assert data["config"]["seed"] == 7
        assert data["transcript"]["verdict"] == "valid"
        assert data["transcript"]["meta"]["n"] == 4

    def test_zero_n_is_config_error(self, capsys):
        assert run_cli("run", "--n", "0", "--seed", "1") == EXIT_CONFIG
        assert "config error" in capsys.readouterr().err

    def test_bad_message_bits_is_config_error(self):
        assert run_cli("run", "--n", "3", "--seed", "1", "--message", "10x") == EXIT_CONFIG

    def test_message_length_mismatch_is_config_error(self):
        assert run_cli("run", "--n", "3", "--seed", "1", "--message", "10") == EXIT_CONFIG

    def test_attacked_run_exits_aborted(self):
        code = run_cli(
            "run", "--n", "2", "--seed", "5", "--decoys", "20",
            "--attack", "intercept-resend",
        )
        assert code == EXIT_ABORTED

    def test_tampered_signature_exits_invalid(self):
        code = run_cli("run", "--n", "4", "--seed", "5", "--attack", "tamper-md", "--tamper-bit", "1")
        assert code == EXIT_INVALID

    def test_seed_env_variable_respected(self, monkeypatch, tmp_path):
        monkeypatch.setenv("SQPBS_SEED", "424242")
        out = tmp_path / "run.json"
        assert run_cli("run", "--n", "3", "--out", str(out)) == EXIT_VALID
        assert json.loads(out.read_text())["config"]["seed"] == 424242

    def test_bad_seed_env_is_config_error(self, monkeypatch):
        monkeypatch.setenv("SQPBS_SEED", "not-a-number")
        assert run_cli("run", "--n", "3") == EXIT_CONFIG

    def test_eve_params_file(self, tmp_path):
        params_file = tmp_path / "eve.json"
        params_file.write_text(json.dumps(EveParams.undetectable((0.6, 0.8)).to_json_dict()))
        code = run_cli(
            "run", "--n", "3", "--seed", "11",
            "--attack", "entangle-measure", "--eve-params", str(params_file),
        )
        assert code == EXIT_VALID  # undetectable coupling passes every check

    def test_missing_eve_params_is_config_error(self):
        assert run_cli("run", "--n", "3", "--seed", "1", "--attack", "entangle-measure") == EXIT_CONFIG


class TestReplay:
    def test_replay_matches(self, tmp_path):
        out = tmp_path / "run.json"
        run_cli("run", "--n", "4", "--seed", "21", "--out", str(out))
        assert run_cli("replay", str(out)) == EXIT_VALID

    def test_replay_detects_edits(self, tmp_path):
        out = tmp_path / "run.json"
        run_cli("run", "--n", "4", "--seed", "21", "--out", str(out))
        data = json.loads(out.read_text())
        data["transcript"]["verdict"] = "invalid"
        out.write_text(json.dumps(data))
        assert run_cli("replay", str(out)) == EXIT_FAILURE

    def test_replay_of_attacked_run_matches(self, tmp_path):
        out = tmp_path / "run.json"
        run_cli(
            "run", "--n", "2", "--seed", "5", "--decoys", "20",
            "--attack", "intercept-resend", "--out", str(out),
        )
        assert run_cli("replay", str(out)) == EXIT_VALID

    def test_replay_wrong_format_is_config_error(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({"format": "something-else"}))
        assert run_cli("replay", str(bad)) == EXIT_CONFIG

    def test_replay_missing_file_is_config_error(self, tmp_path):
        assert run_cli("replay", str(tmp_path / "absent.json")) == EXIT_CONFIG


class TestVerifyCorrections:
    def test_audit_passes(self, capsys):
        assert run_cli("verify-corrections", "--trials", "5", "--seed", "3") == EXIT_VALID
        out = capsys.readouterr().out
        assert "80 branch checks passed" in out

    def test_corrupted_lookup_names_the_branch(self, capsys):
        code = run_cli("verify-corrections", "--trials", "3", "--seed", "3", "--corrupt-branch", "5")
        assert code == EXIT_FAILURE
        out = capsys.readouterr().out
        assert "FAIL branch" in out
        assert "corrupted branch" in out


class TestExperiments:
    def test_efficiency_example(self, capsys, tmp_path):
        out = tmp_path / "eff.json"
        code = run_cli("experiment", "efficiency", "--n", "16", "--l", "256", "--out", str(out))
        assert code == EXIT_VALID
        text = capsys.readouterr().out
        assert "eta = 32/800 = 1/25" in text
        data = json.loads(out.read_text())
        assert data["report"]["eta"]["numerator"] == 1
        assert data["report"]["eta"]["denominator"] == 25
        assert data["report"]["signature_bits"] == 32
        assert data["report"]["consumed_qubits"] + data["report"]["classical_bits"] == 800
        assert data["beats_ghz_reference"] is True
        cited = {
            (row["eta"]["numerator"], row["eta"]["denominator"])
            for row in data["comparison"]
            if row.get("eta") and "reference" in row["protocol"]
        }
        assert cited == {(2, 31), (1, 29)}

    def test_detection_none_attack_rate_zero(self, capsys):
        code = run_cli("experiment", "detection", "--attack", "none", "--trials", "30", "--seed", "2")
        assert code == EXIT_VALID
        assert "rate=0.000000" in capsys.readouterr().out

    def test_blindness_reports_zero_violations(self, capsys):
        code = run_cli("experiment", "blindness", "--n", "4", "--trials", "5", "--seed", "2")
        assert code == EXIT_VALID
        assert "blindness: 0/5" in capsys.readouterr().out

    def test_forgery_writes_result_file(self, tmp_path):
        out = tmp_path / "forgery.json"
        code = run_cli(
            "experiment", "forgery", "--n", "4", "--trials", "40", "--seed", "2", "--out", str(out)
        )
        assert code == EXIT_VALID
        data = json.loads(out.read_text())
        assert data["format"] == "sqpbs-experiment"
        assert data["kind"] == "forgery"
        assert data["detail"]["oracle_rate"] == pytest.approx(2.0**-4)
