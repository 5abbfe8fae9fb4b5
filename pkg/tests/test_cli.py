"""Command line behavior: output, artifacts, exit codes."""

import json

import pytest

from entpost.cli import EXIT_ABORT, EXIT_IO, EXIT_OK, EXIT_USAGE, main
from entpost.codebook import REFERENCE_RAW_FOURTH, reference_codebook, save_codebook


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_run_decodes_known_session(capsys):
    code, out, _ = run_cli(capsys, "run", "--n", "64", "--bits", "10", "--seed", "7")
    assert code == EXIT_OK
    assert "seed: 7" in out
    assert "status: decoded" in out
    assert "bob_bit: 1" in out
    assert "sonai_bit: 0" in out


def test_run_abort_exit_code(capsys):
    code, out, _ = run_cli(
        capsys, "run", "--n", "16", "--lambda", "4", "--bits", "10", "--seed", "7",
        "--strategy-sonai", "withhold:0", "--timeout", "4",
    )
    assert code == EXIT_ABORT
    assert "status: abort" in out
    assert "abort_reason: timeout" in out


def test_run_is_reproducible_bytes(tmp_path, capsys):
    t1, t2 = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    code1, out1, _ = run_cli(
        capsys, "run", "--n", "8", "--lambda", "4", "--codebook", "reference",
        "--bits", "01", "--seed", "99", "--out", str(t1),
    )
    code2, out2, _ = run_cli(
        capsys, "run", "--n", "8", "--lambda", "4", "--codebook", "reference",
        "--bits", "01", "--seed", "99", "--out", str(t2),
    )
    assert code1 == code2 == EXIT_OK
    assert out1 == out2
    assert t1.read_bytes() == t2.read_bytes()


def test_seed_env_fallback(capsys, monkeypatch):
    monkeypatch.setenv("ENTPOST_SEED", "1234")
    _, out, _ = run_cli(capsys, "run", "--n", "8", "--lambda", "4", "--bits", "00",
                        "--codebook", "reference")
    assert "seed: 1234" in out
    monkeypatch.setenv("ENTPOST_SEED", "not-a-number")
    code, _, err = run_cli(capsys, "run", "--n", "8", "--lambda", "4", "--bits", "00")
    assert code == EXIT_USAGE
    assert "ENTPOST_SEED" in err


def test_fresh_seed_is_printed_and_varies(capsys, monkeypatch):
    monkeypatch.delenv("ENTPOST_SEED", raising=False)
    _, out1, _ = run_cli(capsys, "run", "--n", "8", "--lambda", "4", "--bits", "00",
                         "--codebook", "reference")
    _, out2, _ = run_cli(capsys, "run", "--n", "8", "--lambda", "4", "--bits", "00",
                         "--codebook", "reference")
    seed1 = int(out1.splitlines()[0].split(": ")[1])
    seed2 = int(out2.splitlines()[0].split(": ")[1])
    assert seed1 != seed2


def test_usage_errors(capsys):
    assert run_cli(capsys, "run", "--bits", "abc", "--seed", "1")[0] == EXIT_USAGE
    assert run_cli(capsys, "run", "--bits", "1", "--seed", "1")[0] == EXIT_USAGE
    assert run_cli(capsys, "run", "--strategy-bob", "sneaky", "--seed", "1")[0] == EXIT_USAGE
    assert run_cli(capsys, "run", "--bob-msg", "101", "--seed", "1")[0] == EXIT_USAGE
    assert run_cli(capsys, "nonsense")[0] == EXIT_USAGE
    assert run_cli(capsys, "run", "--bits", "00", "--bob-msg", "1", "--sonai-msg", "1",
                   "--seed", "1")[0] == EXIT_USAGE


def test_message_mode(capsys):
    code, out, _ = run_cli(
        capsys, "run", "--n", "16", "--lambda", "4", "--seed", "5",
        "--confidence-target", "0.99", "--bob-msg", "101", "--sonai-msg", "110",
    )
    assert code == EXIT_OK
    assert "bob_message: 101" in out
    assert "sonai_message: 110" in out
    assert out.count("block ") == 3


def test_codebook_gen_and_validate(tmp_path, capsys):
    path = tmp_path / "book.json"
    code, out, _ = run_cli(capsys, "codebook", "gen", "--n", "12", "--lambda", "4",
                           "--seed", "3", "--out", str(path))
    assert code == EXIT_OK
    assert "wrote codebook" in out
    code, out, _ = run_cli(capsys, "codebook", "validate", str(path))
    assert code == EXIT_OK
    assert out.startswith("valid:")


def test_codebook_gen_impossible_request_is_a_usage_error(tmp_path, capsys):
    code, _, err = run_cli(capsys, "codebook", "gen", "--n", "2", "--lambda", "4",
                           "--seed", "1", "--out", str(tmp_path / "never.json"))
    assert code == EXIT_USAGE
    assert "never exceeds" in err or "cannot hold" in err
    assert not (tmp_path / "never.json").exists()


def test_codebook_validate_reports_defects(tmp_path, capsys):
    doc = json.loads(json.dumps({
        "version": 1, "n": 8, "lambda": 4,
        "entries": [
            {"bits": [0, 0], "s_j": [2, 6, 7, 1, 5, 8, 4, 3]},
            {"bits": [1, 1], "s_j": [1, 3, 7, 5, 2, 4, 8, 6]},
            {"bits": [0, 1], "s_j": [6, 1, 2, 4, 3, 7, 5, 8]},
            {"bits": [1, 0], "s_j": list(REFERENCE_RAW_FOURTH)},
        ],
    }))
    path = tmp_path / "defective.json"
    path.write_text(json.dumps(doc))
    code, out, _ = run_cli(capsys, "codebook", "validate", str(path))
    assert code == EXIT_ABORT
    assert "duplicate-label" in out
    assert "missing-label" in out


def test_codebook_validate_unreadable_file(tmp_path, capsys):
    missing = tmp_path / "nope.json"
    assert run_cli(capsys, "codebook", "validate", str(missing))[0] == EXIT_IO
    garbage = tmp_path / "garbage.json"
    garbage.write_text("{")
    assert run_cli(capsys, "codebook", "validate", str(garbage))[0] == EXIT_IO


def test_codebook_reference_output(tmp_path, capsys):
    code, out, _ = run_cli(capsys, "codebook", "reference")
    assert code == EXIT_OK
    doc = json.loads(out)
    assert doc["n"] == 8
    assert doc["lambda"] == 4
    path = tmp_path / "ref.json"
    assert run_cli(capsys, "codebook", "reference", "--out", str(path))[0] == EXIT_OK
    assert run_cli(capsys, "codebook", "validate", str(path))[0] == EXIT_OK


def test_replay_consistent_and_tampered(tmp_path, capsys):
    path = tmp_path / "t.jsonl"
    code, _, _ = run_cli(
        capsys, "run", "--n", "8", "--lambda", "4", "--codebook", "reference",
        "--bits", "10", "--seed", "42", "--confidence-target", "0.9", "--out", str(path),
    )
    assert code == EXIT_OK
    code, out, _ = run_cli(capsys, "replay", "--codebook", "reference",
                           "--transcript", str(path), "--confidence-target", "0.9")
    assert code == EXIT_OK
    assert "terminal: consistent" in out

    # flip one revealed outcome: the recomputed decode no longer matches
    lines = path.read_text().splitlines()
    first = json.loads(lines[0])
    first["outcome"] = "-" if first["outcome"] == "+" else "+"
    lines[0] = json.dumps(first, separators=(",", ":"))
    tampered = tmp_path / "tampered.jsonl"
    tampered.write_text("\n".join(lines) + "\n")
    code, out, _ = run_cli(capsys, "replay", "--codebook", "reference",
                           "--transcript", str(tampered), "--confidence-target", "0.9")
    assert code == EXIT_IO
    assert "MISMATCH" in out


def test_replay_truncated_transcript_reports_prefix(tmp_path, capsys):
    path = tmp_path / "full.jsonl"
    run_cli(
        capsys, "run", "--n", "8", "--lambda", "4", "--codebook", "reference",
        "--bits", "11", "--seed", "5", "--out", str(path),
    )
    cut = tmp_path / "cut.jsonl"
    cut.write_text("\n".join(path.read_text().splitlines()[:4]) + "\n")
    code, out, _ = run_cli(capsys, "replay", "--codebook", "reference",
                           "--transcript", str(cut))
    assert code == EXIT_OK
    assert "replay_status: undecided" in out
    assert "confidence:" in out
    assert "terminal: absent" in out


def test_replay_rejects_duplicate_reveals(tmp_path, capsys):
    path = tmp_path / "dup.jsonl"
    path.write_text(
        '{"round":1,"party":"bob","position":1,"outcome":"+"}\n'
        '{"round":2,"party":"bob","position":1,"outcome":"-"}\n'
    )
    code, _, err = run_cli(capsys, "replay", "--codebook", "reference",
                           "--transcript", str(path))
    assert code == EXIT_IO
    assert "duplicate" in err


def test_replay_echoes_timeout_aborts(tmp_path, capsys):
    path = tmp_path / "abort.jsonl"
    code, _, _ = run_cli(
        capsys, "run", "--n", "8", "--lambda", "4", "--codebook", "reference",
        "--bits", "10", "--seed", "42", "--strategy-sonai", "withhold:2",
        "--timeout", "4", "--out", str(path),
    )
    assert code == EXIT_ABORT
    code, out, _ = run_cli(capsys, "replay", "--codebook", "reference",
                           "--transcript", str(path))
    assert code == EXIT_OK
    assert "echoed" in out


def test_montecarlo_writes_rows_and_report(tmp_path, capsys):
    base = tmp_path / "exp"
    code, out, _ = run_cli(
        capsys, "montecarlo", "--mode", "soundness", "--n", "8", "--lambda", "4",
        "--codebook", "reference", "--bits", "00", "--trials", "200", "--seed", "1",
        "--out", str(base),
    )
    assert code == EXIT_OK
    report = json.loads((tmp_path / "exp.json").read_text())
    assert report["trials"] == 200
    assert "11" in report["survival_rates"]
    assert "4" in report["survival_by_distance"]
    csv_text = (tmp_path / "exp.csv").read_text()
    assert csv_text.count("\n") == 201  # header plus one row per trial
    # stdout carries the same report after the seed line
    stdout_report = json.loads(out.split("\n", 1)[1])
    assert stdout_report == report


def test_montecarlo_run_events_out(tmp_path, capsys):
    events = tmp_path / "events.jsonl"
    code, _, _ = run_cli(
        capsys, "run", "--n", "8", "--lambda", "4", "--codebook", "reference",
        "--bits", "00", "--seed", "2", "--events-out", str(events),
    )
    assert code == EXIT_OK
    lines = [json.loads(line) for line in events.read_text().splitlines()]
    assert any(e["kind"] == "reveal" for e in lines)
    assert any(e["kind"] == "delivery" for e in lines)
