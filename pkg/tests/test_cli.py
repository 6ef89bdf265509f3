import json
import subprocess
import sys
from pathlib import Path

import pytest

from stablefund.cli import main

SCENARIOS = Path(__file__).resolve().parents[1] / "src" / "stablefund" / "scenarios"


def test_run_writes_outputs(tmp_path, capsys):
    assert main(["run", str(SCENARIOS / "turkey_equity.json"), "--out", str(tmp_path), "--verify"]) == 0
    assert "invariants checked" in capsys.readouterr().out
    for name in ("events.jsonl", "snapshot.json", "captable.csv", "trades.jsonl", "fee_report.json"):
        assert (tmp_path / name).exists()


def test_replay(capsys):
    assert main(["replay", str(SCENARIOS / "failed_refund.json")]) == 0
    assert capsys.readouterr().out.startswith("match")


def test_fee_report(capsys):
    assert main(["fee-report", "--gross", "100000.0", "--traditional-bps", "400", "--framework-bps", "50"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["traditional_fee"] == 4_000_000_000
    assert report["framework_fee"] == 500_000_000


def test_check_log_detects_tampering(tmp_path, capsys):
    main(["run", str(SCENARIOS / "compliance_gate.json"), "--out", str(tmp_path)])
    events = tmp_path / "events.jsonl"
    assert main(["check-log", str(events)]) == 0
    data = bytearray(events.read_bytes())
    data[len(data) // 2] ^= 0x01
    events.write_bytes(bytes(data))
    capsys.readouterr()
    assert main(["check-log", str(events)]) == 1
    assert capsys.readouterr().out.startswith("bad at seq")


def test_malformed_exit_code(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"commands": [{"at": 0, "action": "Mint", "to": "ghost", "amount": 1}]}')
    assert main(["run", str(bad), "--out", str(tmp_path / "o")]) != 0
    bad.write_text("{not json")
    assert main(["run", str(bad), "--out", str(tmp_path / "o")]) != 0


@pytest.mark.parametrize("args", [["--help"], ["fee-report", "--help"]])
def test_module_entry_point(args):
    proc = subprocess.run([sys.executable, "-m", "stablefund", *args], capture_output=True, text=True)
    assert proc.returncode == 0
    assert "usage" in proc.stdout
