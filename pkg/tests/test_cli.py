import json
import subprocess
import sys

from intent_assure.cli import main


def test_run_text(capsys):
    assert main(["run", "paper-usecase"]) == 0
    out = capsys.readouterr().out
    assert "final phase: steady" in out


def test_run_json_to_file(tmp_path):
    out = tmp_path / "r.json"
    assert main(["run", "no-faults", "--format", "json", "-o", str(out)]) == 0
    assert json.loads(out.read_text())["phase"] == "steady"


def test_replay_mode_and_scenario_list(capsys):
    assert main(["run", "paper-usecase", "--planner", "replay", "--format", "json"]) == 0
    assert json.loads(capsys.readouterr().out)["planner"] == "replay"
    assert main(["scenarios"]) == 0
    assert "paper-usecase-hardware" in capsys.readouterr().out


def test_failed_phase_exits_two(tmp_path, capsys):
    doc = {
        "intent": "Create collectors in Domain West for gathering Netflow data, with 99.99% availability",
        "zones": [{"name": "West", "inventory": {"small": 0, "medium": 0, "large": 0}}],
        "run": {"simulate_h": 1},
    }
    path = tmp_path / "empty.json"
    path.write_text(json.dumps(doc))
    assert main(["run", str(path)]) == 2


def test_errors_exit_one(capsys):
    assert main(["run", "nowhere.json"]) == 1
    assert "error:" in capsys.readouterr().err


def test_console_entry_point():
    done = subprocess.run(
        [sys.executable, "-m", "intent_assure.cli", "run", "no-faults", "--seed", "3"],
        capture_output=True,
        text=True,
        check=False,
    )
    assert done.returncode == 0 and "seed: 3" in done.stdout
