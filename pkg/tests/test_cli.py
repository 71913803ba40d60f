"""
命令行入口测试
"""

import json

import pytest

from src.compartment_paxos.checker import write_history
from src.compartment_paxos.cli import (
    EXIT_CAPACITY,
    EXIT_CONFIG,
    EXIT_OK,
    EXIT_STALLED,
    EXIT_VIOLATION,
    main,
)
from src.compartment_paxos.evaluation.report import METRICS_HEADER
from src.compartment_paxos.models import HistoryEvent, HistoryOp


def write_plan(tmp_path, name: str = "plan.json", **fields) -> str:
    document = {
        "f": 1,
        "num_proposers": 2,
        "num_proxy_leaders": 2,
        "grid_rows": 2,
        "grid_cols": 2,
        "num_replicas": 2,
        "workload": {"num_clients": 2, "ops_per_client": 10, "read_fraction": 0.5, "keyspace": 4},
    }
    document.update(fields)
    path = tmp_path / name
    path.write_text(json.dumps(document))
    return str(path)


def stale_read_history(tmp_path) -> str:
    x = HistoryOp(type="write", key="x", value="1")
    r = HistoryOp(type="read", key="x")
    events = [
        HistoryEvent(t=0, kind="inv", client=0, seq=0, op=x),
        HistoryEvent(t=1, kind="res", client=0, seq=0, op=x, out="OK"),
        HistoryEvent(t=2, kind="inv", client=1, seq=0, op=r),
        HistoryEvent(t=3, kind="res", client=1, seq=0, op=r, out=None),
    ]
    path = tmp_path / "stale.jsonl"
    write_history(events, str(path))
    return str(path)


class TestRunCommand:
    """run 子命令测试类"""

    def test_metrics_to_stdout(self, tmp_path, capsys):
        assert main(["run", "--plan", write_plan(tmp_path)]) == EXIT_OK
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == ",".join(METRICS_HEADER)
        assert lines[1].startswith("compartmentalized,2,0.500000,2,2,2,2,1,")

    def test_invalid_grid_is_config_error(self, tmp_path, capsys):
        assert main(["run", "--plan", write_plan(tmp_path, grid_rows=1)]) == EXIT_CONFIG
        assert "GridRowsBelowMinimum" in capsys.readouterr().err

    def test_missing_plan_is_config_error(self, tmp_path):
        assert main(["run", "--plan", str(tmp_path / "absent.json")]) == EXIT_CONFIG

    def test_identical_flags_give_identical_files(self, tmp_path):
        plan = write_plan(tmp_path, net={"drop_probability": 0.05})
        outputs = []
        for i in range(2):
            history, metrics = tmp_path / f"h{i}.jsonl", tmp_path / f"m{i}.csv"
            code = main([
                "run", "--plan", plan, "--seed", "5",
                "--out-history", str(history), "--out-metrics", str(metrics),
            ])
            assert code == EXIT_OK
            outputs.append((history.read_bytes(), metrics.read_bytes()))
        assert outputs[0] == outputs[1]
        assert outputs[0][0]

    def test_history_passes_check(self, tmp_path, capsys):
        history = tmp_path / "h.jsonl"
        assert main(["run", "--plan", write_plan(tmp_path), "--out-history", str(history)]) == EXIT_OK
        capsys.readouterr()
        assert main(["check", "--history", str(history)]) == EXIT_OK
        assert capsys.readouterr().out.startswith("OK 20")

    def test_stall_is_ok_unless_requested(self, tmp_path, capsys):
        plan = write_plan(
            tmp_path,
            net={"link_drop": {"proposer->proxy": 1.0}},
            workload={"num_clients": 2, "ops_per_client": 5, "read_fraction": 0.0},
        )
        assert main(["run", "--plan", plan, "--duration", "1000"]) == EXIT_OK
        capsys.readouterr()
        assert main(["run", "--plan", plan, "--duration", "1000", "--fail-on-stall"]) == EXIT_STALLED
        assert "stalled" in capsys.readouterr().err

    def test_fail_on_stall_passes_healthy_run(self, tmp_path, capsys):
        assert main(["run", "--plan", write_plan(tmp_path), "--fail-on-stall"]) == EXIT_OK


class TestCheckCommand:
    """check 子命令测试类"""

    def test_violation_exit_code(self, tmp_path, capsys):
        assert main(["check", "--history", stale_read_history(tmp_path)]) == EXIT_VIOLATION
        out = capsys.readouterr().out.splitlines()
        assert out[0] == "VIOLATION 2"
        assert out[1].startswith("c0#0 w(x,1)")

    def test_sequential_mode_accepts_stale_read(self, tmp_path, capsys):
        code = main(["check", "--history", stale_read_history(tmp_path), "--mode", "sequential"])
        assert code == EXIT_OK
        assert capsys.readouterr().out.strip() == "OK 2"

    def test_capacity_exit_code(self, tmp_path):
        assert main(["check", "--history", stale_read_history(tmp_path), "--max-ops", "1"]) == EXIT_CAPACITY

    def test_malformed_history_is_config_error(self, tmp_path):
        path = tmp_path / "bad.jsonl"
        path.write_text("not json\n")
        assert main(["check", "--history", str(path)]) == EXIT_CONFIG


class TestModelCommand:
    """model 子命令测试类"""

    def test_prints_throughput_and_limit(self, capsys):
        assert main(["model", "--n", "6", "--alpha", "100000", "--write-frac", "0.5"]) == EXIT_OK
        assert capsys.readouterr().out.splitlines() == ["throughput 171428.571429", "limit 200000.000000"]

    def test_read_only_limit_is_unbounded(self, capsys):
        assert main(["model", "--n", "3", "--alpha", "10", "--write-frac", "0"]) == EXIT_OK
        assert capsys.readouterr().out.splitlines()[1] == "limit unbounded"

    def test_undefined_model_is_config_error(self):
        assert main(["model", "--n", "0", "--alpha", "10", "--write-frac", "0"]) == EXIT_CONFIG


class TestAblationCommand:
    """ablation 子命令测试类"""

    def test_custom_steps_to_file(self, tmp_path):
        steps = tmp_path / "steps.json"
        steps.write_text(json.dumps([
            {"label": "coupled", "delta": {"variant": "coupled"}},
            {"label": "compartmentalized", "delta": {"variant": "compartmentalized"}},
        ]))
        out = tmp_path / "ablation.csv"
        code = main([
            "ablation", "--plan", write_plan(tmp_path, capacity={"message_cost": {"proposer": 1.0}}),
            "--steps", str(steps), "--clients", "4", "--duration", "300", "--out", str(out),
        ])
        assert code == EXIT_OK
        lines = out.read_text().splitlines()
        assert len(lines) == 3
        assert lines[1].startswith("0,coupled,coupled")
        assert lines[0].endswith(",machines,stalled")
        assert lines[1].endswith(",0")

    def test_bad_steps_file_is_config_error(self, tmp_path):
        steps = tmp_path / "steps.json"
        steps.write_text(json.dumps([{"delta": {}}]))
        assert main(["ablation", "--plan", write_plan(tmp_path), "--steps", str(steps)]) == EXIT_CONFIG


class TestArgumentParsing:
    """参数解析测试类"""

    def test_unknown_subcommand_exits(self):
        with pytest.raises(SystemExit) as exc_info:
            main(["frobnicate"])
        assert exc_info.value.code == 2
