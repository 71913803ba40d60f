"""
消融实验测试
"""

import csv
import io

import pytest

from src.compartment_paxos.errors import AblationStepError
from src.compartment_paxos.evaluation.ablation import (
    ABLATION_HEADER,
    AblationStep,
    batched_ablation_steps,
    default_ablation_steps,
    render_ablation_csv,
    run_ablation,
)
from src.compartment_paxos.models import CapacityModel, DeploymentPlan, NetModel, WorkloadSpec

WRITE_ONLY = WorkloadSpec(read_fraction=0.0)


class TestAblationSteps:
    """消融步骤定义测试类"""

    def test_default_steps_start_coupled(self):
        steps = default_ablation_steps()
        assert steps[0].delta == {"variant": "coupled"}
        labels = [s.label for s in steps]
        assert labels.index("+proxy leaders (2)") < labels.index("proxy leaders 7") < labels.index("+replica")

    def test_batched_steps_enable_batching(self):
        assert batched_ablation_steps()[0].delta["batching_enabled"] is True

    def test_invalid_step_reports_index(self):
        steps = [AblationStep(label="ok", delta={}), AblationStep(label="broken", delta={"grid_rows": 1})]
        with pytest.raises(AblationStepError) as exc_info:
            run_ablation(DeploymentPlan(), steps, client_counts=[2], duration=200)
        assert exc_info.value.step_index == 1
        assert exc_info.value.label == "broken"

    def test_stalled_step_is_flagged(self):
        """代理领导者收不到 Phase2a 时，只有分区化的那一步被标记为停滞"""
        steps = [
            AblationStep(label="coupled", delta={"variant": "coupled"}),
            AblationStep(label="compartmentalized", delta={"variant": "compartmentalized"}),
        ]
        rows = run_ablation(
            DeploymentPlan(),
            steps,
            workload=WRITE_ONLY,
            client_counts=[2],
            duration=400,
            net=NetModel(link_drop={"proposer->proxy": 1.0}),
        )
        assert [row.stalled for row in rows] == [False, True]
        assert rows[1].throughput == 0
        records = list(csv.DictReader(io.StringIO(render_ablation_csv(rows, WRITE_ONLY))))
        assert [r["stalled"] for r in records] == ["0", "1"]


@pytest.mark.slow
class TestAblationOrdering:
    """消融顺序测试类：每条消息 1 tick 的容量模型，只写负载"""

    @pytest.fixture(scope="class")
    def rows(self):
        return run_ablation(
            DeploymentPlan(),
            default_ablation_steps(),
            capacity=CapacityModel.uniform(1.0),
            workload=WRITE_ONLY,
            client_counts=[30],
            duration=2000,
        )

    def _by_label(self, rows):
        return {row.label: row.throughput for row in rows}

    def test_strict_ordering(self, rows):
        t = self._by_label(rows)
        assert t["coupled"] < t["+proxy leaders (2)"] < t["proxy leaders 7"]

    def test_extra_replica_does_not_help_saturated_leader(self, rows):
        t = self._by_label(rows)
        assert t["+replica"] <= t["proxy leaders 7"] * 1.05

    def test_extra_acceptors_do_not_help_writes(self, rows):
        t = self._by_label(rows)
        assert t["2x3 grid"] <= t["2x2 grid"] * 1.05

    def test_machines_grow_with_roles(self, rows):
        machines = [row.machines for row in rows]
        assert machines[0] == 3
        assert machines[1] < machines[6]

    def test_csv_has_one_row_per_step(self, rows):
        text = render_ablation_csv(rows, WRITE_ONLY)
        records = list(csv.DictReader(io.StringIO(text)))
        assert list(records[0].keys()) == ABLATION_HEADER
        assert len(records) == len(rows)
        assert records[0]["variant"] == "coupled"
        assert records[0]["proxies"] == "0"
