"""
部署计划校验与选票测试
"""

import itertools
import json

import pytest

from src.compartment_paxos.errors import PlanValidationError, ValidationError
from src.compartment_paxos.models import (
    Ballot,
    DeploymentPlan,
    QuorumKind,
    Variant,
    ballot_compare,
    load_run_config,
    machine_count,
    plan_violations,
    validate_plan,
)


class TestValidatePlan:
    """validate_plan 测试类"""

    def test_evaluation_deployment_is_valid(self):
        """两个提议者、十个代理领导者、2x2 网格、四个副本"""
        plan = DeploymentPlan(f=1, num_proposers=2, num_proxy_leaders=10, grid_rows=2, grid_cols=2, num_replicas=4)
        assert validate_plan(plan) is plan

    def test_single_row_grid_is_rejected(self):
        plan = DeploymentPlan(f=1, grid_rows=1, grid_cols=3)
        with pytest.raises(PlanValidationError) as exc_info:
            validate_plan(plan)
        assert exc_info.value.codes == ["GridRowsBelowMinimum"]
        assert exc_info.value.violations[0].field == "grid_rows"

    def test_exact_minimums_for_f2(self):
        plan = DeploymentPlan(
            f=2, grid_rows=3, grid_cols=3, num_proposers=3, num_replicas=3, num_proxy_leaders=3,
        )
        assert validate_plan(plan) is plan

    def test_every_failed_bound_is_reported(self):
        plan = DeploymentPlan(f=2, num_proposers=1, num_replicas=1, grid_rows=1, grid_cols=1, num_proxy_leaders=1)
        codes = set(c.code for c in plan_violations(plan))
        assert codes == {
            "ProposersBelowMinimum",
            "ReplicasBelowMinimum",
            "GridRowsBelowMinimum",
            "GridColsBelowMinimum",
            "ProxyLeadersBelowMinimum",
        }

    def test_batching_bounds(self):
        plan = DeploymentPlan(batching_enabled=True, num_batchers=1, num_unbatchers=2, batch_size=0)
        codes = [v.code for v in plan_violations(plan)]
        assert "BatchersBelowMinimum" in codes
        assert "BatchSizeBelowMinimum" in codes
        assert "UnbatchersBelowMinimum" not in codes

    def test_batching_requires_compartmentalized(self):
        for variant in (Variant.coupled, Variant.unreplicated):
            plan = DeploymentPlan(variant=variant, batching_enabled=True, num_batchers=2, num_unbatchers=2)
            assert "BatchingRequiresCompartmentalized" in [v.code for v in plan_violations(plan)]

    def test_zero_fault_tolerance_rejected(self):
        with pytest.raises(PlanValidationError) as exc_info:
            validate_plan(DeploymentPlan(f=0))
        assert "FaultToleranceBelowMinimum" in exc_info.value.codes

    def test_plan_validation_error_is_validation_error(self):
        with pytest.raises(ValidationError):
            validate_plan(DeploymentPlan(grid_cols=1))

    def test_coupled_ignores_grid_and_proxies(self):
        plan = DeploymentPlan(variant=Variant.coupled, grid_rows=0, grid_cols=0, num_proxy_leaders=0)
        assert validate_plan(plan) is plan
        assert plan.num_acceptors == 3

    def test_majority_compartmentalized_ignores_grid(self):
        plan = DeploymentPlan(acceptor_quorums=QuorumKind.majority, grid_rows=1, grid_cols=1, f=2,
                              num_proposers=3, num_replicas=3, num_proxy_leaders=3)
        assert validate_plan(plan) is plan
        assert plan.num_acceptors == 5

    def test_exhaustive_small_grid(self):
        """计划被接受当且仅当所有下界都满足"""
        for f, proposers, proxies, rows, cols, replicas in itertools.product(
            [1, 2, 3], [1, 2, 3, 4], [1, 2, 4], [1, 2, 3, 4], [1, 2, 3, 4], [1, 2, 3, 4],
        ):
            plan = DeploymentPlan(
                f=f, num_proposers=proposers, num_proxy_leaders=proxies,
                grid_rows=rows, grid_cols=cols, num_replicas=replicas,
            )
            expected = all(v >= f + 1 for v in (proposers, proxies, rows, cols, replicas))
            assert (not plan_violations(plan)) == expected

    def test_variant_is_case_insensitive(self):
        plan = DeploymentPlan.model_validate({"variant": "Coupled"})
        assert plan.variant == Variant.coupled


class TestMachineCount:
    """machine_count 测试类"""

    def test_compartmentalized_counts_every_role(self):
        plan = DeploymentPlan(num_proposers=2, num_proxy_leaders=10, grid_rows=2, grid_cols=2, num_replicas=4)
        assert machine_count(plan) == 2 + 10 + 4 + 4

    def test_coupled_shares_machines(self):
        plan = DeploymentPlan(variant=Variant.coupled, f=1, num_proposers=2, num_replicas=2)
        assert machine_count(plan) == 3

    def test_batchers_counted(self):
        plan = DeploymentPlan(acceptor_quorums=QuorumKind.majority, num_proxy_leaders=2, num_replicas=2,
                              batching_enabled=True, num_batchers=2, num_unbatchers=3)
        assert machine_count(plan) == 2 + 2 + 3 + 2 + 2 + 3

    def test_unreplicated_is_one_machine(self):
        assert machine_count(DeploymentPlan(variant=Variant.unreplicated)) == 1


class TestLoadRunConfig:
    """计划文件加载测试类"""

    def test_sections_are_split_off(self, tmp_path):
        path = tmp_path / "plan.json"
        path.write_text(json.dumps({
            "f": 1,
            "grid_rows": 2,
            "grid_cols": 3,
            "net": {"seed": 3, "drop_probability": 0.1},
            "capacity": {"message_cost": {"proposer": 1.0}},
            "faults": [{"kind": "leader_failover", "at": 100}],
            "workload": {"num_clients": 2, "ops_per_client": 5},
        }))
        config = load_run_config(str(path))
        assert config.plan.grid_cols == 3
        assert config.plan.workload.num_clients == 2
        assert config.net.seed == 3
        assert config.capacity.enabled
        assert config.faults[0].at == 100

    def test_broken_json_is_validation_error(self, tmp_path):
        path = tmp_path / "plan.json"
        path.write_text("{not json")
        with pytest.raises(ValidationError):
            load_run_config(str(path))

    def test_unknown_variant_is_validation_error(self, tmp_path):
        path = tmp_path / "plan.json"
        path.write_text(json.dumps({"variant": "raft"}))
        with pytest.raises(ValidationError):
            load_run_config(str(path))


class TestBallot:
    """选票比较测试类"""

    def test_equal(self):
        assert ballot_compare(Ballot(round=0, proposer_id=0), Ballot(round=0, proposer_id=0)) == 0

    def test_round_dominates(self):
        assert ballot_compare(Ballot(round=1, proposer_id=0), Ballot(round=0, proposer_id=5)) == 1

    def test_proposer_tiebreak(self):
        assert ballot_compare(Ballot(round=2, proposer_id=1), Ballot(round=2, proposer_id=3)) == -1

    def test_total_order_on_samples(self):
        ballots = [Ballot(round=r, proposer_id=p) for r in range(4) for p in range(3)]
        for a, b in itertools.product(ballots, repeat=2):
            assert ballot_compare(a, b) == -ballot_compare(b, a)
            assert (ballot_compare(a, b) == 0) == (a == b)
        for a, b, c in itertools.product(ballots[:6], repeat=3):
            if ballot_compare(a, b) <= 0 and ballot_compare(b, c) <= 0:
                assert ballot_compare(a, c) <= 0

    def test_successor_is_strictly_greater(self):
        b = Ballot(round=3, proposer_id=2)
        nxt = b.successor(0)
        assert nxt > b
        assert nxt.proposer_id == 0
