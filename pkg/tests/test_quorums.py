"""
法定人数系统测试
"""

import itertools
import random

import pytest

from src.compartment_paxos.models import DeploymentPlan, QuorumKind, Variant
from src.compartment_paxos.quorums import GridQuorumSystem, MajorityQuorumSystem, quorum_system_for


class TestGridQuorumSystem:
    """GridQuorumSystem 测试类"""

    def test_read_quorums_2x3(self):
        grid = GridQuorumSystem(2, 3)
        assert grid.read_quorums() == [frozenset({0, 1, 2}), frozenset({3, 4, 5})]

    def test_write_quorums_2x3(self):
        grid = GridQuorumSystem(2, 3)
        assert grid.write_quorums() == [frozenset({0, 3}), frozenset({1, 4}), frozenset({2, 5})]

    def test_2x2(self):
        grid = GridQuorumSystem(2, 2)
        assert grid.read_quorums() == [frozenset({0, 1}), frozenset({2, 3})]
        assert grid.write_quorums() == [frozenset({0, 2}), frozenset({1, 3})]

    def test_3x2_shapes(self):
        grid = GridQuorumSystem(3, 2)
        assert [len(q) for q in grid.read_quorums()] == [2, 2, 2]
        assert [len(q) for q in grid.write_quorums()] == [3, 3]

    def test_is_write_quorum(self):
        grid = GridQuorumSystem(2, 3)
        assert grid.is_write_quorum({0, 3})
        assert not grid.is_write_quorum({0, 1})
        assert grid.is_write_quorum({0, 1, 3})

    def test_row_major_ids(self):
        grid = GridQuorumSystem(3, 4)
        assert sorted(itertools.chain.from_iterable(grid.matrix)) == list(range(12))
        assert grid.row_of(7) == 1
        assert grid.column_of(7) == 3

    def test_exhaustive_intersection(self):
        """r, w ∈ [2,5] 上每一行与每一列都相交"""
        for rows, cols in itertools.product(range(2, 6), repeat=2):
            grid = GridQuorumSystem(rows, cols)
            for read in grid.read_quorums():
                for write in grid.write_quorums():
                    assert read & write

    def test_uniform_column_choice_spreads_load(self):
        """2x3 网格均匀选列时，每个接受者处理约三分之一的命令"""
        grid = GridQuorumSystem(2, 3)
        rng = random.Random(11)
        counts = {a: 0 for a in grid.acceptor_ids}
        total = 10_000
        for _ in range(total):
            for a in grid.pick_write_quorum(rng):
                counts[a] += 1
        for count in counts.values():
            assert abs(count - total / 3) <= 0.1 * total / 3

    def test_pick_respects_exclude(self):
        grid = GridQuorumSystem(2, 2)
        rng = random.Random(0)
        for _ in range(20):
            assert grid.pick_write_quorum(rng, exclude=[frozenset({0, 2})]) == (1, 3)

    def test_pick_falls_back_when_everything_excluded(self):
        grid = GridQuorumSystem(2, 2)
        picked = grid.pick_read_quorum(random.Random(0), exclude=grid.read_quorums())
        assert frozenset(picked) in grid.read_quorums()

    def test_untried_write_quorums(self):
        grid = GridQuorumSystem(2, 3)
        assert grid.untried_write_quorums([frozenset({0, 3})]) == [frozenset({1, 4}), frozenset({2, 5})]

    def test_degenerate_grid_rejected(self):
        with pytest.raises(ValueError):
            GridQuorumSystem(0, 2)


class TestMajorityQuorumSystem:
    """MajorityQuorumSystem 测试类"""

    @pytest.mark.parametrize("f", [1, 2, 3])
    def test_quorums_intersect(self, f: int):
        system = MajorityQuorumSystem(f)
        quorums = system.write_quorums()
        assert all(len(q) == f + 1 for q in quorums)
        for a, b in itertools.product(quorums, repeat=2):
            assert a & b

    def test_read_equals_write(self):
        system = MajorityQuorumSystem(1)
        assert system.read_quorums() == system.write_quorums()
        assert len(system.read_quorums()) == 3

    def test_is_write_quorum_counts_members(self):
        system = MajorityQuorumSystem(2)
        assert system.is_write_quorum({0, 3, 4})
        assert not system.is_write_quorum({0, 4})
        assert not system.is_write_quorum({0, 7, 9})


class TestQuorumSystemFor:
    """按计划构造法定人数系统"""

    def test_grid_plan(self):
        system = quorum_system_for(DeploymentPlan(grid_rows=2, grid_cols=3))
        assert isinstance(system, GridQuorumSystem)
        assert len(system.acceptor_ids) == 6

    def test_majority_plan(self):
        system = quorum_system_for(DeploymentPlan(acceptor_quorums=QuorumKind.majority))
        assert isinstance(system, MajorityQuorumSystem)

    def test_coupled_uses_majority(self):
        system = quorum_system_for(DeploymentPlan(variant=Variant.coupled, f=2, num_proposers=3, num_replicas=3))
        assert isinstance(system, MajorityQuorumSystem)
        assert len(system.acceptor_ids) == 5
