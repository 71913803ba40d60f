"""
2f+1 个接受者上的多数派法定人数系统，读写法定人数都是所有 f+1 元子集
"""
from itertools import combinations
from typing import Iterable, List

from .base_quorum_system import BaseQuorumSystem, Quorum


class MajorityQuorumSystem(BaseQuorumSystem):

    def __init__(self, f: int):
        if f < 0:
            raise ValueError(f"f must be non-negative, got {f}")
        self.f = f
        self.size = 2 * f + 1
        self._quorums = [frozenset(c) for c in combinations(range(self.size), f + 1)]

    @property
    def acceptor_ids(self) -> List[int]:
        return list(range(self.size))

    def read_quorums(self) -> List[Quorum]:
        return list(self._quorums)

    def write_quorums(self) -> List[Quorum]:
        return list(self._quorums)

    def is_write_quorum(self, s: Iterable[int]) -> bool:
        return len(set(s) & set(range(self.size))) >= self.f + 1

    def is_read_quorum(self, s: Iterable[int]) -> bool:
        return self.is_write_quorum(s)

    def __repr__(self) -> str:
        return f"MajorityQuorumSystem(n={self.size})"
