"""
法定人数系统抽象基类

读法定人数在 Phase1 和 PreRead 中使用，写法定人数在 Phase2 中使用；
正确性要求任意读法定人数与任意写法定人数相交。
"""
import random
from abc import ABC, abstractmethod
from typing import FrozenSet, Iterable, List, Sequence, Tuple

Quorum = FrozenSet[int]


class BaseQuorumSystem(ABC):
    """法定人数系统，构造后不可变"""

    @property
    @abstractmethod
    def acceptor_ids(self) -> List[int]:
        """所有接受者 id"""
        pass

    @abstractmethod
    def read_quorums(self) -> List[Quorum]:
        pass

    @abstractmethod
    def write_quorums(self) -> List[Quorum]:
        pass

    def is_write_quorum(self, s: Iterable[int]) -> bool:
        """s 是否包含至少一个完整的写法定人数"""
        members = set(s)
        return any(q <= members for q in self.write_quorums())

    def is_read_quorum(self, s: Iterable[int]) -> bool:
        members = set(s)
        return any(q <= members for q in self.read_quorums())

    def pick_read_quorum(self, rng: random.Random, exclude: Sequence[Quorum] = ()) -> Tuple[int, ...]:
        """
        随机选择一个读法定人数

        Args:
            rng: 调用方的种子随机源
            exclude: 优先避开的法定人数，全部都被避开时退回到完整集合

        Returns:
            按 id 排序的成员元组
        """
        return _pick(self.read_quorums(), rng, exclude)

    def pick_write_quorum(self, rng: random.Random, exclude: Sequence[Quorum] = ()) -> Tuple[int, ...]:
        return _pick(self.write_quorums(), rng, exclude)

    def untried_write_quorums(self, tried: Sequence[Quorum]) -> List[Quorum]:
        tried_set = {frozenset(q) for q in tried}
        return [q for q in self.write_quorums() if q not in tried_set]


def _pick(quorums: List[Quorum], rng: random.Random, exclude: Sequence[Quorum]) -> Tuple[int, ...]:
    excluded = {frozenset(q) for q in exclude}
    candidates = [q for q in quorums if q not in excluded] or quorums
    return tuple(sorted(candidates[rng.randrange(len(candidates))]))
