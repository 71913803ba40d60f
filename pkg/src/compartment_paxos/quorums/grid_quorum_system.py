"""
r x w 网格法定人数系统

接受者按行优先编号 id = row * w + col。每一行是读法定人数，每一列是写法定人数，
任意行与任意列恰好相交于一个接受者。
"""
from typing import List

from .base_quorum_system import BaseQuorumSystem, Quorum


class GridQuorumSystem(BaseQuorumSystem):

    def __init__(self, rows: int, cols: int):
        if rows < 1 or cols < 1:
            raise ValueError(f"grid must be at least 1x1, got {rows}x{cols}")
        self.rows = rows
        self.cols = cols
        self.matrix: List[List[int]] = [
            [row * cols + col for col in range(cols)] for row in range(rows)
        ]
        self._read = [frozenset(row) for row in self.matrix]
        self._write = [frozenset(self.matrix[row][col] for row in range(rows)) for col in range(cols)]

    @property
    def acceptor_ids(self) -> List[int]:
        return list(range(self.rows * self.cols))

    def read_quorums(self) -> List[Quorum]:
        return list(self._read)

    def write_quorums(self) -> List[Quorum]:
        return list(self._write)

    def column_of(self, acceptor_id: int) -> int:
        return acceptor_id % self.cols

    def row_of(self, acceptor_id: int) -> int:
        return acceptor_id // self.cols

    def __repr__(self) -> str:
        return f"GridQuorumSystem({self.rows}x{self.cols})"
