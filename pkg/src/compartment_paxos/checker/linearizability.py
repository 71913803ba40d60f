"""
键值历史的线性一致性与顺序一致性检查

Wing-Gong 式回溯搜索：每一步从“可以最先线性化”的操作中选一个在当前状态上执行，
失败的 (已完成集合, 键值状态) 组合记入备忘，避免重复搜索。
未完成的读总是丢弃；未完成的写既可以线性化，也可以丢弃。
"""
import logging
import sys
from typing import Dict, FrozenSet, List, Optional, Set, Tuple

from ..config import settings
from ..errors import CheckerCapacityError
from ..models import HistoryEvent, Operation, Verdict
from .history import build_operations

logger = logging.getLogger(__name__)

State = Dict[str, str]
MemoKey = Tuple[int, FrozenSet[Tuple[str, str]]]


def _freeze(state: State) -> FrozenSet[Tuple[str, str]]:
    return frozenset(state.items())


def _step(op: Operation, state: State) -> Optional[State]:
    """在 state 上执行 op；读结果与 state 不符时返回 None"""
    if op.is_read:
        return state if state.get(op.op.key) == op.out else None
    if state.get(op.op.key) == op.op.value:
        return state
    new_state = dict(state)
    new_state[op.op.key] = op.op.value
    return new_state


def _relevant(ops: List[Operation]) -> List[Operation]:
    # 未完成的读没有可观察的效果
    return [op for op in ops if not (op.pending and op.is_read)]


def _check_bound(ops: List[Operation], max_ops: Optional[int]) -> None:
    bound = settings.checker_max_ops if max_ops is None else max_ops
    if len(ops) > bound:
        raise CheckerCapacityError(len(ops), bound)


def _search_linearization(ops: List[Operation]) -> Optional[List[Operation]]:
    """返回一个合法的线性化顺序，不存在时返回 None"""
    n = len(ops)
    required = 0
    for i, op in enumerate(ops):
        if not op.pending:
            required |= 1 << i
    failed: Set[MemoKey] = set()
    order: List[int] = []

    def search(done: int, state: State) -> bool:
        if done & required == required:
            return True
        key = (done, _freeze(state))
        if key in failed:
            return False
        # 尚未线性化的已完成操作中最早的响应位置；只有在它之前调用的操作能排在下一个
        frontier = min(
            (ops[i].res_idx for i in range(n) if not done >> i & 1 and not ops[i].pending),
        )
        for i in range(n):
            if done >> i & 1:
                continue
            op = ops[i]
            if op.inv_idx > frontier:
                break
            next_state = _step(op, state)
            if next_state is None:
                continue
            order.append(i)
            if search(done | 1 << i, next_state):
                return True
            order.pop()
        failed.add(key)
        return False

    limit = sys.getrecursionlimit()
    if n + 100 > limit:
        sys.setrecursionlimit(n + 100)
    try:
        if search(0, {}):
            return [ops[i] for i in order]
        return None
    finally:
        sys.setrecursionlimit(limit)


def _search_sequential(ops: List[Operation]) -> Optional[List[Operation]]:
    """只要求每个客户端的程序顺序"""
    by_client: Dict[int, List[Operation]] = {}
    for op in ops:
        by_client.setdefault(op.client, []).append(op)
    clients = sorted(by_client)
    lanes = [by_client[c] for c in clients]
    # 每个客户端末尾的未完成写可以不线性化
    must = [len(lane) - (1 if lane and lane[-1].pending else 0) for lane in lanes]
    failed: Set[Tuple[Tuple[int, ...], FrozenSet[Tuple[str, str]]]] = set()
    order: List[Operation] = []

    def search(pos: Tuple[int, ...], state: State) -> bool:
        if all(p >= m for p, m in zip(pos, must)):
            return True
        key = (pos, _freeze(state))
        if key in failed:
            return False
        for lane_idx, lane in enumerate(lanes):
            p = pos[lane_idx]
            if p >= len(lane):
                continue
            next_state = _step(lane[p], state)
            if next_state is None:
                continue
            order.append(lane[p])
            if search(pos[:lane_idx] + (p + 1,) + pos[lane_idx + 1:], next_state):
                return True
            order.pop()
        failed.add(key)
        return False

    limit = sys.getrecursionlimit()
    if len(ops) + 100 > limit:
        sys.setrecursionlimit(len(ops) + 100)
    try:
        if search(tuple(0 for _ in lanes), {}):
            return list(order)
        return None
    finally:
        sys.setrecursionlimit(limit)


def _minimize(ops: List[Operation], search) -> List[Operation]:
    """
    缩小违例：先按键局部性找一个自身就违例的键，再逐个尝试删除已完成的操作
    """
    keys = sorted({op.op.key for op in ops})
    subset = ops
    for key in keys:
        candidate = [op for op in ops if op.op.key == key]
        if search(candidate) is None:
            subset = candidate
            break
    i = 0
    while i < len(subset):
        trial = subset[:i] + subset[i + 1:]
        if trial and search(trial) is None:
            subset = trial
        else:
            i += 1
    return subset


def _operations(history) -> List[Operation]:
    if history and isinstance(history[0], HistoryEvent):
        return build_operations(history)
    return list(history)


def check_linearizable(history, max_ops: Optional[int] = None) -> Verdict:
    """
    检查历史是否线性一致

    Args:
        history: 事件列表或已配对的操作列表
        max_ops: 穷举搜索允许的最大操作数，默认 settings.checker_max_ops

    Returns:
        Verdict：ok 时附带线性化见证，否则附带缩小后的违例操作子集

    Raises:
        CheckerCapacityError: 操作数超过上限
        HistoryFormatError: 历史格式不合法
    """
    ops = _operations(history)
    _check_bound(ops, max_ops)
    relevant = _relevant(ops)
    witness = _search_linearization(relevant)
    if witness is not None:
        return Verdict(ok=True, witness=witness)
    violation = _minimize(relevant, _search_linearization)
    logger.info(f"历史不可线性化，违例子集 {len(violation)} 个操作")
    return Verdict(ok=False, violation=violation)


def check_sequential(history, max_ops: Optional[int] = None) -> Verdict:
    """
    检查历史是否顺序一致：存在一个尊重每个客户端程序顺序的合法顺序执行

    Raises:
        CheckerCapacityError: 操作数超过上限
    """
    ops = _operations(history)
    _check_bound(ops, max_ops)
    relevant = _relevant(ops)
    witness = _search_sequential(relevant)
    if witness is not None:
        return Verdict(ok=True, witness=witness)
    return Verdict(ok=False, violation=_minimize(relevant, _search_sequential))
