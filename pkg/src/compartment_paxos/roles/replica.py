"""
副本角色

副本按日志顺序执行选定的批次，槽 s 的回复由编号 s mod n 的副本发出。
读请求在执行水位达到 required_slot 后才执行。
"""
import logging
from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel

from ..config import settings
from ..errors import ProtocolError, SafetyViolationError
from ..models import (
    ABSENT,
    OK_OUTPUT,
    Batch,
    Chosen,
    ClientReply,
    Command,
    LeaderInfo,
    ReadRequest,
    Recover,
    ResultBatch,
    ResultBatchMessage,
    ResultEntry,
    SelectionPolicy,
)
from ..models.state_models import ClientRecord, PendingRead, ReplicaState
from . import registry
from .base_role import BaseRole

logger = logging.getLogger(__name__)

RECOVER_TIMER = "recover"


def replica_apply(kv: Dict[str, str], cmd: Command) -> Tuple[Dict[str, str], Optional[str]]:
    """
    在键值存储上执行一条命令

    Returns:
        (kv', output)：写返回 "OK"，读返回当前值或 ABSENT，Noop 返回 None 且不改变 kv
    """
    op = cmd.op
    if op.type == "write":
        kv[op.key] = op.value
        return kv, OK_OUTPUT
    if op.type == "read":
        return kv, kv.get(op.key, ABSENT)
    return kv, None


def apply_batch(
    kv: Dict[str, str], client_table: Dict[int, ClientRecord], slot: int, batch: Batch
) -> List[ResultEntry]:
    """
    执行一个已选定的批次

    同一 (client_id, seq) 至多执行一次：重复命令返回缓存的回复，更旧的命令直接跳过。

    Returns:
        需要回复的结果条目
    """
    entries: List[ResultEntry] = []
    for cmd in batch.commands:
        if cmd.is_noop:
            continue
        record = client_table.get(cmd.client_id)
        if record is not None and cmd.seq < record.seq:
            continue
        if record is not None and cmd.seq == record.seq:
            entries.append(record.reply)
            continue
        _, output = replica_apply(kv, cmd)
        entry = ResultEntry(client_id=cmd.client_id, seq=cmd.seq, output=output, slot=slot)
        client_table[cmd.client_id] = ClientRecord(seq=cmd.seq, reply=entry)
        entries.append(entry)
    return entries


def replay_prefix(log: Dict[int, Batch], upto: int) -> Dict[str, str]:
    """重放日志前缀 0..upto，得到该前缀执行后的键值状态"""
    kv: Dict[str, str] = {}
    table: Dict[int, ClientRecord] = {}
    for slot in range(upto + 1):
        apply_batch(kv, table, slot, log[slot])
    return kv


def replica_on_chosen(state: ReplicaState, msg: Chosen) -> List[Tuple[int, Batch, List[ResultEntry]]]:
    """
    存入选定值并尽量向前连续执行

    Returns:
        本次执行的 (slot, batch, 结果条目) 列表，按槽顺序

    Raises:
        SafetyViolationError: 同一个槽收到了不同的值
    """
    stored = state.log.get(msg.slot)
    if stored is not None:
        if stored != msg.value:
            raise SafetyViolationError(
                f"replica {state.index} got conflicting values for slot {msg.slot}",
                slot=msg.slot,
                node=registry.replica(state.index),
            )
        return []
    state.log[msg.slot] = msg.value

    executed = []
    while state.executed_watermark + 1 in state.log:
        slot = state.executed_watermark + 1
        batch = state.log[slot]
        entries = apply_batch(state.kv, state.client_table, slot, batch)
        state.executed_watermark = slot
        executed.append((slot, batch, entries))
    return executed


def replica_on_read(state: ReplicaState, read: PendingRead) -> Optional[List[ResultEntry]]:
    """
    执行读请求

    执行水位已达到 required_slot（即使已经超过）时立即执行；否则缓存到 pending_reads。

    Returns:
        立即执行时返回结果条目，缓存时返回 None
    """
    if state.executed_watermark < read.required_slot:
        state.pending_reads.append(read)
        return None
    return _execute_read(state, read)


def _execute_read(state: ReplicaState, read: PendingRead) -> List[ResultEntry]:
    return [
        ResultEntry(
            client_id=cmd.client_id,
            seq=cmd.seq,
            output=state.kv.get(cmd.op.key, ABSENT),
            slot=state.executed_watermark,
        )
        for cmd in read.commands
    ]


class Replica(BaseRole):
    role = "replica"

    def __init__(
        self,
        address: str,
        index: int,
        n: int,
        unbatchers: Optional[List[str]] = None,
        leader: Optional[str] = None,
        proposers: Optional[List[str]] = None,
        rng=None,
    ):
        super().__init__(address, rng)
        self.state = ReplicaState(index=index, n=n)
        self.unbatchers = unbatchers or []
        self.leader = leader or registry.proposer(0)
        self.proposers = proposers or []
        self.responded_slots: List[int] = []
        self._recover_armed = False
        self._recover_attempts = 0
        self._max_logged = -1

    def on_message(self, src: str, msg: BaseModel) -> None:
        match msg:
            case Chosen():
                self.on_chosen(msg)
            case ReadRequest():
                self.on_read(src, msg)
            case LeaderInfo():
                self.leader = msg.leader
            case _:
                raise ProtocolError(f"{self.address} 收到无法处理的消息 {msg.type}")

    def on_chosen(self, msg: Chosen) -> None:
        self._max_logged = max(self._max_logged, msg.slot)
        executed = replica_on_chosen(self.state, msg)
        if executed:
            self._recover_attempts = 0
        for slot, batch, entries in executed:
            if slot % self.state.n != self.state.index or batch.is_noop:
                continue
            self.responded_slots.append(slot)
            if entries:
                self._reply(entries, batched=bool(self.unbatchers))
        self._answer_pending_reads()
        self._maybe_arm_recover()

    def on_read(self, src: str, msg: ReadRequest) -> None:
        if not msg.commands:
            raise ProtocolError(f"{self.address} 收到来自 {src} 的空读请求")
        # 最终一致读没有水位要求，立即对当前前缀执行
        required = -1 if msg.required_slot is None else msg.required_slot
        read = PendingRead(commands=msg.commands, required_slot=required, batched=msg.batched, reply_to=src)
        entries = replica_on_read(self.state, read)
        if entries is None:
            self._maybe_arm_recover()
            return
        self._reply(entries, batched=msg.batched)

    def _answer_pending_reads(self) -> None:
        if not self.state.pending_reads:
            return
        ready = [r for r in self.state.pending_reads if r.required_slot <= self.state.executed_watermark]
        if not ready:
            return
        self.state.pending_reads = [
            r for r in self.state.pending_reads if r.required_slot > self.state.executed_watermark
        ]
        for read in ready:
            self._reply(_execute_read(self.state, read), batched=read.batched)

    def _reply(self, entries: List[ResultEntry], batched: bool) -> None:
        if batched and self.unbatchers:
            unbatcher = self.unbatchers[self.rng.randrange(len(self.unbatchers))]
            self.send(unbatcher, ResultBatchMessage(results=ResultBatch(entries=tuple(entries))))
            return
        for entry in entries:
            self.send(
                registry.client(entry.client_id),
                ClientReply(client_id=entry.client_id, seq=entry.seq, output=entry.output, slot=entry.slot),
            )

    # ---- 补洞 ----

    def _needs_recovery(self) -> bool:
        wm = self.state.executed_watermark
        return bool(self.state.pending_reads) or self._max_logged > wm

    def _maybe_arm_recover(self) -> None:
        if not self.retries_enabled or self._recover_armed or not self._needs_recovery():
            return
        self._recover_armed = True
        self.set_timer(RECOVER_TIMER, settings.sim_recover_interval)

    def on_timer(self, timer_id: str) -> None:
        if timer_id != RECOVER_TIMER:
            return
        self._recover_armed = False
        if not self._needs_recovery():
            return
        slot = self.state.executed_watermark + 1
        self._recover_attempts += 1
        logger.debug(f"{self.address} 请求领导者 {self.leader} 补洞槽 {slot}")
        self.send(self.leader, Recover(slot=slot))
        if self._recover_attempts % 2 == 0:
            # 连续两次没有进展，其余提议者也问一遍；非领导者忽略 Recover
            self.broadcast((p for p in self.proposers if p != self.leader), Recover(slot=slot))
        self._maybe_arm_recover()
