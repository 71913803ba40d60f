"""
批处理器与解批器角色

批处理器把客户端命令按类型分成写批次和读批次：写批次整体发给领导者，
读批次做一轮 PreRead 后整体发给一个副本。解批器把副本的结果批次拆回给各客户端。
"""
import logging
from typing import List, Optional

from pydantic import BaseModel

from ..config import settings
from ..errors import ProtocolError
from ..models import (
    Batch,
    BatchRequest,
    ClientReply,
    ClientRequest,
    LeaderInfo,
    PreRead,
    PreReadAck,
    ReadRequest,
    ResultBatchMessage,
    SelectionPolicy,
)
from ..models.state_models import BatcherState, OutstandingRead
from ..quorums import BaseQuorumSystem
from . import registry
from .base_role import BaseRole
from .client import compute_read_watermark

logger = logging.getLogger(__name__)

WRITE_FLUSH_TIMER = "flush_writes"
READ_FLUSH_TIMER = "flush_reads"


class Batcher(BaseRole):
    role = "batcher"

    def __init__(
        self,
        address: str,
        batch_size: int,
        timeout: int,
        quorums: BaseQuorumSystem,
        replicas: List[str],
        leader: Optional[str] = None,
        read_selection: SelectionPolicy = SelectionPolicy.random,
        rng=None,
    ):
        super().__init__(address, rng)
        self.state = BatcherState(batch_size=batch_size, timeout=timeout)
        self.quorums = quorums
        self.replicas = replicas
        self.leader = leader or registry.proposer(0)
        self.read_selection = read_selection
        self.outstanding: dict = {}
        self._read_counter = 0
        self._replica_cursor = 0
        self.write_batches_sent = 0
        self.read_batches_sent = 0

    def on_message(self, src: str, msg: BaseModel) -> None:
        match msg:
            case ClientRequest():
                self.batcher_on_command(msg)
            case PreReadAck():
                self.on_preread_ack(msg)
            case LeaderInfo():
                self.leader = msg.leader
            case _:
                raise ProtocolError(f"{self.address} 收到无法处理的消息 {msg.type}")

    def batcher_on_command(self, msg: ClientRequest) -> None:
        """
        收集命令，攒满 batch_size 立即发出，空列表收到第一条命令时启动超时定时器
        """
        cmd = msg.command
        if cmd.is_read:
            pending, timer = self.state.pending_reads, READ_FLUSH_TIMER
        else:
            pending, timer = self.state.pending_writes, WRITE_FLUSH_TIMER
        pending.append(cmd)
        if len(pending) >= self.state.batch_size:
            if cmd.is_read:
                self.flush_reads()
            else:
                self.flush_writes()
        elif len(pending) == 1:
            self.set_timer(timer, self.state.timeout)
            if cmd.is_read:
                self.state.read_timer_armed = True
            else:
                self.state.write_timer_armed = True

    def flush_writes(self) -> None:
        if not self.state.pending_writes:
            return
        batch = Batch(commands=tuple(self.state.pending_writes))
        self.state.pending_writes = []
        if self.state.write_timer_armed:
            self.cancel_timer(WRITE_FLUSH_TIMER)
            self.state.write_timer_armed = False
        self.write_batches_sent += 1
        self.send(self.leader, BatchRequest(batch=batch))

    def flush_reads(self) -> None:
        """
        发出读批次：向一个读法定人数发 PreRead，收齐后带着水位把整批读发给一个副本
        """
        if not self.state.pending_reads:
            return
        commands = tuple(self.state.pending_reads)
        self.state.pending_reads = []
        if self.state.read_timer_armed:
            self.cancel_timer(READ_FLUSH_TIMER)
            self.state.read_timer_armed = False
        self._read_counter += 1
        self._start_read_round(f"{self.address}:{self._read_counter}", commands, round_no=0, exclude=())

    def _start_read_round(self, base_id: str, commands, round_no: int, exclude) -> None:
        row = self.quorums.pick_read_quorum(self.rng, exclude=exclude)
        read_id = f"{base_id}:{round_no}"
        self.outstanding[read_id] = OutstandingRead(commands=commands, row=row, round=round_no)
        self.broadcast((registry.acceptor(a) for a in row), PreRead(read_id=read_id))
        if self.retries_enabled:
            self.set_timer(f"read|{read_id}", settings.sim_read_retry_timeout)

    def on_preread_ack(self, msg: PreReadAck) -> None:
        pending = self.outstanding.get(msg.read_id)
        if pending is None or msg.acceptor_id not in pending.row:
            return
        pending.acks[msg.acceptor_id] = msg.vote_watermark
        if len(pending.acks) < len(pending.row):
            return
        del self.outstanding[msg.read_id]
        if self.retries_enabled:
            self.cancel_timer(f"read|{msg.read_id}")
        watermark = compute_read_watermark(pending.acks.values())
        self.read_batches_sent += 1
        self.send(
            self._pick_replica(),
            ReadRequest(commands=pending.commands, required_slot=watermark, batched=True),
        )

    def _pick_replica(self) -> str:
        if self.read_selection == SelectionPolicy.round_robin:
            self._replica_cursor += 1
            return self.replicas[(self._replica_cursor - 1) % len(self.replicas)]
        return self.replicas[self.rng.randrange(len(self.replicas))]

    def on_timer(self, timer_id: str) -> None:
        if timer_id == WRITE_FLUSH_TIMER:
            self.state.write_timer_armed = False
            self.flush_writes()
        elif timer_id == READ_FLUSH_TIMER:
            self.state.read_timer_armed = False
            self.flush_reads()
        elif timer_id.startswith("read|"):
            read_id = timer_id[len("read|"):]
            pending = self.outstanding.pop(read_id, None)
            if pending is None:
                return
            base_id, _, round_no = read_id.rpartition(":")
            logger.debug(f"{self.address} 读批次 {base_id} 的 PreRead 超时，换一个读法定人数")
            self._start_read_round(base_id, pending.commands, int(round_no) + 1, exclude=[frozenset(pending.row)])


class Unbatcher(BaseRole):
    role = "unbatcher"

    def __init__(self, address: str, rng=None):
        super().__init__(address, rng)
        self.batches_received = 0
        self.entries_received = 0
        self.replies_sent = 0

    def on_message(self, src: str, msg: BaseModel) -> None:
        if not isinstance(msg, ResultBatchMessage):
            raise ProtocolError(f"{self.address} 收到无法处理的消息 {msg.type}")
        self.unbatcher_on_result_batch(msg)

    def unbatcher_on_result_batch(self, msg: ResultBatchMessage) -> None:
        """
        每个结果条目发一条回复给对应客户端

        Raises:
            ProtocolError: 结果批次为空
        """
        entries = msg.results.entries
        if not entries:
            raise ProtocolError(f"{self.address} 收到空结果批次")
        self.batches_received += 1
        self.entries_received += len(entries)
        for entry in entries:
            self.send(
                registry.client(entry.client_id),
                ClientReply(client_id=entry.client_id, seq=entry.seq, output=entry.output, slot=entry.slot),
            )
            self.replies_sent += 1
