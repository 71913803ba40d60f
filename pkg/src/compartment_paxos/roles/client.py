"""
客户端会话

闭环客户端：同一时刻只有一个未完成的操作，收到回复后才发出下一个。
读操作按一致性级别分三条路径：

- linearizable: 向一个读法定人数发 PreRead，取投票水位最大值 i，再带着 i 向任一副本读
- sequential: 带着本地水位直接向任一副本读，一次往返
- eventual: 直接向任一副本读，副本立即对当前前缀执行
"""
import logging
from typing import Callable, Iterable, Iterator, List, Optional

from pydantic import BaseModel

from ..config import settings
from ..errors import ProtocolError
from ..models import (
    ClientReply,
    ClientRequest,
    Command,
    LeaderInfo,
    PreRead,
    PreReadAck,
    ReadConsistency,
    ReadObservation,
    ReadRequest,
    SelectionPolicy,
)
from ..models.command_models import Op
from ..models.state_models import ClientReadState, OutstandingRead
from ..quorums import BaseQuorumSystem
from . import registry
from .base_role import BaseRole

logger = logging.getLogger(__name__)

RETRY_TIMER = "retry"


def compute_read_watermark(watermarks: Iterable[int]) -> int:
    """
    读水位：一个完整读法定人数返回的投票水位的最大值

    Raises:
        ValueError: 没有任何确认
    """
    values = list(watermarks)
    if not values:
        raise ValueError("compute_read_watermark needs the acks of a full read quorum")
    return max(values)


class ClientSession(BaseRole):
    """
    客户端会话

    Args:
        address: 节点地址 "client/<id>"
        client_id: 客户端编号
        ops: 操作流；为 None 时只通过 submit 外部驱动
        level: 读一致性级别
        quorums: 接受者法定人数系统；非复制变体为 None
        replicas: 读请求的目标副本（非复制变体为服务器）
        leader: 写请求的目标
        batchers: 开启批处理时的批处理器地址
        proposers: 全部提议者地址；写请求重试时轮流尝试
        read_selection: 副本选择策略
        on_invoke / on_complete: 宿主的历史记录回调
    """
    role = "client"

    def __init__(
        self,
        address: str,
        client_id: int,
        ops: Optional[Iterable[Op]],
        level: ReadConsistency,
        quorums: Optional[BaseQuorumSystem],
        replicas: List[str],
        leader: str,
        batchers: Optional[List[str]] = None,
        read_selection: SelectionPolicy = SelectionPolicy.random,
        proposers: Optional[List[str]] = None,
        on_invoke: Optional[Callable[[Command, int], None]] = None,
        on_complete: Optional[Callable[[Command, ClientReply, int], None]] = None,
        rng=None,
    ):
        super().__init__(address, rng)
        self.client_id = client_id
        self.ops: Optional[Iterator[Op]] = iter(ops) if ops is not None else None
        self.read_state = ClientReadState(level=level)
        self.quorums = quorums
        self.replicas = replicas
        self.leader = leader
        self.batchers = batchers or []
        self.proposers = proposers or []
        self.read_selection = read_selection
        self.on_invoke = on_invoke
        self.on_complete = on_complete
        self.listener: Optional[Callable[[Command, ClientReply], None]] = None

        self.seq = -1
        self.current: Optional[Command] = None
        self.invoke_time = 0
        self.attempts = 0
        self.exhausted = ops is None
        self.observations: List[ReadObservation] = []
        self._min_read_watermark: Optional[int] = None
        self._seq_required = -1
        self._replica_cursor = client_id

    @property
    def done(self) -> bool:
        return self.exhausted and self.current is None

    @property
    def busy(self) -> bool:
        return self.current is not None

    # ---- 发起操作 ----

    def start(self, now: int) -> None:
        self.now = now
        self._issue_next()

    def _issue_next(self) -> None:
        if self.ops is None or self.exhausted:
            return
        op = next(self.ops, None)
        if op is None:
            self.exhausted = True
            return
        self.submit(op)

    def submit(self, op: Op) -> Command:
        """
        发起一个操作

        Raises:
            ProtocolError: 上一个操作尚未完成
        """
        if self.current is not None:
            raise ProtocolError(f"{self.address} 已有未完成的操作 {self.current.seq}")
        self.seq += 1
        cmd = Command(client_id=self.client_id, seq=self.seq, op=op)
        self.current = cmd
        self.invoke_time = self.now
        self.attempts = 0
        self._min_read_watermark = None
        self._seq_required = self.read_state.seq_watermark
        if self.on_invoke is not None:
            self.on_invoke(cmd, self.now)
        self._dispatch(cmd)
        return cmd

    def abandon(self) -> Optional[Command]:
        """
        放弃当前操作：停止重试，之后到达的旧回复因序号不匹配被忽略

        Returns:
            被放弃的命令；没有未完成操作时为 None
        """
        cmd = self.current
        if cmd is None:
            return None
        logger.info(f"{self.address} 放弃操作 {cmd.seq}，已重试 {self.attempts} 次")
        self.current = None
        self.read_state.outstanding.clear()
        if self.retries_enabled:
            self.cancel_timer(RETRY_TIMER)
        return cmd

    def _dispatch(self, cmd: Command) -> None:
        if cmd.is_write:
            self._send_write(cmd)
        else:
            level = self.read_state.level
            if level == ReadConsistency.linearizable:
                self.client_linearizable_read(cmd)
            elif level == ReadConsistency.sequential:
                self.client_sequential_read(cmd)
            else:
                self.client_eventual_read(cmd)
        if self.retries_enabled:
            timeout = settings.sim_client_retry_timeout if cmd.is_write else settings.sim_read_retry_timeout
            self.set_timer(RETRY_TIMER, timeout)

    def _send_write(self, cmd: Command) -> None:
        if self.batchers:
            target = self.batchers[(self.client_id + self.attempts) % len(self.batchers)]
        elif self.attempts % 2 == 1 and self.proposers:
            # 奇数次重试轮流发给各个提议者
            target = self.proposers[(self.attempts // 2) % len(self.proposers)]
        else:
            target = self.leader
        self.send(target, ClientRequest(command=cmd))

    def client_linearizable_read(self, cmd: Command) -> None:
        """
        线性一致读

        批处理模式下交给批处理器；否则自己做一轮 PreRead。重试时整轮重来，旧轮次的确认被丢弃。
        """
        if self.batchers:
            batcher = self.batchers[(self.client_id + self.attempts) % len(self.batchers)]
            self.send(batcher, ClientRequest(command=cmd))
            return
        if self.quorums is None:
            # 非复制变体：服务器本身就是唯一的副本
            self.send(self.replicas[0], ReadRequest(commands=(cmd,), required_slot=-1))
            return
        previous = [frozenset(r.row) for r in self.read_state.outstanding.values()]
        self.read_state.outstanding.clear()
        row = self.quorums.pick_read_quorum(self.rng, exclude=previous)
        read_id = f"{self.client_id}:{cmd.seq}:{self.attempts}"
        self.read_state.outstanding[read_id] = OutstandingRead(commands=(cmd,), row=row, round=self.attempts)
        self.broadcast((registry.acceptor(a) for a in row), PreRead(read_id=read_id))

    def client_sequential_read(self, cmd: Command) -> None:
        """带着本地水位向任一副本读"""
        self.send(
            self._pick_replica(),
            ReadRequest(commands=(cmd,), required_slot=self.read_state.seq_watermark),
        )

    def client_eventual_read(self, cmd: Command) -> None:
        self.send(self._pick_replica(), ReadRequest(commands=(cmd,), required_slot=None))

    def _pick_replica(self) -> str:
        if self.read_selection == SelectionPolicy.round_robin:
            self._replica_cursor += 1
            return self.replicas[(self._replica_cursor - 1) % len(self.replicas)]
        return self.replicas[self.rng.randrange(len(self.replicas))]

    # ---- 接收 ----

    def on_message(self, src: str, msg: BaseModel) -> None:
        match msg:
            case ClientReply():
                self.on_reply(msg)
            case PreReadAck():
                self.on_preread_ack(msg)
            case LeaderInfo():
                self.leader = msg.leader
            case _:
                raise ProtocolError(f"{self.address} 收到无法处理的消息 {msg.type}")

    def on_preread_ack(self, msg: PreReadAck) -> None:
        pending = self.read_state.outstanding.get(msg.read_id)
        if pending is None or msg.acceptor_id not in pending.row:
            return
        pending.acks[msg.acceptor_id] = msg.vote_watermark
        if len(pending.acks) < len(pending.row):
            return
        del self.read_state.outstanding[msg.read_id]
        watermark = compute_read_watermark(pending.acks.values())
        if self._min_read_watermark is None or watermark < self._min_read_watermark:
            self._min_read_watermark = watermark
        self.send(self._pick_replica(), ReadRequest(commands=pending.commands, required_slot=watermark))

    def on_reply(self, msg: ClientReply) -> None:
        cmd = self.current
        if cmd is None or msg.seq != cmd.seq or msg.client_id != self.client_id:
            return
        self.current = None
        self.read_state.outstanding.clear()
        if self.retries_enabled:
            self.cancel_timer(RETRY_TIMER)

        level = self.read_state.level
        if cmd.is_write or level == ReadConsistency.sequential:
            self.read_state.seq_watermark = max(self.read_state.seq_watermark, msg.slot)
        if cmd.is_read:
            required = self._min_read_watermark
            if level == ReadConsistency.sequential:
                required = self._seq_required
            self.observations.append(ReadObservation(
                client=self.client_id,
                seq=cmd.seq,
                level=level.value,
                key=cmd.op.key,
                output=msg.output,
                required_slot=required,
                observed_slot=msg.slot,
                invoke_time=self.invoke_time,
                batched=bool(self.batchers) and level == ReadConsistency.linearizable,
            ))

        if self.on_complete is not None:
            self.on_complete(cmd, msg, self.now)
        if self.listener is not None:
            self.listener(cmd, msg)
        self._issue_next()

    def on_timer(self, timer_id: str) -> None:
        if timer_id != RETRY_TIMER or self.current is None:
            return
        self.attempts += 1
        logger.debug(f"{self.address} 操作 {self.current.seq} 超时，第 {self.attempts} 次重试")
        self._dispatch(self.current)
