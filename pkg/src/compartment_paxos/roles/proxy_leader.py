"""
代理领导者角色

代理领导者替领导者完成 Phase2 的扇出扇入：把 Phase2a 节俭地只发给一个写法定人数，
收齐该法定人数的 Phase2b 后把选定值广播给所有副本。
"""
import logging
from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel

from ..config import settings
from ..errors import ProtocolError
from ..models import Ballot, Batch, Chosen, Nack, Phase2a, Phase2b
from ..models.state_models import PendingPhase2, ProxyLeaderState
from ..quorums import BaseQuorumSystem
from . import registry
from .base_role import BaseRole, trim_oldest

logger = logging.getLogger(__name__)

PendingKey = Tuple[int, Tuple[int, int]]


def _timer_id(key: PendingKey) -> str:
    slot, (rnd, pid) = key
    return f"phase2:{slot}:{rnd}:{pid}"


def _parse_timer_id(timer_id: str) -> Optional[PendingKey]:
    parts = timer_id.split(":")
    if len(parts) != 4 or parts[0] != "phase2":
        return None
    return int(parts[1]), (int(parts[2]), int(parts[3]))


class ProxyCore:
    """
    Phase2 扇出扇入逻辑

    代理领导者角色和耦合基线中的领导者共用这份逻辑，动作写入宿主角色的 outbox。
    """

    def __init__(self, owner: BaseRole, quorums: BaseQuorumSystem, replicas: List[str]):
        self.owner = owner
        self.quorums = quorums
        self.replicas = replicas
        self.state = ProxyLeaderState()
        # 最近选定的值，重复的 Phase2a 直接重播 Chosen
        self.chosen: Dict[PendingKey, Batch] = {}
        self.gave_up = 0

    def on_phase2a(self, msg: Phase2a, leader: str) -> None:
        """
        转发 Phase2a 到一个随机选择的写法定人数

        同一 (slot, ballot) 的重复 Phase2a 不会重新抽选法定人数。
        """
        key = (msg.slot, msg.ballot.key())
        if key in self.chosen:
            self.owner.broadcast(self.replicas, Chosen(slot=msg.slot, value=self.chosen[key]))
            return
        if key in self.state.pending:
            return

        column = self.quorums.pick_write_quorum(self.owner.rng)
        self.state.pending[key] = PendingPhase2(
            value=msg.value, column=set(column), tried=[column], leader=leader
        )
        self.owner.broadcast((registry.acceptor(a) for a in column), msg)
        if self.owner.retries_enabled:
            self.owner.set_timer(_timer_id(key), settings.sim_proxy_retry_timeout)

    def on_phase2b(self, msg: Phase2b) -> bool:
        """
        记录 Phase2b

        Returns:
            本次确认让该槽被选定时返回 True
        """
        key = (msg.slot, msg.ballot.key())
        pending = self.state.pending.get(key)
        if pending is None or msg.acceptor_id not in pending.column:
            return False
        pending.acks.add(msg.acceptor_id)
        if not self.quorums.is_write_quorum(pending.acks):
            return False

        del self.state.pending[key]
        self.chosen[key] = pending.value
        trim_oldest(self.chosen, settings.retained_slots)
        if self.owner.retries_enabled:
            self.owner.cancel_timer(_timer_id(key))
        self.owner.broadcast(self.replicas, Chosen(slot=msg.slot, value=pending.value))
        return True

    def on_timeout(self, key: PendingKey) -> None:
        """
        换一个尚未尝试过的写法定人数重发 Phase2a

        所有写法定人数都尝试过后放弃该条目，由领导者在副本请求补洞时重新发起。
        """
        pending = self.state.pending.get(key)
        if pending is None:
            return
        untried = self.quorums.untried_write_quorums(pending.tried)
        if not untried:
            del self.state.pending[key]
            self.gave_up += 1
            logger.warning(f"{self.owner.address} 槽 {key[0]} 的所有写法定人数都未响应，放弃")
            return

        column = tuple(sorted(untried[self.owner.rng.randrange(len(untried))]))
        pending.tried.append(column)
        pending.retries_used += 1
        pending.column |= set(column)
        slot, (rnd, pid) = key
        msg = Phase2a(slot=slot, ballot=Ballot(round=rnd, proposer_id=pid), value=pending.value)
        logger.debug(f"{self.owner.address} 槽 {slot} 超时，改发写法定人数 {column}")
        self.owner.broadcast((registry.acceptor(a) for a in column), msg)
        self.owner.set_timer(_timer_id(key), settings.sim_proxy_retry_timeout)

    def on_nack(self, msg: Nack) -> None:
        """选票已被抢占，丢弃对应的待定条目"""
        if msg.slot is None or msg.rejected is None:
            return
        key = (msg.slot, msg.rejected.key())
        if self.state.pending.pop(key, None) is not None and self.owner.retries_enabled:
            self.owner.cancel_timer(_timer_id(key))

    def handle_timer(self, timer_id: str) -> bool:
        key = _parse_timer_id(timer_id)
        if key is None:
            return False
        self.on_timeout(key)
        return True


class ProxyLeader(BaseRole):
    role = "proxy"

    def __init__(self, address: str, quorums: BaseQuorumSystem, replicas: List[str], rng=None):
        super().__init__(address, rng)
        self.core = ProxyCore(self, quorums, replicas)

    @property
    def state(self) -> ProxyLeaderState:
        return self.core.state

    def on_message(self, src: str, msg: BaseModel) -> None:
        match msg:
            case Phase2a():
                self.core.on_phase2a(msg, src)
            case Phase2b():
                self.core.on_phase2b(msg)
            case Nack():
                self.core.on_nack(msg)
                # 转发给被拒绝选票的所有者
                owner = msg.rejected.proposer_id if msg.rejected is not None else None
                if owner is not None:
                    self.send(registry.proposer(owner), msg)
            case _:
                raise ProtocolError(f"{self.address} 收到无法处理的消息 {msg.type}")

    def on_timer(self, timer_id: str) -> None:
        self.core.handle_timer(timer_id)
