"""
提议者（领导者）角色

领导者按到达顺序为命令分配日志槽并发起 Phase2。耦合基线中领导者自己向接受者广播
Phase2a、收集 Phase2b 并通知副本；分区化变体中这些工作交给随机选中的代理领导者。
"""
import logging
from typing import Dict, List, Optional

from pydantic import BaseModel

from ..config import settings
from ..errors import BallotNotHigherError, ProtocolError
from ..models import (
    Ballot,
    Batch,
    BatchRequest,
    ClientRequest,
    LeaderInfo,
    Nack,
    Phase1a,
    Phase1b,
    Phase2a,
    Phase2b,
    Recover,
    SelectionPolicy,
    Vote,
)
from ..models.state_models import LeaderPhase, LeaderState
from ..quorums import BaseQuorumSystem
from . import registry
from .base_role import BaseRole, trim_oldest
from .proxy_leader import ProxyCore

logger = logging.getLogger(__name__)

PHASE1_TIMER = "phase1"


def merge_phase1_votes(responses: List[Phase1b]) -> Dict[int, Vote]:
    """每个槽取选票最高的投票"""
    best: Dict[int, Vote] = {}
    for response in responses:
        for slot, vote in response.votes.items():
            current = best.get(slot)
            if current is None or vote.ballot > current.ballot:
                best[slot] = vote
    return best


class Proposer(BaseRole):
    """
    提议者

    Args:
        address: 节点地址
        index: 提议者编号，也是其选票的 proposer_id
        quorums: 接受者法定人数系统
        proxies: 代理领导者地址；为空时为耦合基线，领导者直接联系接受者
        replicas: 副本地址
        followers: 新领导者完成 Phase1 后需要通知的节点
        proxy_selection: 代理领导者选择策略
    """
    role = "proposer"

    def __init__(
        self,
        address: str,
        index: int,
        quorums: BaseQuorumSystem,
        proxies: List[str],
        replicas: List[str],
        followers: Optional[List[str]] = None,
        proxy_selection: SelectionPolicy = SelectionPolicy.random,
        rng=None,
    ):
        super().__init__(address, rng)
        self.index = index
        self.quorums = quorums
        self.proxies = proxies
        self.replicas = replicas
        self.followers = followers or []
        self.proxy_selection = proxy_selection
        self.state = LeaderState(ballot=Ballot(round=0, proposer_id=index))
        self.known_ballot = Ballot(round=0, proposer_id=0)
        self.coupled = not proxies
        self.core: Optional[ProxyCore] = ProxyCore(self, quorums, replicas) if self.coupled else None
        if index == 0:
            # 初始领导者持有最小选票 (0,0)，不可能有更低的选票投过票
            self.state.phase = LeaderPhase.phase2

    @property
    def is_leader(self) -> bool:
        return self.state.phase == LeaderPhase.phase2

    def next_ballot(self) -> Ballot:
        """属于本提议者且高于所有已知选票的最小选票"""
        top = max(self.known_ballot, self.state.ballot)
        return Ballot(round=top.round + 1, proposer_id=self.index)

    def on_message(self, src: str, msg: BaseModel) -> None:
        match msg:
            case ClientRequest():
                self.on_client_request(Batch.of(msg.command), src)
            case BatchRequest():
                if len(msg.batch) == 0:
                    raise ProtocolError(f"{self.address} 收到来自 {src} 的空批次")
                self.on_client_request(msg.batch, src)
            case Phase1b():
                self.on_phase1b(msg)
            case Phase2b() if self.core is not None:
                self.core.on_phase2b(msg)
            case Nack():
                self.on_nack(msg)
            case Recover():
                self.on_recover(msg.slot)
            case LeaderInfo():
                self.on_leader_info(msg)
            case _:
                raise ProtocolError(f"{self.address} 收到无法处理的消息 {msg.type}")

    def on_timer(self, timer_id: str) -> None:
        if timer_id == PHASE1_TIMER:
            self.on_phase1_timeout()
        elif self.core is not None:
            self.core.handle_timer(timer_id)

    # ---- Phase2 ----

    def on_client_request(self, batch: Batch, src: str = "") -> None:
        """
        为命令（或批次）分配下一个日志槽并发出 Phase2a

        Phase1 期间请求被缓存；非领导者丢弃请求，并把已知领导者告诉发送方。
        """
        if self.state.phase == LeaderPhase.phase1:
            self.state.buffered.append(batch)
            return
        if self.state.phase != LeaderPhase.phase2:
            logger.debug(f"{self.address} 不是领导者，丢弃来自 {src} 的请求")
            if src and self.known_ballot > self.state.ballot:
                self.send(src, LeaderInfo(
                    ballot=self.known_ballot, leader=registry.proposer(self.known_ballot.proposer_id)
                ))
            return

        slot = self.state.next_slot
        self.state.next_slot += 1
        self.propose(slot, batch)

    def propose(self, slot: int, value: Batch) -> None:
        self.state.proposed[slot] = value
        trim_oldest(self.state.proposed, settings.retained_slots)
        msg = Phase2a(slot=slot, ballot=self.state.ballot, value=value)
        if self.core is not None:
            self.core.on_phase2a(msg, self.address)
        else:
            self.send(self.pick_proxy(), msg)

    def pick_proxy(self) -> str:
        if self.proxy_selection == SelectionPolicy.round_robin:
            proxy = self.proxies[self.state.pending_proxy_index % len(self.proxies)]
            self.state.pending_proxy_index += 1
            return proxy
        return self.proxies[self.rng.randrange(len(self.proxies))]

    def on_recover(self, slot: int) -> None:
        """副本请求补洞：重发本选票下该槽提议过的值"""
        if self.state.phase != LeaderPhase.phase2:
            return
        value = self.state.proposed.get(slot)
        if value is None:
            logger.debug(f"{self.address} 没有槽 {slot} 的提议记录，忽略补洞请求")
            return
        logger.debug(f"{self.address} 重发槽 {slot}")
        self.propose(slot, value)

    def on_nack(self, msg: Nack) -> None:
        if msg.ballot > self.known_ballot:
            self.known_ballot = msg.ballot
        if self.core is not None:
            self.core.on_nack(msg)
        if msg.ballot > self.state.ballot and self.state.phase != LeaderPhase.inactive:
            logger.warning(f"{self.address} 选票 {self.state.ballot} 被 {msg.ballot} 抢占，退位")
            self.state.phase = LeaderPhase.inactive
            self.state.buffered.clear()
            self.cancel_timer(PHASE1_TIMER)

    def on_leader_info(self, msg: LeaderInfo) -> None:
        if msg.ballot > self.known_ballot:
            self.known_ballot = msg.ballot
        if msg.ballot > self.state.ballot and self.state.phase != LeaderPhase.inactive:
            logger.info(f"{self.address} 得知新领导者 {msg.leader}，退位")
            self.state.phase = LeaderPhase.inactive

    # ---- Phase1 ----

    def leader_elect(self, ballot: Ballot) -> None:
        """
        以更高的选票发起 Phase1

        Phase1a 从槽 0 开始，发给一个完整的读法定人数。

        Raises:
            BallotNotHigherError: ballot 不高于当前选票
        """
        if not ballot > self.state.ballot:
            raise BallotNotHigherError(f"ballot {ballot} is not higher than {self.state.ballot}")
        logger.info(f"{self.address} 以选票 {ballot} 发起选举")
        self.state.ballot = ballot
        self.state.phase = LeaderPhase.phase1
        self.state.phase1_responses = {}
        self.state.phase1_tried = set()
        self.state.proposed = {}
        if ballot > self.known_ballot:
            self.known_ballot = ballot
        self._send_phase1a()

    def _send_phase1a(self) -> None:
        row = self.quorums.pick_read_quorum(
            self.rng, exclude=[frozenset(q) for q in self.state.phase1_tried]
        )
        self.state.phase1_quorum = row
        self.state.phase1_tried.add(row)
        self.broadcast(
            (registry.acceptor(a) for a in row),
            Phase1a(ballot=self.state.ballot, from_slot=0),
        )
        if self.retries_enabled:
            self.set_timer(PHASE1_TIMER, settings.sim_phase1_retry_timeout)

    def on_phase1_timeout(self) -> None:
        if self.state.phase != LeaderPhase.phase1:
            return
        logger.info(f"{self.address} Phase1 超时，换一个读法定人数")
        self._send_phase1a()

    def on_phase1b(self, msg: Phase1b) -> None:
        """
        收集 Phase1b，读法定人数到齐后恢复日志并进入 Phase2

        每个不超过最大已报告投票槽的槽，重新提议选票最高的投票值；
        读法定人数中无人投票的槽填 Noop。
        """
        if self.state.phase != LeaderPhase.phase1 or msg.ballot != self.state.ballot:
            return
        self.state.phase1_responses[msg.acceptor_id] = msg
        if not self.quorums.is_read_quorum(self.state.phase1_responses.keys()):
            return

        if self.retries_enabled:
            self.cancel_timer(PHASE1_TIMER)
        best = merge_phase1_votes(list(self.state.phase1_responses.values()))
        max_slot = max(best.keys(), default=-1)
        # 本提议者以前分配过但无人投票的槽也要补齐，否则副本会卡在空洞上
        end = max(max_slot + 1, self.state.next_slot)
        self.state.phase = LeaderPhase.phase2
        self.state.next_slot = end
        recovered = 0
        for slot in range(end):
            vote = best.get(slot)
            value = vote.value if vote is not None else Batch.noop()
            recovered += vote is not None
            self.propose(slot, value)
        logger.info(
            f"{self.address} 完成 Phase1，恢复 {recovered} 个槽，"
            f"填充 {end - recovered} 个 Noop，next_slot={end}"
        )

        self.broadcast(self.followers, LeaderInfo(ballot=self.state.ballot, leader=self.address))
        buffered, self.state.buffered = self.state.buffered, []
        for batch in buffered:
            self.on_client_request(batch)
