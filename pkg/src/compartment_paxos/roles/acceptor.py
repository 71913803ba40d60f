"""
接受者角色

接受者只被动响应 Phase1a、Phase2a 和 PreRead，状态包括承诺的选票、各槽投票和投票水位。
"""
import logging
from typing import List, Tuple, Union

from pydantic import BaseModel

from ..errors import ProtocolError
from ..models import Ballot, Batch, Nack, Phase1a, Phase1b, Phase2a, Phase2b, PreRead, PreReadAck, Vote
from ..models.state_models import AcceptorState
from .base_role import BaseRole

logger = logging.getLogger(__name__)


def acceptor_on_phase1a(state: AcceptorState, msg: Phase1a, acceptor_id: int) -> Union[Phase1b, Nack]:
    """
    处理 Phase1a

    选票高于已承诺的选票时更新承诺，并返回 from_slot 及以上的全部投票；
    与已承诺选票相同的重发也按承诺处理。否则返回携带当前承诺的 Nack。
    """
    promised = state.promised_ballot
    if promised is not None and msg.ballot < promised:
        return Nack(ballot=promised, rejected=msg.ballot)
    state.promised_ballot = msg.ballot
    votes = {slot: vote for slot, vote in state.votes.items() if slot >= msg.from_slot}
    return Phase1b(ballot=msg.ballot, acceptor_id=acceptor_id, votes=votes)


def acceptor_on_phase2a(state: AcceptorState, msg: Phase2a, acceptor_id: int) -> Union[Phase2b, Nack]:
    """
    处理 Phase2a

    选票不低于已承诺选票时记录投票并推进投票水位，然后才返回 Phase2b。
    """
    promised = state.promised_ballot
    if promised is not None and msg.ballot < promised:
        return Nack(ballot=promised, slot=msg.slot, rejected=msg.ballot)
    state.promised_ballot = msg.ballot
    state.votes[msg.slot] = Vote(ballot=msg.ballot, value=msg.value)
    if msg.slot > state.vote_watermark:
        state.vote_watermark = msg.slot
    return Phase2b(slot=msg.slot, ballot=msg.ballot, acceptor_id=acceptor_id)


def acceptor_on_preread(state: AcceptorState, msg: PreRead, acceptor_id: int) -> PreReadAck:
    """返回当前投票水位，不修改状态"""
    return PreReadAck(read_id=msg.read_id, acceptor_id=acceptor_id, vote_watermark=state.vote_watermark)


class Acceptor(BaseRole):
    role = "acceptor"

    def __init__(self, address: str, acceptor_id: int, rng=None):
        super().__init__(address, rng)
        self.acceptor_id = acceptor_id
        self.state = AcceptorState()
        # (slot, ballot, value) 按投票顺序记录，供审计检查一致性
        self.vote_log: List[Tuple[int, Ballot, Batch]] = []
        self.watermark_log: List[int] = []

    def on_message(self, src: str, msg: BaseModel) -> None:
        match msg:
            case Phase1a():
                reply = acceptor_on_phase1a(self.state, msg, self.acceptor_id)
                if isinstance(reply, Nack):
                    logger.debug(f"{self.address} 拒绝 Phase1a {msg.ballot}，已承诺 {reply.ballot}")
                self.send(src, reply)
            case Phase2a():
                reply = acceptor_on_phase2a(self.state, msg, self.acceptor_id)
                if isinstance(reply, Phase2b):
                    self.vote_log.append((msg.slot, msg.ballot, msg.value))
                    self.watermark_log.append(self.state.vote_watermark)
                self.send(src, reply)
            case PreRead():
                reply = acceptor_on_preread(self.state, msg, self.acceptor_id)
                self.watermark_log.append(reply.vote_watermark)
                self.send(src, reply)
            case _:
                raise ProtocolError(f"{self.address} 收到无法处理的消息 {msg.type}")
