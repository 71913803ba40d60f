"""
非复制状态机服务器

单台服务器直接执行命令并回复，没有容错能力，作为可达性能的上界。
"""
import logging
from typing import Dict, List

from pydantic import BaseModel

from ..errors import ProtocolError
from ..models import Batch, ClientReply, ClientRequest, ReadRequest
from ..models.state_models import ClientRecord
from . import registry
from .base_role import BaseRole
from .replica import apply_batch

logger = logging.getLogger(__name__)


class UnreplicatedServer(BaseRole):
    role = "server"

    def __init__(self, address: str, rng=None):
        super().__init__(address, rng)
        self.kv: Dict[str, str] = {}
        self.client_table: Dict[int, ClientRecord] = {}
        self.log: Dict[int, Batch] = {}
        self.next_slot = 0

    @property
    def executed_watermark(self) -> int:
        return self.next_slot - 1

    def on_message(self, src: str, msg: BaseModel) -> None:
        match msg:
            case ClientRequest():
                slot = self.next_slot
                self.next_slot += 1
                batch = Batch.of(msg.command)
                self.log[slot] = batch
                for entry in apply_batch(self.kv, self.client_table, slot, batch):
                    self.send(registry.client(entry.client_id), ClientReply(
                        client_id=entry.client_id, seq=entry.seq, output=entry.output, slot=entry.slot,
                    ))
            case ReadRequest():
                for cmd in msg.commands:
                    self.send(registry.client(cmd.client_id), ClientReply(
                        client_id=cmd.client_id,
                        seq=cmd.seq,
                        output=self.kv.get(cmd.op.key),
                        slot=self.executed_watermark,
                    ))
            case _:
                raise ProtocolError(f"{self.address} 收到无法处理的消息 {msg.type}")

    @property
    def responded_slots(self) -> List[int]:
        return list(self.log.keys())
