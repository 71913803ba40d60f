"""
消息词汇

所有角色之间只通过这些消息交互。每种消息带有 type 判别字段，
模拟器直接传递模型实例，socket 传输把它编码进 Envelope 的 body。
"""
from typing import Annotated, Dict, Literal, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, TypeAdapter

from .command_models import Ballot, Batch, Command, ResultBatch


class _Message(BaseModel):
    model_config = ConfigDict(frozen=True)

    @property
    def command_count(self) -> int:
        """消息携带的命令数，供容量模型计费"""
        return 0


class ClientRequest(_Message):
    type: Literal["ClientRequest"] = "ClientRequest"
    command: Command

    @property
    def command_count(self) -> int:
        return 1


class BatchRequest(_Message):
    type: Literal["BatchRequest"] = "BatchRequest"
    batch: Batch

    @property
    def command_count(self) -> int:
        return len(self.batch)


class ClientReply(_Message):
    type: Literal["ClientReply"] = "ClientReply"
    client_id: int
    seq: int
    output: Optional[str] = None
    slot: int = Field(-1, description='Write slot, or the replica watermark a read executed against.')


class Vote(BaseModel):
    model_config = ConfigDict(frozen=True)

    ballot: Ballot
    value: Batch


class Phase1a(_Message):
    type: Literal["Phase1a"] = "Phase1a"
    ballot: Ballot
    from_slot: int = 0


class Phase1b(_Message):
    type: Literal["Phase1b"] = "Phase1b"
    ballot: Ballot
    acceptor_id: int
    votes: Dict[int, Vote] = Field(default_factory=dict, description='Votes at or above from_slot.')


class Phase2a(_Message):
    type: Literal["Phase2a"] = "Phase2a"
    slot: int
    ballot: Ballot
    value: Batch

    @property
    def command_count(self) -> int:
        return len(self.value)


class Phase2b(_Message):
    type: Literal["Phase2b"] = "Phase2b"
    slot: int
    ballot: Ballot
    acceptor_id: int


class Nack(_Message):
    type: Literal["Nack"] = "Nack"
    ballot: Ballot = Field(..., description='The promised ballot that rejected the request.')
    slot: Optional[int] = None
    rejected: Optional[Ballot] = Field(None, description='The ballot that was rejected.')


class Chosen(_Message):
    type: Literal["Chosen"] = "Chosen"
    slot: int
    value: Batch

    @property
    def command_count(self) -> int:
        return len(self.value)


class PreRead(_Message):
    type: Literal["PreRead"] = "PreRead"
    read_id: str


class PreReadAck(_Message):
    type: Literal["PreReadAck"] = "PreReadAck"
    read_id: str
    acceptor_id: int
    vote_watermark: int = Field(..., ge=-1)


class ReadRequest(_Message):
    """
    发往副本的读请求

    required_slot 为 None 表示最终一致读，副本立即执行；
    batched 为 True 时结果以 ResultBatch 形式经解批器返回。
    """
    type: Literal["ReadRequest"] = "ReadRequest"
    commands: Tuple[Command, ...]
    required_slot: Optional[int] = None
    batched: bool = False

    @property
    def command_count(self) -> int:
        return len(self.commands)


class ResultBatchMessage(_Message):
    type: Literal["ResultBatch"] = "ResultBatch"
    results: ResultBatch

    @property
    def command_count(self) -> int:
        return len(self.results)


class LeaderInfo(_Message):
    type: Literal["LeaderInfo"] = "LeaderInfo"
    ballot: Ballot
    leader: str


class Recover(_Message):
    type: Literal["Recover"] = "Recover"
    slot: int


Message = Annotated[
    Union[
        ClientRequest, BatchRequest, ClientReply,
        Phase1a, Phase1b, Phase2a, Phase2b, Nack, Chosen,
        PreRead, PreReadAck, ReadRequest, ResultBatchMessage,
        LeaderInfo, Recover,
    ],
    Field(discriminator="type"),
]

message_adapter: TypeAdapter = TypeAdapter(Message)


class Envelope(BaseModel):
    """socket 帧中的消息信封 {type, from, to, body}"""
    model_config = ConfigDict(populate_by_name=True)

    type: str
    from_: str = Field(..., alias="from")
    to: str
    body: dict = Field(default_factory=dict)

    @classmethod
    def wrap(cls, src: str, dst: str, msg: BaseModel) -> "Envelope":
        return cls(type=msg.type, from_=src, to=dst, body=msg.model_dump(mode="json"))

    def unwrap(self):
        """把 body 还原为消息模型"""
        return message_adapter.validate_python({**self.body, "type": self.type})
