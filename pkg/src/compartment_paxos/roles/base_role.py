"""
角色状态机基类

每个角色实例是一个确定性的事件处理器：(状态, 事件) -> (状态, 出站消息, 定时器请求)。
处理器把动作写入 outbox，由宿主（模拟器或 socket 运行器）在处理结束后取走执行。
同一实例的处理器必须串行调用。
"""
import logging
import random
from abc import ABC, abstractmethod
from typing import Dict, Iterable, List, NamedTuple, Optional, Union

from pydantic import BaseModel

logger = logging.getLogger(__name__)


class Send(NamedTuple):
    dst: str
    msg: BaseModel


class SetTimer(NamedTuple):
    timer_id: str
    delay: int


class CancelTimer(NamedTuple):
    timer_id: str


Action = Union[Send, SetTimer, CancelTimer]


def trim_oldest(entries: Dict, limit: int) -> None:
    """按插入顺序丢弃最旧的条目，直到条目数不超过 limit"""
    while len(entries) > limit:
        del entries[next(iter(entries))]


class BaseRole(ABC):
    """
    角色基类

    Attributes:
        role: 角色类别名，如 "proposer"，用于链路分类与容量计费
        address: 节点地址，如 "proposer/0"
        rng: 该实例私有的种子随机源
    """
    role: str = ""

    def __init__(self, address: str, rng: Optional[random.Random] = None):
        self.address = address
        self.rng = rng or random.Random(address)
        self.now = 0
        self.retries_enabled = True
        self._outbox: List[Action] = []

    def send(self, dst: str, msg: BaseModel) -> None:
        self._outbox.append(Send(dst, msg))

    def broadcast(self, dsts: Iterable[str], msg: BaseModel) -> None:
        for dst in dsts:
            self._outbox.append(Send(dst, msg))

    def set_timer(self, timer_id: str, delay: int) -> None:
        """设置（或重置）定时器，同名定时器只保留最后一次"""
        self._outbox.append(SetTimer(timer_id, max(1, int(delay))))

    def cancel_timer(self, timer_id: str) -> None:
        self._outbox.append(CancelTimer(timer_id))

    def drain(self) -> List[Action]:
        actions, self._outbox = self._outbox, []
        return actions

    def handle_message(self, src: str, msg: BaseModel, now: int) -> None:
        self.now = now
        self.on_message(src, msg)

    def handle_timer(self, timer_id: str, now: int) -> None:
        self.now = now
        self.on_timer(timer_id)

    @abstractmethod
    def on_message(self, src: str, msg: BaseModel) -> None:
        pass

    def on_timer(self, timer_id: str) -> None:
        logger.debug(f"{self.address} 忽略定时器 {timer_id}")

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}({self.address})"
