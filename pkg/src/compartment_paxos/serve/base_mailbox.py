"""
角色信箱的基础接口。

socket 运行时为每个角色实例分配一个信箱：网络读取协程、定时器回调和外部调用
都只往信箱里投递，由该角色唯一的消费协程串行取出并执行处理器。
"""

from abc import ABC, abstractmethod
from typing import Any, AsyncGenerator, Callable, Dict, Generic, Literal, Optional, TypeVar

import asyncio
from pydantic import BaseModel, ConfigDict, Field

from ..errors import ResourceNotFoundError


MailboxT = TypeVar('MailboxT', bound='BaseMailbox')


class MailItem(BaseModel):
    """
    信箱中的一项待处理事件。

    kind:
        - message: 来自网络的消息，src 为发送方地址
        - timer: 到期的定时器，generation 用于丢弃已被重置或取消的旧定时器
        - call: 宿主在角色上下文中执行的回调（如网关提交操作）
    """
    model_config = ConfigDict(arbitrary_types_allowed=True)

    kind: Literal["message", "timer", "call"]
    src: str = ""
    msg: Optional[BaseModel] = None
    timer_id: str = ""
    generation: int = 0
    call: Optional[Callable[[], Any]] = Field(default=None, exclude=True)


class BaseMailbox(ABC):
    """
    信箱抽象基类。

    一个信箱只有一个消费者；投递可以来自任意协程。
    """

    def __init__(self, address: str):
        """
        Args:
            address: 所属角色的地址
        """
        self.address = address
        self.cancel_event = asyncio.Event()

    @abstractmethod
    async def push(self, item: MailItem) -> None:
        """投递一项事件"""
        pass

    @abstractmethod
    def push_nowait(self, item: MailItem) -> None:
        """从同步回调（如 loop.call_later）中投递"""
        pass

    @abstractmethod
    def on_data_receive(self) -> AsyncGenerator[MailItem, None]:
        """
        按投递顺序逐项产出事件，信箱被取消后结束。

        Yields:
            待处理事件
        """
        pass

    @abstractmethod
    async def cancel(self) -> None:
        """取消信箱，通知消费者退出"""
        pass

    @abstractmethod
    def count(self) -> int:
        """尚未处理的事件数"""
        pass


class MailboxManager(Generic[MailboxT]):
    """
    信箱管理器，按地址创建和跟踪信箱。

    泛型参数:
        MailboxT: 信箱类型，必须是 BaseMailbox 的子类
    """

    def __init__(self, mailbox_class: type[MailboxT]):
        self.mailbox_class = mailbox_class
        self.mailboxes: Dict[str, MailboxT] = {}

    def create_mailbox(self, address: str) -> MailboxT:
        mailbox = self.mailbox_class(address)
        self.mailboxes[address] = mailbox
        return mailbox

    def get_mailbox(self, address: str) -> MailboxT:
        """
        Raises:
            ResourceNotFoundError: 该地址没有信箱
        """
        if address not in self.mailboxes:
            raise ResourceNotFoundError(f"Mailbox {address} not found")
        return self.mailboxes[address]

    def has_mailbox(self, address: str) -> bool:
        return address in self.mailboxes

    async def cancel_mailbox(self, address: str) -> None:
        if address in self.mailboxes:
            await self.mailboxes[address].cancel()
            del self.mailboxes[address]

    async def cancel_all(self) -> None:
        for address in list(self.mailboxes):
            await self.cancel_mailbox(address)
