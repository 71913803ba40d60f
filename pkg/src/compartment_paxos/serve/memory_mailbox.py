"""
内存信箱

基于 asyncio.Queue 的信箱实现，同一事件循环内使用。
"""

import asyncio
from typing import AsyncGenerator

from .base_mailbox import BaseMailbox, MailItem


class MemoryMailbox(BaseMailbox):
    """内存信箱"""

    def __init__(self, address: str):
        super().__init__(address)
        self._queue: asyncio.Queue[MailItem | None] = asyncio.Queue()

    async def push(self, item: MailItem) -> None:
        if self.cancel_event.is_set():
            return
        await self._queue.put(item)

    def push_nowait(self, item: MailItem) -> None:
        if self.cancel_event.is_set():
            return
        self._queue.put_nowait(item)

    async def on_data_receive(self) -> AsyncGenerator[MailItem, None]:
        while not self.cancel_event.is_set():
            item = await self._queue.get()
            # None 是取消哨兵
            if item is None:
                return
            yield item

    async def cancel(self) -> None:
        if not self.cancel_event.is_set():
            self.cancel_event.set()
            self._queue.put_nowait(None)

    def count(self) -> int:
        return self._queue.qsize()
