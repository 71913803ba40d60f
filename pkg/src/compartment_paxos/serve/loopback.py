"""
回环 socket 部署

FrameRouter 是一个 TCP 帧路由器：每条连接先发 Hello 帧登记自己承载的地址，
之后发出的每一帧按 `to` 字段转发给登记了该地址的连接。
NodeHost 连接路由器并承载一组角色实例，每个角色一个信箱和一个消费协程，
保证同一实例的处理器串行执行；定时器用 loop.call_later 实现，tick 按
settings.serve_tick_ms 换算为真实时间。
"""
import asyncio
import logging
from typing import Callable, Dict, List, Optional, Tuple

from pydantic import ValidationError as PydanticValidationError

from ..config import settings
from ..errors import FrameError, ProtocolError, SafetyViolationError
from ..models import DeploymentPlan, Envelope, validate_plan
from ..roles import BaseRole, CancelTimer, Send, SetTimer
from ..sim.deployment import Deployment, build_deployment
from .base_mailbox import MailboxManager, MailItem
from .memory_mailbox import MemoryMailbox
from .transport import HELLO, encode_frame, hello, read_frame

logger = logging.getLogger(__name__)


class FrameRouter:
    """
    帧路由器

    Args:
        host: 监听地址
        port: 监听端口，0 表示由系统分配
        max_frame_bytes: 单帧上限
    """

    def __init__(self, host: str, port: int, max_frame_bytes: Optional[int] = None):
        self.host = host
        self.port = port
        self.max_frame_bytes = max_frame_bytes
        self.routes: Dict[str, asyncio.StreamWriter] = {}
        self.frames_routed = 0
        self.frames_unroutable = 0
        self.connections_dropped = 0
        self._server: Optional[asyncio.AbstractServer] = None

    async def start(self) -> None:
        """
        Raises:
            OSError: 端口无法绑定
        """
        self._server = await asyncio.start_server(self._handle_connection, self.host, self.port)
        self.port = self._server.sockets[0].getsockname()[1]
        logger.info(f"帧路由器监听 {self.host}:{self.port}")

    async def _handle_connection(self, reader: asyncio.StreamReader, writer: asyncio.StreamWriter) -> None:
        peer = writer.get_extra_info("peername")
        registered: List[str] = []
        try:
            while True:
                envelope = await read_frame(reader, self.max_frame_bytes)
                if envelope is None:
                    break
                if envelope.type == HELLO:
                    for address in envelope.body.get("addresses", []):
                        self.routes[address] = writer
                        registered.append(address)
                    logger.debug(f"连接 {peer} 登记 {len(registered)} 个地址")
                    continue
                target = self.routes.get(envelope.to)
                if target is None or target.is_closing():
                    self.frames_unroutable += 1
                    logger.debug(f"无法路由到 {envelope.to}，丢弃 {envelope.type}")
                    continue
                target.write(encode_frame(envelope))
                self.frames_routed += 1
                await target.drain()
        except FrameError as e:
            # 只断开这一条连接
            self.connections_dropped += 1
            logger.warning(f"连接 {peer} 发送了非法帧，断开: {e}")
        except ConnectionError as e:
            logger.debug(f"连接 {peer} 中断: {e}")
        finally:
            for address in registered:
                if self.routes.get(address) is writer:
                    del self.routes[address]
            writer.close()

    async def close(self) -> None:
        if self._server is not None:
            self._server.close()
            await self._server.wait_closed()
            self._server = None
        for writer in set(self.routes.values()):
            writer.close()
        self.routes.clear()


class NodeHost:
    """
    角色宿主

    Args:
        roles: 要承载的角色实例
        host / port: 路由器地址
        tick_ms: 一个 tick 的毫秒数，默认 settings.serve_tick_ms
    """

    def __init__(self, roles: List[BaseRole], host: str, port: int, tick_ms: Optional[float] = None):
        self.roles: Dict[str, BaseRole] = {r.address: r for r in roles}
        self.host = host
        self.port = port
        self.tick_ms = tick_ms if tick_ms is not None else settings.serve_tick_ms
        self.mailboxes: MailboxManager[MemoryMailbox] = MailboxManager(MemoryMailbox)
        self.safety_violations: List[str] = []
        self.protocol_errors: List[str] = []
        self._generations: Dict[Tuple[str, str], int] = {}
        self._timers: Dict[Tuple[str, str], asyncio.TimerHandle] = {}
        self._tasks: List[asyncio.Task] = []
        self._writer: Optional[asyncio.StreamWriter] = None
        self._reader: Optional[asyncio.StreamReader] = None
        self._loop: Optional[asyncio.AbstractEventLoop] = None
        self._epoch = 0.0

    def now(self) -> int:
        return int((self._loop.time() - self._epoch) * 1000 / self.tick_ms)

    async def start(self) -> None:
        self._loop = asyncio.get_running_loop()
        self._epoch = self._loop.time()
        self._reader, self._writer = await asyncio.open_connection(self.host, self.port)
        self._writer.write(encode_frame(hello(list(self.roles))))
        await self._writer.drain()
        for address, role in self.roles.items():
            mailbox = self.mailboxes.create_mailbox(address)
            self._tasks.append(asyncio.create_task(self._run_role(role, mailbox), name=address))
        self._tasks.append(asyncio.create_task(self._read_loop(), name="reader"))

    def submit(self, address: str, call: Callable[[], object]) -> None:
        """在角色的串行上下文中执行 call"""
        self.mailboxes.get_mailbox(address).push_nowait(MailItem(kind="call", call=call))

    async def _read_loop(self) -> None:
        try:
            while True:
                envelope = await read_frame(self._reader)
                if envelope is None:
                    break
                if not self.mailboxes.has_mailbox(envelope.to):
                    continue
                try:
                    msg = envelope.unwrap()
                except PydanticValidationError as e:
                    logger.warning(f"无法解析发往 {envelope.to} 的 {envelope.type}: {e.error_count()} 个错误")
                    continue
                await self.mailboxes.get_mailbox(envelope.to).push(
                    MailItem(kind="message", src=envelope.from_, msg=msg)
                )
        except FrameError as e:
            logger.error(f"与路由器的连接收到非法帧: {e}")
        except ConnectionError as e:
            logger.info(f"与路由器的连接中断: {e}")

    async def _run_role(self, role: BaseRole, mailbox: MemoryMailbox) -> None:
        async for item in mailbox.on_data_receive():
            try:
                match item.kind:
                    case "message":
                        role.handle_message(item.src, item.msg, self.now())
                    case "timer":
                        if self._generations.get((role.address, item.timer_id)) != item.generation:
                            continue
                        self._timers.pop((role.address, item.timer_id), None)
                        role.handle_timer(item.timer_id, self.now())
                    case "call":
                        role.now = self.now()
                        item.call()
            except SafetyViolationError as e:
                self.safety_violations.append(f"{role.address}: {e}")
                logger.error(f"{role.address} 检测到安全性破坏: {e}")
            except ProtocolError as e:
                self.protocol_errors.append(f"{role.address}: {e}")
                logger.warning(f"{role.address} 协议错误: {e}")
            await self._apply(role, mailbox)

    async def _apply(self, role: BaseRole, mailbox: MemoryMailbox) -> None:
        wrote = False
        for action in role.drain():
            match action:
                case Send(dst, msg):
                    self._writer.write(encode_frame(Envelope.wrap(role.address, dst, msg)))
                    wrote = True
                case SetTimer(timer_id, delay):
                    key = (role.address, timer_id)
                    generation = self._generations.get(key, 0) + 1
                    self._generations[key] = generation
                    old = self._timers.pop(key, None)
                    if old is not None:
                        old.cancel()
                    self._timers[key] = self._loop.call_later(
                        delay * self.tick_ms / 1000,
                        mailbox.push_nowait,
                        MailItem(kind="timer", timer_id=timer_id, generation=generation),
                    )
                case CancelTimer(timer_id):
                    key = (role.address, timer_id)
                    self._generations[key] = self._generations.get(key, 0) + 1
                    old = self._timers.pop(key, None)
                    if old is not None:
                        old.cancel()
        if wrote:
            try:
                await self._writer.drain()
            except ConnectionError as e:
                logger.debug(f"{role.address} 发送失败: {e}")

    async def close(self) -> None:
        for handle in self._timers.values():
            handle.cancel()
        self._timers.clear()
        await self.mailboxes.cancel_all()
        for task in self._tasks:
            task.cancel()
        await asyncio.gather(*self._tasks, return_exceptions=True)
        self._tasks.clear()
        if self._writer is not None:
            self._writer.close()
            self._writer = None


class LoopbackCluster:
    """路由器加上承载全部服务端角色的宿主"""

    def __init__(self, plan: DeploymentPlan, host: str, port: int, seed: int = 0):
        validate_plan(plan)
        self.plan = plan
        self.deployment: Deployment = build_deployment(plan, seed, client_ops=[])
        self.router = FrameRouter(host, port)
        self.node: Optional[NodeHost] = None

    @property
    def host(self) -> str:
        return self.router.host

    @property
    def port(self) -> int:
        return self.router.port

    async def start(self) -> "LoopbackCluster":
        await self.router.start()
        self.node = NodeHost(list(self.deployment.nodes.values()), self.router.host, self.router.port)
        await self.node.start()
        logger.info(f"回环部署已启动：{self.plan.variant.value}，{len(self.deployment.nodes)} 个角色")
        return self

    async def close(self) -> None:
        if self.node is not None:
            await self.node.close()
            self.node = None
        await self.router.close()
        logger.info("回环部署已关闭")

    async def __aenter__(self) -> "LoopbackCluster":
        return await self.start()

    async def __aexit__(self, exc_type, exc_val, exc_tb):
        await self.close()
        return False
