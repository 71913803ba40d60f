import asyncio
import logging
import threading
from typing import Optional

from ..errors import ProtocolError
from ..global_config import GlobalConfig
from ..models import ClientReply, KvResponse, ReadConsistency, ReadOp, WriteOp
from ..models.command_models import Op
from ..roles import ClientSession, registry
from ..serve.loopback import NodeHost

logger = logging.getLogger(__name__)

# 网关客户端编号，远离驱动使用的 0..K-1
GATEWAY_CLIENT_ID = 1_000_000


class KvService:
    """
    线程安全的单例 Service

    通过一个网关客户端会话把 HTTP 读写转换为协议请求。网关会话是闭环的，
    并发请求在锁上排队。超时的请求被放弃，不影响后续请求。
    """

    _instance: Optional['KvService'] = None
    _lock = threading.Lock()

    def __new__(cls):
        """单例模式：确保只有一个实例"""
        if cls._instance is None:
            with cls._lock:
                if cls._instance is None:
                    cls._instance = super().__new__(cls)
                    cls._instance._initialize()
        return cls._instance

    def _initialize(self):
        self.timeout = 10.0
        self._session: Optional[ClientSession] = None
        self._node: Optional[NodeHost] = None
        self._op_lock: Optional[asyncio.Lock] = None

    async def _ensure_gateway(self) -> None:
        if self._node is not None:
            return
        cluster = GlobalConfig.get_cluster()
        deployment = cluster.deployment
        leader = deployment.current_leader() or (deployment.proposers or deployment.replicas)[0]
        self._session = ClientSession(
            registry.client(GATEWAY_CLIENT_ID),
            GATEWAY_CLIENT_ID,
            None,
            ReadConsistency.linearizable,
            deployment.quorums,
            deployment.replicas,
            leader,
            batchers=deployment.batchers,
            read_selection=deployment.plan.read_selection,
            proposers=deployment.proposers,
        )
        self._node = NodeHost([self._session], cluster.host, cluster.port)
        await self._node.start()
        logger.info(f"网关客户端已连接，领导者 {leader}")

    async def _execute(self, op: Op) -> ClientReply:
        if self._op_lock is None:
            self._op_lock = asyncio.Lock()
        async with self._op_lock:
            await self._ensure_gateway()
            if self._session.busy:
                raise ProtocolError("Gateway client still has an outstanding operation")
            future: asyncio.Future = asyncio.get_running_loop().create_future()

            def listener(_cmd, reply: ClientReply) -> None:
                if not future.done():
                    future.set_result(reply)

            self._session.listener = listener
            self._node.submit(self._session.address, lambda: self._session.submit(op))
            try:
                return await asyncio.wait_for(future, self.timeout)
            except asyncio.TimeoutError:
                await self._abandon()
                logger.warning(f"网关操作 {op.type} {op.key} 在 {self.timeout}s 内没有完成，已放弃")
                raise

    async def _abandon(self) -> None:
        """在会话的串行上下文里放弃未完成的操作，等它生效后才释放锁"""
        applied: asyncio.Future = asyncio.get_running_loop().create_future()
        session = self._session

        def abandon() -> None:
            session.listener = None
            session.abandon()
            applied.set_result(None)

        self._node.submit(session.address, abandon)
        await applied

    async def put(self, key: str, value: str) -> KvResponse:
        reply = await self._execute(WriteOp(key=key, value=value))
        return KvResponse(key=key, value=reply.output, slot=reply.slot)

    async def get(self, key: str) -> KvResponse:
        """线性一致读"""
        reply = await self._execute(ReadOp(key=key))
        return KvResponse(key=key, value=reply.output, slot=reply.slot)

    async def close(self) -> None:
        if self._node is not None:
            await self._node.close()
        self._node = None
        self._session = None
        self._op_lock = None
