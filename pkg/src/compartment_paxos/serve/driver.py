"""
闭环客户端驱动

连接一个正在运行的回环部署，承载 num_clients 个客户端会话，
各自按工作负载发出操作，直到全部完成或超时。
"""
import asyncio
import logging
import time
from typing import Optional

from pydantic import BaseModel, Field

from ..checker import HistoryRecorder
from ..models import ClientReply, Command, DeploymentPlan, HistoryEvent, OK_OUTPUT, WorkloadSpec
from ..evaluation.workload import generate_ops
from ..sim.deployment import build_deployment
from .loopback import NodeHost

logger = logging.getLogger(__name__)


class DriverReport(BaseModel):
    """一次驱动运行的结果"""
    sent: int = 0
    completed: int = 0
    ok_writes: int = 0
    reads: int = 0
    timed_out: bool = False
    seconds: float = 0.0
    history: list[HistoryEvent] = Field(default_factory=list)


async def run_driver(
    plan: DeploymentPlan,
    host: str,
    port: int,
    workload: WorkloadSpec,
    timeout: float = 30.0,
) -> DriverReport:
    """
    运行闭环驱动

    Args:
        plan: 目标部署的计划，用于得到领导者、副本、法定人数和批处理器地址
        host / port: 目标部署的帧路由器
        workload: 客户端数量与操作流
        timeout: 等待全部完成的秒数

    Returns:
        发送数、完成数、写成功数以及可供检查器使用的历史
    """
    report = DriverReport()
    recorder = HistoryRecorder()
    finished = asyncio.Event()
    node: Optional[NodeHost] = None

    def on_invoke(cmd: Command, t: int) -> None:
        report.sent += 1
        recorder.record_invoke(cmd, t)

    def on_complete(cmd: Command, reply: ClientReply, t: int) -> None:
        report.completed += 1
        if cmd.is_write and reply.output == OK_OUTPUT:
            report.ok_writes += 1
        elif cmd.is_read:
            report.reads += 1
        recorder.record_response(cmd, reply, t)
        if all(s.done for s in sessions):
            finished.set()

    deployment = build_deployment(
        plan,
        workload.rng_seed,
        generate_ops(workload),
        level=workload.read_consistency,
        on_invoke=on_invoke,
        on_complete=on_complete,
    )
    sessions = deployment.client_sessions()
    node = NodeHost(sessions, host, port)
    started = time.monotonic()
    await node.start()
    try:
        for session in sessions:
            node.submit(session.address, lambda s=session: s.start(node.now()))
        try:
            await asyncio.wait_for(finished.wait(), timeout)
        except asyncio.TimeoutError:
            report.timed_out = True
            logger.warning(f"驱动在 {timeout}s 内只完成了 {report.completed}/{report.sent} 个操作")
    finally:
        await node.close()
    report.seconds = time.monotonic() - started
    report.history = recorder.events
    logger.info(f"驱动完成 {report.completed} 个操作，其中 {report.ok_writes} 个写成功，用时 {report.seconds:.2f}s")
    return report
