"""
确定性离散事件模拟器

事件按 (时间, 插入序号) 顺序处理，同一种子和输入下整个运行逐字节可复现。
每台机器是一个单服务台：处理一个事件时立即运行角色处理器，出站消息和定时器在
服务结束（当前时间 + 服务时间）后才生效，期间到达的事件在机器队列中排队。
"""
import heapq
import logging
import random
from collections import deque
from typing import Any, Deque, Dict, List, Optional, Set, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from ..config import settings
from ..errors import ProtocolError, SafetyViolationError
from ..models import (
    Batch,
    CapacityModel,
    Chosen,
    ClientReply,
    Command,
    DeploymentPlan,
    FaultKind,
    FaultSpec,
    HistoryEvent,
    Metrics,
    NetModel,
    ReadConsistency,
    TraceCounters,
    WorkloadSpec,
    machine_count,
    validate_plan,
)
from ..models.sim_models import CompletedOp
from ..roles import BaseRole, CancelTimer, Send, SetTimer
from ..roles.registry import role_of
from ..checker.history import HistoryRecorder
from ..evaluation.workload import iter_client_ops
from .deployment import Deployment, build_deployment

logger = logging.getLogger(__name__)

# 事件类型
DELIVER = "deliver"
TIMER = "timer"
CRASH = "crash"
PARTITION = "partition"
CLIENT_TICK = "client_tick"
ELECT = "elect"
FAILOVER = "failover"
MACHINE_FREE = "machine_free"

# 没有时长上限时的安全上限
MAX_SIM_TIME = 10_000_000


class SimulationResult(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    history: List[HistoryEvent] = Field(default_factory=list)
    counters: TraceCounters = Field(default_factory=TraceCounters)
    metrics: Metrics = Field(default_factory=Metrics)
    chosen_log: Dict[int, Batch] = Field(default_factory=dict)
    violations: List[str] = Field(default_factory=list)
    protocol_errors: List[str] = Field(default_factory=list)
    lossless: bool = True
    end_time: float = 0.0
    deployment: Any = None


class Simulator:
    """
    模拟器

    Args:
        deployment: 已构造的部署
        net: 网络模型（延迟、丢包、重复、乱序）
        capacity: 容量模型；全部为 0 时所有处理瞬时完成
        recorder: 历史记录器
    """

    def __init__(
        self,
        deployment: Deployment,
        net: NetModel,
        capacity: Optional[CapacityModel] = None,
        recorder: Optional[HistoryRecorder] = None,
    ):
        self.deployment = deployment
        self.net = net
        self.capacity = capacity or CapacityModel()
        self.recorder = recorder or HistoryRecorder()
        self.rng = random.Random(f"{net.seed}/net")
        self.now: float = 0.0

        self._heap: List[Tuple[float, int, str, Any]] = []
        self._seq = 0
        self._timer_gen: Dict[Tuple[str, str], int] = {}
        self._inbox: Dict[str, Deque[tuple]] = {}
        self._serving: Set[str] = set()
        self._link_last: Dict[Tuple[str, str], float] = {}
        self.crashed: Set[str] = set()
        self._groups: Dict[str, int] = {}

        self.counters = TraceCounters()
        self.chosen_log: Dict[int, Batch] = {}
        self.violations: List[str] = []
        self.protocol_errors: List[str] = []
        self.stopped = False
        self._completion_seen = False

    # ---- 调度 ----

    def schedule(self, at: float, kind: str, payload: Any = None) -> None:
        self._seq += 1
        heapq.heappush(self._heap, (at, self._seq, kind, payload))

    def schedule_faults(self, faults: List[FaultSpec]) -> None:
        for fault in faults:
            if fault.kind == FaultKind.crash:
                self.schedule(fault.at, CRASH, fault.node)
            elif fault.kind == FaultKind.partition:
                self.schedule(fault.at, PARTITION, fault.groups)
            elif fault.kind == FaultKind.heal:
                self.schedule(fault.at, PARTITION, [])
            elif fault.kind == FaultKind.leader_failover:
                inject_leader_failover(self, fault.at)

    def start_clients(self) -> None:
        for address in self.deployment.clients:
            self.schedule(0, CLIENT_TICK, address)

    # ---- 主循环 ----

    def run(self, duration: Optional[float] = None) -> None:
        """运行到事件耗尽、所有客户端完成、超过时长或出现安全违例"""
        limit = duration if duration is not None else MAX_SIM_TIME
        sessions = self.deployment.client_sessions()
        while self._heap and not self.stopped:
            at, _, kind, payload = self._heap[0]
            if at > limit:
                # 时长耗尽，测量窗口覆盖到上限
                self.now = float(limit)
                break
            heapq.heappop(self._heap)
            self.now = at
            self._dispatch(kind, payload)
            if self._completion_seen:
                self._completion_seen = False
                if all(s.done for s in sessions):
                    break

    def _dispatch(self, kind: str, payload: Any) -> None:
        if kind == DELIVER:
            src, dst, msg = payload
            machine = self.deployment.machines[dst]
            if machine in self.crashed:
                self.counters.dropped += 1
                return
            self._enqueue(machine, ("msg", dst, src, msg))
        elif kind == TIMER:
            address, timer_id, gen = payload
            if self._timer_gen.get((address, timer_id)) != gen:
                return
            machine = self.deployment.machines[address]
            if machine not in self.crashed:
                self._enqueue(machine, ("timer", address, timer_id))
        elif kind == MACHINE_FREE:
            self._serving.discard(payload)
            self._run_machine(payload)
        elif kind == CLIENT_TICK:
            self._enqueue(self.deployment.machines[payload], ("start", payload))
        elif kind == ELECT:
            machine = self.deployment.machines[payload]
            if machine not in self.crashed:
                self._enqueue(machine, ("elect", payload))
        elif kind == CRASH:
            self.crash(payload)
        elif kind == PARTITION:
            self.set_partition(payload)
        elif kind == FAILOVER:
            self._failover()

    def _enqueue(self, machine: str, item: tuple) -> None:
        self._inbox.setdefault(machine, deque()).append(item)
        self._run_machine(machine)

    def _run_machine(self, machine: str) -> None:
        if machine in self._serving or machine in self.crashed:
            return
        queue = self._inbox.get(machine)
        while queue and not self.stopped:
            cost = self._process(queue.popleft())
            if cost > 0:
                self._serving.add(machine)
                self.schedule(self.now + cost, MACHINE_FREE, machine)
                return

    def _process(self, item: tuple) -> float:
        """运行一个处理器，返回服务时间"""
        kind, address = item[0], item[1]
        role: BaseRole = self.deployment.nodes[address]
        now = int(self.now)
        inbound, commands = 0, 0
        try:
            if kind == "msg":
                src, msg = item[2], item[3]
                inbound, commands = 1, msg.command_count
                node = self.counters.node(address)
                node.messages_in += 1
                node.commands += commands
                node.in_by_type[msg.type] = node.in_by_type.get(msg.type, 0) + 1
                self.counters.delivered += 1
                role.handle_message(src, msg, now)
            elif kind == "timer":
                role.handle_timer(item[2], now)
            elif kind == "start":
                role.start(now)
            elif kind == "elect":
                role.now = now
                role.leader_elect(role.next_ballot())
        except SafetyViolationError as e:
            logger.error(f"{address} 安全违例: {e}")
            self.violations.append(f"{e} (node={e.node or address}, slot={e.slot})")
            self.stopped = True
        except ProtocolError as e:
            logger.warning(f"{address} 协议错误: {e}")
            self.protocol_errors.append(f"{address}: {e}")

        actions = role.drain()
        sends = sum(1 for a in actions if isinstance(a, Send))
        cost = self.capacity.cost(role.role, sends, commands, inbound=inbound) if self.capacity.enabled else 0.0
        finish = self.now + cost
        for action in actions:
            if isinstance(action, Send):
                self._transmit(address, action.dst, action.msg, finish)
            elif isinstance(action, SetTimer):
                key = (address, action.timer_id)
                gen = self._timer_gen.get(key, 0) + 1
                self._timer_gen[key] = gen
                self.schedule(finish + action.delay, TIMER, (address, action.timer_id, gen))
            elif isinstance(action, CancelTimer):
                key = (address, action.timer_id)
                self._timer_gen[key] = self._timer_gen.get(key, 0) + 1
        return cost

    def _transmit(self, src: str, dst: str, msg: BaseModel, at: float) -> None:
        node = self.counters.node(src)
        node.messages_out += 1
        node.out_by_type[msg.type] = node.out_by_type.get(msg.type, 0) + 1
        if isinstance(msg, Chosen):
            self._observe_chosen(src, msg)
        if dst not in self.deployment.machines:
            logger.debug(f"{src} 发往未知节点 {dst}，丢弃")
            self.counters.dropped += 1
            return
        if self._groups and self._groups.get(src, -1) != self._groups.get(dst, -1):
            self.counters.dropped += 1
            return
        p_drop = self.net.drop_for(role_of(src), role_of(dst))
        if p_drop > 0 and self.rng.random() < p_drop:
            self.counters.dropped += 1
            return
        self._schedule_delivery(src, dst, msg, at)
        if self.net.duplicate_probability > 0 and self.rng.random() < self.net.duplicate_probability:
            self.counters.duplicated += 1
            self._schedule_delivery(src, dst, msg, at)

    def _schedule_delivery(self, src: str, dst: str, msg: BaseModel, at: float) -> None:
        t = at + self.rng.randint(self.net.delay_min, max(self.net.delay_min, self.net.delay_max))
        if not self.net.reordering_enabled:
            # 关闭乱序时每条链路先进先出
            link = (src, dst)
            t = max(t, self._link_last.get(link, 0.0))
            self._link_last[link] = t
        self.schedule(t, DELIVER, (src, dst, msg))

    def _observe_chosen(self, src: str, msg: Chosen) -> None:
        existing = self.chosen_log.get(msg.slot)
        if existing is None:
            self.chosen_log[msg.slot] = msg.value
        elif existing != msg.value:
            self.violations.append(f"agreement violated at slot {msg.slot}: {src} chose a second value")

    # ---- 故障 ----

    def crash(self, node: str) -> None:
        """崩溃停止：节点所在机器上的所有角色不再处理任何事件"""
        machine = self.deployment.machines.get(node, node)
        if machine in self.crashed:
            return
        logger.info(f"t={self.now:.0f} 机器 {machine} 崩溃")
        self.crashed.add(machine)
        self._inbox.pop(machine, None)

    def set_partition(self, groups: List[List[str]]) -> None:
        self._groups = {address: i for i, group in enumerate(groups) for address in group}
        if groups:
            logger.info(f"t={self.now:.0f} 网络分区 {groups}")
        else:
            logger.info(f"t={self.now:.0f} 网络分区恢复")

    def _failover(self) -> None:
        leader = self.deployment.current_leader()
        if leader is None:
            logger.warning(f"t={self.now:.0f} 没有领导者，跳过故障切换")
            return
        standbys = [
            p for p in self.deployment.proposers
            if p != leader and self.deployment.machines[p] != self.deployment.machines[leader]
            and self.deployment.machines[p] not in self.crashed
        ]
        self.crash(leader)
        if not standbys:
            logger.warning(f"t={self.now:.0f} 没有可用的备用提议者")
            return
        self.schedule(self.now + settings.sim_election_delay, ELECT, standbys[0])

    # ---- 客户端回调 ----

    def on_invoke(self, cmd: Command, t: int) -> None:
        self.recorder.record_invoke(cmd, t)

    def on_complete(self, cmd: Command, reply: ClientReply, t: int) -> None:
        self.recorder.record_response(cmd, reply, t)
        self._completion_seen = True
        invoke = self.deployment.role(f"client/{cmd.client_id}").invoke_time
        self.counters.completed.append(CompletedOp(
            client=cmd.client_id,
            seq=cmd.seq,
            kind=cmd.op.type,
            invoke_time=int(invoke),
            response_time=int(t),
            slot=reply.slot,
        ))


def inject_leader_failover(sim: Simulator, at: float) -> None:
    """
    在 at 时刻崩溃当前领导者所在的机器，并在选举延迟后让一个备用提议者以更高选票发起 Phase1

    新领导者通过一个完整读法定人数恢复所有已决定的槽，并从正确的 next_slot 继续。
    """
    sim.schedule(at, FAILOVER)


def compute_metrics(
    counters: TraceCounters,
    incomplete: int,
    start: float,
    end: float,
    machines: int,
) -> Metrics:
    """
    统计测量窗口 [start, end] 内完成的操作

    Returns:
        吞吐（操作数 / tick）与 p50/p99 延迟
    """
    window = [c for c in counters.completed if c.response_time >= start]
    span = max(end - start, 1.0)
    latencies = np.array([c.response_time - c.invoke_time for c in window], dtype=float)
    if len(latencies):
        p50, p99 = (float(v) for v in np.percentile(latencies, [50, 99]))
    else:
        p50 = p99 = 0.0
    return Metrics(
        completed_ops=len(counters.completed),
        incomplete_ops=incomplete,
        throughput=len(window) / span,
        p50=p50,
        p99=p99,
        machines=machines,
        duration=int(end),
        stalled=not window,
    )


def run_simulation(
    plan: DeploymentPlan,
    net: Optional[NetModel] = None,
    capacity: Optional[CapacityModel] = None,
    workload: Optional[WorkloadSpec] = None,
    faults: Optional[List[FaultSpec]] = None,
    duration: Optional[int] = None,
    warmup_fraction: float = 0.0,
) -> SimulationResult:
    """
    运行一次模拟

    Args:
        plan: 部署计划（会先校验）
        net: 网络模型，默认无丢包
        capacity: 容量模型，默认所有处理瞬时完成
        workload: 工作负载，默认取 plan.workload
        faults: 故障计划
        duration: 模拟时长上限；None 表示运行到所有客户端完成
        warmup_fraction: 吞吐与延迟统计跳过的预热比例

    Returns:
        历史、计数器、指标以及审计所需的轨迹

    Raises:
        PlanValidationError: 计划不合法
    """
    validate_plan(plan)
    net = net or NetModel()
    faults = faults or []
    workload = workload or plan.workload or WorkloadSpec()
    lossless = not net.lossy and not faults

    recorder = HistoryRecorder()
    client_ops = [iter_client_ops(workload, c) for c in range(workload.num_clients)]
    sim: Optional[Simulator] = None

    def on_invoke(cmd, t):
        sim.on_invoke(cmd, t)

    def on_complete(cmd, reply, t):
        sim.on_complete(cmd, reply, t)

    deployment = build_deployment(
        plan,
        net.seed,
        client_ops,
        level=workload.read_consistency,
        on_invoke=on_invoke,
        on_complete=on_complete,
        retries_enabled=not lossless,
    )
    sim = Simulator(deployment, net, capacity, recorder)
    sim.schedule_faults(faults)
    sim.start_clients()
    logger.info(
        f"开始模拟 {plan.variant.value}：{workload.num_clients} 个客户端，"
        f"seed={net.seed}，{'无损' if lossless else '有损'}网络，{len(faults)} 个故障"
    )
    sim.run(duration)

    end = sim.now
    incomplete = sum(1 for s in deployment.client_sessions() if s.current is not None)
    metrics = compute_metrics(
        sim.counters, incomplete, start=end * warmup_fraction, end=end, machines=machine_count(plan),
    )
    if metrics.stalled:
        logger.warning(f"模拟在 t={end:.0f} 结束时测量窗口内没有完成任何操作")
    return SimulationResult(
        history=recorder.events,
        counters=sim.counters,
        metrics=metrics,
        chosen_log=sim.chosen_log,
        violations=sim.violations,
        protocol_errors=sim.protocol_errors,
        lossless=lossless,
        end_time=end,
        deployment=deployment,
    )
