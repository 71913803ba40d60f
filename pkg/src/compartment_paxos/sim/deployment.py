"""
按部署计划实例化全部角色

耦合基线中第 i 台机器同时承担提议者 i、接受者 i 和副本 i；
其余变体中每个角色实例独占一台机器。
"""
import logging
import random
from typing import Callable, Dict, Iterable, List, Optional

from ..models import (
    ClientReply,
    Command,
    DeploymentPlan,
    ReadConsistency,
    Variant,
)
from ..models.command_models import Op
from ..quorums import BaseQuorumSystem, quorum_system_for
from ..roles import (
    Acceptor,
    BaseRole,
    Batcher,
    ClientSession,
    Proposer,
    ProxyLeader,
    Replica,
    Unbatcher,
    UnreplicatedServer,
)
from ..roles import registry

logger = logging.getLogger(__name__)


class Deployment:
    """一次部署的全部角色实例及其机器归属"""

    def __init__(self, plan: DeploymentPlan, quorums: Optional[BaseQuorumSystem]):
        self.plan = plan
        self.quorums = quorums
        self.nodes: Dict[str, BaseRole] = {}
        self.machines: Dict[str, str] = {}
        self.proposers: List[str] = []
        self.proxies: List[str] = []
        self.acceptors: List[str] = []
        self.replicas: List[str] = []
        self.batchers: List[str] = []
        self.unbatchers: List[str] = []
        self.clients: List[str] = []

    def add(self, role: BaseRole, machine: Optional[str] = None) -> BaseRole:
        self.nodes[role.address] = role
        self.machines[role.address] = machine or role.address
        return role

    def role(self, address: str) -> BaseRole:
        return self.nodes[address]

    def current_leader(self) -> Optional[str]:
        """处于 Phase2 且选票最高的提议者"""
        leaders = [self.nodes[p] for p in self.proposers if self.nodes[p].is_leader]
        if not leaders:
            return None
        return max(leaders, key=lambda p: p.state.ballot.key()).address

    def client_sessions(self) -> List[ClientSession]:
        return [self.nodes[c] for c in self.clients]


def _rng(seed: int, address: str) -> random.Random:
    return random.Random(f"{seed}/{address}")


def build_deployment(
    plan: DeploymentPlan,
    seed: int,
    client_ops: List[Optional[Iterable[Op]]],
    level: ReadConsistency = ReadConsistency.linearizable,
    on_invoke: Optional[Callable[[Command, int], None]] = None,
    on_complete: Optional[Callable[[Command, ClientReply, int], None]] = None,
    retries_enabled: bool = True,
) -> Deployment:
    """
    构造部署

    Args:
        plan: 已校验的部署计划
        seed: 运行种子，每个角色的随机源由种子和地址派生
        client_ops: 每个客户端的操作流
        level: 客户端读一致性级别
        on_invoke / on_complete: 历史记录回调
        retries_enabled: 是否启用重传定时器

    Returns:
        部署实例
    """
    if plan.variant == Variant.unreplicated:
        deployment = Deployment(plan, None)
        server = registry.server(0)
        deployment.add(UnreplicatedServer(server, rng=_rng(seed, server)))
        deployment.replicas = [server]
        leader, quorums = server, None
    else:
        quorums = quorum_system_for(plan)
        deployment = Deployment(plan, quorums)
        coupled = plan.variant == Variant.coupled
        deployment.proposers = registry.all_of("proposer", plan.num_proposers)
        deployment.proxies = [] if coupled else registry.all_of("proxy", plan.num_proxy_leaders)
        deployment.acceptors = [registry.acceptor(a) for a in quorums.acceptor_ids]
        deployment.replicas = registry.all_of("replica", plan.num_replicas)
        if plan.batching_enabled:
            deployment.batchers = registry.all_of("batcher", plan.num_batchers)
            deployment.unbatchers = registry.all_of("unbatcher", plan.num_unbatchers)
        leader = registry.proposer(0)

    deployment.clients = registry.all_of("client", len(client_ops))

    if quorums is not None:
        machine = (lambda i: f"machine/{i}") if plan.variant == Variant.coupled else (lambda i: None)
        followers = deployment.clients + deployment.batchers + deployment.replicas + deployment.proposers
        for i, address in enumerate(deployment.proposers):
            deployment.add(Proposer(
                address,
                i,
                quorums,
                deployment.proxies,
                deployment.replicas,
                followers=[f for f in followers if f != address],
                proxy_selection=plan.proxy_selection,
                rng=_rng(seed, address),
            ), machine(i))
        for address in deployment.proxies:
            deployment.add(ProxyLeader(address, quorums, deployment.replicas, rng=_rng(seed, address)))
        for i, address in enumerate(deployment.acceptors):
            deployment.add(Acceptor(address, i, rng=_rng(seed, address)), machine(i))
        for i, address in enumerate(deployment.replicas):
            deployment.add(Replica(
                address, i, plan.num_replicas, unbatchers=deployment.unbatchers,
                proposers=deployment.proposers, rng=_rng(seed, address),
            ), machine(i))
        for address in deployment.batchers:
            deployment.add(Batcher(
                address,
                plan.batch_size,
                plan.batch_timeout,
                quorums,
                deployment.replicas,
                read_selection=plan.read_selection,
                rng=_rng(seed, address),
            ))
        for address in deployment.unbatchers:
            deployment.add(Unbatcher(address, rng=_rng(seed, address)))

    for i, address in enumerate(deployment.clients):
        deployment.add(ClientSession(
            address,
            i,
            client_ops[i],
            level,
            quorums,
            deployment.replicas,
            leader,
            batchers=deployment.batchers,
            read_selection=plan.read_selection,
            proposers=deployment.proposers,
            on_invoke=on_invoke,
            on_complete=on_complete,
            rng=_rng(seed, address),
        ))

    for role in deployment.nodes.values():
        role.retries_enabled = retries_enabled
    logger.debug(f"部署 {plan.variant.value}：{len(deployment.nodes)} 个节点，{len(set(deployment.machines.values()))} 台机器")
    return deployment
