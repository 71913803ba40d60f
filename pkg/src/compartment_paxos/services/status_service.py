import threading
from typing import Optional

from ..global_config import GlobalConfig
from ..models import AcceptorStatus, ClusterStatus, HealthResponse, ReplicaStatus, machine_count


class StatusService:
    """线程安全的单例 Service，读取部署内各角色的只读快照"""

    _instance: Optional['StatusService'] = None
    _lock = threading.Lock()

    def __new__(cls):
        if cls._instance is None:
            with cls._lock:
                if cls._instance is None:
                    cls._instance = super().__new__(cls)
        return cls._instance

    def health(self) -> HealthResponse:
        return HealthResponse(status="ok", serving=GlobalConfig.cluster is not None)

    def status(self) -> ClusterStatus:
        """
        Raises:
            ResourceNotFoundError: 没有绑定部署
        """
        cluster = GlobalConfig.get_cluster()
        deployment = cluster.deployment
        leader = deployment.current_leader()
        replicas = []
        for address in deployment.replicas:
            node = deployment.nodes[address]
            state = getattr(node, "state", None)
            if state is not None:
                replicas.append(ReplicaStatus(
                    address=address,
                    executed_watermark=state.executed_watermark,
                    log_size=len(state.log),
                    pending_reads=len(state.pending_reads),
                ))
            else:
                replicas.append(ReplicaStatus(
                    address=address, executed_watermark=node.executed_watermark, log_size=len(node.log),
                ))
        acceptors = []
        for address in deployment.acceptors:
            state = deployment.nodes[address].state
            acceptors.append(AcceptorStatus(
                address=address,
                vote_watermark=state.vote_watermark,
                promised_ballot=str(state.promised_ballot) if state.promised_ballot is not None else None,
            ))
        return ClusterStatus(
            variant=deployment.plan.variant.value,
            leader=leader,
            ballot=str(deployment.nodes[leader].state.ballot) if leader else None,
            num_roles=len(deployment.nodes),
            machines=machine_count(deployment.plan),
            replicas=replicas,
            acceptors=acceptors,
            frames_routed=cluster.router.frames_routed,
            frames_unroutable=cluster.router.frames_unroutable,
            connections_dropped=cluster.router.connections_dropped,
            safety_violations=list(cluster.node.safety_violations) if cluster.node else [],
        )
