"""
模拟轨迹审计

在一次 run_simulation 的结果上检查协议不变量，每个失败的检查都带上出问题的槽或节点。
"""
import bisect
import logging
from collections import defaultdict
from typing import Dict, List, Set

from ..models import AuditFinding, AuditReport, Batch, Variant
from ..models.state_models import ClientRecord
from ..roles import Acceptor, Replica, Unbatcher, UnreplicatedServer, apply_batch

logger = logging.getLogger(__name__)


def _fail(check: str, detail: str, slot=None, node=None) -> AuditFinding:
    return AuditFinding(check=check, ok=False, detail=detail, slot=slot, node=node)


def _pass(check: str, detail: str = "") -> AuditFinding:
    return AuditFinding(check=check, ok=True, detail=detail)


def check_vote_agreement(deployment) -> List[AuditFinding]:
    """同一个槽不能有两个不同的值各自被一个完整写法定人数在同一选票下投票"""
    quorums = deployment.quorums
    if quorums is None:
        return [_pass("agreement", "unreplicated")]
    # slot -> ballot -> value -> acceptor ids
    votes: Dict[int, Dict[tuple, Dict[Batch, Set[int]]]] = defaultdict(lambda: defaultdict(lambda: defaultdict(set)))
    for address in deployment.acceptors:
        acceptor: Acceptor = deployment.nodes[address]
        for slot, ballot, value in acceptor.vote_log:
            votes[slot][ballot.key()][value].add(acceptor.acceptor_id)

    findings = []
    for slot in sorted(votes):
        certified = {
            value
            for by_value in votes[slot].values()
            for value, acceptors in by_value.items()
            if quorums.is_write_quorum(acceptors)
        }
        if len(certified) > 1:
            findings.append(_fail("agreement", f"{len(certified)} different values certified", slot=slot))
    return findings or [_pass("agreement", f"{len(votes)} slots")]


def _replica_logs(deployment) -> Dict[str, tuple]:
    logs = {}
    for address in deployment.replicas:
        role = deployment.nodes[address]
        if isinstance(role, UnreplicatedServer):
            logs[address] = (role.log, role.executed_watermark)
        else:
            logs[address] = (role.state.log, role.state.executed_watermark)
    return logs


def check_replica_logs(deployment, chosen_log: Dict[int, Batch]) -> List[AuditFinding]:
    """副本之间、副本与选定日志之间每个槽的值一致"""
    findings = []
    reference: Dict[int, Batch] = dict(chosen_log)
    for address, (log, _) in _replica_logs(deployment).items():
        for slot, value in log.items():
            known = reference.setdefault(slot, value)
            if known != value:
                findings.append(_fail("agreement", "replica log disagrees with the chosen value", slot=slot, node=address))
    return findings or [_pass("replica_logs")]


def check_responders(deployment) -> List[AuditFinding]:
    """每个执行过的写槽恰好由编号 s mod n 的副本回复一次"""
    if deployment.plan.variant == Variant.unreplicated:
        return [_pass("responders", "unreplicated")]
    n = len(deployment.replicas)
    responders: Dict[int, List[str]] = defaultdict(list)
    for address in deployment.replicas:
        replica: Replica = deployment.nodes[address]
        for slot in replica.responded_slots:
            responders[slot].append(address)

    findings = []
    for slot, nodes in sorted(responders.items()):
        if len(nodes) > 1:
            findings.append(_fail("responders", f"slot answered by {nodes}", slot=slot))
        elif nodes[0] != deployment.replicas[slot % n]:
            findings.append(_fail("responders", "answered by a replica other than s mod n", slot=slot, node=nodes[0]))

    for i, address in enumerate(deployment.replicas):
        replica: Replica = deployment.nodes[address]
        answered = set(replica.responded_slots)
        for slot in range(i, replica.state.executed_watermark + 1, n):
            if not replica.state.log[slot].is_noop and slot not in answered:
                findings.append(_fail("responders", "executed but never answered", slot=slot, node=address))
    return findings or [_pass("responders", f"{len(responders)} slots")]


def check_leader_load(deployment, counters) -> List[AuditFinding]:
    """
    无损、无故障运行中领导者的消息负载

    分区化变体每个请求恰好 2 条（收请求、发 Phase2a）；耦合基线每个请求至少 3f+4 条。
    """
    plan = deployment.plan
    if plan.variant == Variant.unreplicated or not deployment.proposers:
        return []
    leader = deployment.proposers[0]
    node = counters.nodes.get(leader)
    if node is None:
        return [_pass("leader_load", "no requests")]
    requests = node.in_by_type.get("ClientRequest", 0) + node.in_by_type.get("BatchRequest", 0)
    if requests == 0:
        return [_pass("leader_load", "no requests")]
    per_request = node.total / requests
    if plan.variant == Variant.compartmentalized:
        if node.total != 2 * requests:
            return [_fail("leader_load", f"{per_request:.3f} messages per request, expected 2", node=leader)]
    elif per_request < 3 * plan.f + 4:
        return [_fail("leader_load", f"{per_request:.3f} messages per request, expected >= {3 * plan.f + 4}", node=leader)]
    return [_pass("leader_load", f"{per_request:.3f} messages per request")]


def check_watermarks(deployment) -> List[AuditFinding]:
    findings = []
    for address in deployment.acceptors:
        log = deployment.nodes[address].watermark_log
        for prev, cur in zip(log, log[1:]):
            if cur < prev:
                findings.append(_fail("watermark_monotone", f"vote watermark fell from {prev} to {cur}", node=address))
                break
    return findings or [_pass("watermark_monotone")]


def _observations(deployment) -> list:
    return [obs for session in deployment.client_sessions() for obs in session.observations]


def check_read_realtime(deployment, counters) -> List[AuditFinding]:
    """
    线性一致读在某个写响应之后开始时，读水位 i 不小于该写的槽
    """
    writes = sorted((c.response_time, c.slot) for c in counters.completed if c.kind == "write")
    times = [t for t, _ in writes]
    prefix_max: List[int] = []
    best = -1
    for _, slot in writes:
        best = max(best, slot)
        prefix_max.append(best)

    findings = []
    for obs in _observations(deployment):
        if obs.level != "linearizable":
            continue
        # 批处理读的水位由批处理器计算，客户端只能看到副本执行时的水位 j >= i
        seen = obs.observed_slot if obs.batched or obs.required_slot is None else obs.required_slot
        k = bisect.bisect_left(times, obs.invoke_time)
        if k and prefix_max[k - 1] > seen:
            findings.append(_fail(
                "read_realtime",
                f"read c{obs.client}#{obs.seq} used watermark {seen} after slot {prefix_max[k - 1]} was acknowledged",
                slot=prefix_max[k - 1],
                node=f"client/{obs.client}",
            ))
    return findings or [_pass("read_realtime")]


def check_sequential_reads(deployment) -> List[AuditFinding]:
    findings = []
    for session in deployment.client_sessions():
        last = -1
        for obs in session.observations:
            if obs.level != "sequential":
                continue
            required = obs.required_slot if obs.required_slot is not None else -1
            if obs.observed_slot < required:
                findings.append(_fail(
                    "sequential_reads", f"read #{obs.seq} saw slot {obs.observed_slot} < {required}",
                    node=session.address,
                ))
            if obs.observed_slot < last:
                findings.append(_fail(
                    "sequential_reads", f"observed slot fell from {last} to {obs.observed_slot}",
                    node=session.address,
                ))
            last = max(last, obs.observed_slot)
    return findings or [_pass("sequential_reads")]


def check_eventual_prefix(deployment, chosen_log: Dict[int, Batch]) -> List[AuditFinding]:
    """最终一致读的结果等于选定日志某个连续前缀执行后的状态"""
    reads = sorted(
        (obs for obs in _observations(deployment) if obs.level == "eventual"),
        key=lambda obs: obs.observed_slot,
    )
    if not reads:
        return [_pass("eventual_prefix", "no eventual reads")]
    log: Dict[int, Batch] = dict(chosen_log)
    for _, (replica_log, _) in _replica_logs(deployment).items():
        for slot, value in replica_log.items():
            log.setdefault(slot, value)

    findings = []
    kv: Dict[str, str] = {}
    table: Dict[int, ClientRecord] = {}
    applied = -1
    for obs in reads:
        while applied < obs.observed_slot:
            applied += 1
            if applied not in log:
                break
            apply_batch(kv, table, applied, log[applied])
        if applied < obs.observed_slot or kv.get(obs.key) != obs.output:
            findings.append(_fail(
                "eventual_prefix",
                f"read c{obs.client}#{obs.seq} of {obs.key} returned {obs.output!r}, prefix 0..{obs.observed_slot} "
                f"holds {kv.get(obs.key)!r}",
                slot=obs.observed_slot,
                node=f"client/{obs.client}",
            ))
            if applied < obs.observed_slot:
                break
    return findings or [_pass("eventual_prefix", f"{len(reads)} reads")]


def check_unbatchers(deployment) -> List[AuditFinding]:
    findings = []
    for address in deployment.unbatchers:
        unbatcher: Unbatcher = deployment.nodes[address]
        if unbatcher.replies_sent != unbatcher.entries_received:
            findings.append(_fail(
                "unbatcher_fanout",
                f"{unbatcher.entries_received} entries in, {unbatcher.replies_sent} replies out",
                node=address,
            ))
    return findings or [_pass("unbatcher_fanout")]


def check_reply_conservation(deployment, counters) -> List[AuditFinding]:
    """无损运行中每个完成的操作恰好收到一条回复"""
    replies = sum(
        counters.nodes[c].in_by_type.get("ClientReply", 0) for c in deployment.clients if c in counters.nodes
    )
    if replies != len(counters.completed):
        return [_fail("reply_conservation", f"{replies} replies for {len(counters.completed)} completed operations")]
    return [_pass("reply_conservation")]


def audit_trace(result) -> AuditReport:
    """
    审计一次模拟的轨迹

    Args:
        result: run_simulation 的返回值

    Returns:
        审计报告，包含每项检查的结论
    """
    deployment = result.deployment
    counters = result.counters
    report = AuditReport()
    findings = report.findings

    for violation in result.violations:
        findings.append(_fail("safety", violation))
    for error in result.protocol_errors:
        findings.append(_fail("protocol", error))

    findings.extend(check_vote_agreement(deployment))
    findings.extend(check_replica_logs(deployment, result.chosen_log))
    findings.extend(check_responders(deployment))
    findings.extend(check_watermarks(deployment))
    findings.extend(check_read_realtime(deployment, counters))
    findings.extend(check_sequential_reads(deployment))
    findings.extend(check_eventual_prefix(deployment, result.chosen_log))
    findings.extend(check_unbatchers(deployment))
    if result.lossless:
        findings.extend(check_leader_load(deployment, counters))
        findings.extend(check_reply_conservation(deployment, counters))

    for failure in report.failures:
        logger.warning(f"审计失败 {failure}")
    return report
