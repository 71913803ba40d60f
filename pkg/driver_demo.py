"""
闭环驱动示例

默认在进程内启动一个回环部署并对它发 100 个写；传入 --port 时改为连接已经在运行的
`compartment-paxos serve`。结束后用检查器验证这次运行的历史。
"""
import argparse
import asyncio
import logging

from src.compartment_paxos.checker import check_linearizable
from src.compartment_paxos.models import WorkloadSpec, load_run_config
from src.compartment_paxos.serve import LoopbackCluster, run_driver

# 配置日志
logging.basicConfig(
    level=logging.INFO, format="%(asctime)s - %(name)s - %(levelname)s - %(message)s"
)
logger = logging.getLogger(__name__)


async def main(plan_path: str, port: int, clients: int, ops: int, read_fraction: float) -> int:
    plan = load_run_config(plan_path).plan
    workload = WorkloadSpec(
        num_clients=clients, ops_per_client=ops, read_fraction=read_fraction, keyspace=8, rng_seed=7,
    )

    if port:
        report = await run_driver(plan, "127.0.0.1", port, workload)
    else:
        async with LoopbackCluster(plan, "127.0.0.1", 0) as cluster:
            report = await run_driver(plan, cluster.host, cluster.port, workload)

    logger.info(f"{report.completed}/{report.sent} 个操作完成，{report.ok_writes} 个写返回 OK")
    verdict = check_linearizable(report.history, max_ops=len(report.history))
    logger.info(f"线性一致性检查：{'通过' if verdict.ok else '失败'}")
    return 0 if verdict.ok and not report.timed_out else 1


if __name__ == "__main__":
    parser = argparse.ArgumentParser(description="closed-loop driver for a loopback deployment")
    parser.add_argument("--plan", default="scripts/plans/smoke.json")
    parser.add_argument("--port", type=int, default=0)
    parser.add_argument("--clients", type=int, default=4)
    parser.add_argument("--ops", type=int, default=25)
    parser.add_argument("--read-fraction", dest="read_fraction", type=float, default=0.0)
    args = parser.parse_args()
    raise SystemExit(asyncio.run(main(args.plan, args.port, args.clients, args.ops, args.read_fraction)))
