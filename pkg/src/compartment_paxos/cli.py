"""
命令行入口

子命令：
    run       运行一次模拟，写出历史和指标，并审计轨迹
    check     对历史文件做线性一致性/顺序一致性检查
    model     计算分析吞吐模型
    ablation  运行消融实验，输出 CSV
    serve     在回环 TCP 上承载全部角色，可选启动管理网关

退出码：0 成功，2 配置错误，3 审计或安全性失败，4 检查出违例，5 超出检查器容量。
结果写到 stdout 或文件，日志写到 stderr。
"""
import argparse
import asyncio
import json
import logging
import signal
import sys
from typing import List, Optional

from pydantic import TypeAdapter, ValidationError as PydanticValidationError

from .checker import audit_trace, check_linearizable, check_sequential, read_history, write_history
from .config import settings
from .errors import CheckerCapacityError, PlanValidationError, ValidationError
from .evaluation.ablation import (
    AblationStep,
    batched_ablation_steps,
    default_ablation_steps,
    render_ablation_csv,
    run_ablation,
)
from .evaluation.report import render_metrics_csv, write_text
from .evaluation.throughput_model import analytical_peak_throughput, is_unbounded, make_params, throughput_limit
from .models import DeploymentPlan, WorkloadSpec, load_run_config, validate_plan
from .sim import run_simulation

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_AUDIT = 3
EXIT_VIOLATION = 4
EXIT_CAPACITY = 5
# 只在 run --fail-on-stall 时使用
EXIT_STALLED = 6


def _fail(code: int, message: str) -> int:
    print(message, file=sys.stderr)
    return code


def _load_plan(path: str):
    config = load_run_config(path)
    validate_plan(config.plan)
    return config


def cmd_run(args: argparse.Namespace) -> int:
    config = _load_plan(args.plan)
    net = config.net.model_copy(update={"seed": args.seed}) if args.seed is not None else config.net
    workload = config.plan.workload or WorkloadSpec()
    result = run_simulation(
        config.plan,
        net=net,
        capacity=config.capacity,
        workload=workload,
        faults=config.faults,
        duration=args.duration,
        warmup_fraction=args.warmup,
    )
    if args.out_history:
        write_history(result.history, args.out_history)
    metrics_csv = render_metrics_csv(config.plan, workload, result.metrics)
    if args.out_metrics:
        write_text(args.out_metrics, metrics_csv)
    else:
        sys.stdout.write(metrics_csv)

    report = audit_trace(result)
    for finding in report.failures:
        logger.error(f"审计失败 {finding}")
    if not report.ok:
        return _fail(EXIT_AUDIT, f"audit failed: {', '.join(sorted({f.check for f in report.failures}))}")
    if args.fail_on_stall and result.metrics.stalled:
        return _fail(EXIT_STALLED, f"stalled: no operation completed after t={result.metrics.duration * args.warmup:.0f}")
    return EXIT_OK


def cmd_check(args: argparse.Namespace) -> int:
    events = read_history(args.history)
    checker = check_linearizable if args.mode == "linearizable" else check_sequential
    try:
        verdict = checker(events, max_ops=args.max_ops)
    except CheckerCapacityError as e:
        return _fail(EXIT_CAPACITY, f"capacity exceeded: {e}")
    if verdict.ok:
        print(f"OK {len(verdict.witness)}")
        return EXIT_OK
    print(f"VIOLATION {len(verdict.violation)}")
    for op in verdict.violation:
        print(op.describe())
    return EXIT_VIOLATION


def cmd_model(args: argparse.Namespace) -> int:
    params = make_params(args.n, args.alpha, args.write_frac)
    limit = throughput_limit(params)
    print(f"throughput {analytical_peak_throughput(params):.6f}")
    print("limit unbounded" if is_unbounded(limit) else f"limit {limit:.6f}")
    return EXIT_OK


def _load_steps(path: str) -> List[AblationStep]:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return TypeAdapter(List[AblationStep]).validate_python(json.load(fh))
    except (OSError, json.JSONDecodeError, PydanticValidationError) as e:
        raise ValidationError(f"无法读取消融步骤 {path}: {e}") from e


def cmd_ablation(args: argparse.Namespace) -> int:
    config = load_run_config(args.plan)
    if args.steps:
        steps = _load_steps(args.steps)
    else:
        steps = batched_ablation_steps() if args.preset == "batched" else default_ablation_steps()
    workload = config.plan.workload or WorkloadSpec(read_fraction=0.0)
    client_counts = [int(c) for c in args.clients.split(",")] if args.clients else None
    rows = run_ablation(
        config.plan,
        steps,
        capacity=config.capacity if config.capacity.enabled else None,
        workload=workload,
        client_counts=client_counts,
        duration=args.duration,
        net=config.net,
    )
    csv_text = render_ablation_csv(rows, workload)
    if args.out:
        write_text(args.out, csv_text)
    else:
        sys.stdout.write(csv_text)
    return EXIT_OK


def _parse_listen(listen: Optional[str]):
    if not listen:
        return settings.serve_host, settings.serve_port
    host, sep, port = listen.rpartition(":")
    if not sep or not port.isdigit():
        raise ValidationError(f"--listen 需要 host:port，收到 {listen}")
    return host or settings.serve_host, int(port)


async def serve_until_stopped(plan: DeploymentPlan, host: str, port: int, admin_port: int = 0,
                              stop: Optional[asyncio.Event] = None) -> int:
    """
    承载回环部署直到收到 SIGTERM/SIGINT 或 stop 被设置

    Raises:
        OSError: 端口无法绑定
    """
    from .serve import LoopbackCluster

    stop = stop or asyncio.Event()
    loop = asyncio.get_running_loop()
    for sig in (signal.SIGTERM, signal.SIGINT):
        try:
            loop.add_signal_handler(sig, stop.set)
        except (NotImplementedError, RuntimeError):
            pass

    cluster = LoopbackCluster(plan, host, port)
    await cluster.start()
    print(f"listening {cluster.host}:{cluster.port}", flush=True)

    admin_server = None
    admin_task = None
    if admin_port:
        import uvicorn
        from .app import create_app

        admin_server = uvicorn.Server(uvicorn.Config(
            create_app(cluster=cluster), host=host, port=admin_port, log_level=settings.log_level.lower(),
        ))
        admin_task = asyncio.create_task(admin_server.serve())
        admin_task.add_done_callback(lambda _: stop.set())
        logger.info(f"管理网关监听 {host}:{admin_port}")

    try:
        await stop.wait()
        logger.info("收到停止信号，开始关闭")
    finally:
        if admin_server is not None:
            admin_server.should_exit = True
            await asyncio.gather(admin_task, return_exceptions=True)
        await cluster.close()
        for sig in (signal.SIGTERM, signal.SIGINT):
            try:
                loop.remove_signal_handler(sig)
            except (NotImplementedError, RuntimeError):
                pass
    return EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:
    config = _load_plan(args.plan)
    host, port = _parse_listen(args.listen)
    admin_port = args.admin_port if args.admin_port is not None else settings.serve_admin_port
    try:
        return asyncio.run(serve_until_stopped(config.plan, host, port, admin_port))
    except OSError as e:
        return _fail(EXIT_CONFIG, f"cannot bind {host}:{port}: {e}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="compartment-paxos",
        description="Compartmentalized MultiPaxos simulator, checker and evaluation kit.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one simulation and audit its trace")
    run.add_argument("--plan", required=True)
    run.add_argument("--seed", type=int)
    run.add_argument("--duration", type=int)
    run.add_argument("--warmup", type=float, default=0.0)
    run.add_argument("--out-history", dest="out_history")
    run.add_argument("--out-metrics", dest="out_metrics")
    run.add_argument("--fail-on-stall", dest="fail_on_stall", action="store_true",
                     help="exit 6 when the measurement window completed no operation")
    run.set_defaults(handler=cmd_run)

    check = sub.add_parser("check", help="check a JSON Lines history")
    check.add_argument("--history", required=True)
    check.add_argument("--mode", choices=["linearizable", "sequential"], default="linearizable")
    check.add_argument("--max-ops", dest="max_ops", type=int)
    check.set_defaults(handler=cmd_check)

    model = sub.add_parser("model", help="analytical throughput model")
    model.add_argument("--n", type=int, required=True)
    model.add_argument("--alpha", type=float, required=True)
    model.add_argument("--write-frac", dest="write_frac", type=float, required=True)
    model.set_defaults(handler=cmd_model)

    ablation = sub.add_parser("ablation", help="run the ablation study")
    ablation.add_argument("--plan", required=True)
    ablation.add_argument("--steps")
    ablation.add_argument("--preset", choices=["default", "batched"], default="default")
    ablation.add_argument("--clients", help="comma separated client counts")
    ablation.add_argument("--duration", type=int, default=3000)
    ablation.add_argument("--out")
    ablation.set_defaults(handler=cmd_ablation)

    serve = sub.add_parser("serve", help="host every role over loopback TCP")
    serve.add_argument("--plan", required=True)
    serve.add_argument("--listen")
    serve.add_argument("--admin-port", dest="admin_port", type=int)
    serve.set_defaults(handler=cmd_serve)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=settings.log_level.upper(),
        stream=sys.stderr,
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    )
    try:
        return args.handler(args)
    except PlanValidationError as e:
        return _fail(EXIT_CONFIG, "invalid plan: " + ", ".join(e.codes) + f"\n{e}")
    except ValidationError as e:
        return _fail(EXIT_CONFIG, f"invalid input: {e}")


if __name__ == "__main__":
    raise SystemExit(main())
