"""
使用 uvicorn 启动管理网关

网关在启动时按计划文件自行拉起一个回环部署，并在 /health、/status、/kv/{key} 上提供服务。
"""
import logging
import sys

import uvicorn

logger = logging.getLogger(__name__)


def run_server(plan_path: str, host: str = "127.0.0.1", port: int = 8000):
    """
    启动 uvicorn 服务器

    Args:
        plan_path: 部署计划 JSON 文件
        host: 监听主机地址，默认 "127.0.0.1"
        port: 监听端口，默认 8000
    """
    from src.compartment_paxos.app import create_app
    from src.compartment_paxos.models import load_run_config, validate_plan

    config = load_run_config(plan_path)
    validate_plan(config.plan)
    logger.info(f"Starting admin gateway on {host}:{port} for a {config.plan.variant.value} deployment")

    uvicorn.run(
        create_app(plan=config.plan),
        host=host,
        port=port,
        log_level="info",
    )


if __name__ == "__main__":
    from src.compartment_paxos.config import settings
    logging.basicConfig(
        level=settings.log_level, format="%(asctime)s - %(name)s - %(levelname)s - %(message)s"
    )
    plan = sys.argv[1] if len(sys.argv) > 1 else "scripts/plans/smoke.json"
    run_server(plan, host=settings.serve_host, port=settings.serve_admin_port or 8000)
