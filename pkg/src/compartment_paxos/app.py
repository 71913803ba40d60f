import asyncio
from contextlib import asynccontextmanager
import logging
from typing import Callable, Optional
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from pydantic import ValidationError as PydanticValidationError

from .api import api_router
from .errors import ValidationError, ResourceNotFoundError
from .global_config import GlobalConfig
from .models import DeploymentPlan
from .serve.loopback import LoopbackCluster
from .services import KvService


logger = logging.getLogger(__name__)


async def _init_app_resources(
    plan: Optional[DeploymentPlan] = None,
    cluster: Optional[LoopbackCluster] = None,
) -> None:
    logger.info("管理网关启动")
    await GlobalConfig.init_global(plan, cluster)


async def _cleanup_app_resources() -> None:
    """清理应用资源"""
    await KvService().close()
    await GlobalConfig.shutdown()
    logger.info("管理网关关闭")


def create_app(
    plan: Optional[DeploymentPlan] = None,
    cluster: Optional[LoopbackCluster] = None,
    custom_lifespan: Optional[Callable] = None,
) -> FastAPI:
    """
    创建管理网关的 FastAPI 应用实例

    Args:
        plan: 部署计划；没有传入 cluster 时，网关在启动时按该计划自行启动回环部署
        cluster: 已在运行的回环部署（serve 命令传入自己的部署）
        custom_lifespan: 自定义 lifespan 上下文管理器，会包装在内部 lifespan 外层

    Returns:
        配置好的 FastAPI 应用实例

    Example:
        ```python
        from compartment_paxos.app import create_app
        from compartment_paxos.models import DeploymentPlan

        app = create_app(plan=DeploymentPlan(f=1, grid_rows=2, grid_cols=2))
        ```
    """
    @asynccontextmanager
    async def lifespan(app_instance: FastAPI):
        if custom_lifespan:
            async with custom_lifespan(app_instance):
                await _init_app_resources(plan, cluster)
                yield
                await _cleanup_app_resources()
        else:
            await _init_app_resources(plan, cluster)
            yield
            await _cleanup_app_resources()

    app = FastAPI(lifespan=lifespan, title="compartment-paxos admin")

    # 注册异常处理器
    @app.exception_handler(ValidationError)
    async def validation_error_handler(_request: Request, exc: ValidationError):
        return JSONResponse(
            status_code=400,
            content={"error": "Validation Error", "detail": str(exc)}
        )

    @app.exception_handler(PydanticValidationError)
    async def pydantic_validation_error_handler(_request: Request, exc: PydanticValidationError):
        return JSONResponse(
            status_code=400,
            content={"error": "Validation Error", "detail": str(exc)}
        )

    @app.exception_handler(ResourceNotFoundError)
    async def not_found_error_handler(_request: Request, exc: ResourceNotFoundError):
        return JSONResponse(
            status_code=404,
            content={"error": "Not Found", "detail": str(exc)}
        )

    @app.exception_handler(asyncio.TimeoutError)
    async def timeout_error_handler(_request: Request, exc: asyncio.TimeoutError):
        return JSONResponse(
            status_code=504,
            content={"error": "Gateway Timeout", "detail": str(exc) or "operation was not acknowledged in time"}
        )

    @app.exception_handler(Exception)
    async def error_handler(_request: Request, exc: Exception):
        return JSONResponse(
            status_code=500,
            content={"error": "Exception", "detail": str(exc) or exc.__class__.__name__}
        )

    # 注册路由
    app.include_router(api_router)

    return app
