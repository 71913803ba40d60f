"""全局配置和初始化模块"""

import logging
from typing import Optional

from .config import settings
from .errors import ResourceNotFoundError
from .models import DeploymentPlan
from .serve.loopback import LoopbackCluster

logger = logging.getLogger(__name__)


# 全局配置类
class GlobalConfig:
    """全局配置管理：管理网关所服务的回环部署"""
    cluster: Optional[LoopbackCluster] = None
    owns_cluster: bool = False
    is_initialized: bool = False

    @classmethod
    async def init(cls, plan: Optional[DeploymentPlan] = None, cluster: Optional[LoopbackCluster] = None):
        """
        绑定一个已运行的部署，或按计划启动一个新部署

        Args:
            plan: 部署计划；cluster 为空时按它在 settings.serve_host/serve_port 上启动部署
            cluster: 已启动的部署（serve 命令与测试使用）
        """
        if cluster is not None:
            logger.info("管理网关绑定到已运行的部署")
            cls.cluster = cluster
            cls.owns_cluster = False
        elif plan is not None:
            logger.info(f"管理网关自行启动部署 {settings.serve_host}:{settings.serve_port}")
            cls.cluster = await LoopbackCluster(plan, settings.serve_host, settings.serve_port).start()
            cls.owns_cluster = True
        else:
            logger.warning("！！！管理网关没有绑定任何部署，只提供健康检查！！！")

    @classmethod
    async def init_global(cls, plan: Optional[DeploymentPlan] = None, cluster: Optional[LoopbackCluster] = None) -> None:
        """初始化全局组件"""
        if cls.is_initialized:
            logger.info("全局配置已初始化，跳过")
            return

        logger.info("开始初始化全局配置")
        await cls.init(plan, cluster)
        cls.is_initialized = True
        logger.info("全局配置初始化完成")

    @classmethod
    def get_cluster(cls) -> LoopbackCluster:
        """
        Raises:
            ResourceNotFoundError: 没有绑定部署
        """
        if cls.cluster is None:
            raise ResourceNotFoundError("No deployment is being served")
        return cls.cluster

    @classmethod
    async def shutdown(cls) -> None:
        if cls.owns_cluster and cls.cluster is not None:
            await cls.cluster.close()
        cls.cluster = None
        cls.owns_cluster = False
        cls.is_initialized = False
