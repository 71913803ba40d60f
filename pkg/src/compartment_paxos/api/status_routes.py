from fastapi import APIRouter, Depends

from ..models import ClusterStatus, HealthResponse
from ..services import StatusService

router = APIRouter(
    tags=["Status"]
)


# 依赖注入：获取 service 单例
def get_status_service() -> StatusService:
    return StatusService()


@router.get("/health", response_model=HealthResponse)
async def health(service: StatusService = Depends(get_status_service)):
    """Liveness of the admin gateway and whether a deployment is attached."""
    return service.health()


@router.get("/status", response_model=ClusterStatus)
async def status(service: StatusService = Depends(get_status_service)):
    """Leader, replica watermarks, acceptor watermarks and router counters."""
    return service.status()
