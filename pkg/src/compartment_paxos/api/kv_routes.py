from fastapi import APIRouter, Body, Depends, Path

from ..models import KvResponse, KvWrite
from ..services import KvService

router = APIRouter(
    prefix="/kv",
    tags=["KV"]
)


# 依赖注入：获取 service 单例
def get_kv_service() -> KvService:
    return KvService()


@router.put("/{key}", response_model=KvResponse)
async def put_key(
    key: str = Path(..., description='The key to write.'),
    request: KvWrite = Body(...),
    service: KvService = Depends(get_kv_service)
):
    """Replicate a write through the leader; returns once a replica executed it."""
    return await service.put(key, request.value)


@router.get("/{key}", response_model=KvResponse)
async def get_key(
    key: str = Path(..., description='The key to read.'),
    service: KvService = Depends(get_kv_service)
):
    """Linearizable read."""
    return await service.get(key)
