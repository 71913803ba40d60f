from fastapi import APIRouter
from .status_routes import router as status_router
from .kv_routes import router as kv_router


# 创建总路由
api_router = APIRouter()

# 注册所有子路由
api_router.include_router(status_router)
api_router.include_router(kv_router)
