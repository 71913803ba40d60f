from .kv_service import KvService
from .status_service import StatusService


__all__ = [
    "KvService",
    "StatusService",
]
