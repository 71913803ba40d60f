"""
socket 帧编解码

帧格式：4 字节大端负载长度，随后是 JSON 编码的信封 {type, from, to, body}。
"""
import asyncio
import logging
import struct
from typing import Optional

from pydantic import ValidationError as PydanticValidationError

from ..config import settings
from ..errors import FrameError
from ..models import Envelope

logger = logging.getLogger(__name__)

HEADER = struct.Struct(">I")
HELLO = "Hello"


def encode_frame(envelope: Envelope) -> bytes:
    payload = envelope.model_dump_json(by_alias=True).encode("utf-8")
    return HEADER.pack(len(payload)) + payload


def decode_payload(payload: bytes) -> Envelope:
    """
    Raises:
        FrameError: 负载不是合法的信封
    """
    try:
        return Envelope.model_validate_json(payload)
    except PydanticValidationError as e:
        raise FrameError(f"Malformed envelope: {e.error_count()} error(s)") from e


async def read_frame(reader: asyncio.StreamReader, max_bytes: Optional[int] = None) -> Optional[Envelope]:
    """
    读取一帧

    Args:
        reader: 流读取器
        max_bytes: 负载长度上限，默认 settings.serve_max_frame_bytes

    Returns:
        信封；对端正常关闭时返回 None

    Raises:
        FrameError: 长度越界、帧被截断或负载非法
    """
    limit = max_bytes if max_bytes is not None else settings.serve_max_frame_bytes
    try:
        header = await reader.readexactly(HEADER.size)
    except asyncio.IncompleteReadError as e:
        if not e.partial:
            return None
        raise FrameError("Truncated frame header") from e
    (length,) = HEADER.unpack(header)
    if length > limit:
        raise FrameError(f"Frame of {length} bytes exceeds the limit of {limit}")
    try:
        payload = await reader.readexactly(length)
    except asyncio.IncompleteReadError as e:
        raise FrameError(f"Truncated frame: expected {length} bytes, got {len(e.partial)}") from e
    return decode_payload(payload)


def hello(addresses: list[str]) -> Envelope:
    """连接建立后的首帧，登记该连接承载的地址"""
    return Envelope(type=HELLO, from_=addresses[0] if addresses else "", to="router", body={"addresses": addresses})
