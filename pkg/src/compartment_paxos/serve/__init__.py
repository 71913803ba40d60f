from .base_mailbox import BaseMailbox, MailboxManager, MailItem
from .driver import DriverReport, run_driver
from .loopback import FrameRouter, LoopbackCluster, NodeHost
from .memory_mailbox import MemoryMailbox
from .transport import decode_payload, encode_frame, hello, read_frame

__all__ = [
    "BaseMailbox",
    "MailboxManager",
    "MailItem",
    "DriverReport",
    "run_driver",
    "FrameRouter",
    "LoopbackCluster",
    "NodeHost",
    "MemoryMailbox",
    "decode_payload",
    "encode_frame",
    "hello",
    "read_frame",
]
