"""
历史记录：调用/响应事件的采集、JSON Lines 读写，以及配对成操作
"""
import json
import logging
from typing import Dict, List, Optional

from pydantic import ValidationError as PydanticValidationError

from ..errors import HistoryFormatError
from ..models import ClientReply, Command, HistoryEvent, HistoryOp, Operation

logger = logging.getLogger(__name__)


def _history_op(cmd: Command) -> HistoryOp:
    op = cmd.op
    if op.type == "write":
        return HistoryOp(type="write", key=op.key, value=op.value)
    return HistoryOp(type="read", key=op.key)


class HistoryRecorder:
    """按发生顺序记录客户端的调用和响应"""

    def __init__(self):
        self.events: List[HistoryEvent] = []

    def record_invoke(self, cmd: Command, t: int) -> None:
        self.events.append(HistoryEvent(t=int(t), kind="inv", client=cmd.client_id, seq=cmd.seq, op=_history_op(cmd)))

    def record_response(self, cmd: Command, reply: ClientReply, t: int) -> None:
        self.events.append(HistoryEvent(
            t=int(t), kind="res", client=cmd.client_id, seq=cmd.seq, op=_history_op(cmd), out=reply.output,
        ))


def dump_history_lines(events: List[HistoryEvent]) -> str:
    return "".join(e.model_dump_json(exclude_none=True) + "\n" for e in events)


def write_history(events: List[HistoryEvent], path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dump_history_lines(events))


def parse_history_lines(lines: List[str]) -> List[HistoryEvent]:
    """
    解析 JSON Lines 历史

    Raises:
        HistoryFormatError: 某一行不是合法的历史事件
    """
    events = []
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            events.append(HistoryEvent.model_validate(json.loads(line)))
        except (json.JSONDecodeError, PydanticValidationError) as e:
            raise HistoryFormatError(f"line {lineno}: {e}") from e
    return events


def read_history(path: str) -> List[HistoryEvent]:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return parse_history_lines(fh.readlines())
    except OSError as e:
        raise HistoryFormatError(f"cannot read history {path}: {e}") from e


def build_operations(events: List[HistoryEvent]) -> List[Operation]:
    """
    把事件配对成操作

    事件按时间稳定排序后，位置即为先后关系：a 的响应位置早于 b 的调用位置时 a 先于 b。

    Raises:
        HistoryFormatError: 同一客户端同时有两个未完成操作，或响应找不到对应的调用
    """
    ordered = sorted(enumerate(events), key=lambda pair: (pair[1].t, pair[0]))
    open_ops: Dict[int, dict] = {}
    finished: List[dict] = []
    for idx, (_, event) in enumerate(ordered):
        if event.kind == "inv":
            if event.client in open_ops:
                raise HistoryFormatError(
                    f"client {event.client} invokes seq {event.seq} while seq "
                    f"{open_ops[event.client]['seq']} is pending"
                )
            open_ops[event.client] = {
                "client": event.client, "seq": event.seq, "op": event.op,
                "inv_idx": idx, "inv_t": event.t,
            }
            continue
        current: Optional[dict] = open_ops.pop(event.client, None)
        if current is None or current["seq"] != event.seq:
            raise HistoryFormatError(f"response of client {event.client} seq {event.seq} has no invocation")
        current.update(res_idx=idx, res_t=event.t, out=event.out)
        finished.append(current)

    raw = finished + list(open_ops.values())
    raw.sort(key=lambda r: r["inv_idx"])
    return [Operation(index=i, **r) for i, r in enumerate(raw)]
