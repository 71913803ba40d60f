"""
批处理器与解批器测试
"""

import random
from typing import List

import pytest

from src.compartment_paxos.errors import ProtocolError
from src.compartment_paxos.models import (
    BatchRequest,
    ClientReply,
    ClientRequest,
    Command,
    PreRead,
    PreReadAck,
    ReadOp,
    ReadRequest,
    ResultBatch,
    ResultBatchMessage,
    ResultEntry,
    WriteOp,
)
from src.compartment_paxos.quorums import GridQuorumSystem
from src.compartment_paxos.roles import Batcher, CancelTimer, Send, SetTimer, Unbatcher


def write_req(client: int, seq: int = 0) -> ClientRequest:
    return ClientRequest(command=Command(client_id=client, seq=seq, op=WriteOp(key=f"k{client}", value="v")))


def read_req(client: int, seq: int = 0) -> ClientRequest:
    return ClientRequest(command=Command(client_id=client, seq=seq, op=ReadOp(key=f"k{client}")))


def sends(role) -> List[Send]:
    return [a for a in role.drain() if isinstance(a, Send)]


@pytest.fixture
def batcher() -> Batcher:
    """批大小 3、超时 10 的批处理器，2x2 网格"""
    role = Batcher(
        "batcher/0",
        batch_size=3,
        timeout=10,
        quorums=GridQuorumSystem(2, 2),
        replicas=["replica/0", "replica/1"],
        rng=random.Random(5),
    )
    role.retries_enabled = False
    return role


class TestBatcherWrites:
    """写批次测试类"""

    def test_full_batch_flushes_in_arrival_order(self, batcher: Batcher):
        for client in range(3):
            batcher.handle_message(f"client/{client}", write_req(client), client)
        out = sends(batcher)
        assert len(out) == 1
        assert out[0].dst == "proposer/0"
        assert isinstance(out[0].msg, BatchRequest)
        assert [c.client_id for c in out[0].msg.batch.commands] == [0, 1, 2]
        assert batcher.write_batches_sent == 1

    def test_first_command_arms_timer(self, batcher: Batcher):
        batcher.handle_message("client/0", write_req(0), 0)
        actions = batcher.drain()
        assert actions == [SetTimer("flush_writes", 10)]

    def test_flush_cancels_timer(self, batcher: Batcher):
        for client in range(3):
            batcher.handle_message(f"client/{client}", write_req(client), client)
        assert CancelTimer("flush_writes") in batcher.drain()

    def test_timeout_flushes_partial_batch(self, batcher: Batcher):
        batcher.handle_message("client/0", write_req(0), 0)
        batcher.handle_message("client/1", write_req(1), 1)
        batcher.drain()
        batcher.handle_timer("flush_writes", 10)
        out = sends(batcher)
        assert len(out) == 1
        assert len(out[0].msg.batch) == 2
        assert batcher.state.pending_writes == []

    def test_timeout_on_empty_buffer_is_noop(self, batcher: Batcher):
        batcher.handle_timer("flush_writes", 10)
        assert batcher.drain() == []

    def test_thirty_writes_make_ten_batches(self, batcher: Batcher):
        for i in range(30):
            batcher.handle_message(f"client/{i}", write_req(i), i)
        assert len(sends(batcher)) == 10
        assert batcher.write_batches_sent == 10


class TestBatcherReads:
    """读批次测试类"""

    def test_reads_and_writes_batch_separately(self, batcher: Batcher):
        batcher.handle_message("client/0", read_req(0), 0)
        batcher.handle_message("client/1", write_req(1), 1)
        batcher.handle_message("client/2", read_req(2), 2)
        assert sends(batcher) == []
        assert len(batcher.state.pending_reads) == 2
        assert len(batcher.state.pending_writes) == 1

    def test_read_batch_uses_one_preread_round(self, batcher: Batcher):
        for client in range(3):
            batcher.handle_message(f"client/{client}", read_req(client), client)
        prereads = sends(batcher)
        assert len(prereads) == 2
        assert all(isinstance(s.msg, PreRead) for s in prereads)
        read_id = prereads[0].msg.read_id

        for i, s in enumerate(prereads):
            acceptor_id = int(s.dst.split("/")[1])
            batcher.handle_message(s.dst, PreReadAck(read_id=read_id, acceptor_id=acceptor_id, vote_watermark=4 + i), 5)
        out = sends(batcher)
        assert len(out) == 1
        msg = out[0].msg
        assert isinstance(msg, ReadRequest)
        assert msg.batched
        assert msg.required_slot == 5
        assert len(msg.commands) == 3
        assert batcher.read_batches_sent == 1

    def test_stale_or_foreign_acks_ignored(self, batcher: Batcher):
        for client in range(3):
            batcher.handle_message(f"client/{client}", read_req(client), client)
        prereads = sends(batcher)
        read_id = prereads[0].msg.read_id
        row = {int(s.dst.split("/")[1]) for s in prereads}
        outsider = next(a for a in range(4) if a not in row)
        batcher.handle_message("acceptor/x", PreReadAck(read_id=read_id, acceptor_id=outsider, vote_watermark=9), 5)
        batcher.handle_message("acceptor/x", PreReadAck(read_id="other", acceptor_id=min(row), vote_watermark=9), 5)
        assert sends(batcher) == []

    def test_preread_timeout_switches_row(self):
        batcher = Batcher("batcher/0", 1, 10, GridQuorumSystem(2, 2), ["replica/0"], rng=random.Random(0))
        batcher.handle_message("client/0", read_req(0), 0)
        actions = batcher.drain()
        first = {a.dst for a in actions if isinstance(a, Send)}
        timer = next(a for a in actions if isinstance(a, SetTimer))
        assert timer.timer_id == "read|batcher/0:1:0"
        batcher.handle_timer(timer.timer_id, 100)
        second = {s.dst for s in sends(batcher)}
        assert second and not (first & second)


class TestUnbatcher:
    """解批器测试类"""

    def test_fans_out_one_reply_per_entry(self):
        unbatcher = Unbatcher("unbatcher/0")
        entries = tuple(ResultEntry(client_id=c, seq=1, output="OK", slot=7) for c in (3, 8, 9))
        unbatcher.handle_message("replica/0", ResultBatchMessage(results=ResultBatch(entries=entries)), 0)
        out = sends(unbatcher)
        assert [s.dst for s in out] == ["client/3", "client/8", "client/9"]
        assert out[1].msg == ClientReply(client_id=8, seq=1, output="OK", slot=7)
        assert unbatcher.batches_received == 1
        assert unbatcher.entries_received == unbatcher.replies_sent == 3

    def test_empty_batch_rejected(self):
        unbatcher = Unbatcher("unbatcher/0")
        with pytest.raises(ProtocolError):
            unbatcher.handle_message("replica/0", ResultBatchMessage(results=ResultBatch(entries=())), 0)
        assert unbatcher.drain() == []

    def test_unexpected_message_rejected(self):
        with pytest.raises(ProtocolError):
            Unbatcher("unbatcher/0").handle_message("client/0", write_req(0), 0)
