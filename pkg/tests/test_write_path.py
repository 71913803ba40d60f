"""
写路径角色测试：接受者、代理领导者、提议者
"""

import random
from typing import List

import pytest

from src.compartment_paxos.config import settings
from src.compartment_paxos.errors import BallotNotHigherError
from src.compartment_paxos.models import (
    Ballot,
    Batch,
    Chosen,
    ClientRequest,
    Command,
    LeaderInfo,
    Nack,
    Phase1a,
    Phase1b,
    Phase2a,
    Phase2b,
    PreRead,
    Recover,
    SelectionPolicy,
    Vote,
    WriteOp,
)
from src.compartment_paxos.models.state_models import AcceptorState, LeaderPhase
from src.compartment_paxos.quorums import GridQuorumSystem, MajorityQuorumSystem
from src.compartment_paxos.roles import (
    Acceptor,
    Proposer,
    ProxyLeader,
    Send,
    SetTimer,
    acceptor_on_phase1a,
    acceptor_on_phase2a,
    acceptor_on_preread,
    merge_phase1_votes,
)

REPLICAS = ["replica/0", "replica/1", "replica/2"]


# 辅助函数：构造写命令
def write(client: int, seq: int, key: str = "k", value: str = "v") -> Command:
    return Command(client_id=client, seq=seq, op=WriteOp(key=key, value=value))


def b(rnd: int, pid: int = 0) -> Ballot:
    return Ballot(round=rnd, proposer_id=pid)


# 辅助函数：取出发送动作
def sends(role) -> List[Send]:
    return [a for a in role.drain() if isinstance(a, Send)]


class TestAcceptor:
    """接受者纯函数测试类"""

    def test_fresh_phase1a_promises(self):
        state = AcceptorState()
        reply = acceptor_on_phase1a(state, Phase1a(ballot=b(1)), 0)
        assert isinstance(reply, Phase1b)
        assert reply.votes == {}
        assert state.promised_ballot == b(1)

    def test_stale_phase1a_is_nacked(self):
        state = AcceptorState(promised_ballot=b(2, 0))
        reply = acceptor_on_phase1a(state, Phase1a(ballot=b(1, 1)), 0)
        assert isinstance(reply, Nack)
        assert reply.ballot == b(2, 0)
        assert state.promised_ballot == b(2, 0)

    def test_phase1b_filters_by_from_slot(self):
        state = AcceptorState()
        v = Batch.of(write(0, 0))
        acceptor_on_phase2a(state, Phase2a(slot=3, ballot=b(0), value=v), 0)
        acceptor_on_phase2a(state, Phase2a(slot=7, ballot=b(0), value=v), 0)
        reply = acceptor_on_phase1a(state, Phase1a(ballot=b(1), from_slot=5), 0)
        assert list(reply.votes) == [7]

    def test_first_vote_sets_watermark(self):
        state = AcceptorState()
        reply = acceptor_on_phase2a(state, Phase2a(slot=5, ballot=b(0), value=Batch.of(write(0, 0))), 2)
        assert reply == Phase2b(slot=5, ballot=b(0), acceptor_id=2)
        assert state.vote_watermark == 5

    def test_stale_phase2a_is_nacked(self):
        state = AcceptorState(promised_ballot=b(2))
        reply = acceptor_on_phase2a(state, Phase2a(slot=0, ballot=b(1), value=Batch.of(write(0, 0))), 0)
        assert isinstance(reply, Nack)
        assert reply.slot == 0
        assert reply.rejected == b(1)
        assert state.votes == {}

    def test_watermark_is_max_vote_slot(self):
        state = AcceptorState()
        for slot in (7, 3):
            acceptor_on_phase2a(state, Phase2a(slot=slot, ballot=b(0), value=Batch.of(write(0, slot))), 0)
        assert state.vote_watermark == 7

    def test_preread_reports_watermark_without_change(self):
        state = AcceptorState()
        assert acceptor_on_preread(state, PreRead(read_id="r"), 0).vote_watermark == -1
        for slot in (0, 4):
            acceptor_on_phase2a(state, Phase2a(slot=slot, ballot=b(0), value=Batch.of(write(0, slot))), 0)
        first = acceptor_on_preread(state, PreRead(read_id="r"), 0)
        second = acceptor_on_preread(state, PreRead(read_id="r"), 0)
        assert first == second
        assert first.vote_watermark == 4

    def test_acceptor_role_logs_votes(self):
        acceptor = Acceptor("acceptor/1", 1)
        acceptor.handle_message("proxy/0", Phase2a(slot=2, ballot=b(0), value=Batch.of(write(0, 0))), 5)
        out = sends(acceptor)
        assert out[0].dst == "proxy/0"
        assert isinstance(out[0].msg, Phase2b)
        assert acceptor.vote_log[0][0] == 2
        assert acceptor.watermark_log == [2]


class TestProxyLeader:
    """代理领导者测试类"""

    def _proxy(self, rows: int = 2, cols: int = 2) -> ProxyLeader:
        return ProxyLeader("proxy/0", GridQuorumSystem(rows, cols), REPLICAS, rng=random.Random(1))

    def test_phase2a_goes_to_one_column(self):
        proxy = self._proxy(2, 2)
        proxy.handle_message("proposer/0", Phase2a(slot=0, ballot=b(0), value=Batch.of(write(0, 0))), 0)
        out = sends(proxy)
        assert len(out) == 2
        targets = {s.dst for s in out}
        assert targets in ({"acceptor/0", "acceptor/2"}, {"acceptor/1", "acceptor/3"})

    def test_2x3_column_height(self):
        proxy = self._proxy(2, 3)
        proxy.handle_message("proposer/0", Phase2a(slot=0, ballot=b(0), value=Batch.of(write(0, 0))), 0)
        assert len(sends(proxy)) == 2

    def test_duplicate_phase2a_is_idempotent(self):
        proxy = self._proxy()
        msg = Phase2a(slot=0, ballot=b(0), value=Batch.of(write(0, 0)))
        proxy.handle_message("proposer/0", msg, 0)
        proxy.drain()
        proxy.handle_message("proposer/0", msg, 1)
        assert sends(proxy) == []
        assert len(proxy.state.pending) == 1

    def test_full_column_chooses_and_broadcasts(self):
        proxy = self._proxy()
        value = Batch.of(write(0, 0))
        proxy.handle_message("proposer/0", Phase2a(slot=4, ballot=b(0), value=value), 0)
        column = sorted(int(s.dst.split("/")[1]) for s in sends(proxy))
        proxy.handle_message(f"acceptor/{column[0]}", Phase2b(slot=4, ballot=b(0), acceptor_id=column[0]), 1)
        assert sends(proxy) == []
        # 重复确认不会凑成法定人数
        proxy.handle_message(f"acceptor/{column[0]}", Phase2b(slot=4, ballot=b(0), acceptor_id=column[0]), 2)
        assert sends(proxy) == []
        proxy.handle_message(f"acceptor/{column[1]}", Phase2b(slot=4, ballot=b(0), acceptor_id=column[1]), 3)
        out = sends(proxy)
        assert [s.dst for s in out] == REPLICAS
        assert all(s.msg == Chosen(slot=4, value=value) for s in out)
        assert proxy.state.pending == {}

    def test_phase2b_for_unknown_or_stale_ballot_ignored(self):
        proxy = self._proxy()
        proxy.handle_message("proposer/0", Phase2a(slot=0, ballot=b(1), value=Batch.of(write(0, 0))), 0)
        proxy.drain()
        for a in range(4):
            proxy.handle_message(f"acceptor/{a}", Phase2b(slot=0, ballot=b(0), acceptor_id=a), 1)
        assert sends(proxy) == []

    def test_timeout_widens_to_untried_column(self):
        proxy = self._proxy(2, 3)
        proxy.handle_message("proposer/0", Phase2a(slot=0, ballot=b(0), value=Batch.of(write(0, 0))), 0)
        first = {s.dst for s in sends(proxy)}
        proxy.handle_timer("phase2:0:0:0", 60)
        actions = proxy.drain()
        second = {a.dst for a in actions if isinstance(a, Send)}
        assert second and not (first & second)
        assert any(isinstance(a, SetTimer) for a in actions)
        assert proxy.state.pending[(0, (0, 0))].retries_used == 1

    def test_gives_up_after_every_column(self):
        proxy = self._proxy(2, 2)
        proxy.handle_message("proposer/0", Phase2a(slot=0, ballot=b(0), value=Batch.of(write(0, 0))), 0)
        proxy.handle_timer("phase2:0:0:0", 60)
        proxy.handle_timer("phase2:0:0:0", 120)
        assert proxy.core.gave_up == 1
        assert proxy.state.pending == {}

    def test_late_ack_counts_after_widening(self):
        """重试后，迟到的 Phase2b 与新列的确认合并计算"""
        proxy = self._proxy(2, 2)
        value = Batch.of(write(0, 0))
        proxy.handle_message("proposer/0", Phase2a(slot=0, ballot=b(0), value=value), 0)
        first = sorted(int(s.dst.split("/")[1]) for s in sends(proxy))
        proxy.handle_timer("phase2:0:0:0", 60)
        proxy.drain()
        # 原列的两个确认迟到，仍然构成一个完整的列
        for a in first:
            proxy.handle_message(f"acceptor/{a}", Phase2b(slot=0, ballot=b(0), acceptor_id=a), 70)
        assert len([s for s in sends(proxy) if isinstance(s.msg, Chosen)]) == len(REPLICAS)

    def test_nack_forwarded_to_ballot_owner(self):
        proxy = self._proxy()
        proxy.handle_message("proposer/1", Phase2a(slot=0, ballot=b(0, 1), value=Batch.of(write(0, 0))), 0)
        proxy.drain()
        proxy.handle_message("acceptor/0", Nack(ballot=b(3, 0), slot=0, rejected=b(0, 1)), 1)
        out = sends(proxy)
        assert [s.dst for s in out] == ["proposer/1"]
        assert proxy.state.pending == {}

    def test_only_recent_chosen_values_are_kept(self, monkeypatch):
        monkeypatch.setattr(settings, "retained_slots", 2)
        proxy = self._proxy()
        for slot in range(4):
            proxy.handle_message("proposer/0", Phase2a(slot=slot, ballot=b(0), value=Batch.of(write(0, slot))), slot)
            for s in sends(proxy):
                a = int(s.dst.split("/")[1])
                proxy.handle_message(s.dst, Phase2b(slot=slot, ballot=b(0), acceptor_id=a), slot)
            proxy.drain()
        assert [key[0] for key in proxy.core.chosen] == [2, 3]

        # 窗口内的重复 Phase2a 直接重播 Chosen
        proxy.handle_message("proposer/0", Phase2a(slot=3, ballot=b(0), value=Batch.of(write(0, 3))), 9)
        assert {s.dst for s in sends(proxy)} == set(REPLICAS)
        # 窗口外的槽重新走一遍 Phase2
        proxy.handle_message("proposer/0", Phase2a(slot=0, ballot=b(0), value=Batch.of(write(0, 0))), 10)
        assert all(s.dst.startswith("acceptor/") for s in sends(proxy))


class TestProposer:
    """提议者测试类"""

    def _leader(self, proxies=("proxy/0", "proxy/1"), grid=(2, 2), index=0, **kwargs) -> Proposer:
        return Proposer(
            f"proposer/{index}",
            index,
            GridQuorumSystem(*grid),
            list(proxies),
            REPLICAS,
            followers=["client/0", "replica/0"],
            rng=random.Random(3),
            **kwargs,
        )

    def test_slots_assigned_in_order(self):
        leader = self._leader()
        for seq in range(3):
            leader.handle_message("client/0", ClientRequest(command=write(0, seq)), seq)
        out = sends(leader)
        assert [s.msg.slot for s in out] == [0, 1, 2]
        assert all(s.dst in ("proxy/0", "proxy/1") for s in out)
        assert leader.state.next_slot == 3

    def test_round_robin_proxy_selection(self):
        leader = self._leader(proxy_selection=SelectionPolicy.round_robin)
        for seq in range(4):
            leader.handle_message("client/0", ClientRequest(command=write(0, seq)), seq)
        assert [s.dst for s in sends(leader)] == ["proxy/0", "proxy/1", "proxy/0", "proxy/1"]

    def test_coupled_leader_contacts_acceptors(self):
        leader = Proposer("proposer/0", 0, MajorityQuorumSystem(1), [], REPLICAS, rng=random.Random(0))
        leader.handle_message("client/0", ClientRequest(command=write(0, 0)), 0)
        out = sends(leader)
        assert len(out) == 2
        assert all(s.dst.startswith("acceptor/") for s in out)

    def test_standby_starts_inactive(self):
        standby = self._leader(index=1)
        assert not standby.is_leader
        standby.handle_message("client/0", ClientRequest(command=write(0, 0)), 0)
        assert sends(standby) == []

    def test_elect_sends_phase1a_to_one_row(self):
        standby = self._leader(index=1, grid=(2, 3))
        standby.leader_elect(standby.next_ballot())
        out = sends(standby)
        assert len(out) == 3
        assert all(isinstance(s.msg, Phase1a) and s.msg.from_slot == 0 for s in out)
        rows = [{f"acceptor/{a}" for a in row} for row in ([0, 1, 2], [3, 4, 5])]
        assert {s.dst for s in out} in rows

    def test_elect_with_lower_ballot_rejected(self):
        leader = self._leader(index=1)
        leader.leader_elect(b(2, 1))
        with pytest.raises(BallotNotHigherError):
            leader.leader_elect(b(1, 1))

    def _complete_phase1(self, leader: Proposer, votes_by_acceptor):
        leader.leader_elect(leader.next_ballot())
        row = leader.state.phase1_quorum
        leader.drain()
        for a in row:
            leader.handle_message(
                f"acceptor/{a}",
                Phase1b(ballot=leader.state.ballot, acceptor_id=a, votes=votes_by_acceptor.get(a, {})),
                10,
            )
        return sends(leader)

    def test_phase1_without_votes(self):
        leader = self._leader(index=1)
        out = self._complete_phase1(leader, {})
        assert leader.is_leader
        assert leader.state.next_slot == 0
        assert not [s for s in out if isinstance(s.msg, Phase2a)]
        assert {s.dst for s in out if isinstance(s.msg, LeaderInfo)} == {"client/0", "replica/0"}

    def test_phase1_fills_holes_with_noop(self):
        leader = self._leader(index=1)
        v = Batch.of(write(5, 0))
        out = self._complete_phase1(leader, {a: {2: Vote(ballot=b(0), value=v)} for a in range(4)})
        proposals = {s.msg.slot: s.msg.value for s in out if isinstance(s.msg, Phase2a)}
        assert proposals == {0: Batch.noop(), 1: Batch.noop(), 2: v}
        assert leader.state.next_slot == 3

    def test_highest_ballot_vote_wins(self):
        old, new = Batch.of(write(1, 0, value="old")), Batch.of(write(2, 0, value="new"))
        merged = merge_phase1_votes([
            Phase1b(ballot=b(5, 1), acceptor_id=0, votes={4: Vote(ballot=b(1, 0), value=old)}),
            Phase1b(ballot=b(5, 1), acceptor_id=1, votes={4: Vote(ballot=b(3, 2), value=new)}),
        ])
        assert merged[4].value == new

    def test_phase1b_with_wrong_ballot_ignored(self):
        leader = self._leader(index=1)
        leader.leader_elect(leader.next_ballot())
        leader.drain()
        for a in range(4):
            leader.handle_message(f"acceptor/{a}", Phase1b(ballot=b(0, 0), acceptor_id=a), 1)
        assert leader.state.phase == LeaderPhase.phase1

    def test_requests_buffered_during_phase1(self):
        leader = self._leader(index=1)
        leader.leader_elect(leader.next_ballot())
        row = leader.state.phase1_quorum
        leader.drain()
        leader.handle_message("client/0", ClientRequest(command=write(0, 0)), 1)
        assert sends(leader) == []
        for a in row:
            leader.handle_message(f"acceptor/{a}", Phase1b(ballot=leader.state.ballot, acceptor_id=a), 2)
        phase2 = [s for s in sends(leader) if isinstance(s.msg, Phase2a)]
        assert [s.msg.slot for s in phase2] == [0]

    def test_nack_with_higher_ballot_deposes(self):
        leader = self._leader()
        leader.handle_message("proxy/0", Nack(ballot=b(4, 1), slot=0, rejected=b(0, 0)), 1)
        assert leader.state.phase == LeaderPhase.inactive
        leader.handle_message("client/0", ClientRequest(command=write(0, 0)), 2)
        out = sends(leader)
        assert out[0].msg == LeaderInfo(ballot=b(4, 1), leader="proposer/1")

    def test_recover_resends_proposed_value(self):
        leader = self._leader()
        leader.handle_message("client/0", ClientRequest(command=write(0, 0)), 0)
        original = sends(leader)[0].msg
        leader.handle_message("replica/1", Recover(slot=0), 5)
        resent = sends(leader)
        assert resent[0].msg == original
        leader.handle_message("replica/1", Recover(slot=9), 6)
        assert sends(leader) == []

    def test_proposed_values_kept_for_recent_slots_only(self, monkeypatch):
        monkeypatch.setattr(settings, "retained_slots", 3)
        leader = self._leader()
        for seq in range(5):
            leader.handle_message("client/0", ClientRequest(command=write(0, seq)), seq)
        leader.drain()
        assert list(leader.state.proposed) == [2, 3, 4]
        leader.handle_message("replica/0", Recover(slot=0), 10)
        assert sends(leader) == []
        leader.handle_message("replica/0", Recover(slot=4), 11)
        assert [s.msg.slot for s in sends(leader)] == [4]
