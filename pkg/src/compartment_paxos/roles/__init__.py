from .acceptor import Acceptor, acceptor_on_phase1a, acceptor_on_phase2a, acceptor_on_preread
from .base_role import Action, BaseRole, CancelTimer, Send, SetTimer
from .batcher import Batcher, Unbatcher
from .client import ClientSession, compute_read_watermark
from .proposer import Proposer, merge_phase1_votes
from .proxy_leader import ProxyCore, ProxyLeader
from . import registry
from .replica import Replica, apply_batch, replay_prefix, replica_apply, replica_on_chosen, replica_on_read
from .unreplicated import UnreplicatedServer

__all__ = [
    "Acceptor",
    "acceptor_on_phase1a",
    "acceptor_on_phase2a",
    "acceptor_on_preread",
    "Action",
    "BaseRole",
    "CancelTimer",
    "Send",
    "SetTimer",
    "Batcher",
    "Unbatcher",
    "ClientSession",
    "compute_read_watermark",
    "Proposer",
    "merge_phase1_votes",
    "ProxyCore",
    "ProxyLeader",
    "registry",
    "Replica",
    "apply_batch",
    "replay_prefix",
    "replica_apply",
    "replica_on_chosen",
    "replica_on_read",
    "UnreplicatedServer",
]
