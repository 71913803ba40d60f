"""
节点地址

地址格式为 "<role>/<index>"，例如 "acceptor/3"、"client/0"。
"""
from typing import List


def address(role: str, index: int) -> str:
    return f"{role}/{index}"


def role_of(addr: str) -> str:
    return addr.partition("/")[0]


def proposer(i: int) -> str:
    return address("proposer", i)


def proxy(i: int) -> str:
    return address("proxy", i)


def acceptor(i: int) -> str:
    return address("acceptor", i)


def replica(i: int) -> str:
    return address("replica", i)


def batcher(i: int) -> str:
    return address("batcher", i)


def unbatcher(i: int) -> str:
    return address("unbatcher", i)


def client(i: int) -> str:
    return address("client", i)


def server(i: int = 0) -> str:
    return address("server", i)


def all_of(role: str, count: int) -> List[str]:
    return [address(role, i) for i in range(count)]
