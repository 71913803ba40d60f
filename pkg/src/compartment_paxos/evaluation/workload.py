"""
工作负载生成

每个客户端有两条独立的种子随机流：一条决定读写类型，一条决定键。
因此改变倾斜度 p 只改变键，不改变操作类型序列。
"""
import itertools
import random
from typing import Iterator, List

from ..models import ReadOp, WorkloadSpec, WriteOp
from ..models.command_models import Op

HOT_KEY = "0"


def _value(client_id: int, index: int, size: int) -> str:
    return f"{client_id}-{index}".rjust(size, "0")


def iter_client_ops(spec: WorkloadSpec, client_id: int) -> Iterator[Op]:
    """
    单个客户端的操作流

    以概率 p 访问键 0，否则在 2..keyspace 上均匀取键；以概率 read_fraction 为读。
    ops_per_client 为 None 时是无限流。
    """
    kind_rng = random.Random(f"{spec.rng_seed}:kind:{client_id}")
    key_rng = random.Random(f"{spec.rng_seed}:key:{client_id}")
    counter = range(spec.ops_per_client) if spec.ops_per_client is not None else itertools.count()
    for index in counter:
        is_read = kind_rng.random() < spec.read_fraction
        hot = key_rng.random() < spec.skew_p
        other = key_rng.randint(2, spec.keyspace)
        key = HOT_KEY if hot else str(other)
        if is_read:
            yield ReadOp(key=key)
        else:
            yield WriteOp(key=key, value=_value(client_id, index, spec.value_size))


def generate_ops(spec: WorkloadSpec) -> List[List[Op]]:
    """
    生成每个客户端的完整操作序列

    Raises:
        ValueError: ops_per_client 为 None（无限流只能用 iter_client_ops）
    """
    if spec.ops_per_client is None:
        raise ValueError("generate_ops needs a finite ops_per_client")
    return [list(iter_client_ops(spec, c)) for c in range(spec.num_clients)]
