"""
実験用のランダムインスタンス生成。

ネットワーク: ランダムな全域閉路に確率 p で辺を足し、可解ラウンド数がちょうど d のものだけを採用する。
所持: 各シンボルを空でないランダムなノード集合に配り、要求はその補集合。
"""
import logging
from typing import List, Optional

import numpy as np

from app.errors import GenerationFailed, InstanceError
from app.instance import DisseminationInstance
from app.network import DirectedNetwork, solvability_index
from app.settings import SearchCaps, get_default_seed, load_search_caps

logger = logging.getLogger(__name__)


def random_network(k: int, rng: np.random.Generator) -> DirectedNetwork:
    """
    全域閉路（強連結）に、各試行で一様に選んだ確率 p でその他の辺を加える
    """
    order = rng.permutation(k).tolist()
    edges = {(order[i], order[(i + 1) % k]) for i in range(k)} if k > 1 else set()
    p = rng.uniform()
    for u in range(k):
        for v in range(k):
            if u != v and (u, v) not in edges and rng.uniform() < p:
                edges.add((u, v))
    return DirectedNetwork(k, frozenset(edges))


def network_with_index(k: int, d: int, rng: np.random.Generator, retries: int) -> DirectedNetwork:
    if k == 1 and d == 0:
        return DirectedNetwork(1, frozenset())
    if not 1 <= d <= k - 1:
        raise InstanceError(f"no strongly connected network on {k} nodes has solvability index {d}")
    for _ in range(retries):
        net = random_network(k, rng)
        if solvability_index(net) == d:
            return net
    raise GenerationFailed(f"no network with k={k} and index {d} after {retries} attempts")


def random_possession(k: int, n: int, rng: np.random.Generator) -> List[frozenset]:
    possess = [set() for _ in range(k)]
    for symbol in range(n):
        while True:
            mask = rng.integers(0, 2, size=k)
            if mask.any():
                break
        for node in np.flatnonzero(mask).tolist():
            possess[node].add(symbol)
    return [frozenset(symbols) for symbols in possess]


def generate_instance(k: int, n: int, d: int, rng: np.random.Generator, q: int = 2,
                      caps: Optional[SearchCaps] = None) -> DisseminationInstance:
    caps = caps or load_search_caps()
    net = network_with_index(k, d, rng, caps.generation_retries)
    possess = random_possession(k, n, rng)
    everything = frozenset(range(n))
    request = tuple(everything - symbols for symbols in possess)
    return DisseminationInstance(n, net, tuple(possess), request, q)


def generate_corpus(k: int, n: int, d: int, count: int, seed: Optional[int] = None, q: int = 2,
                    caps: Optional[SearchCaps] = None) -> List[DisseminationInstance]:
    """
    count 個のインスタンスを1つの乱数列から順に作る。seed が同じなら同じコーパスになる
    """
    rng = np.random.default_rng(get_default_seed(seed))
    corpus = [generate_instance(k, n, d, rng, q, caps) for _ in range(count)]
    logger.info("Generated %d instances (k=%d, n=%d, d=%d)", len(corpus), k, n, d)
    return corpus
