"""
有向ネットワーク G(V, E) と、その隣接行列・到達可能性・可解ラウンド数。

ノードは内部では 0..k-1、入出力では 1..k で表す。
"""
import logging
from collections import deque
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Set, Tuple

import networkx as nx
import numpy as np

from app.errors import InstanceError
from app.star_algebra import IntMatrix

logger = logging.getLogger(__name__)

Edge = Tuple[int, int]


@dataclass(frozen=True)
class DirectedNetwork:
    k: int
    edges: FrozenSet[Edge]

    def __post_init__(self):
        if self.k < 1:
            raise InstanceError(f"a network needs at least one node, got k={self.k}")
        edges = frozenset((int(u), int(v)) for u, v in self.edges)
        for u, v in edges:
            if not (0 <= u < self.k and 0 <= v < self.k):
                raise InstanceError(f"edge ({u + 1}, {v + 1}) refers to a node outside 1..{self.k}")
            if u == v:
                raise InstanceError(f"self-loop at node {u + 1} is not allowed")
        object.__setattr__(self, 'edges', edges)

    @classmethod
    def from_edges(cls, k: int, edges: Iterable[Edge]) -> 'DirectedNetwork':
        edges = list(edges)
        if len(set(edges)) != len(edges):
            raise InstanceError("parallel edges are not allowed")
        return cls(k, frozenset(edges))

    @classmethod
    def complete(cls, k: int) -> 'DirectedNetwork':
        return cls(k, frozenset((u, v) for u in range(k) for v in range(k) if u != v))

    @classmethod
    def cycle(cls, k: int) -> 'DirectedNetwork':
        return cls(k, frozenset((u, (u + 1) % k) for u in range(k) if k > 1))

    def to_graph(self) -> nx.DiGraph:
        graph = nx.DiGraph()
        graph.add_nodes_from(range(self.k))
        graph.add_edges_from(self.edges)
        return graph

    def in_neighbors(self, node: int) -> List[int]:
        return sorted(u for u, v in self.edges if v == node)

    def out_neighbors(self, node: int) -> List[int]:
        return sorted(v for u, v in self.edges if u == node)

    def sorted_edges(self) -> List[Edge]:
        return sorted(self.edges)

    def is_strongly_connected(self) -> bool:
        return nx.is_strongly_connected(self.to_graph())

    def with_edges(self, extra: Iterable[Edge]) -> 'DirectedNetwork':
        return DirectedNetwork(self.k, self.edges | frozenset(extra))


def adjacency(net: DirectedNetwork, with_self_loops: bool = False) -> IntMatrix:
    """
    転置隣接行列 D。(j, i) ∈ E のとき D[i, j] = 1
    """
    raw = np.zeros((net.k, net.k), dtype=np.int64)
    for u, v in net.edges:
        raw[v, u] = 1
    if with_self_loops:
        np.fill_diagonal(raw, 1)
    return IntMatrix(raw)


def network_from_adjacency(D: IntMatrix) -> DirectedNetwork:
    """
    adjacency の逆変換。対角成分は無視する
    """
    raw = D.array
    edges = frozenset((int(j), int(i)) for i, j in np.argwhere(raw != 0) if i != j)
    return DirectedNetwork(raw.shape[0], edges)


def solvability_index(net: DirectedNetwork) -> Optional[int]:
    """
    自己ループ付き D の冪 D^r が全要素正になる最小の r。
    強連結でなければ None
    """
    if not net.is_strongly_connected():
        return None
    D = adjacency(net, with_self_loops=True)
    power = IntMatrix.identity(net.k)
    for r in range(net.k + 1):
        if power.all_positive():
            return r
        power = power.matmul(D, saturate=True)
    return None


def max_shortest_path(net: DirectedNetwork) -> Optional[int]:
    """
    順序付きノード対の最短路長の最大値（BFSによる検算用）
    """
    graph = net.to_graph()
    if not nx.is_strongly_connected(graph):
        return None
    if net.k == 1:
        return 0
    return max(nx.eccentricity(graph).values())


def shortest_dist(net: DirectedNetwork, sources: Iterable[int], target: int) -> Optional[int]:
    """
    sources のいずれかから target までの最短有向路長。到達できなければ None
    """
    sources = set(sources)
    if not sources:
        return None
    return distances_from(net, sources).get(target)


def distances_from(net: DirectedNetwork, sources: Iterable[int]) -> Dict[int, int]:
    """
    多始点BFS。到達可能なノードだけを含む
    """
    successors: Dict[int, List[int]] = {node: [] for node in range(net.k)}
    for u, v in net.edges:
        successors[u].append(v)
    distance = {node: 0 for node in sources}
    queue = deque(distance)
    while queue:
        node = queue.popleft()
        for nxt in successors[node]:
            if nxt not in distance:
                distance[nxt] = distance[node] + 1
                queue.append(nxt)
    return distance


def holders(possess: Sequence[Iterable[int]], symbol: int) -> Set[int]:
    return {node for node, symbols in enumerate(possess) if symbol in symbols}


def unreachable_requests(net: DirectedNetwork, possess: Sequence[Iterable[int]],
                         request: Sequence[Iterable[int]]) -> List[Tuple[int, int]]:
    """
    どの所持ノードからも有向路が無い (ノード, シンボル) の組
    """
    graph = net.to_graph()
    possess = [set(symbols) for symbols in possess]
    missing = []
    for node, symbols in enumerate(request):
        ancestors = nx.ancestors(graph, node)
        for symbol in sorted(symbols):
            if not any(symbol in possess[holder] for holder in ancestors):
                missing.append((node, symbol))
    return missing


def is_feasible(net: DirectedNetwork, possess: Sequence[Iterable[int]],
                request: Sequence[Iterable[int]]) -> bool:
    """
    全ての要求シンボルが、要求ノードへの有向路を持つ所持ノードに存在するか
    """
    return not unreachable_requests(net, possess, request)
