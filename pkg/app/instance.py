"""
配信問題のインスタンス（体・シンボル数・ネットワーク・所持集合・要求集合）と、
そこから導かれる行列族 Â、対角行列 P_ℓ / T_ℓ、サイド情報グラフ。
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Sequence, Tuple

import networkx as nx

from app.errors import InstanceError, NotBipartite
from app.field import DEFAULT_MODULUS, FieldMatrix, get_field
from app.network import DirectedNetwork, is_feasible, unreachable_requests
from app.star_algebra import StarMatrix

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DisseminationInstance:
    n: int
    net: DirectedNetwork
    possess: Tuple[FrozenSet[int], ...]
    request: Tuple[FrozenSet[int], ...]
    q: int = DEFAULT_MODULUS

    def __post_init__(self):
        get_field(self.q)
        if self.n < 0:
            raise InstanceError(f"symbol count must be nonnegative, got n={self.n}")
        possess = tuple(frozenset(int(s) for s in symbols) for symbols in self.possess)
        request = tuple(frozenset(int(s) for s in symbols) for symbols in self.request)
        if len(possess) != self.net.k or len(request) != self.net.k:
            raise InstanceError(f"expected possession and request sets for {self.net.k} nodes")
        for node, (has, wants) in enumerate(zip(possess, request)):
            for symbol in has | wants:
                if not 0 <= symbol < self.n:
                    raise InstanceError(f"node {node + 1} refers to symbol x{symbol + 1} outside 1..{self.n}")
            overlap = has & wants
            if overlap:
                raise InstanceError(f"node {node + 1} requests symbols it already possesses: "
                                    f"{sorted(s + 1 for s in overlap)}")
        object.__setattr__(self, 'possess', possess)
        object.__setattr__(self, 'request', request)

    @classmethod
    def build(cls, n: int, k: int, edges: Iterable[Tuple[int, int]], possess: Sequence[Iterable[int]],
              request: Sequence[Iterable[int]], q: int = DEFAULT_MODULUS) -> 'DisseminationInstance':
        return cls(n, DirectedNetwork.from_edges(k, edges),
                   tuple(frozenset(s) for s in possess), tuple(frozenset(s) for s in request), q)

    @property
    def k(self) -> int:
        return self.net.k

    def total_requests(self) -> int:
        return sum(len(symbols) for symbols in self.request)

    def is_feasible(self) -> bool:
        return is_feasible(self.net, self.possess, self.request)


def check_feasibility(inst: DisseminationInstance) -> List[Tuple[int, int]]:
    """
    到達できない要求を返す。あれば警告ログを出すだけで例外にはしない
    """
    missing = unreachable_requests(inst.net, inst.possess, inst.request)
    if missing:
        logger.warning("Instance is infeasible: %d request(s) cannot be reached, e.g. node %d wants x%d",
                       len(missing), missing[0][0] + 1, missing[0][1] + 1)
    return missing


def possession_family(inst: DisseminationInstance) -> StarMatrix:
    """
    Â: 行 ℓ は 𝒫_ℓ の列だけ★、それ以外は 0
    """
    return StarMatrix.from_star_sets([sorted(symbols) for symbols in inst.possess], inst.n, inst.q)


def possession_diag(inst: DisseminationInstance, node: int) -> FieldMatrix:
    return _diag(inst.possess[node], inst.n, inst.q)


def query_diag(inst: DisseminationInstance, node: int) -> FieldMatrix:
    return _diag(inst.request[node], inst.n, inst.q)


def _diag(symbols: Iterable[int], n: int, q: int) -> FieldMatrix:
    raw = [[1 if (i == j and i in symbols) else 0 for j in range(n)] for i in range(n)]
    return FieldMatrix.from_rows(raw, q, cols=n) if n else FieldMatrix.zeros(0, 0, q)


def validate_for_multiround(inst: DisseminationInstance):
    """
    複数ラウンドの構成では各ノードが 𝒫_ℓ ∪ 𝒯_ℓ = [n] を満たす必要がある
    """
    everything = frozenset(range(inst.n))
    for node, (has, wants) in enumerate(zip(inst.possess, inst.request)):
        missing = everything - has - wants
        if missing:
            raise InstanceError(f"node {node + 1} neither possesses nor requests "
                                f"{sorted(s + 1 for s in missing)}; multi-round schedules need P ∪ T = [n]")


@dataclass(frozen=True)
class BipartiteRoles:
    transmitters: Tuple[int, ...]
    # シンボル i -> それを要求する受信ノード
    receiver_of: Tuple[int, ...]

    @property
    def receivers(self) -> Tuple[int, ...]:
        return tuple(sorted(self.receiver_of))


def bipartite_roles(inst: DisseminationInstance) -> BipartiteRoles:
    """
    送信ノード（全シンボル所持・要求なし・入辺なし）と、
    ちょうど1シンボルずつ要求する n 個の受信ノードに分ける
    """
    everything = frozenset(range(inst.n))
    transmitters, receivers = [], []
    for node in range(inst.k):
        if inst.possess[node] == everything and not inst.request[node]:
            transmitters.append(node)
        else:
            receivers.append(node)
    if not transmitters:
        raise NotBipartite("no node possesses every symbol")
    if len(receivers) != inst.n:
        raise NotBipartite(f"expected {inst.n} receivers, found {len(receivers)}")

    receiver_of: Dict[int, int] = {}
    for node in receivers:
        if len(inst.request[node]) != 1:
            raise NotBipartite(f"receiver {node + 1} must request exactly one symbol")
        (symbol,) = inst.request[node]
        if symbol in receiver_of:
            raise NotBipartite(f"symbol x{symbol + 1} is requested by more than one receiver")
        receiver_of[symbol] = node

    transmitter_set = set(transmitters)
    for u, v in inst.net.edges:
        if u not in transmitter_set or v in transmitter_set:
            raise NotBipartite(f"edge ({u + 1}, {v + 1}) does not go from a transmitter to a receiver")
    return BipartiteRoles(tuple(transmitters), tuple(receiver_of[symbol] for symbol in range(inst.n)))


def is_bipartite(inst: DisseminationInstance) -> bool:
    try:
        bipartite_roles(inst)
    except NotBipartite:
        return False
    return True


@dataclass(frozen=True)
class SideInfoGraph:
    """
    頂点 i はシンボル x_i を要求する受信ノード。j ∈ 𝒫_i のとき有向辺 (i, j)
    """
    n: int
    edges: FrozenSet[Tuple[int, int]] = field(default_factory=frozenset)

    def __post_init__(self):
        edges = frozenset((int(i), int(j)) for i, j in self.edges)
        for i, j in edges:
            if i == j or not (0 <= i < self.n and 0 <= j < self.n):
                raise InstanceError(f"invalid side-information edge ({i + 1}, {j + 1})")
        object.__setattr__(self, 'edges', edges)

    @classmethod
    def undirected(cls, n: int, pairs: Iterable[Tuple[int, int]]) -> 'SideInfoGraph':
        """
        無向辺の集合から対称な有向グラフを作る
        """
        edges = set()
        for i, j in pairs:
            edges.add((i, j))
            edges.add((j, i))
        return cls(n, frozenset(edges))

    @classmethod
    def complete(cls, n: int) -> 'SideInfoGraph':
        return cls(n, frozenset((i, j) for i in range(n) for j in range(n) if i != j))

    def has_edge(self, i: int, j: int) -> bool:
        return (i, j) in self.edges

    def out_neighbors(self, i: int) -> List[int]:
        return sorted(j for a, j in self.edges if a == i)

    def is_symmetric(self) -> bool:
        return all((j, i) in self.edges for i, j in self.edges)

    def any_direction_graph(self) -> nx.Graph:
        """
        どちらか一方向の辺があれば結ぶ無向グラフ（独立数用）
        """
        graph = nx.Graph()
        graph.add_nodes_from(range(self.n))
        graph.add_edges_from(self.edges)
        return graph

    def mutual_graph(self) -> nx.Graph:
        """
        両方向の辺があるときだけ結ぶ無向グラフ（クリーク被覆用）
        """
        graph = nx.Graph()
        graph.add_nodes_from(range(self.n))
        graph.add_edges_from((i, j) for i, j in self.edges if i < j and (j, i) in self.edges)
        return graph

    def induced(self, vertices: Sequence[int]) -> 'SideInfoGraph':
        """
        vertices で誘導される部分グラフ。頂点は vertices の並び順で 0.. に振り直す
        """
        index = {vertex: position for position, vertex in enumerate(vertices)}
        return SideInfoGraph(len(index), frozenset((index[i], index[j]) for i, j in self.edges
                                                   if i in index and j in index))


def side_info_graph(inst: DisseminationInstance) -> SideInfoGraph:
    roles = bipartite_roles(inst)
    edges = set()
    for symbol, receiver in enumerate(roles.receiver_of):
        for other in inst.possess[receiver]:
            edges.add((symbol, other))
    return SideInfoGraph(inst.n, frozenset(edges))
