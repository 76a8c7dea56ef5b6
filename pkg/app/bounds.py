"""
送信回数の下界・上界。

- 一般のインスタンス: dₘₐₓ（各ノードについて要求シンボルまでの最短距離の和、その最大値）
- 送信ノード/受信ノードの2部インスタンス: サイド情報グラフ ℋ の
  α(ℋ) ≤ MINRANK₂(ℋ) ≤ clc(ℋ)、および受信ノードの送信ノードへの割り当てによる上界
"""
import itertools
import logging
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

import networkx as nx

from app.errors import CapExceeded, NotBipartite, ReceiverUncovered, SearchCapExceeded
from app.instance import DisseminationInstance, SideInfoGraph, bipartite_roles, is_bipartite, side_info_graph
from app.network import distances_from, holders
from app.settings import SearchCaps, load_search_caps

logger = logging.getLogger(__name__)


# --- α / clc ---

def _check_graph_cap(H: SideInfoGraph, caps: SearchCaps):
    if H.n > caps.graph_max_vertices:
        raise SearchCapExceeded(f"graph has {H.n} vertices; the cap is {caps.graph_max_vertices}")


def maximum_independent_set(H: SideInfoGraph, caps: Optional[SearchCaps] = None) -> List[int]:
    """
    どちらの向きにも辺を持たない頂点の最大集合
    """
    _check_graph_cap(H, caps or load_search_caps())
    if H.n == 0:
        return []
    clique, _ = nx.max_weight_clique(nx.complement(H.any_direction_graph()), weight=None)
    return sorted(clique)


def independence_number(H: SideInfoGraph, caps: Optional[SearchCaps] = None) -> int:
    return len(maximum_independent_set(H, caps))


def _saturation_order(graph: nx.Graph, colors: Dict[int, int]) -> int:
    best, best_key = None, None
    for node in graph.nodes:
        if node in colors:
            continue
        saturation = len({colors[nbr] for nbr in graph[node] if nbr in colors})
        key = (saturation, graph.degree[node], -node)
        if best_key is None or key > best_key:
            best, best_key = node, key
    return best


def exact_coloring(graph: nx.Graph) -> Dict[int, int]:
    """
    DSATUR 順の分枝限定法による最小彩色
    """
    if graph.number_of_nodes() == 0:
        return {}
    best = nx.coloring.greedy_color(graph, strategy='DSATUR')
    best_count = max(best.values()) + 1
    clique, _ = nx.max_weight_clique(graph, weight=None)
    if len(clique) == best_count:
        return dict(best)

    lower = len(clique)
    colors: Dict[int, int] = {}

    def branch(used: int):
        nonlocal best, best_count
        if len(colors) == graph.number_of_nodes():
            best, best_count = dict(colors), used
            return
        node = _saturation_order(graph, colors)
        forbidden = {colors[nbr] for nbr in graph[node] if nbr in colors}
        for color in range(min(used + 1, best_count - 1)):
            if color in forbidden:
                continue
            colors[node] = color
            branch(max(used, color + 1))
            del colors[node]
            if best_count == lower:
                return

    branch(0)
    return best


def minimum_clique_cover(H: SideInfoGraph, caps: Optional[SearchCaps] = None) -> List[List[int]]:
    """
    両方向に辺がある頂点同士だけをクリークとみなした最小クリーク被覆
    """
    _check_graph_cap(H, caps or load_search_caps())
    coloring = exact_coloring(nx.complement(H.mutual_graph()))
    groups: Dict[int, List[int]] = {}
    for vertex, color in coloring.items():
        groups.setdefault(color, []).append(vertex)
    return sorted(sorted(group) for group in groups.values())


def clique_cover_number(H: SideInfoGraph, caps: Optional[SearchCaps] = None) -> int:
    return len(minimum_clique_cover(H, caps))


# --- MINRANK₂ ---

class _MinrankSearch:
    """
    GF(2) 上で ℋ に適合する行列（対角 1、非対角の 1 は辺の位置のみ）の行を
    次数の小さい頂点から順に決めていく。行ベクトルは整数のビットマスクで表す
    """

    def __init__(self, H: SideInfoGraph, node_limit: int):
        self.n = H.n
        self.neighbors = [H.out_neighbors(i) for i in range(H.n)]
        self.order = sorted(range(H.n), key=lambda i: (len(self.neighbors[i]), i))
        self.node_limit = node_limit
        self.visits = 0
        self.failed = set()

    @staticmethod
    def _reduce(vector: int, basis: Dict[int, int]) -> int:
        for pivot in sorted(basis, reverse=True):
            if vector >> pivot & 1:
                vector ^= basis[pivot]
        return vector

    @staticmethod
    def _insert(vector: int, basis: Dict[int, int]) -> Dict[int, int]:
        pivot = vector.bit_length() - 1
        extended = {}
        for other_pivot, other in basis.items():
            extended[other_pivot] = other ^ vector if other >> pivot & 1 else other
        extended[pivot] = vector
        return extended

    def _candidates(self, row: int):
        for size in range(len(self.neighbors[row]) + 1):
            for subset in itertools.combinations(self.neighbors[row], size):
                vector = 1 << row
                for j in subset:
                    vector |= 1 << j
                yield vector

    def feasible(self, budget: int) -> bool:
        self.failed.clear()
        return self._search(0, {}, budget)

    def _search(self, position: int, basis: Dict[int, int], budget: int) -> bool:
        if position == self.n:
            return True
        self.visits += 1
        if self.visits > self.node_limit:
            raise SearchCapExceeded(f"minrank search visited more than {self.node_limit} states")
        key = (position, tuple(sorted(basis.values())), budget)
        if key in self.failed:
            return False

        row = self.order[position]
        residuals = []
        for vector in self._candidates(row):
            residual = self._reduce(vector, basis)
            if residual == 0:
                # 既存の空間で表せるならランクは増えない
                return self._search(position + 1, basis, budget)
            if residual not in residuals:
                residuals.append(residual)
        if budget > 0:
            for residual in residuals:
                if self._search(position + 1, self._insert(residual, basis), budget - 1):
                    return True
        self.failed.add(key)
        return False


def minrank2(H: SideInfoGraph, caps: Optional[SearchCaps] = None) -> int:
    """
    ℋ に適合する GF(2) 行列の最小ランク
    """
    caps = caps or load_search_caps()
    if H.n > caps.minrank_max_vertices:
        raise SearchCapExceeded(f"minrank supports at most {caps.minrank_max_vertices} vertices, got {H.n}")
    if H.n == 0:
        return 0
    lower = independence_number(H, caps)
    upper = clique_cover_number(H, caps)
    search = _MinrankSearch(H, caps.search_node_limit)
    for budget in range(lower, upper):
        if search.feasible(budget):
            logger.debug("minrank2=%d after %d states", budget, search.visits)
            return budget
    return upper


# --- dₘₐₓ ---

@dataclass(frozen=True)
class DmaxReport:
    value: int
    per_node: Tuple[int, ...]
    # 到達できず和から除いた (ノード, シンボル)
    skipped: Tuple[Tuple[int, int], ...] = ()


def dmax_report(inst: DisseminationInstance) -> DmaxReport:
    distances = {symbol: distances_from(inst.net, holders(inst.possess, symbol)) for symbol in range(inst.n)}
    per_node, skipped = [], []
    for node in range(inst.k):
        total = 0
        for symbol in sorted(inst.request[node]):
            distance = distances[symbol].get(node)
            if distance is None:
                skipped.append((node, symbol))
                continue
            total += distance
        per_node.append(total)
    if skipped:
        logger.warning("Skipped %d unreachable request(s) in dmax", len(skipped))
    return DmaxReport(max(per_node, default=0), tuple(per_node), tuple(skipped))


def dmax(inst: DisseminationInstance) -> int:
    return dmax_report(inst).value


def lower_bound(inst: DisseminationInstance, caps: Optional[SearchCaps] = None) -> int:
    """
    2部インスタンスなら MINRANK₂(ℋ)、それ以外は dₘₐₓ
    """
    caps = caps or load_search_caps()
    if not is_bipartite(inst):
        return dmax(inst)
    H = side_info_graph(inst)
    try:
        return minrank2(H, caps)
    except CapExceeded as e:
        logger.warning("minrank2 exceeded its caps (%s); using max(alpha, dmax)", e)
    try:
        return max(independence_number(H, caps), dmax(inst))
    except CapExceeded:
        return dmax(inst)


# --- 割り当てによる上界 ---

@dataclass(frozen=True)
class PartitionBound:
    value: int
    clique_cover_sum: int
    # シンボル i を要求する受信ノードの担当送信ノード
    assignment: Tuple[int, ...]
    greedy: bool = False

    def groups(self) -> Dict[int, List[int]]:
        grouped: Dict[int, List[int]] = {}
        for symbol, transmitter in enumerate(self.assignment):
            grouped.setdefault(transmitter, []).append(symbol)
        return grouped


def _greedy_assignment(H: SideInfoGraph, options: Sequence[List[int]]) -> Tuple[int, ...]:
    grouped: Dict[int, List[int]] = {}
    assignment = []
    for symbol, choices in enumerate(options):
        def affinity(transmitter: int) -> int:
            return sum(H.has_edge(symbol, other) + H.has_edge(other, symbol)
                       for other in grouped.get(transmitter, []))
        chosen = max(choices, key=lambda t: (affinity(t), -t))
        grouped.setdefault(chosen, []).append(symbol)
        assignment.append(chosen)
    return tuple(assignment)


def partition_upper_bound(inst: DisseminationInstance, caps: Optional[SearchCaps] = None) -> PartitionBound:
    """
    各受信ノードを入隣接の送信ノード1つに割り当て、送信ノードごとの MINRANK₂ の和を最小化する
    """
    caps = caps or load_search_caps()
    roles = bipartite_roles(inst)
    H = side_info_graph(inst)
    transmitter_set = set(roles.transmitters)
    options = []
    for symbol, receiver in enumerate(roles.receiver_of):
        choices = [node for node in inst.net.in_neighbors(receiver) if node in transmitter_set]
        if not choices:
            raise ReceiverUncovered(f"receiver {receiver + 1} has no transmitter in-neighbor")
        options.append(choices)

    minranks: Dict[FrozenSet[int], int] = {}

    def group_minrank(group: FrozenSet[int]) -> int:
        if group not in minranks:
            minranks[group] = minrank2(H.induced(sorted(group)), caps)
        return minranks[group]

    def evaluate(assignment: Sequence[int]) -> int:
        grouped: Dict[int, List[int]] = {}
        for symbol, transmitter in enumerate(assignment):
            grouped.setdefault(transmitter, []).append(symbol)
        return sum(group_minrank(frozenset(group)) for group in grouped.values())

    count = 1
    for choices in options:
        count *= len(choices)

    greedy = count > caps.partition_limit
    if greedy:
        logger.warning("%d partitions exceed the limit of %d; using a greedy assignment",
                       count, caps.partition_limit)
        best = _greedy_assignment(H, options)
        best_value = evaluate(best)
    else:
        best, best_value = None, None
        for assignment in itertools.product(*options):
            value = evaluate(assignment)
            if best_value is None or value < best_value:
                best, best_value = tuple(assignment), value

    bound = PartitionBound(best_value, 0, best, greedy)
    clique_sum = sum(clique_cover_number(H.induced(group), caps) for group in bound.groups().values())
    return PartitionBound(best_value, clique_sum, best, greedy)


# --- まとめ ---

@dataclass
class BoundsReport:
    dmax: int
    minrank2: Optional[int] = None
    alpha: Optional[int] = None
    partition: Optional[int] = None
    clique_cover: Optional[int] = None
    independent_set: Optional[List[int]] = None
    clique_cover_witness: Optional[List[List[int]]] = None
    partition_witness: Optional[Tuple[int, ...]] = None
    partition_clique_cover: Optional[int] = None
    partition_greedy: bool = False
    # 計算できなかった値の理由
    notes: Dict[str, str] = field(default_factory=dict)

    @property
    def lower(self) -> int:
        return max(value for value in (self.dmax, self.minrank2, self.alpha) if value is not None)

    @property
    def upper(self) -> Optional[int]:
        values = [value for value in (self.partition, self.clique_cover) if value is not None]
        return min(values) if values else None


def compute_bounds(inst: DisseminationInstance, caps: Optional[SearchCaps] = None) -> BoundsReport:
    caps = caps or load_search_caps()
    report = BoundsReport(dmax=dmax(inst))
    try:
        H = side_info_graph(inst)
    except NotBipartite as e:
        for name in ('minrank2', 'alpha', 'clique_cover', 'partition'):
            report.notes[name] = f"not bipartite: {e}"
        return report

    try:
        report.independent_set = maximum_independent_set(H, caps)
        report.alpha = len(report.independent_set)
    except CapExceeded as e:
        report.notes['alpha'] = str(e)
    try:
        report.clique_cover_witness = minimum_clique_cover(H, caps)
        report.clique_cover = len(report.clique_cover_witness)
    except CapExceeded as e:
        report.notes['clique_cover'] = str(e)
    try:
        report.minrank2 = minrank2(H, caps)
    except CapExceeded as e:
        report.notes['minrank2'] = str(e)
    try:
        partition = partition_upper_bound(inst, caps)
        report.partition = partition.value
        report.partition_witness = partition.assignment
        report.partition_clique_cover = partition.clique_cover_sum
        report.partition_greedy = partition.greedy
    except (CapExceeded, ReceiverUncovered) as e:
        report.notes['partition'] = str(e)
    return report
