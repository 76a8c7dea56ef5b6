"""
1ラウンド配信: 各ノードが送る行空間 A_ℓ の選択と、その総ランク τ の最小化。

条件: 全ての ℓ と η ∈ 𝒯_ℓ について、e_η が stack(入隣接ノードの A, P_ℓ) の行空間に含まれる。
厳密探索は部分空間（既約行階段形の基底）を列挙する分枝限定法、
ヒューリスティックはフラッディングから始めて超平面へ縮める局所探索。
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from app.errors import (NoDecoding, NotOneRoundSolvable, SchemeError, SearchCapExceeded,
                        SupportViolation)
from app.field import Basis, FieldMatrix, all_subspace_bases, get_field, rank, solve_in_row_space, stack
from app.instance import DisseminationInstance, possession_diag
from app.settings import SearchCaps, get_default_seed, load_search_caps

logger = logging.getLogger(__name__)

METHOD_EXACT = 'exact'
METHOD_HEURISTIC = 'heuristic'

DEFAULT_ITERATIONS = 20
HYPERPLANE_TRIES = 32


@dataclass(frozen=True)
class TransmissionScheme:
    """
    ノードごとに放送する符号化ベクトル（F^n の行）
    """
    n: int
    q: int
    vectors: Tuple[Basis, ...]
    round_index: int = 1

    @classmethod
    def from_matrices(cls, matrices: Sequence[FieldMatrix], n: int, q: int) -> 'TransmissionScheme':
        return cls(n, q, tuple(matrix.as_tuples() for matrix in matrices))

    @property
    def k(self) -> int:
        return len(self.vectors)

    @property
    def tau(self) -> int:
        return sum(len(rows) for rows in self.vectors)

    def node_matrix(self, node: int) -> FieldMatrix:
        return FieldMatrix.from_rows(self.vectors[node], self.q, cols=self.n)

    def matrices(self) -> List[FieldMatrix]:
        return [self.node_matrix(node) for node in range(self.k)]

    def validate(self, inst: DisseminationInstance):
        """
        各ノードが所持シンボルだけを組み合わせ、かつ送信ベクトルが一次独立であることを確認する
        """
        if self.k != inst.k or self.n != inst.n or self.q != inst.q:
            raise SchemeError(f"scheme shape (k={self.k}, n={self.n}, q={self.q}) does not match the instance")
        for node, matrix in enumerate(self.matrices()):
            _check_support(inst, node, matrix)
            if rank(matrix) != matrix.rows:
                raise SchemeError(f"node {node + 1} transmits linearly dependent vectors")

    def as_multiround(self):
        from app.multiround import MultiRoundScheme
        return MultiRoundScheme.from_rounds([self])


@dataclass(frozen=True)
class OneRoundResult:
    tau: int
    scheme: TransmissionScheme
    method: str
    ranks: Tuple[int, ...] = field(default=())
    fallback: bool = False

    def __post_init__(self):
        if not self.ranks:
            object.__setattr__(self, 'ranks', tuple(len(rows) for rows in self.scheme.vectors))
        if self.tau != sum(self.ranks):
            raise SchemeError(f"tau={self.tau} does not match per-node ranks {list(self.ranks)}")


@dataclass(frozen=True)
class DecodeCoefficients:
    """
    Σ alpha·(受信ベクトル) + Σ beta·(P_ℓ の行) = e_η
    senders は alpha の各成分に対応する (送信ノード, 行番号)
    """
    alpha: Tuple[int, ...]
    beta: Tuple[int, ...]
    senders: Tuple[Tuple[int, int], ...]


def _check_support(inst: DisseminationInstance, node: int, matrix: FieldMatrix):
    outside = set(matrix.support_columns()) - inst.possess[node]
    if outside:
        raise SupportViolation(f"node {node + 1} combines symbols it does not possess: "
                               f"{sorted(s + 1 for s in outside)}")


def _received(inst: DisseminationInstance, choice: Sequence[FieldMatrix], node: int) -> List[FieldMatrix]:
    return [choice[sender] for sender in inst.net.in_neighbors(node)]


def _own_rows(inst: DisseminationInstance, node: int) -> FieldMatrix:
    return FieldMatrix.unit_rows(inst.possess[node], inst.n, inst.q)


def unmet_requests(inst: DisseminationInstance, choice: Sequence[FieldMatrix]) -> List[Tuple[int, int]]:
    """
    復号できない (ノード, シンボル) の組
    """
    unmet = []
    for node in range(inst.k):
        if not inst.request[node]:
            continue
        known = stack(_received(inst, choice, node) + [_own_rows(inst, node)], cols=inst.n, modulus=inst.q)
        for symbol in sorted(inst.request[node]):
            if solve_in_row_space(known, FieldMatrix.unit_vector(symbol, inst.n, inst.q).array[0]) is None:
                unmet.append((node, symbol))
    return unmet


def check_condition(inst: DisseminationInstance, choice: Sequence[FieldMatrix]) -> bool:
    """
    全ノードの要求が1ラウンドで満たされるか
    """
    if len(choice) != inst.k:
        raise SchemeError(f"expected a choice for {inst.k} nodes, got {len(choice)}")
    for node, matrix in enumerate(choice):
        _check_support(inst, node, matrix)
    for node in range(inst.k):
        if inst.request[node] and not _node_satisfied(inst, node, _received(inst, choice, node)):
            return False
    return True


def _node_satisfied(inst: DisseminationInstance, node: int, received: List[FieldMatrix]) -> bool:
    own = _own_rows(inst, node)
    wanted = FieldMatrix.unit_rows(inst.request[node], inst.n, inst.q)
    base = stack(received + [own], cols=inst.n, modulus=inst.q)
    return rank(stack([base, wanted])) == rank(base)


def flood_choice(inst: DisseminationInstance, nodes: Optional[Sequence[int]] = None) -> List[FieldMatrix]:
    """
    nodes（省略時は全ノード）が所持シンボルを全て送る選択。それ以外のノードは何も送らない
    """
    selected = set(range(inst.k) if nodes is None else nodes)
    return [_own_rows(inst, node) if node in selected else FieldMatrix.zeros(0, inst.n, inst.q)
            for node in range(inst.k)]


def active_senders(inst: DisseminationInstance) -> List[int]:
    """
    要求を持つ出隣接ノードがあり、かつ何かを所持しているノード
    """
    senders = []
    for node in range(inst.k):
        if inst.possess[node] and any(inst.request[out] for out in inst.net.out_neighbors(node)):
            senders.append(node)
    return senders


def _require_flood_solvable(inst: DisseminationInstance, senders: Sequence[int]) -> List[FieldMatrix]:
    flood = flood_choice(inst, senders)
    unmet = unmet_requests(inst, flood)
    if unmet:
        raise NotOneRoundSolvable(unmet)
    return flood


def _result(inst: DisseminationInstance, choice: Sequence[FieldMatrix], method: str,
            fallback: bool = False) -> OneRoundResult:
    scheme = TransmissionScheme.from_matrices(choice, inst.n, inst.q)
    ranks = tuple(matrix.rows for matrix in choice)
    return OneRoundResult(sum(ranks), scheme, method, ranks, fallback)


def _concatenated(choice: Sequence[FieldMatrix]) -> Tuple[Basis, ...]:
    return tuple(matrix.as_tuples() for matrix in choice)


# --- 厳密探索 ---

class _ExactSearch:
    """
    送信ノードを番号順に割り当てる深さ優先探索。予算 τ 以内で最初に見つかった割り当てを返す
    """

    def __init__(self, inst: DisseminationInstance, senders: List[int], candidates: Dict[int, List[Basis]],
                 node_limit: int):
        self.inst = inst
        self.senders = senders
        self.candidates = candidates
        self.node_limit = node_limit
        self.visits = 0
        self.requesters = [node for node in range(inst.k) if inst.request[node]]
        sender_set = set(senders)
        self.in_senders = {node: [s for s in inst.net.in_neighbors(node) if s in sender_set]
                           for node in self.requesters}
        # 最後の入隣接ノードが決まった時点で検査する
        self.check_after: Dict[int, List[int]] = {sender: [] for sender in senders}
        for node in self.requesters:
            self.check_after[max(self.in_senders[node])].append(node)
        self.own = {node: [tuple(row) for row in _own_rows(inst, node).as_tuples()] for node in self.requesters}
        self.wanted = {node: FieldMatrix.unit_rows(inst.request[node], inst.n, inst.q) for node in self.requesters}

    def run(self, budget: int) -> Optional[Dict[int, Basis]]:
        assignment: Dict[int, Basis] = {}
        return self._descend(0, budget, assignment)

    def _descend(self, position: int, remaining: int, assignment: Dict[int, Basis]) -> Optional[Dict[int, Basis]]:
        if position == len(self.senders):
            return dict(assignment)
        sender = self.senders[position]
        for basis in self.candidates[sender]:
            if len(basis) > remaining:
                continue
            self.visits += 1
            if self.visits > self.node_limit:
                raise SearchCapExceeded(f"exact search visited more than {self.node_limit} nodes")
            assignment[sender] = basis
            if self._consistent(sender, remaining - len(basis), assignment):
                found = self._descend(position + 1, remaining - len(basis), assignment)
                if found is not None:
                    return found
            del assignment[sender]
        return None

    def _consistent(self, sender: int, remaining: int, assignment: Dict[int, Basis]) -> bool:
        for node in self.requesters:
            assigned = sum(len(assignment[s]) for s in self.in_senders[node] if s in assignment)
            if assigned + remaining < len(self.inst.request[node]):
                return False
        for node in self.check_after[sender]:
            rows = [row for s in self.in_senders[node] for row in assignment[s]] + self.own[node]
            base = FieldMatrix.from_rows(rows, self.inst.q, cols=self.inst.n)
            if rank(stack([base, self.wanted[node]])) != rank(base):
                return False
        return True


def solve_exact(inst: DisseminationInstance, caps: Optional[SearchCaps] = None, seed: Optional[int] = None,
                max_per_node: Optional[int] = None) -> OneRoundResult:
    """
    τ を最小にする選択を全探索で求める。同じ τ の解が複数あれば、
    ノード順に連結した既約行階段形の基底が辞書式で最小のものを返す
    """
    caps = caps or load_search_caps()
    senders = active_senders(inst)
    _require_flood_solvable(inst, senders)

    if inst.q > caps.max_field:
        raise SearchCapExceeded(f"exact search supports q ≤ {caps.max_field}, got q={inst.q}")
    if len(senders) > caps.max_nodes:
        raise SearchCapExceeded(f"exact search supports at most {caps.max_nodes} active senders, got {len(senders)}")
    for sender in senders:
        if len(inst.possess[sender]) > caps.max_possess:
            raise SearchCapExceeded(f"node {sender + 1} possesses {len(inst.possess[sender])} symbols; "
                                    f"exact search supports at most {caps.max_possess}")

    if not any(inst.request):
        return _result(inst, flood_choice(inst, []), METHOD_EXACT)

    per_node = inst.n if max_per_node is None else max_per_node
    candidates = {sender: all_subspace_bases(tuple(sorted(inst.possess[sender])), inst.n, inst.q, per_node)
                  for sender in senders}
    if max_per_node is None:
        upper = solve_heuristic(inst, seed=seed).tau
    else:
        upper = sum(min(len(inst.possess[sender]), per_node) for sender in senders)
    lower = max(len(symbols) for symbols in inst.request)

    search = _ExactSearch(inst, senders, candidates, caps.search_node_limit)
    for budget in range(lower, upper + 1):
        found = search.run(budget)
        if found is not None:
            logger.debug("Exact search found tau=%d after %d visits", budget, search.visits)
            choice = [FieldMatrix.from_rows(found.get(node, ()), inst.q, cols=inst.n) for node in range(inst.k)]
            result = _result(inst, choice, METHOD_EXACT)
            logger.info("One-round exact solution: tau=%d", result.tau)
            return result
    # 1ノードあたりの送信数の上限で解けない
    raise NotOneRoundSolvable([])


# --- ヒューリスティック ---

def _random_hyperplane(matrix: FieldMatrix, rng: np.random.Generator) -> FieldMatrix:
    """
    matrix の行空間の中からランダムな余次元1の部分空間を選び、その既約行階段形を返す
    """
    GF = get_field(matrix.modulus)
    d = matrix.rows
    functional = rng.integers(0, matrix.modulus, size=d)
    while not functional.any():
        functional = rng.integers(0, matrix.modulus, size=d)
    kernel = GF(functional.reshape(1, d)).null_space()
    if kernel.shape[0] == 0:
        return FieldMatrix.zeros(0, matrix.cols, matrix.modulus)
    return FieldMatrix(kernel @ matrix.array, matrix.modulus).rref()


def _descend_once(inst: DisseminationInstance, start: List[FieldMatrix], senders: List[int],
                  rng: np.random.Generator) -> List[FieldMatrix]:
    current = list(start)
    improved = True
    while improved:
        improved = False
        for node in rng.permutation(senders).tolist():
            if current[node].rows == 0:
                continue
            for _ in range(HYPERPLANE_TRIES):
                trial = list(current)
                trial[node] = _random_hyperplane(current[node], rng)
                if all(_node_satisfied(inst, out, _received(inst, trial, out))
                       for out in inst.net.out_neighbors(node) if inst.request[out]):
                    current = trial
                    improved = True
                    break
    return current


def solve_heuristic(inst: DisseminationInstance, seed: Optional[int] = None,
                    iterations: int = DEFAULT_ITERATIONS) -> OneRoundResult:
    """
    フラッディングから始め、条件を保ったまま各ノードの送信空間を1次元ずつ削る。
    iterations 回やり直して最小の τ を採る。seed が同じなら結果も同じ
    """
    senders = active_senders(inst)
    flood = _require_flood_solvable(inst, senders)
    rng = np.random.default_rng(get_default_seed(seed))

    best = [matrix.rref() for matrix in flood]
    best_tau = sum(matrix.rows for matrix in best)
    for _ in range(max(1, iterations)):
        candidate = _descend_once(inst, flood, senders, rng)
        tau = sum(matrix.rows for matrix in candidate)
        if tau < best_tau or (tau == best_tau and _concatenated(candidate) < _concatenated(best)):
            best, best_tau = candidate, tau
    logger.info("One-round heuristic solution: tau=%d", best_tau)
    return _result(inst, best, METHOD_HEURISTIC)


def solve(inst: DisseminationInstance, strategy: str = METHOD_EXACT, seed: Optional[int] = None,
          iterations: int = DEFAULT_ITERATIONS, caps: Optional[SearchCaps] = None,
          max_per_node: Optional[int] = None) -> OneRoundResult:
    """
    strategy='exact' で上限を超えた場合はヒューリスティックに切り替える（fallback=True）
    """
    if strategy == METHOD_HEURISTIC:
        return solve_heuristic(inst, seed=seed, iterations=iterations)
    if strategy != METHOD_EXACT:
        raise SchemeError(f"unknown one-round strategy: {strategy}")
    try:
        return solve_exact(inst, caps=caps, seed=seed, max_per_node=max_per_node)
    except SearchCapExceeded as e:
        logger.warning("Exact search exceeded its caps (%s); falling back to the heuristic", e)
        result = solve_heuristic(inst, seed=seed, iterations=iterations)
        return OneRoundResult(result.tau, result.scheme, METHOD_HEURISTIC, result.ranks, fallback=True)


def decode(inst: DisseminationInstance, scheme: TransmissionScheme, node: int, symbol: int) -> DecodeCoefficients:
    """
    node が受け取ったベクトルと自分の P_ℓ の行から e_symbol を作る係数
    """
    senders, blocks = [], []
    for sender in inst.net.in_neighbors(node):
        matrix = scheme.node_matrix(sender)
        blocks.append(matrix)
        senders.extend((sender, row) for row in range(matrix.rows))
    own = possession_diag(inst, node)
    known = stack(blocks + [own], cols=inst.n, modulus=inst.q)
    target = FieldMatrix.unit_vector(symbol, inst.n, inst.q).array[0]
    coefficients = solve_in_row_space(known, target)
    if coefficients is None:
        raise NoDecoding(f"node {node + 1} cannot decode x{symbol + 1}")
    values = coefficients.view(np.ndarray).astype(int).tolist()
    received = len(senders)
    return DecodeCoefficients(tuple(values[:received]), tuple(values[received:]), tuple(senders))
