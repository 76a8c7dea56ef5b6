"""
配信プロトコルの記号的シミュレータ。

シンボルの値は扱わず、各ノードが計算できる線形結合の空間（x 座標の行空間）だけを追跡する。
復号できる ⇔ e_η がそのノードの知識空間に含まれる。
"""
import logging
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

from app.errors import IllegalTransmission, SchemeError
from app.field import Basis, FieldMatrix, in_row_space, solve_in_row_space, stack
from app.instance import DisseminationInstance

logger = logging.getLogger(__name__)

OWN = -1


class NodeKnowledge:
    """
    ノードが計算できる空間（既約行階段形の基底）と、受け取った順のログ
    """

    def __init__(self, possess: Sequence[int], n: int, q: int):
        self.n = n
        self.q = q
        initial = FieldMatrix.unit_rows(possess, n, q)
        self.basis = initial
        # (送信元, ベクトル)。初期所持の単位ベクトルは送信元 OWN
        self.log: List[Tuple[int, Tuple[int, ...]]] = [(OWN, row) for row in initial.as_tuples()]

    @property
    def dim(self) -> int:
        return self.basis.rows

    def can_send(self, vector: Sequence[int]) -> bool:
        return in_row_space(self.basis, list(vector))

    def receive(self, sender: int, vector: Sequence[int]):
        vector = tuple(int(v) for v in vector)
        self.log.append((sender, vector))
        row = FieldMatrix.from_rows([vector], self.q, cols=self.n)
        self.basis = stack([self.basis, row], cols=self.n, modulus=self.q).rref()

    def log_matrix(self) -> FieldMatrix:
        return FieldMatrix.from_rows([vector for _, vector in self.log], self.q, cols=self.n)

    def coefficients(self, symbol: int) -> Optional[Tuple[int, ...]]:
        """
        ログの各ベクトルに掛ける係数（初期の単位ベクトル、受信順のベクトルの順）
        """
        target = FieldMatrix.unit_vector(symbol, self.n, self.q).array[0]
        solution = solve_in_row_space(self.log_matrix(), target)
        if solution is None:
            return None
        return tuple(int(value) for value in solution.tolist())


@dataclass(frozen=True)
class RoundLog:
    index: int
    # ノードごとに放送したベクトル
    broadcasts: Tuple[Basis, ...]
    # (受信ノード, 送信ノード, 送信ノード内の行番号)
    receptions: Tuple[Tuple[int, int, int], ...]


@dataclass(frozen=True)
class Recovery:
    node: int
    symbol: int
    satisfied: bool
    coefficients: Optional[Tuple[int, ...]] = None


@dataclass(frozen=True)
class Transcript:
    rounds: Tuple[RoundLog, ...]
    # knowledge_dims[i][ℓ]: ラウンド i 終了時のノード ℓ の知識の次元（i=0 は初期状態）
    knowledge_dims: Tuple[Tuple[int, ...], ...]
    recovery: Tuple[Recovery, ...]
    final_knowledge: Tuple[Basis, ...] = ()

    @property
    def all_satisfied(self) -> bool:
        return all(item.satisfied for item in self.recovery)

    def unsatisfied(self) -> List[Tuple[int, int]]:
        return [(item.node, item.symbol) for item in self.recovery if not item.satisfied]


BroadcastPlan = Callable[[int, int, NodeKnowledge], Basis]


def _run(inst: DisseminationInstance, rounds: int, plan: BroadcastPlan) -> Transcript:
    knowledge = [NodeKnowledge(sorted(inst.possess[node]), inst.n, inst.q) for node in range(inst.k)]
    dims = [tuple(state.dim for state in knowledge)]
    logs = []
    for index in range(1, rounds + 1):
        # 送信フェーズ: 全ノードがラウンド開始時の知識から送る
        broadcasts = []
        for node in range(inst.k):
            vectors = plan(index, node, knowledge[node])
            for vector in vectors:
                if not knowledge[node].can_send(vector):
                    raise IllegalTransmission(index, node, vector)
            broadcasts.append(tuple(tuple(int(v) for v in vector) for vector in vectors))

        # 受信フェーズ
        receptions = []
        for receiver in range(inst.k):
            for sender in inst.net.in_neighbors(receiver):
                for position, vector in enumerate(broadcasts[sender]):
                    knowledge[receiver].receive(sender, vector)
                    receptions.append((receiver, sender, position))
        logs.append(RoundLog(index, tuple(broadcasts), tuple(receptions)))
        dims.append(tuple(state.dim for state in knowledge))
        logger.debug("Round %d: knowledge dims %s", index, dims[-1])

    # 復号フェーズ
    recovery = []
    for node in range(inst.k):
        for symbol in sorted(inst.request[node]):
            coefficients = knowledge[node].coefficients(symbol)
            recovery.append(Recovery(node, symbol, coefficients is not None, coefficients))
    transcript = Transcript(tuple(logs), tuple(dims), tuple(recovery),
                            tuple(state.basis.as_tuples() for state in knowledge))
    if not transcript.all_satisfied:
        logger.info("%d request(s) remain unsatisfied", len(transcript.unsatisfied()))
    return transcript


def execute(inst: DisseminationInstance, scheme) -> Transcript:
    """
    スキーム（MultiRoundScheme または1ラウンドの TransmissionScheme）を実行する
    """
    rounds = scheme.rounds if hasattr(scheme, 'rounds') else (scheme,)
    for round_scheme in rounds:
        if round_scheme.k != inst.k or round_scheme.n != inst.n or round_scheme.q != inst.q:
            raise SchemeError(f"round {round_scheme.round_index} does not match the instance shape")

    def plan(index: int, node: int, _state: NodeKnowledge) -> Basis:
        return rounds[index - 1].vectors[node]

    return _run(inst, len(rounds), plan)


def flood_execute(inst: DisseminationInstance, r: int) -> Transcript:
    """
    r ラウンドの間、全ノードが知っている全てを放送する
    """
    def plan(_index: int, _node: int, state: NodeKnowledge) -> Basis:
        return state.basis.as_tuples()

    return _run(inst, r, plan)
