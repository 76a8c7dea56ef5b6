"""
複数ラウンドの配信スケジュール。

ラウンド i の後の所持パターンは Âᵢ = D·Âᵢ₋₁（D は自己ループ付き転置隣接行列、★演算）。
各ラウンドでは、全ノードがフラッディングと同じ知識（Âᵢ の★列の座標部分空間）に到達することを条件に
送信ランクの和を最小化する。これは「ラウンド前の所持を 𝒫、新たに得る★を 𝒯」とした
1ラウンド問題と同じ形なので、one_round の解法をそのまま使う。
"""
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import numpy as np

from app import one_round
from app.bounds import dmax
from app.errors import NotSolvable, RoundsTooFew, SchemeError, SupportViolation, ZeroLowerBound
from app.field import FieldMatrix, rank, stack
from app.instance import DisseminationInstance, possession_family, validate_for_multiround
from app.network import DirectedNetwork, adjacency, network_from_adjacency, solvability_index
from app.one_round import METHOD_EXACT, METHOD_HEURISTIC, TransmissionScheme
from app.settings import SearchCaps, get_default_seed, load_search_caps
from app.star_algebra import IntMatrix, StarMatrix, expand_possession, gamma, int_mul_star, sample

logger = logging.getLogger(__name__)

STRATEGY_EXACT = METHOD_EXACT
STRATEGY_HEURISTIC = METHOD_HEURISTIC
STRATEGY_RANDOM = 'random'
STRATEGY_FLOOD = 'flood'
STRATEGIES = (STRATEGY_EXACT, STRATEGY_HEURISTIC, STRATEGY_RANDOM, STRATEGY_FLOOD)

RANDOM_ATTEMPTS = 200


def evolve(compact: StarMatrix, D: IntMatrix, i: int = 1) -> StarMatrix:
    """
    i ラウンド後の所持パターン (D^i)·Â
    """
    return int_mul_star(D.power(i, saturate=True), compact)


@dataclass(frozen=True)
class RoundContext:
    index: int
    D: IntMatrix
    before: StarMatrix

    @property
    def after(self) -> StarMatrix:
        return int_mul_star(self.D, self.before)

    @property
    def k(self) -> int:
        return self.before.rows

    @property
    def n(self) -> int:
        return self.before.cols

    @property
    def q(self) -> int:
        return self.before.modulus

    def is_fixpoint(self) -> bool:
        return self.after == self.before

    def network(self) -> DirectedNetwork:
        return network_from_adjacency(self.D)

    def as_instance(self) -> DisseminationInstance:
        """
        ラウンド前の所持を 𝒫、このラウンドで新たに得る★を 𝒯 とした1ラウンド問題
        """
        before, after = self.before.star_sets(), self.after.star_sets()
        return DisseminationInstance(self.n, self.network(), tuple(before),
                                     tuple(a - b for a, b in zip(after, before)), self.q)


def round_rhs_rank(ctx: RoundContext, j: int) -> int:
    """
    ラウンド後にノード j が持つべき知識の次元（Âᵢ の行 j の★の数）
    """
    return len(ctx.after.star_positions(j))


def _own_gamma(ctx: RoundContext, node: int) -> FieldMatrix:
    block = expand_possession(StarMatrix(ctx.before.array[node:node + 1], ctx.q), ctx.n)
    reduced = gamma(block)
    return FieldMatrix.unit_rows(reduced.support_columns(), ctx.n, ctx.q)


def _check_choice_support(ctx: RoundContext, choice: Sequence[FieldMatrix]):
    for node, matrix in enumerate(choice):
        outside = set(matrix.support_columns()) - set(ctx.before.star_positions(node))
        if outside:
            raise SupportViolation(f"round {ctx.index}: node {node + 1} combines symbols it does not hold: "
                                   f"{sorted(s + 1 for s in outside)}")


def check_round(ctx: RoundContext, choice: Sequence[FieldMatrix], j: int) -> bool:
    """
    ノード j が入隣接ノードから受け取る行と、自分の Γ_j を合わせたランクが round_rhs_rank に達するか
    """
    if len(choice) != ctx.k:
        raise SchemeError(f"expected a choice for {ctx.k} nodes, got {len(choice)}")
    _check_choice_support(ctx, choice)
    senders = [node for node in np.flatnonzero(ctx.D.array[j]).tolist() if node != j]
    known = stack([choice[node] for node in senders] + [_own_gamma(ctx, j)], cols=ctx.n, modulus=ctx.q)
    return rank(known) == round_rhs_rank(ctx, j)


def construct_flood_round(ctx: RoundContext) -> List[FieldMatrix]:
    """
    各ノードが自分のブロックの Γ（所持シンボルの単位ベクトル）をそのまま送る
    """
    return [_own_gamma(ctx, node) for node in range(ctx.k)]


@dataclass(frozen=True)
class RoundResult:
    choice: Tuple[FieldMatrix, ...]
    method: str
    fallback: bool = False

    @property
    def tau(self) -> int:
        return sum(matrix.rows for matrix in self.choice)


def _random_round(ctx: RoundContext, rng: np.random.Generator, attempts: int) -> Optional[List[FieldMatrix]]:
    """
    各ノードの行列族から送信行列をランダムに選び、条件を満たしたうちで τ が最小のものを返す
    """
    inst = ctx.as_instance()
    senders = one_round.active_senders(inst)
    best, best_tau = None, None
    for _ in range(attempts):
        choice = [FieldMatrix.zeros(0, ctx.n, ctx.q) for _ in range(ctx.k)]
        for node in senders:
            width = len(ctx.before.star_positions(node))
            rows = int(rng.integers(0, width + 1))
            family = StarMatrix(np.repeat(ctx.before.array[node:node + 1], rows, axis=0).reshape(rows, ctx.n),
                                ctx.q)
            choice[node] = sample(family, rng).rref()
        tau = sum(matrix.rows for matrix in choice)
        if best_tau is not None and tau >= best_tau:
            continue
        if all(check_round(ctx, choice, j) for j in range(ctx.k)):
            best, best_tau = choice, tau
    return best


def minimize_round(ctx: RoundContext, strategy: str = STRATEGY_EXACT, seed: Optional[int] = None,
                   caps: Optional[SearchCaps] = None, rng: Optional[np.random.Generator] = None) -> RoundResult:
    """
    check_round を全ノードで満たす送信のうち、ランクの和が小さいものを選ぶ
    """
    empty = tuple(FieldMatrix.zeros(0, ctx.n, ctx.q) for _ in range(ctx.k))
    if ctx.is_fixpoint():
        return RoundResult(empty, strategy)
    if strategy == STRATEGY_FLOOD:
        return RoundResult(tuple(construct_flood_round(ctx)), STRATEGY_FLOOD)
    if strategy == STRATEGY_RANDOM:
        rng = rng or np.random.default_rng(get_default_seed(seed))
        found = _random_round(ctx, rng, RANDOM_ATTEMPTS)
        if found is None:
            logger.warning("Round %d: no random pick satisfied every node; flooding instead", ctx.index)
            return RoundResult(tuple(construct_flood_round(ctx)), STRATEGY_FLOOD, fallback=True)
        return RoundResult(tuple(found), STRATEGY_RANDOM)
    if strategy not in (STRATEGY_EXACT, STRATEGY_HEURISTIC):
        raise SchemeError(f"unknown multi-round strategy: {strategy}")

    result = one_round.solve(ctx.as_instance(), strategy=strategy, seed=seed, caps=caps)
    return RoundResult(tuple(result.scheme.matrices()), result.method, result.fallback)


@dataclass(frozen=True)
class MultiRoundScheme:
    """
    ラウンドごとの送信（符号化ベクトルは元のシンボル x₁..x_n の座標）
    """
    rounds: Tuple[TransmissionScheme, ...]
    methods: Tuple[str, ...] = field(default=())
    fallback: bool = False

    @classmethod
    def from_rounds(cls, rounds: Sequence[TransmissionScheme], methods: Sequence[str] = (),
                    fallback: bool = False) -> 'MultiRoundScheme':
        renumbered = tuple(TransmissionScheme(r.n, r.q, r.vectors, index + 1) for index, r in enumerate(rounds))
        return cls(renumbered, tuple(methods), fallback)

    @property
    def r(self) -> int:
        return len(self.rounds)

    @property
    def per_round_tau(self) -> Tuple[int, ...]:
        return tuple(round_scheme.tau for round_scheme in self.rounds)

    @property
    def tau_total(self) -> int:
        return sum(self.per_round_tau)


def round_contexts(inst: DisseminationInstance, r: int) -> List[RoundContext]:
    """
    フラッディングで進む所持パターンに沿った r 個のラウンド
    """
    D = adjacency(inst.net, with_self_loops=True)
    before = possession_family(inst)
    contexts = []
    for index in range(1, r + 1):
        ctx = RoundContext(index, D, before)
        contexts.append(ctx)
        before = ctx.after
    return contexts


def _check_schedulable(inst: DisseminationInstance, r: Optional[int]) -> int:
    validate_for_multiround(inst)
    r0 = solvability_index(inst.net)
    if r0 is None:
        raise NotSolvable("the network is not strongly connected")
    held = set().union(*inst.possess) if inst.possess else set()
    missing = set().union(*inst.request) - held if inst.request else set()
    if missing:
        raise NotSolvable(f"no node possesses {sorted(s + 1 for s in missing)}")
    if r is not None and r < r0:
        raise RoundsTooFew(r, r0)
    return r0


def schedule(inst: DisseminationInstance, r: Optional[int] = None, strategy: str = STRATEGY_EXACT,
             seed: Optional[int] = None, caps: Optional[SearchCaps] = None) -> MultiRoundScheme:
    """
    r ラウンド（省略時は r₀）で全ての要求を満たすスケジュール。ラウンドごとに順に最小化する
    """
    if strategy not in STRATEGIES:
        raise SchemeError(f"unknown multi-round strategy: {strategy}")
    caps = caps or load_search_caps()
    r0 = _check_schedulable(inst, r)
    if r is None:
        r = r0
    rng = np.random.default_rng(get_default_seed(seed))

    rounds, methods, fallback = [], [], False
    for ctx in round_contexts(inst, r):
        result = minimize_round(ctx, strategy, seed=seed, caps=caps, rng=rng)
        rounds.append(TransmissionScheme.from_matrices(result.choice, inst.n, inst.q))
        methods.append(result.method)
        fallback = fallback or result.fallback
        logger.info("Round %d: tau=%d (%s)", ctx.index, result.tau, result.method)
    scheme = MultiRoundScheme.from_rounds(rounds, methods, fallback)
    logger.info("Schedule over %d rounds (r0=%s): tau=%d", r, r0, scheme.tau_total)
    return scheme


@dataclass(frozen=True)
class RatioReport:
    ratio: Fraction
    tau: int
    dmax: int
    scheme: MultiRoundScheme


def ratio_report(inst: DisseminationInstance, r: Optional[int] = None, strategy: str = STRATEGY_EXACT,
                 seed: Optional[int] = None, caps: Optional[SearchCaps] = None) -> RatioReport:
    lower = dmax(inst)
    if lower == 0:
        raise ZeroLowerBound("dmax is 0; the ratio is undefined")
    scheme = schedule(inst, r, strategy, seed, caps)
    return RatioReport(Fraction(scheme.tau_total, lower), scheme.tau_total, lower, scheme)


def ratio(inst: DisseminationInstance, r: Optional[int] = None, strategy: str = STRATEGY_EXACT,
          seed: Optional[int] = None, caps: Optional[SearchCaps] = None) -> Fraction:
    """
    τ / dₘₐₓ
    """
    return ratio_report(inst, r, strategy, seed, caps).ratio
