"""
τ / dₘₐₓ の比の分布を調べる実験。結果は6つの区間のヒストグラム（整数パーセント）と生データの CSV。
"""
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from app.errors import DissemError
from app.generator import generate_corpus
from app.instance import DisseminationInstance
from app.multiround import STRATEGY_EXACT, ratio_report
from app.settings import get_default_seed

logger = logging.getLogger(__name__)

BIN_EDGES = (Fraction(1), Fraction(6, 5), Fraction(7, 5), Fraction(8, 5), Fraction(9, 5), Fraction(2))
BIN_LABELS = ('[1,1.2)', '[1.2,1.4)', '[1.4,1.6)', '[1.6,1.8)', '[1.8,2.0)', '[2.0,∞)')
CSV_HEADER = ('index', 'tau', 'dmax', 'ratio')
NO_INSTANCES = 'no instances'


@dataclass(frozen=True)
class InstanceOutcome:
    index: int
    tau: Optional[int] = None
    dmax: Optional[int] = None
    ratio: Optional[Fraction] = None
    error: Optional[str] = None


@dataclass
class ExperimentReport:
    k: int
    n: int
    diameter: int
    count: int
    seed: int
    strategy: str = STRATEGY_EXACT
    outcomes: List[InstanceOutcome] = field(default_factory=list)

    @property
    def succeeded(self) -> List[InstanceOutcome]:
        return [outcome for outcome in self.outcomes if outcome.error is None]

    @property
    def failed(self) -> int:
        return len(self.outcomes) - len(self.succeeded)

    def counts(self) -> List[int]:
        return bin_counts([outcome.ratio for outcome in self.succeeded])

    def percentages(self) -> List[int]:
        return integer_percentages(self.counts())

    @property
    def empty(self) -> bool:
        return not self.succeeded

    def csv_rows(self) -> List[Tuple]:
        return [(outcome.index + 1, outcome.tau, outcome.dmax, float(outcome.ratio))
                for outcome in self.succeeded]


def bin_index(ratio: Fraction) -> int:
    """
    [1,1.2) → 0, ..., [2.0,∞) → 5。1 未満も先頭の区間に入れる
    """
    for index, upper in enumerate(BIN_EDGES[1:]):
        if ratio < upper:
            return index
    return len(BIN_LABELS) - 1


def bin_counts(ratios: Sequence[Fraction]) -> List[int]:
    counts = [0] * len(BIN_LABELS)
    for value in ratios:
        counts[bin_index(value)] += 1
    return counts


def integer_percentages(counts: Sequence[int]) -> List[int]:
    """
    最大剰余法で丸め、合計がちょうど 100 になる整数パーセント
    """
    total = sum(counts)
    if total == 0:
        return [0] * len(counts)
    exact = [Fraction(100 * count, total) for count in counts]
    floors = [int(value) for value in exact]
    remainder = 100 - sum(floors)
    order = sorted(range(len(counts)), key=lambda i: (-(exact[i] - floors[i]), i))
    for i in order[:remainder]:
        floors[i] += 1
    return floors


def _evaluate(job: Tuple[int, DisseminationInstance, str, int]) -> InstanceOutcome:
    index, inst, strategy, seed = job
    try:
        report = ratio_report(inst, strategy=strategy, seed=seed)
    except DissemError as e:
        return InstanceOutcome(index, error=f"{type(e).__name__}: {e}")
    return InstanceOutcome(index, report.tau, report.dmax, report.ratio)


def evaluate_corpus(instances: Sequence[DisseminationInstance], strategy: str = STRATEGY_EXACT,
                    seed: int = 0, workers: int = 1) -> List[InstanceOutcome]:
    """
    各インスタンスでスケジュールを作り比を求める。並列でも結果はインスタンス順
    """
    jobs = [(index, inst, strategy, seed) for index, inst in enumerate(instances)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_evaluate, jobs))
    else:
        outcomes = [_evaluate(job) for job in jobs]
    for outcome in outcomes:
        if outcome.error is not None:
            logger.warning("Instance %d excluded: %s", outcome.index + 1, outcome.error)
    return outcomes


def run_experiment(k: int, n: int, diameter: int, count: int, seed: Optional[int] = None,
                   strategy: str = STRATEGY_EXACT, workers: int = 1,
                   instances: Optional[Sequence[DisseminationInstance]] = None) -> ExperimentReport:
    seed = get_default_seed(seed)
    if instances is None:
        instances = generate_corpus(k, n, diameter, count, seed)
    report = ExperimentReport(k, n, diameter, len(instances), seed, strategy)
    report.outcomes = evaluate_corpus(instances, strategy, seed, workers)
    if report.failed:
        logger.warning("%d of %d instances failed and were excluded", report.failed, report.count)
    return report


def serialize_report(report: ExperimentReport) -> dict:
    body = {
        'format': 1,
        'kind': 'experiment',
        'parameters': {'nodes': report.k, 'symbols': report.n, 'diameter': report.diameter,
                       'count': report.count, 'seed': report.seed, 'strategy': report.strategy},
        'instances': [
            {'index': outcome.index + 1, 'tau': outcome.tau, 'dmax': outcome.dmax,
             'ratio': None if outcome.ratio is None else str(outcome.ratio), 'error': outcome.error}
            for outcome in report.outcomes
        ],
        'excluded': report.failed,
    }
    if report.empty:
        body['histogram'] = NO_INSTANCES
    else:
        body['histogram'] = {'Range': list(BIN_LABELS), 'Occurrence, %': report.percentages()}
    return body
