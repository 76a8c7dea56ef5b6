import logging
import os
from dataclasses import dataclass
from typing import Optional

logger = logging.getLogger(__name__)


def _int_from_env(name: str, default: int) -> int:
    raw = os.environ.get(name)
    if raw is None or raw == '':
        return default
    try:
        return int(raw)
    except ValueError:
        logger.warning("%s is not an integer: %r; using %d", name, raw, default)
        return default


@dataclass(frozen=True)
class SearchCaps:
    """
    厳密探索・グラフ指標の計算上限

    max_nodes は k ではなく、1ラウンドの厳密探索で送信候補になるノード
    （何かを所持し、要求を持つ出隣接ノードがあるノード）の数の上限
    """
    max_nodes: int = 6
    # 送信候補ノード1つあたりの所持シンボル数
    max_possess: int = 5
    max_field: int = 2
    search_node_limit: int = 2_000_000
    minrank_max_vertices: int = 10
    graph_max_vertices: int = 20
    partition_limit: int = 100_000
    generation_retries: int = 10_000


def load_search_caps() -> SearchCaps:
    """
    環境変数から探索上限を読み込む（未設定の項目はデフォルト値）
    """
    defaults = SearchCaps()
    return SearchCaps(
        max_nodes=_int_from_env('DISSEM_EXACT_MAX_NODES', defaults.max_nodes),
        max_possess=_int_from_env('DISSEM_EXACT_MAX_POSSESS', defaults.max_possess),
        max_field=_int_from_env('DISSEM_EXACT_MAX_FIELD', defaults.max_field),
        search_node_limit=_int_from_env('DISSEM_SEARCH_NODE_LIMIT', defaults.search_node_limit),
        minrank_max_vertices=_int_from_env('DISSEM_MINRANK_MAX_VERTICES', defaults.minrank_max_vertices),
        graph_max_vertices=_int_from_env('DISSEM_GRAPH_MAX_VERTICES', defaults.graph_max_vertices),
        partition_limit=_int_from_env('DISSEM_PARTITION_LIMIT', defaults.partition_limit),
        generation_retries=_int_from_env('DISSEM_GENERATION_RETRIES', defaults.generation_retries),
    )


def get_default_seed(seed: Optional[int] = None) -> int:
    """
    --seed が指定されていればそれを、なければ環境変数 DISSEM_SEED を使う
    """
    if seed is not None:
        return seed
    return _int_from_env('DISSEM_SEED', 0)


def get_corpus_dir() -> str:
    return os.environ.get('DISSEM_CORPUS_DIR', 'corpus')


def get_log_level() -> str:
    return os.environ.get('DISSEM_LOG_LEVEL', 'WARNING').upper()
