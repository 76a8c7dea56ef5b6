import pytest
import os
import sys

# プロジェクトのルートディレクトリをPythonパスに追加
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from app.instance import DisseminationInstance, SideInfoGraph  # noqa: E402
from app.network import DirectedNetwork  # noqa: E402
from app.settings import SearchCaps  # noqa: E402
from app.star_algebra import StarMatrix  # noqa: E402

DATA_DIR = os.path.join(os.path.dirname(__file__), '..', 'data')


def make_star_instance(side_info, n=None):
    """
    送信ノード1つ（ノード0）と受信ノード n 個のインデックス符号化インスタンス。
    side_info[i] は x_i を要求する受信ノードが持つシンボルの集合
    """
    n = len(side_info) if n is None else n
    possess = [frozenset(range(n))] + [frozenset(side_info[i]) for i in range(n)]
    request = [frozenset()] + [frozenset({i}) for i in range(n)]
    edges = [(0, i + 1) for i in range(n)]
    return DisseminationInstance.build(n, n + 1, edges, possess, request)


@pytest.fixture
def five_node_instance():
    """5ノード・3シンボルの基本例（v1: x1,x2 / v2: x2,x3 / v3: x1 / v4: x2 / v5: x1,x3）"""
    return DisseminationInstance.build(
        n=3, k=5,
        edges=[(0, 2), (0, 3), (1, 2), (1, 3), (1, 4)],
        possess=[{0, 1}, {1, 2}, {0}, {1}, {0, 2}],
        request=[set(), set(), {1, 2}, {0, 2}, {1}],
    )


@pytest.fixture
def five_node_instance_path():
    return os.path.join(DATA_DIR, 'five_node_instance.json')


@pytest.fixture
def five_node_scheme_path():
    return os.path.join(DATA_DIR, 'five_node_scheme.json')


@pytest.fixture
def three_node_family():
    """3ノードの所持パターン（対角方向に★が1つずつ）"""
    return StarMatrix.parse("""
        ★ 0 0
        0 0 ★
        0 ★ 0
    """)


@pytest.fixture
def three_cycle():
    return DirectedNetwork.cycle(3)


@pytest.fixture
def three_cycle_instance(three_cycle):
    """有向3閉路、各ノードが異なるシンボルを1つずつ持ち、残りを要求する"""
    return DisseminationInstance.build(
        n=3, k=3, edges=sorted(three_cycle.edges),
        possess=[{0}, {1}, {2}],
        request=[{1, 2}, {0, 2}, {0, 1}],
    )


@pytest.fixture
def five_cycle_graph():
    return SideInfoGraph.undirected(5, [(i, (i + 1) % 5) for i in range(5)])


@pytest.fixture
def small_caps():
    """厳密探索を小さく制限した上限"""
    return SearchCaps(max_nodes=2, max_possess=3, max_field=2, search_node_limit=10_000,
                      minrank_max_vertices=4, graph_max_vertices=6, partition_limit=4,
                      generation_retries=200)


@pytest.fixture
def tmp_corpus_dir(tmp_path, monkeypatch):
    """テスト用のコーパスディレクトリを環境変数で指定"""
    directory = tmp_path / 'corpus'
    monkeypatch.setenv('DISSEM_CORPUS_DIR', str(directory))
    return str(directory)


@pytest.fixture
def star_instance():
    """make_star_instance をテストから使うためのファクトリ"""
    return make_star_instance
