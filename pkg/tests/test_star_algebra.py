import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from app.errors import DimensionError, FieldError
from app.field import FieldMatrix, rank
from app.star_algebra import (STAR, IntMatrix, StarEntry, StarMatrix, expand_possession, gamma, int_mul_star,
                              maxrank, member, sample, star_add, star_mul, tensor)

ZERO = StarEntry.fixed(0)
ONE = StarEntry.fixed(1)
STAR_ENTRY = StarEntry.star()


def repeated_row_block():
    # 全ての行が1,3,4列目に★を持つ 5x5 ブロック
    return StarMatrix.from_star_sets([{0, 2, 3}] * 5, 5)


def possession_patterns(max_rows=4, max_cols=4):
    return st.integers(1, max_rows).flatmap(
        lambda rows: st.integers(1, max_cols).flatmap(
            lambda cols: st.lists(st.lists(st.booleans(), min_size=cols, max_size=cols),
                                  min_size=rows, max_size=rows)))


def pattern_to_family(pattern):
    return StarMatrix([[STAR if flag else 0 for flag in row] for row in pattern])


def exhaustive_maxrank(A: StarMatrix) -> int:
    positions = np.argwhere(A.star_mask())
    best = 0
    for values in itertools.product((0, 1), repeat=len(positions)):
        raw = np.zeros(A.shape, dtype=np.int64)
        for (row, col), value in zip(positions, values):
            raw[row, col] = value
        best = max(best, rank(FieldMatrix(raw)))
    return best


class TestStarArithmetic:
    """★演算の加法表・乗法表のテスト"""

    @pytest.mark.parametrize("a,b,expected", [
        (ZERO, STAR_ENTRY, STAR_ENTRY),
        (ONE, STAR_ENTRY, STAR_ENTRY),
        (STAR_ENTRY, STAR_ENTRY, STAR_ENTRY),
        (ONE, ONE, ZERO),
    ])
    def test_加法表(self, a, b, expected):
        assert star_add(a, b) == expected

    @pytest.mark.parametrize("a,b,expected", [
        (ZERO, STAR_ENTRY, ZERO),
        (STAR_ENTRY, ZERO, ZERO),
        (ONE, STAR_ENTRY, STAR_ENTRY),
        (STAR_ENTRY, STAR_ENTRY, STAR_ENTRY),
        (ONE, ONE, ONE),
    ])
    def test_乗法表(self, a, b, expected):
        assert star_mul(a, b) == expected

    def test_GF3では非零と星の積も星(self):
        assert star_mul(StarEntry.fixed(2, 3), StarEntry.star(3)).is_star

    def test_星を含まない場合は体の演算と一致する(self):
        for a, b in itertools.product(range(3), repeat=2):
            left, right = StarEntry.fixed(a, 3), StarEntry.fixed(b, 3)
            assert star_add(left, right).value == (a + b) % 3
            assert star_mul(left, right).value == (a * b) % 3

    def test_法が異なるとFieldError(self):
        with pytest.raises(FieldError):
            star_add(StarEntry.fixed(1, 2), StarEntry.fixed(1, 3))

    def test_表示は星記号(self):
        assert str(STAR_ENTRY) == '★'


class TestStarMatrix:
    """StarMatrix の生成と表示のテスト"""

    def test_テキストから星とアスタリスクを読める(self):
        A = StarMatrix.parse("★ 0\n* 1")
        assert A.star_count() == 2
        assert A.entry(1, 1) == ONE

    def test_体の範囲外の固定値はFieldError(self):
        with pytest.raises(FieldError):
            StarMatrix([[2, 0]])

    def test_3次元配列はDimensionError(self):
        with pytest.raises(DimensionError):
            StarMatrix(np.zeros((2, 2, 2), dtype=np.int64))

    def test_星の集合から作った行列は集合を再現する(self):
        sets = [frozenset({0, 2}), frozenset(), frozenset({1})]
        assert StarMatrix.from_star_sets(sets, 3).star_sets() == sets

    def test_テキスト表示から再度読み込める(self, three_node_family):
        assert StarMatrix.parse(three_node_family.to_text()) == three_node_family

    def test_ブロックの取り出し(self):
        A = StarMatrix.from_star_sets([{0}, {1}, {0, 1}, set()], 2)
        assert A.block(1, 2).star_sets() == [frozenset({0, 1}), frozenset()]


class TestIntMulStar:
    """整数行列と行列族の積のテスト"""

    def test_3ノードの例の積(self, three_node_family):
        # Given
        B = IntMatrix([[1, 1, 0], [1, 1, 1], [0, 1, 1]])

        # When
        product = int_mul_star(B, three_node_family)

        # Then
        assert product == StarMatrix.parse("""
            ★ 0 ★
            ★ ★ ★
            0 ★ ★
        """)

    def test_非零の整数はどれも1と同じ扱い(self, three_node_family):
        B = IntMatrix([[1, 2, 0], [4, 5, 6], [0, 7, 8]])
        ones = IntMatrix([[1, 1, 0], [1, 1, 1], [0, 1, 1]])
        assert int_mul_star(B, three_node_family) == int_mul_star(ones, three_node_family)

    def test_単位行列との積は元の行列(self, three_node_family):
        assert int_mul_star(IntMatrix.identity(3), three_node_family) == three_node_family

    def test_次元が合わないとDimensionError(self, three_node_family):
        with pytest.raises(DimensionError):
            int_mul_star(IntMatrix.identity(2), three_node_family)


class TestTensor:
    """クロネッカー積のテスト"""

    def test_単位行列と全1行列の積はブロック対角(self):
        result = tensor(IntMatrix.identity(2), IntMatrix.ones(2, 2))
        assert result.to_lists() == [[1, 1, 0, 0], [1, 1, 0, 0], [0, 0, 1, 1], [0, 0, 1, 1]]

    def test_diag_ejと単位行列の積はj番目だけ単位ブロック(self):
        result = tensor(IntMatrix.unit_diag(1, 3), IntMatrix.identity(2))
        expected = np.zeros((6, 6), dtype=np.int64)
        expected[2:4, 2:4] = np.eye(2, dtype=np.int64)
        assert result == IntMatrix(expected)

    def test_所持パターンの展開は各行をn回繰り返す(self, three_node_family):
        expanded = expand_possession(three_node_family, 3)

        assert expanded.shape == (9, 3)
        for node in range(3):
            block = expanded.block(node, 3)
            assert all(row == three_node_family.star_sets()[node] for row in block.star_sets())

    @settings(max_examples=30, deadline=None)
    @given(possession_patterns(max_rows=3, max_cols=3), st.data())
    def test_混合積の等式が成り立つ(self, pattern, data):
        # Given: k×n の所持パターンと k×k の 0/1 行列
        compact = pattern_to_family(pattern)
        k, n = compact.shape
        D = IntMatrix(data.draw(st.lists(st.lists(st.integers(0, 1), min_size=k, max_size=k),
                                         min_size=k, max_size=k)))
        E = IntMatrix.identity(n)

        # When
        left = int_mul_star(tensor(D, E), expand_possession(compact, n))
        right = expand_possession(int_mul_star(D, compact), n)

        # Then
        assert left == right


class TestGamma:
    """Γ のテスト"""

    def test_全ての行が同じ星列の例は3本の単位ベクトル(self):
        result = gamma(repeated_row_block())
        assert result.to_lists() == [
            [1, 0, 0, 0, 0],
            [0, 0, 1, 0, 0],
            [0, 0, 0, 1, 0],
            [0, 0, 0, 0, 0],
            [0, 0, 0, 0, 0],
        ]

    def test_零ブロックは零行列(self):
        assert gamma(StarMatrix.from_star_sets([set()] * 3, 3)).is_zero()

    def test_星が1つだけのブロック(self):
        result = gamma(StarMatrix.from_star_sets([{1}, set(), set()], 3))
        assert result.to_lists() == [[0, 1, 0], [0, 0, 0], [0, 0, 0]]

    def test_正方でないブロックはDimensionError(self):
        with pytest.raises(DimensionError):
            gamma(StarMatrix.from_star_sets([{0}], 2))

    @settings(max_examples=40, deadline=None)
    @given(st.integers(1, 4).flatmap(lambda n: st.lists(st.lists(st.booleans(), min_size=n, max_size=n),
                                                        min_size=1, max_size=1)))
    def test_展開ブロックのランクは星列の数(self, pattern):
        # Given: 1ノード分の行を n 回繰り返したブロック
        row = pattern_to_family(pattern)
        n = row.cols
        block = expand_possession(row, n)

        # When
        result = gamma(block)

        # Then
        assert rank(result) == row.star_count()
        nonzero = [tuple(r) for r in result.to_lists() if any(r)]
        assert len(set(nonzero)) == len(nonzero)


class TestMaxrank:
    """MAXRANK のテスト"""

    def test_全行が同じ3列に星のブロックは3(self):
        assert maxrank(repeated_row_block()) == 3

    def test_全て星の正方行列はフルランク(self):
        assert maxrank(StarMatrix(np.full((4, 4), STAR))) == 4

    def test_星が無い行列は0(self):
        assert maxrank(StarMatrix.from_star_sets([set(), set()], 2)) == 0

    def test_非零の固定値を含む行列はFieldError(self):
        with pytest.raises(FieldError):
            maxrank(StarMatrix([[1, STAR]]))

    @settings(max_examples=40, deadline=None)
    @given(possession_patterns(max_rows=3, max_cols=3))
    def test_マッチングの値は全代入の最大ランクと一致する(self, pattern):
        A = pattern_to_family(pattern)
        assert maxrank(A) == exhaustive_maxrank(A)


class TestMemberAndSample:
    """member と sample のテスト"""

    def test_零行列は3ノードの族に属する(self, three_node_family):
        assert member(three_node_family, FieldMatrix.zeros(3, 3))

    def test_固定0の位置に1があれば属さない(self, three_node_family):
        M = FieldMatrix.from_rows([[0, 1, 0], [0, 0, 0], [0, 0, 0]])
        assert not member(three_node_family, M)

    def test_形が違うとDimensionError(self, three_node_family):
        with pytest.raises(DimensionError):
            member(three_node_family, FieldMatrix.zeros(2, 3))

    def test_同じシードなら同じ標本(self, three_node_family):
        assert sample(three_node_family, 7) == sample(three_node_family, 7)

    @settings(max_examples=50, deadline=None)
    @given(possession_patterns(), st.integers(0, 2**31))
    def test_標本は族に属しランクは最大ランク以下(self, pattern, seed):
        A = pattern_to_family(pattern)
        drawn = sample(A, seed)
        assert member(A, drawn)
        assert rank(drawn) <= maxrank(A)
