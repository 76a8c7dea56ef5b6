"""
F ∪ {★} 上の行列（行列族）と、その★演算・テンソル積・整数行列との積・Γ・MAXRANK。

StarMatrix は numpy の整数配列で保持し、★ は STAR (-1) で表す。
"""
import logging
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Union

import networkx as nx
import numpy as np

from app.errors import DimensionError, FieldError
from app.field import DEFAULT_MODULUS, FieldElement, FieldMatrix, get_field

logger = logging.getLogger(__name__)

STAR = -1
STAR_SYMBOL = '★'


@dataclass(frozen=True)
class StarEntry:
    """
    Fixed(値) または Star。value が None の場合が★
    """
    value: Optional[int]
    modulus: int = DEFAULT_MODULUS

    def __post_init__(self):
        if self.value is not None:
            FieldElement(self.value, self.modulus)

    @classmethod
    def fixed(cls, value: int, modulus: int = DEFAULT_MODULUS) -> 'StarEntry':
        return cls(value % modulus, modulus)

    @classmethod
    def star(cls, modulus: int = DEFAULT_MODULUS) -> 'StarEntry':
        return cls(None, modulus)

    @property
    def is_star(self) -> bool:
        return self.value is None

    def __str__(self) -> str:
        return STAR_SYMBOL if self.is_star else str(self.value)


def _check_modulus(a: StarEntry, b: StarEntry):
    if a.modulus != b.modulus:
        raise FieldError(f"modulus mismatch: {a.modulus} vs {b.modulus}")


def star_add(a: StarEntry, b: StarEntry) -> StarEntry:
    """
    加法表: どちらかが★なら★、そうでなければ体の和
    """
    _check_modulus(a, b)
    if a.is_star or b.is_star:
        return StarEntry.star(a.modulus)
    return StarEntry.fixed(a.value + b.value, a.modulus)


def star_mul(a: StarEntry, b: StarEntry) -> StarEntry:
    """
    乗法表: 0・x = 0（x が★でも）、非零・★ = ★、★・★ = ★
    """
    _check_modulus(a, b)
    if (not a.is_star and a.value == 0) or (not b.is_star and b.value == 0):
        return StarEntry.fixed(0, a.modulus)
    if a.is_star or b.is_star:
        return StarEntry.star(a.modulus)
    return StarEntry.fixed(a.value * b.value, a.modulus)


class IntMatrix:
    """
    非負整数行列（隣接行列 D、その冪、E、I、1_n、diag(·) など）
    """
    __slots__ = ('_array',)

    def __init__(self, array):
        raw = np.array(array, dtype=np.int64)
        if raw.ndim != 2:
            raise DimensionError(f"a matrix must be 2-dimensional, got shape {raw.shape}")
        if raw.size and raw.min() < 0:
            raise DimensionError("integer matrices must be nonnegative")
        raw.flags.writeable = False
        self._array = raw

    @classmethod
    def identity(cls, n: int) -> 'IntMatrix':
        return cls(np.eye(n, dtype=np.int64))

    @classmethod
    def ones(cls, rows: int, cols: int) -> 'IntMatrix':
        return cls(np.ones((rows, cols), dtype=np.int64))

    @classmethod
    def diag(cls, values: Sequence[int]) -> 'IntMatrix':
        return cls(np.diag(np.asarray(values, dtype=np.int64)))

    @classmethod
    def unit_diag(cls, index: int, n: int) -> 'IntMatrix':
        """
        diag(e_j)
        """
        values = np.zeros(n, dtype=np.int64)
        values[index] = 1
        return cls.diag(values)

    @property
    def array(self) -> np.ndarray:
        return self._array

    @property
    def rows(self) -> int:
        return self._array.shape[0]

    @property
    def cols(self) -> int:
        return self._array.shape[1]

    @property
    def shape(self):
        return self._array.shape

    def to_lists(self) -> List[List[int]]:
        return self._array.tolist()

    def support(self) -> 'IntMatrix':
        """
        非零要素を 1 に潰した 0/1 行列
        """
        return IntMatrix((self._array != 0).astype(np.int64))

    def matmul(self, other: 'IntMatrix', saturate: bool = False) -> 'IntMatrix':
        if self.cols != other.rows:
            raise DimensionError(f"cannot multiply {self.shape} by {other.shape}")
        product = self._array @ other._array
        if saturate:
            product = (product != 0).astype(np.int64)
        return IntMatrix(product)

    def power(self, exponent: int, saturate: bool = True) -> 'IntMatrix':
        """
        D^i。saturate の場合は各段で 1 に飽和させる（正値性のみ保たれる）
        """
        if self.rows != self.cols:
            raise DimensionError("only square matrices have powers")
        result = IntMatrix.identity(self.rows)
        for _ in range(exponent):
            result = result.matmul(self, saturate=saturate)
        return result

    def all_positive(self) -> bool:
        return bool(np.all(self._array > 0))

    def __eq__(self, other) -> bool:
        if not isinstance(other, IntMatrix):
            return NotImplemented
        return self.shape == other.shape and np.array_equal(self._array, other._array)

    def __hash__(self) -> int:
        return hash((self.shape, self._array.tobytes()))

    def __repr__(self) -> str:
        return f"IntMatrix({self.to_lists()})"


class StarMatrix:
    """
    F★ 上の行列。★ の位置は体の任意の値を取れる（行列族）
    """
    __slots__ = ('_array', '_modulus')

    def __init__(self, array, modulus: int = DEFAULT_MODULUS):
        get_field(modulus)
        raw = np.array(array, dtype=np.int64)
        if raw.ndim != 2:
            raise DimensionError(f"a matrix must be 2-dimensional, got shape {raw.shape}")
        fixed = raw[raw != STAR]
        if fixed.size and (fixed.min() < 0 or fixed.max() >= modulus):
            raise FieldError(f"fixed entries must lie in GF({modulus})")
        raw.flags.writeable = False
        self._array = raw
        self._modulus = int(modulus)

    @classmethod
    def parse(cls, text: str, modulus: int = DEFAULT_MODULUS) -> 'StarMatrix':
        """
        '★ 0 1' のような行を改行で区切ったテキストから作る。'*' も★として扱う
        """
        rows = []
        for line in text.strip().splitlines():
            tokens = line.split()
            if not tokens:
                continue
            rows.append([STAR if token in (STAR_SYMBOL, '*') else int(token) for token in tokens])
        return cls(rows, modulus)

    @classmethod
    def from_star_sets(cls, star_sets: Sequence[Iterable[int]], n: int,
                       modulus: int = DEFAULT_MODULUS) -> 'StarMatrix':
        """
        行 ℓ の★列を集合で与えて、それ以外は 0 の行列を作る
        """
        raw = np.zeros((len(star_sets), n), dtype=np.int64)
        for row, columns in enumerate(star_sets):
            for column in columns:
                raw[row, column] = STAR
        return cls(raw, modulus)

    @classmethod
    def from_int(cls, matrix: IntMatrix, modulus: int = DEFAULT_MODULUS) -> 'StarMatrix':
        # 非零の整数は体の 1 に写す
        return cls((matrix.array != 0).astype(np.int64), modulus)

    @property
    def array(self) -> np.ndarray:
        return self._array

    @property
    def modulus(self) -> int:
        return self._modulus

    @property
    def rows(self) -> int:
        return self._array.shape[0]

    @property
    def cols(self) -> int:
        return self._array.shape[1]

    @property
    def shape(self):
        return self._array.shape

    def entry(self, row: int, col: int) -> StarEntry:
        value = int(self._array[row, col])
        return StarEntry.star(self._modulus) if value == STAR else StarEntry.fixed(value, self._modulus)

    def star_mask(self) -> np.ndarray:
        return self._array == STAR

    def star_count(self) -> int:
        return int(np.count_nonzero(self.star_mask()))

    def star_positions(self, row: int) -> List[int]:
        return np.flatnonzero(self._array[row] == STAR).tolist()

    def star_sets(self) -> List[frozenset]:
        return [frozenset(self.star_positions(row)) for row in range(self.rows)]

    def is_zero_fixed(self) -> bool:
        """
        ★ 以外の要素が全て 0 か（所持行列族の形）
        """
        return not np.any(self._array[self._array != STAR])

    def block(self, index: int, size: int) -> 'StarMatrix':
        return StarMatrix(self._array[index * size:(index + 1) * size], self._modulus)

    def to_text(self) -> str:
        return '\n'.join(' '.join(STAR_SYMBOL if value == STAR else str(value) for value in row)
                         for row in self._array.tolist())

    def __eq__(self, other) -> bool:
        if not isinstance(other, StarMatrix):
            return NotImplemented
        return (self._modulus == other._modulus and self.shape == other.shape
                and np.array_equal(self._array, other._array))

    def __hash__(self) -> int:
        return hash((self._modulus, self.shape, self._array.tobytes()))

    def __repr__(self) -> str:
        return f"StarMatrix(GF({self._modulus}), {self.to_text()!r})"


def int_mul_star(B: IntMatrix, A: StarMatrix) -> StarMatrix:
    """
    整数行列 B と行列族 A の積。B の非零要素は 1 に写してから★演算で計算する
    """
    if B.cols != A.rows:
        raise DimensionError(f"cannot multiply {B.shape} by {A.shape}")
    coefficients = (B.array != 0).astype(np.int64)
    stars = A.star_mask().astype(np.int64)
    fixed = np.where(A.star_mask(), 0, A.array)
    # 非零係数と★が1つでも出会えばその位置は★
    star_hits = coefficients @ stars
    values = (coefficients @ fixed) % A.modulus
    return StarMatrix(np.where(star_hits > 0, STAR, values), A.modulus)


def _kron_star(A: StarMatrix, B: StarMatrix) -> StarMatrix:
    if A.modulus != B.modulus:
        raise FieldError(f"modulus mismatch: {A.modulus} vs {B.modulus}")
    a, b = A.array, B.array
    rows, cols = a.shape[0] * b.shape[0], a.shape[1] * b.shape[1]
    result = np.zeros((rows, cols), dtype=np.int64)
    for i in range(a.shape[0]):
        for j in range(a.shape[1]):
            left = A.entry(i, j)
            if not left.is_star and left.value == 0:
                continue
            block = result[i * b.shape[0]:(i + 1) * b.shape[0], j * b.shape[1]:(j + 1) * b.shape[1]]
            if left.is_star:
                # ★・0 = 0、★・非零 = ★
                block[:] = np.where((b == STAR) | (b != 0), STAR, 0)
            else:
                block[:] = np.where(b == STAR, STAR, (left.value * b) % A.modulus)
    return StarMatrix(result, A.modulus)


def tensor(A: Union[StarMatrix, IntMatrix], B: Union[StarMatrix, IntMatrix]):
    """
    クロネッカー積。片方でも StarMatrix なら★演算で計算する
    """
    if isinstance(A, IntMatrix) and isinstance(B, IntMatrix):
        return IntMatrix(np.kron(A.array, B.array))
    modulus = A.modulus if isinstance(A, StarMatrix) else B.modulus
    left = A if isinstance(A, StarMatrix) else StarMatrix.from_int(A, modulus)
    right = B if isinstance(B, StarMatrix) else StarMatrix.from_int(B, modulus)
    return _kron_star(left, right)


def expand_possession(compact: StarMatrix, n: int) -> StarMatrix:
    """
    Â から 𝔸 = Â ⊗ 1_n を作る（各ノードのブロックは同じ行の n 回繰り返し）
    """
    return tensor(compact, IntMatrix.ones(n, 1))


def gamma(block: StarMatrix) -> FieldMatrix:
    """
    Γ: 行を上から順に見て、まだ使っていない最小の★列の単位ベクトルに置き換える。
    新しい★列が残っていない行は零行になる
    """
    if block.rows != block.cols:
        raise DimensionError(f"gamma expects a square block, got {block.shape}")
    result = np.zeros(block.shape, dtype=np.int64)
    used = set()
    for row in range(block.rows):
        for column in block.star_positions(row):
            if column not in used:
                used.add(column)
                result[row, column] = 1
                break
    return FieldMatrix(result, block.modulus)


def maxrank(A: StarMatrix) -> int:
    """
    零固定の行列族の最大ランク = ★パターンの最大二部マッチング（項ランク）
    """
    if not A.is_zero_fixed():
        raise FieldError("maxrank is only supported for families whose fixed entries are all zero")
    positions = np.argwhere(A.star_mask())
    if positions.size == 0:
        return 0
    graph = nx.Graph()
    row_nodes = [('r', row) for row in range(A.rows)]
    graph.add_nodes_from(row_nodes, bipartite=0)
    graph.add_nodes_from((('c', col) for col in range(A.cols)), bipartite=1)
    graph.add_edges_from((('r', int(row)), ('c', int(col))) for row, col in positions)
    matching = nx.bipartite.hopcroft_karp_matching(graph, top_nodes=row_nodes)
    return len(matching) // 2


def member(A: StarMatrix, M: FieldMatrix) -> bool:
    """
    M が行列族 A に属するか（固定位置が全て一致するか）
    """
    if A.shape != M.shape:
        raise DimensionError(f"shape mismatch: {A.shape} vs {M.shape}")
    if A.modulus != M.modulus:
        raise FieldError(f"modulus mismatch: {A.modulus} vs {M.modulus}")
    fixed = ~A.star_mask()
    values = M.array.view(np.ndarray).astype(np.int64)
    return bool(np.array_equal(values[fixed], A.array[fixed]))


def sample(A: StarMatrix, seed) -> FieldMatrix:
    """
    ★ を一様乱数で置き換えた族の元。seed が同じなら結果も同じ
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    draws = rng.integers(0, A.modulus, size=A.shape)
    return FieldMatrix(np.where(A.star_mask(), draws, A.array), A.modulus)
