"""
素体 GF(q) 上の厳密な線形代数。

ランク・行空間・係数計算は全て galois の FieldArray で行う。
FieldMatrix は生成後に変更できない（配列は書き込み禁止にしてある）。
"""
import functools
import itertools
import logging
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple

import galois
import numpy as np

from app.errors import DimensionError, FieldError

logger = logging.getLogger(__name__)

DEFAULT_MODULUS = 2

RowTuple = Tuple[int, ...]
Basis = Tuple[RowTuple, ...]


@functools.lru_cache(maxsize=None)
def get_field(modulus: int):
    """
    GF(q) の配列クラスを返す。q は素数でなければならない
    """
    if not isinstance(modulus, (int, np.integer)) or modulus < 2 or not galois.is_prime(int(modulus)):
        raise FieldError(f"modulus must be prime: {modulus}")
    return galois.GF(int(modulus))


@dataclass(frozen=True)
class FieldElement:
    value: int
    modulus: int = DEFAULT_MODULUS

    def __post_init__(self):
        get_field(self.modulus)
        if not 0 <= self.value < self.modulus:
            raise FieldError(f"{self.value} is not an element of GF({self.modulus})")

    def _check(self, other: 'FieldElement'):
        if self.modulus != other.modulus:
            raise FieldError(f"modulus mismatch: {self.modulus} vs {other.modulus}")

    def __add__(self, other: 'FieldElement') -> 'FieldElement':
        self._check(other)
        return FieldElement((self.value + other.value) % self.modulus, self.modulus)

    def __mul__(self, other: 'FieldElement') -> 'FieldElement':
        self._check(other)
        return FieldElement((self.value * other.value) % self.modulus, self.modulus)

    def is_zero(self) -> bool:
        return self.value == 0


class FieldMatrix:
    """
    GF(q) 上の密行列（行優先、全要素が同じ法を持つ）
    """
    __slots__ = ('_array', '_modulus')

    def __init__(self, array, modulus: int = DEFAULT_MODULUS):
        GF = get_field(modulus)
        raw = np.asarray(array.view(np.ndarray) if isinstance(array, galois.FieldArray) else array, dtype=np.int64)
        if raw.ndim != 2:
            raise DimensionError(f"a matrix must be 2-dimensional, got shape {raw.shape}")
        if raw.size and (raw.min() < 0 or raw.max() >= modulus):
            raw = raw % modulus
        field_array = GF(raw)
        field_array.flags.writeable = False
        self._array = field_array
        self._modulus = int(modulus)

    # --- 生成 ---

    @classmethod
    def from_rows(cls, rows: Iterable[Sequence[int]], modulus: int = DEFAULT_MODULUS,
                  cols: Optional[int] = None) -> 'FieldMatrix':
        rows = [list(row) for row in rows]
        if not rows:
            if cols is None:
                raise DimensionError("an empty matrix needs an explicit column count")
            return cls.zeros(0, cols, modulus)
        width = len(rows[0])
        if any(len(row) != width for row in rows) or (cols is not None and cols != width):
            raise DimensionError("all rows must have the same length")
        return cls(np.array(rows, dtype=np.int64), modulus)

    @classmethod
    def zeros(cls, rows: int, cols: int, modulus: int = DEFAULT_MODULUS) -> 'FieldMatrix':
        return cls(np.zeros((rows, cols), dtype=np.int64), modulus)

    @classmethod
    def identity(cls, n: int, modulus: int = DEFAULT_MODULUS) -> 'FieldMatrix':
        return cls(np.eye(n, dtype=np.int64), modulus)

    @classmethod
    def unit_vector(cls, index: int, n: int, modulus: int = DEFAULT_MODULUS) -> 'FieldMatrix':
        return cls.unit_rows([index], n, modulus)

    @classmethod
    def unit_rows(cls, indices: Iterable[int], n: int, modulus: int = DEFAULT_MODULUS) -> 'FieldMatrix':
        """
        e_i (i ∈ indices) を昇順に並べた行列
        """
        indices = sorted(indices)
        raw = np.zeros((len(indices), n), dtype=np.int64)
        for row, index in enumerate(indices):
            raw[row, index] = 1
        return cls(raw, modulus)

    # --- 属性 ---

    @property
    def array(self):
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
    def shape(self) -> Tuple[int, int]:
        return self._array.shape

    def field(self):
        return get_field(self._modulus)

    def to_lists(self) -> List[List[int]]:
        return self._array.view(np.ndarray).astype(int).tolist()

    def as_tuples(self) -> Basis:
        return tuple(tuple(row) for row in self.to_lists())

    def row(self, index: int):
        return self._array[index]

    def is_zero(self) -> bool:
        return not np.any(self._array.view(np.ndarray))

    def support_columns(self) -> List[int]:
        """
        非零要素を持つ列の番号
        """
        if self.rows == 0:
            return []
        return np.flatnonzero(np.any(self._array.view(np.ndarray) != 0, axis=0)).tolist()

    # --- 演算 ---

    def rank(self) -> int:
        return rank(self)

    def transpose(self) -> 'FieldMatrix':
        return FieldMatrix(self._array.view(np.ndarray).T, self._modulus)

    def matmul(self, other: 'FieldMatrix') -> 'FieldMatrix':
        if self._modulus != other._modulus:
            raise FieldError(f"modulus mismatch: {self._modulus} vs {other._modulus}")
        if self.cols != other.rows:
            raise DimensionError(f"cannot multiply {self.shape} by {other.shape}")
        if self.rows == 0 or other.cols == 0 or self.cols == 0:
            return FieldMatrix.zeros(self.rows, other.cols, self._modulus)
        return FieldMatrix(self._array @ other._array, self._modulus)

    def rref(self) -> 'FieldMatrix':
        """
        既約行階段形（零行を除く）。行空間の正準代表として使う
        """
        if self.rows == 0 or self.cols == 0:
            return FieldMatrix.zeros(0, self.cols, self._modulus)
        reduced = self._array.copy().row_reduce().view(np.ndarray)
        nonzero = np.any(reduced != 0, axis=1)
        return FieldMatrix(reduced[nonzero], self._modulus)

    def __eq__(self, other) -> bool:
        if not isinstance(other, FieldMatrix):
            return NotImplemented
        return (self._modulus == other._modulus and self.shape == other.shape
                and np.array_equal(self._array.view(np.ndarray), other._array.view(np.ndarray)))

    def __hash__(self) -> int:
        return hash((self._modulus, self.shape, self.as_tuples()))

    def __repr__(self) -> str:
        return f"FieldMatrix(GF({self._modulus}), {self.to_lists()})"


def _as_field_vector(v, modulus: int):
    GF = get_field(modulus)
    if isinstance(v, galois.FieldArray):
        v = v.view(np.ndarray)
    return GF(np.asarray(v, dtype=np.int64).reshape(-1) % modulus)


def rank(M: FieldMatrix) -> int:
    """
    GF(q) 上の行ランク
    """
    if M.rows == 0 or M.cols == 0:
        return 0
    return int(np.linalg.matrix_rank(M.array.copy()))


def stack(blocks: Sequence[FieldMatrix], cols: Optional[int] = None,
          modulus: Optional[int] = None) -> FieldMatrix:
    """
    行列を与えられた順に縦に連結する。空リストの場合は cols 列の 0 行行列
    """
    if not blocks:
        if cols is None:
            raise DimensionError("stacking nothing needs an explicit column count")
        return FieldMatrix.zeros(0, cols, modulus or DEFAULT_MODULUS)
    width = blocks[0].cols if cols is None else cols
    q = blocks[0].modulus if modulus is None else modulus
    for block in blocks:
        if block.cols != width:
            raise DimensionError(f"column mismatch: {block.cols} vs {width}")
        if block.modulus != q:
            raise FieldError(f"modulus mismatch: {block.modulus} vs {q}")
    raw = np.vstack([block.array.view(np.ndarray).reshape(block.rows, width) for block in blocks])
    return FieldMatrix(raw, q)


def solve_in_row_space(M: FieldMatrix, v) -> Optional[object]:
    """
    c·M = v となる係数ベクトル c を返す。v が行空間に無ければ None
    """
    GF = M.field()
    target = _as_field_vector(v, M.modulus)
    if target.size != M.cols:
        raise DimensionError(f"vector length {target.size} does not match {M.cols} columns")
    if M.rows == 0:
        if np.any(target.view(np.ndarray)):
            return None
        return GF.Zeros(0)

    # M^T c = v を拡大係数行列の行簡約で解く（自由変数は 0）
    augmented = GF(np.hstack([M.array.view(np.ndarray).T, target.view(np.ndarray).reshape(-1, 1)]))
    reduced = augmented.row_reduce()
    coefficients = GF.Zeros(M.rows)
    for row in reduced:
        nonzero = np.flatnonzero(row.view(np.ndarray))
        if nonzero.size == 0:
            continue
        pivot = nonzero[0]
        if pivot == M.rows:
            return None
        coefficients[pivot] = row[-1]

    if not np.array_equal((coefficients @ M.array).view(np.ndarray), target.view(np.ndarray)):
        raise ArithmeticError("row space solution does not reproduce the target vector")
    coefficients.flags.writeable = False
    return coefficients


def in_row_space(M: FieldMatrix, v) -> bool:
    return solve_in_row_space(M, v) is not None


def combine(coefficients, M: FieldMatrix):
    """
    係数ベクトルと行列の積 c·M
    """
    if M.rows == 0:
        return M.field().Zeros(M.cols)
    return _as_field_vector(coefficients, M.modulus) @ M.array


@functools.lru_cache(maxsize=None)
def subspace_bases(support: Tuple[int, ...], n: int, modulus: int, dim: int) -> Tuple[Basis, ...]:
    """
    span{e_j : j ∈ support} の dim 次元部分空間を全て列挙する。
    各部分空間は既約行階段形の基底で表し、辞書式順に並べて返す
    """
    support = tuple(sorted(support))
    m = len(support)
    if dim < 0 or dim > m:
        return ()
    if dim == 0:
        return ((),)
    bases = []
    for pivots in itertools.combinations(range(m), dim):
        pivot_set = set(pivots)
        free_slots = [(r, j) for r, p in enumerate(pivots) for j in range(p + 1, m) if j not in pivot_set]
        for values in itertools.product(range(modulus), repeat=len(free_slots)):
            local = [[0] * m for _ in range(dim)]
            for r, p in enumerate(pivots):
                local[r][p] = 1
            for (r, j), value in zip(free_slots, values):
                local[r][j] = value
            basis = []
            for local_row in local:
                full = [0] * n
                for j, value in enumerate(local_row):
                    full[support[j]] = value
                basis.append(tuple(full))
            bases.append(tuple(basis))
    bases.sort()
    return tuple(bases)


def all_subspace_bases(support: Tuple[int, ...], n: int, modulus: int,
                       max_dim: Optional[int] = None) -> List[Basis]:
    """
    次元 0..max_dim の部分空間を辞書式順にまとめて返す（空の基底が先頭）
    """
    top = len(support) if max_dim is None else min(max_dim, len(support))
    merged = []
    for dim in range(top + 1):
        merged.extend(subspace_bases(tuple(sorted(support)), n, modulus, dim))
    merged.sort()
    return merged


def enumerate_subspaces(support: Iterable[int], n: int, modulus: int, dim: int) -> Iterable[Basis]:
    """
    subspace_bases のジェネレータ版
    """
    yield from subspace_bases(tuple(sorted(support)), n, modulus, dim)
