from typing import Iterable, List, Optional, Tuple

EXIT_OK = 0
EXIT_INPUT_ERROR = 1
EXIT_UNSOLVABLE = 2
EXIT_CAP_EXCEEDED = 3


class DissemError(Exception):
    """
    全ての例外の基底クラス。CLIの終了コードを保持する
    """
    exit_code = EXIT_INPUT_ERROR

    def to_dict(self) -> dict:
        return {'error': type(self).__name__, 'message': str(self)}


# --- 入力エラー (exit 1) ---

class FieldError(DissemError):
    pass


class DimensionError(DissemError):
    pass


class InstanceError(DissemError):
    pass


class InstanceFileError(DissemError):
    """
    インスタンス/スキームファイルの解析・検証エラー。行番号が分かる場合は保持する
    """

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)

    def to_dict(self) -> dict:
        body = super().to_dict()
        body['line'] = self.line
        return body


class SchemeError(DissemError):
    pass


class SupportViolation(DissemError):
    pass


class IllegalTransmission(DissemError):
    """
    送信ノードの知識空間に含まれないベクトルが送信された
    """

    def __init__(self, round_index: int, node: int, vector: Iterable[int]):
        self.round_index = round_index
        self.node = node
        self.vector = list(vector)
        # ノード番号は1始まりで表示する
        super().__init__(f"round {round_index}: node {node + 1} cannot transmit {self.vector}")

    def to_dict(self) -> dict:
        body = super().to_dict()
        body.update({'round': self.round_index, 'node': self.node + 1, 'vector': self.vector})
        return body


# --- 数学的に解けない (exit 2) ---

class UnsolvableError(DissemError):
    exit_code = EXIT_UNSOLVABLE


class NotOneRoundSolvable(UnsolvableError):
    """
    全ノードがフラッディングしても1ラウンドで満たせない要求がある。
    unmet は (ノード, シンボル) の組（いずれも0始まり）
    """

    def __init__(self, unmet: List[Tuple[int, int]]):
        self.unmet = list(unmet)
        pairs = ', '.join(f"(node {node + 1}, x{symbol + 1})" for node, symbol in self.unmet)
        super().__init__(f"not solvable in one round; unmet under flooding: {pairs}")

    def to_dict(self) -> dict:
        body = super().to_dict()
        body['certificate'] = [{'node': node + 1, 'symbol': symbol + 1} for node, symbol in self.unmet]
        return body


class NotSolvable(UnsolvableError):
    pass


class RoundsTooFew(UnsolvableError):

    def __init__(self, rounds: int, r0: int):
        self.rounds = rounds
        self.r0 = r0
        super().__init__(f"{rounds} rounds are too few; the network needs r0={r0}")

    def to_dict(self) -> dict:
        body = super().to_dict()
        body.update({'rounds': self.rounds, 'r0': self.r0})
        return body


class NoDecoding(UnsolvableError):
    pass


class NotBipartite(UnsolvableError):
    pass


class ReceiverUncovered(UnsolvableError):
    pass


class ZeroLowerBound(UnsolvableError):
    pass


# --- 上限超過 (exit 3) ---

class CapExceeded(DissemError):
    exit_code = EXIT_CAP_EXCEEDED


class SearchCapExceeded(CapExceeded):
    pass


class GenerationFailed(CapExceeded):
    pass
