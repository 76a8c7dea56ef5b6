"""
インスタンス/スキームファイル（JSON）の検証・読み込み・書き出し。

ノード番号とシンボル番号はファイル上では1始まり、内部では0始まり。
"""
import json
import logging
from typing import Any, Dict, List, Optional

from app.bounds import BoundsReport
from app.errors import DissemError, InstanceFileError
from app.instance import DisseminationInstance, check_feasibility
from app.multiround import MultiRoundScheme
from app.network import DirectedNetwork
from app.one_round import DecodeCoefficients, OneRoundResult, TransmissionScheme
from app.protocol_sim import Transcript

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1

INSTANCE_KEYS = {'format', 'field', 'n', 'nodes', 'edges', 'possess', 'request'}
SCHEME_KEYS = {'format', 'kind', 'field', 'n', 'nodes', 'rounds', 'tau', 'per_round_tau', 'methods'}
ROUND_KEYS = {'round', 'transmissions'}


def _line_of(text: Optional[str], key: str) -> Optional[int]:
    """
    "key" が最初に現れる行番号（見つからなければ None）
    """
    if not text:
        return None
    needle = f'"{key}"'
    for number, line in enumerate(text.splitlines(), start=1):
        if needle in line:
            return number
    return None


def _fail(message: str, text: Optional[str] = None, key: Optional[str] = None):
    raise InstanceFileError(message, _line_of(text, key) if key else None)


def load_json(text: str) -> Dict[str, Any]:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise InstanceFileError(f"invalid JSON: {e.msg}", e.lineno)
    if not isinstance(data, dict):
        raise InstanceFileError("the top level must be a JSON object", 1)
    return data


def _is_int(value) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


def _check_format(data: Dict[str, Any], text: Optional[str]):
    if 'format' in data and data['format'] != FORMAT_VERSION:
        _fail(f"unsupported format {data['format']!r}; expected {FORMAT_VERSION}", text, 'format')


def _check_keys(data: Dict[str, Any], allowed: set, required: set, text: Optional[str], where: str):
    unknown = sorted(set(data) - allowed)
    if unknown:
        _fail(f"unknown key(s) in {where}: {', '.join(unknown)}", text, unknown[0])
    missing = sorted(required - set(data))
    if missing:
        _fail(f"missing key(s) in {where}: {', '.join(missing)}")


def _positive_int(data: Dict[str, Any], key: str, text: Optional[str], minimum: int = 1) -> int:
    value = data[key]
    if not _is_int(value) or value < minimum:
        _fail(f"'{key}' must be an integer ≥ {minimum}, got {value!r}", text, key)
    return value


def _node_sets(data: Dict[str, Any], key: str, k: int, n: int, text: Optional[str]) -> List[frozenset]:
    raw = data.get(key, {})
    if not isinstance(raw, dict):
        _fail(f"'{key}' must map node numbers to symbol lists", text, key)
    sets = [frozenset() for _ in range(k)]
    for node_key, symbols in raw.items():
        try:
            node = int(node_key)
        except ValueError:
            _fail(f"'{key}' has a non-numeric node key {node_key!r}", text, key)
        if not 1 <= node <= k:
            _fail(f"'{key}' refers to node {node} outside 1..{k}", text, key)
        if not isinstance(symbols, list) or not all(_is_int(s) for s in symbols):
            _fail(f"'{key}' of node {node} must be a list of symbol numbers", text, key)
        for symbol in symbols:
            if not 1 <= symbol <= n:
                _fail(f"'{key}' of node {node} refers to symbol {symbol} outside 1..{n}", text, key)
        if len(set(symbols)) != len(symbols):
            _fail(f"'{key}' of node {node} lists a symbol twice", text, key)
        sets[node - 1] = frozenset(symbol - 1 for symbol in symbols)
    return sets


def parse_instance(data: Dict[str, Any], text: Optional[str] = None) -> DisseminationInstance:
    """
    辞書からインスタンスを作る。未知のキー・範囲外の番号・所持と要求の重複は InstanceFileError
    """
    _check_keys(data, INSTANCE_KEYS, {'field', 'n', 'nodes', 'edges'}, text, 'instance')
    _check_format(data, text)
    q = _positive_int(data, 'field', text, minimum=2)
    n = _positive_int(data, 'n', text, minimum=0)
    k = _positive_int(data, 'nodes', text)

    edges = data['edges']
    if not isinstance(edges, list):
        _fail("'edges' must be a list of [u, v] pairs", text, 'edges')
    pairs = []
    for edge in edges:
        if (not isinstance(edge, list) or len(edge) != 2 or not all(_is_int(v) for v in edge)):
            _fail(f"invalid edge {edge!r}; expected [u, v]", text, 'edges')
        u, v = edge
        if not (1 <= u <= k and 1 <= v <= k):
            _fail(f"edge [{u}, {v}] refers to a node outside 1..{k}", text, 'edges')
        if u == v:
            _fail(f"edge [{u}, {v}] is a self-loop", text, 'edges')
        pairs.append((u - 1, v - 1))
    if len(set(pairs)) != len(pairs):
        _fail("'edges' contains a parallel edge", text, 'edges')

    possess = _node_sets(data, 'possess', k, n, text)
    request = _node_sets(data, 'request', k, n, text)
    try:
        inst = DisseminationInstance(n, DirectedNetwork(k, frozenset(pairs)), tuple(possess), tuple(request), q)
    except DissemError as e:
        _fail(str(e), text, 'request')
    check_feasibility(inst)
    return inst


def load_instance(text: str) -> DisseminationInstance:
    return parse_instance(load_json(text), text)


def serialize_instance(inst: DisseminationInstance) -> Dict[str, Any]:
    return {
        'format': FORMAT_VERSION,
        'field': inst.q,
        'n': inst.n,
        'nodes': inst.k,
        'edges': [[u + 1, v + 1] for u, v in inst.net.sorted_edges()],
        'possess': {str(node + 1): sorted(s + 1 for s in symbols)
                    for node, symbols in enumerate(inst.possess) if symbols},
        'request': {str(node + 1): sorted(s + 1 for s in symbols)
                    for node, symbols in enumerate(inst.request) if symbols},
    }


# --- スキーム ---

def _parse_round(raw, index: int, q: int, n: int, k: int, text: Optional[str]) -> TransmissionScheme:
    if not isinstance(raw, dict):
        _fail(f"round {index} must be an object", text, 'rounds')
    _check_keys(raw, ROUND_KEYS, {'transmissions'}, text, f"round {index}")
    transmissions = raw['transmissions']
    if not isinstance(transmissions, dict):
        _fail(f"round {index}: 'transmissions' must map node numbers to vector lists", text, 'transmissions')
    vectors = [() for _ in range(k)]
    for node_key, rows in transmissions.items():
        try:
            node = int(node_key)
        except ValueError:
            _fail(f"round {index}: non-numeric node key {node_key!r}", text, 'transmissions')
        if not 1 <= node <= k:
            _fail(f"round {index}: node {node} outside 1..{k}", text, 'transmissions')
        if not isinstance(rows, list):
            _fail(f"round {index}: node {node} must list its coding vectors", text, 'transmissions')
        parsed = []
        for row in rows:
            if (not isinstance(row, list) or len(row) != n
                    or not all(_is_int(value) and 0 <= value < q for value in row)):
                _fail(f"round {index}: node {node} has an invalid coding vector {row!r}", text, 'transmissions')
            parsed.append(tuple(row))
        vectors[node - 1] = tuple(parsed)
    return TransmissionScheme(n, q, tuple(vectors), index)


def parse_scheme(data: Dict[str, Any], text: Optional[str] = None) -> MultiRoundScheme:
    _check_keys(data, SCHEME_KEYS, {'field', 'n', 'nodes', 'rounds'}, text, 'scheme')
    _check_format(data, text)
    q = _positive_int(data, 'field', text, minimum=2)
    n = _positive_int(data, 'n', text, minimum=0)
    k = _positive_int(data, 'nodes', text)
    if not isinstance(data['rounds'], list):
        _fail("'rounds' must be a list", text, 'rounds')
    rounds = [_parse_round(raw, index, q, n, k, text) for index, raw in enumerate(data['rounds'], start=1)]
    scheme = MultiRoundScheme.from_rounds(rounds, data.get('methods', ()))
    if 'tau' in data and data['tau'] != scheme.tau_total:
        _fail(f"'tau' is {data['tau']} but the rounds carry {scheme.tau_total} vectors", text, 'tau')
    return scheme


def load_scheme(text: str) -> MultiRoundScheme:
    return parse_scheme(load_json(text), text)


def _round_to_dict(round_scheme: TransmissionScheme) -> Dict[str, Any]:
    return {
        'round': round_scheme.round_index,
        'transmissions': {str(node + 1): [list(row) for row in rows]
                          for node, rows in enumerate(round_scheme.vectors) if rows},
    }


def serialize_scheme(scheme) -> Dict[str, Any]:
    """
    MultiRoundScheme または1ラウンドの TransmissionScheme を辞書にする
    """
    if isinstance(scheme, TransmissionScheme):
        scheme = MultiRoundScheme.from_rounds([scheme])
    first = scheme.rounds[0] if scheme.rounds else None
    body = {
        'format': FORMAT_VERSION,
        'kind': 'scheme',
        'field': first.q if first else 2,
        'n': first.n if first else 0,
        'nodes': first.k if first else 1,
        'rounds': [_round_to_dict(round_scheme) for round_scheme in scheme.rounds],
        'tau': scheme.tau_total,
        'per_round_tau': list(scheme.per_round_tau),
    }
    if scheme.methods:
        body['methods'] = list(scheme.methods)
    return body


# --- 結果・レポート ---

def serialize_decode(node: int, symbol: int, coefficients: DecodeCoefficients) -> Dict[str, Any]:
    return {
        'node': node + 1,
        'symbol': symbol + 1,
        'alpha': list(coefficients.alpha),
        'senders': [[sender + 1, row + 1] for sender, row in coefficients.senders],
        'beta': list(coefficients.beta),
    }


def serialize_one_round(result: OneRoundResult, decodes: List[Dict[str, Any]]) -> Dict[str, Any]:
    body = {
        'format': FORMAT_VERSION,
        'tau': result.tau,
        'method': result.method,
        'fallback': result.fallback,
        'ranks': {str(node + 1): value for node, value in enumerate(result.ranks)},
        'scheme': serialize_scheme(result.scheme),
        'decode': decodes,
    }
    return body


def serialize_bounds(report: BoundsReport) -> Dict[str, Any]:
    def value_or_reason(name: str, value):
        return value if value is not None else f"n/a: {report.notes.get(name, 'not computed')}"

    return {
        'format': FORMAT_VERSION,
        'lower': {
            'dmax': report.dmax,
            'alpha': value_or_reason('alpha', report.alpha),
            'minrank2': value_or_reason('minrank2', report.minrank2),
        },
        'upper': {
            'clique_cover': value_or_reason('clique_cover', report.clique_cover),
            'partition': value_or_reason('partition', report.partition),
        },
        'witnesses': {
            'independent_set': None if report.independent_set is None
            else [vertex + 1 for vertex in report.independent_set],
            'clique_cover': None if report.clique_cover_witness is None
            else [[vertex + 1 for vertex in group] for group in report.clique_cover_witness],
            'partition': None if report.partition_witness is None
            else {str(symbol + 1): transmitter + 1 for symbol, transmitter in enumerate(report.partition_witness)},
            'partition_clique_cover': report.partition_clique_cover,
            'partition_greedy': report.partition_greedy,
        },
    }


def serialize_transcript(transcript: Transcript) -> Dict[str, Any]:
    return {
        'format': FORMAT_VERSION,
        'kind': 'transcript',
        'rounds': [
            {
                'round': log.index,
                'broadcasts': {str(node + 1): [list(row) for row in rows]
                               for node, rows in enumerate(log.broadcasts) if rows},
                'receptions': [[receiver + 1, sender + 1, position + 1]
                               for receiver, sender, position in log.receptions],
            }
            for log in transcript.rounds
        ],
        'knowledge_dims': [list(dims) for dims in transcript.knowledge_dims],
        'recovery': [
            {
                'node': item.node + 1,
                'symbol': item.symbol + 1,
                'satisfied': item.satisfied,
                'coefficients': None if item.coefficients is None else list(item.coefficients),
            }
            for item in transcript.recovery
        ],
        'all_satisfied': transcript.all_satisfied,
    }


def dumps(body: Dict[str, Any]) -> str:
    return json.dumps(body, ensure_ascii=False, indent=2)
