"""
CLI の人間向け出力（表）。番号は全て1始まりで表示する
"""
from typing import List, Sequence

from app.experiment import BIN_LABELS, NO_INSTANCES, ExperimentReport
from app.multiround import MultiRoundScheme
from app.one_round import OneRoundResult
from app.protocol_sim import Transcript


def format_vector(vector: Sequence[int]) -> str:
    """
    (1, 1, 0) → 'x1 + x2'。係数が 1 でなければ '2·x1' のように書く
    """
    terms = []
    for index, value in enumerate(vector):
        if value == 0:
            continue
        terms.append(f"x{index + 1}" if value == 1 else f"{value}·x{index + 1}")
    return ' + '.join(terms) if terms else '0'


def _table(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    cells = [[str(value) for value in header]] + [[str(value) for value in row] for row in rows]
    widths = [max(len(row[i]) for row in cells) for i in range(len(header))]
    lines = ['  '.join(value.ljust(width) for value, width in zip(row, widths)).rstrip() for row in cells]
    lines.insert(1, '  '.join('-' * width for width in widths))
    return '\n'.join(lines)


def format_one_round(result: OneRoundResult, decodes: List[dict]) -> str:
    lines = [f"tau: {result.tau}", f"method: {result.method}" + (' (fallback)' if result.fallback else '')]
    rows = [(node + 1, format_vector(vector))
            for node, vectors in enumerate(result.scheme.vectors) for vector in vectors]
    if rows:
        lines += ['', _table(('node', 'transmits'), rows)]
    if decodes:
        decode_rows = []
        for item in decodes:
            received = ' + '.join(f"{a}·[v{sender} #{row}]" for a, (sender, row) in zip(item['alpha'], item['senders'])
                                  if a) or '-'
            own = format_vector(item['beta'])
            decode_rows.append((item['node'], f"x{item['symbol']}", received, own))
        lines += ['', _table(('node', 'symbol', 'received', 'own'), decode_rows)]
    return '\n'.join(lines)


def format_bounds(body: dict) -> str:
    rows = [(f"lower/{name}", value) for name, value in body['lower'].items()]
    rows += [(f"upper/{name}", value) for name, value in body['upper'].items()]
    return _table(('bound', 'value'), rows)


def format_scheme(scheme: MultiRoundScheme) -> str:
    lines = [f"rounds: {scheme.r}", f"tau: {scheme.tau_total}",
             f"per round: {' '.join(str(tau) for tau in scheme.per_round_tau)}"]
    rows = [(round_scheme.round_index, node + 1, format_vector(vector))
            for round_scheme in scheme.rounds
            for node, vectors in enumerate(round_scheme.vectors) for vector in vectors]
    if rows:
        lines += ['', _table(('round', 'node', 'transmits'), rows)]
    return '\n'.join(lines)


def format_transcript(transcript: Transcript) -> str:
    status = 'all requests satisfied' if transcript.all_satisfied else \
        f"{len(transcript.unsatisfied())} request(s) unsatisfied"
    rows = [(item.node + 1, f"x{item.symbol + 1}", 'ok' if item.satisfied else 'missing')
            for item in transcript.recovery]
    lines = [status]
    if rows:
        lines += ['', _table(('node', 'symbol', 'status'), rows)]
    return '\n'.join(lines)


def format_histogram(report: ExperimentReport) -> str:
    if report.empty:
        return NO_INSTANCES
    rows = [('Range',) + BIN_LABELS, ('Occurrence, %',) + tuple(report.percentages())]
    widths = [max(len(str(row[i])) for row in rows) for i in range(len(rows[0]))]
    return '\n'.join('  '.join(str(value).ljust(width) for value, width in zip(row, widths)).rstrip()
                     for row in rows)


def format_experiment(report: ExperimentReport) -> str:
    lines = [f"instances: {len(report.succeeded)} (excluded: {report.failed})", '', format_histogram(report)]
    return '\n'.join(lines)
