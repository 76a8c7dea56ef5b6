import argparse
import logging
import sys
from typing import List, Optional

from app import bounds, experiment, file_handler, formatter, generator, multiround, one_round, protocol_sim, validator
from app.errors import EXIT_INPUT_ERROR, EXIT_OK, DissemError, InstanceFileError
from app.instance import bipartite_roles, check_feasibility, is_bipartite
from app.network import solvability_index
from app.settings import get_default_seed, get_log_level

logger = logging.getLogger(__name__)


def _response(body: dict, text: str, exit_code: int = EXIT_OK) -> dict:
    return {'exit_code': exit_code, 'body': body, 'text': text}


def _load_instance(path: str):
    try:
        return file_handler.read_instance(path)
    except OSError as e:
        raise InstanceFileError(f"cannot read {path}: {e.strerror}")


def _load_scheme(path: str):
    try:
        return validator.load_scheme(file_handler.read_text(path))
    except OSError as e:
        raise InstanceFileError(f"cannot read {path}: {e.strerror}")


def handle_solve(args) -> dict:
    """
    1ラウンドでの最小送信回数を求め、各ノードの送信と復号表を返す
    """
    inst = _load_instance(args.instance)
    seed = get_default_seed(args.seed)
    strategy = one_round.METHOD_HEURISTIC if args.heuristic else one_round.METHOD_EXACT
    result = one_round.solve(inst, strategy=strategy, seed=seed, iterations=args.iterations,
                             max_per_node=args.max_per_node)
    decodes = []
    for node in range(inst.k):
        for symbol in sorted(inst.request[node]):
            coefficients = one_round.decode(inst, result.scheme, node, symbol)
            decodes.append(validator.serialize_decode(node, symbol, coefficients))
    return _response(validator.serialize_one_round(result, decodes), formatter.format_one_round(result, decodes))


def handle_bounds(args) -> dict:
    inst = _load_instance(args.instance)
    body = validator.serialize_bounds(bounds.compute_bounds(inst))
    return _response(body, formatter.format_bounds(body))


def handle_multiround(args) -> dict:
    """
    r ラウンド（省略時は r₀）のスケジュールを作る
    """
    inst = _load_instance(args.instance)
    scheme = multiround.schedule(inst, args.rounds, strategy=args.strategy, seed=get_default_seed(args.seed))
    body = validator.serialize_scheme(scheme)
    body['fallback'] = scheme.fallback
    return _response(body, formatter.format_scheme(scheme))


def handle_simulate(args) -> dict:
    inst = _load_instance(args.instance)
    scheme = _load_scheme(args.scheme)
    transcript = protocol_sim.execute(inst, scheme)
    return _response(validator.serialize_transcript(transcript), formatter.format_transcript(transcript))


def handle_gen(args) -> dict:
    """
    直径を固定したランダムインスタンスを生成し、コーパスディレクトリに保存する
    """
    seed = get_default_seed(args.seed)
    corpus = generator.generate_corpus(args.nodes, args.symbols, args.diameter, args.count, seed, args.field)
    store = file_handler.CorpusStore(args.out)
    saved = store.save_instances(corpus)
    body = {'format': validator.FORMAT_VERSION, 'directory': store.directory, 'seed': seed, 'files': saved}
    exit_code = EXIT_OK if len(saved) == len(corpus) else EXIT_INPUT_ERROR
    return _response(body, f"generated {len(saved)} instance(s) in {store.directory}", exit_code)


def handle_experiment(args) -> dict:
    """
    --corpus を指定した場合は生成せず、保存済みのインスタンスで実験する
    """
    options = {'strategy': args.strategy, 'workers': args.workers}
    if args.corpus:
        options['instances'] = file_handler.CorpusStore(args.corpus).load_instances()
    report = experiment.run_experiment(args.nodes, args.symbols, args.diameter, args.count, args.seed, **options)
    body = experiment.serialize_report(report)
    if args.out:
        store = file_handler.CorpusStore(args.out)
        store.save_report('report.json', body)
        store.save_csv('ratios.csv', experiment.CSV_HEADER, report.csv_rows())
    return _response(body, formatter.format_experiment(report))


def handle_check(args) -> dict:
    """
    インスタンスを検証し、実行可能性・2部構造・r₀ を報告する
    """
    inst = _load_instance(args.instance)
    missing = check_feasibility(inst)
    bipartite = is_bipartite(inst)
    body = {
        'format': validator.FORMAT_VERSION,
        'valid': True,
        'feasible': not missing,
        'unreachable': [{'node': node + 1, 'symbol': symbol + 1} for node, symbol in missing],
        'bipartite': bipartite,
        'r0': solvability_index(inst.net),
    }
    if bipartite:
        roles = bipartite_roles(inst)
        body['transmitters'] = [node + 1 for node in roles.transmitters]
    text = '\n'.join(f"{key}: {value}" for key, value in body.items() if key != 'format')
    return _response(body, text)


HANDLERS = {
    'solve': handle_solve,
    'bounds': handle_bounds,
    'multiround': handle_multiround,
    'simulate': handle_simulate,
    'gen': handle_gen,
    'experiment': handle_experiment,
    'check': handle_check,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='dissem', description='Linear data dissemination over directed networks')
    parser.add_argument('--json', action='store_true', help='print only the JSON body')
    parser.add_argument('--output', help='also write the JSON body to this file')
    parser.add_argument('--verbose', '-v', action='store_true')
    sub = parser.add_subparsers(dest='command', required=True)

    solve = sub.add_parser('solve', help='minimum one-round transmissions')
    solve.add_argument('instance')
    method = solve.add_mutually_exclusive_group()
    method.add_argument('--exact', action='store_true', help='exhaustive search (default)')
    method.add_argument('--heuristic', action='store_true')
    solve.add_argument('--seed', type=int)
    solve.add_argument('--iterations', type=int, default=one_round.DEFAULT_ITERATIONS)
    solve.add_argument('--max-per-node', '--cap', dest='max_per_node', type=int)

    bounds_parser = sub.add_parser('bounds', help='lower and upper bounds')
    bounds_parser.add_argument('instance')

    multi = sub.add_parser('multiround', help='multi-round schedule')
    multi.add_argument('instance')
    multi.add_argument('--rounds', type=int)
    multi.add_argument('--strategy', choices=multiround.STRATEGIES, default=multiround.STRATEGY_EXACT)
    multi.add_argument('--seed', type=int)

    simulate = sub.add_parser('simulate', help='execute a scheme symbolically')
    simulate.add_argument('instance')
    simulate.add_argument('scheme')

    gen = sub.add_parser('gen', help='generate random instances')
    gen.add_argument('--nodes', type=int, required=True)
    gen.add_argument('--symbols', type=int, required=True)
    gen.add_argument('--diameter', type=int, required=True)
    gen.add_argument('--count', type=int, default=1)
    gen.add_argument('--seed', type=int)
    gen.add_argument('--field', type=int, default=2)
    gen.add_argument('--out')

    exp = sub.add_parser('experiment', help='ratio histogram over a random corpus')
    exp.add_argument('--nodes', type=int, default=4)
    exp.add_argument('--symbols', type=int, default=4)
    exp.add_argument('--diameter', type=int, default=2)
    exp.add_argument('--count', type=int, default=50)
    exp.add_argument('--seed', type=int)
    exp.add_argument('--strategy', choices=multiround.STRATEGIES, default=multiround.STRATEGY_EXACT)
    exp.add_argument('--workers', type=int, default=1)
    exp.add_argument('--corpus', help='read instances saved by gen instead of generating')
    exp.add_argument('--out')

    check = sub.add_parser('check', help='validate an instance')
    check.add_argument('instance')
    return parser


def dispatch(args) -> dict:
    """
    コマンドを実行する。ライブラリの例外はここで終了コード付きの応答に変換する
    """
    try:
        return HANDLERS[args.command](args)
    except DissemError as e:
        logger.error("%s: %s", type(e).__name__, e)
        return _response(e.to_dict(), f"error: {e}", e.exit_code)


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level='INFO' if args.verbose else get_log_level(),
                        format='%(levelname)s %(name)s: %(message)s')

    response = dispatch(args)
    rendered = validator.dumps(response['body'])
    if args.output:
        file_handler.write_text(args.output, rendered + '\n')
    if args.json:
        print(rendered)
    else:
        print(response['text'])
    return response['exit_code']


if __name__ == '__main__':
    sys.exit(main())
