import json
import os
from fractions import Fraction
from unittest.mock import patch

import pytest

import cli
from app.errors import EXIT_CAP_EXCEEDED, EXIT_INPUT_ERROR, EXIT_OK, EXIT_UNSOLVABLE, SearchCapExceeded
from app.experiment import ExperimentReport, InstanceOutcome
from app.file_handler import CorpusStore, write_text
from app.validator import dumps, serialize_instance


@pytest.fixture
def three_cycle_path(tmp_path, three_cycle_instance):
    path = tmp_path / 'cycle.json'
    write_text(str(path), dumps(serialize_instance(three_cycle_instance)))
    return str(path)


def run(capsys, *argv):
    code = cli.main(['--json', *argv])
    out = capsys.readouterr().out
    return code, json.loads(out)


class TestSolveCommand:

    def test_solve_five_node_instance(self, capsys, five_node_instance_path):
        """基本例で tau=2 と全ての復号係数を出力すること"""
        code, body = run(capsys, 'solve', five_node_instance_path)

        assert code == EXIT_OK
        assert body['tau'] == 2
        assert body['scheme']['rounds'][0]['transmissions'] == {'1': [[1, 1, 0]], '2': [[0, 1, 1]]}
        assert len(body['decode']) == 5
        assert body['decode'][-1] == {'node': 5, 'symbol': 2, 'alpha': [1], 'senders': [[2, 1]], 'beta': [0, 0, 1]}

    def test_solve_heuristic(self, capsys, five_node_instance_path):
        """--heuristic ではヒューリスティックの結果を出力すること"""
        code, body = run(capsys, 'solve', five_node_instance_path, '--heuristic', '--seed', '3')

        assert code == EXIT_OK
        assert body['method'] == 'heuristic'
        assert body['tau'] >= 2

    def test_solve_not_one_round_solvable(self, capsys, three_cycle_path):
        """1ラウンドで解けない場合は終了コード2と証明を出力すること"""
        code, body = run(capsys, 'solve', three_cycle_path)

        assert code == EXIT_UNSOLVABLE
        assert body['error'] == 'NotOneRoundSolvable'
        assert body['certificate'][0] == {'node': 1, 'symbol': 2}

    def test_missing_file(self, capsys, tmp_path):
        """ファイルが無い場合は終了コード1を返すこと"""
        code, body = run(capsys, 'solve', str(tmp_path / 'nothing.json'))

        assert code == EXIT_INPUT_ERROR
        assert body['error'] == 'InstanceFileError'

    def test_text_output(self, capsys, five_node_instance_path):
        """--json を付けない場合は表を出力すること"""
        assert cli.main(['solve', five_node_instance_path]) == EXIT_OK
        assert capsys.readouterr().out.startswith('tau: 2')

    def test_output_file(self, capsys, five_node_instance_path, tmp_path):
        """--output で JSON をファイルにも書き出すこと"""
        out = tmp_path / 'result.json'

        cli.main(['--output', str(out), 'solve', five_node_instance_path])

        assert json.loads(out.read_text(encoding='utf-8'))['tau'] == 2


class TestOtherCommands:

    def test_bounds(self, capsys, five_node_instance_path):
        """bounds で dmax を出力すること"""
        code, body = run(capsys, 'bounds', five_node_instance_path)

        assert code == EXIT_OK
        assert body['lower']['dmax'] == 2

    @patch('cli.bounds.compute_bounds')
    def test_cap_exceeded_exit_code(self, mock_compute, capsys, five_node_instance_path):
        """上限超過は終了コード3になること"""
        mock_compute.side_effect = SearchCapExceeded('too big')

        code, body = run(capsys, 'bounds', five_node_instance_path)

        assert code == EXIT_CAP_EXCEEDED
        assert body == {'error': 'SearchCapExceeded', 'message': 'too big'}

    def test_multiround(self, capsys, three_cycle_path):
        """multiround で r₀ ラウンドのスケジュールを出力すること"""
        code, body = run(capsys, 'multiround', three_cycle_path)

        assert code == EXIT_OK
        assert body['tau'] == 6
        assert body['per_round_tau'] == [3, 3]
        assert body['fallback'] is False

    def test_multiround_too_few_rounds(self, capsys, three_cycle_path):
        """r₀ より少ないラウンド数は終了コード2になること"""
        code, body = run(capsys, 'multiround', three_cycle_path, '--rounds', '1')

        assert code == EXIT_UNSOLVABLE
        assert body['r0'] == 2

    def test_simulate(self, capsys, five_node_instance_path, five_node_scheme_path):
        """simulate でスキームを実行し全ての要求が満たされること"""
        code, body = run(capsys, 'simulate', five_node_instance_path, five_node_scheme_path)

        assert code == EXIT_OK
        assert body['all_satisfied'] is True

    def test_check(self, capsys, five_node_instance_path):
        """check で実行可能性と2部構造を報告すること"""
        code, body = run(capsys, 'check', five_node_instance_path)

        assert code == EXIT_OK
        assert body['feasible'] is True
        assert body['bipartite'] is False
        assert body['r0'] is None

    def test_gen(self, capsys, tmp_path):
        """gen で指定した数のインスタンスファイルを保存すること"""
        out = tmp_path / 'corpus'

        code, body = run(capsys, 'gen', '--nodes', '3', '--symbols', '2', '--diameter', '1',
                         '--count', '2', '--seed', '1', '--out', str(out))

        assert code == EXIT_OK
        assert sorted(os.listdir(out)) == ['instance_0000.json', 'instance_0001.json']
        assert body['seed'] == 1

    @patch('cli.experiment.run_experiment')
    def test_experiment(self, mock_run, capsys, tmp_path):
        """experiment でヒストグラムを出力し、--out にレポートと CSV を保存すること"""
        mock_run.return_value = ExperimentReport(4, 4, 2, 1, 7, outcomes=[InstanceOutcome(0, 4, 2, Fraction(2))])
        out = tmp_path / 'exp'

        code, body = run(capsys, 'experiment', '--seed', '7', '--out', str(out))

        assert code == EXIT_OK
        assert body['histogram']['Occurrence, %'] == [0, 0, 0, 0, 0, 100]
        assert (out / 'report.json').exists()
        assert (out / 'ratios.csv').read_text(encoding='utf-8').splitlines()[1] == '1,4,2,2.0'
        mock_run.assert_called_once_with(4, 4, 2, 50, 7, strategy='exact', workers=1)

    def test_experiment_on_saved_corpus(self, capsys, tmp_path, three_cycle_instance):
        """--corpus で保存済みのインスタンスを読んで実験すること"""
        # Given: 有向3閉路を2つ保存したコーパス
        store = CorpusStore(str(tmp_path / 'saved'))
        store.save_instances([three_cycle_instance, three_cycle_instance])

        # When
        code, body = run(capsys, 'experiment', '--corpus', store.directory, '--seed', '1')

        # Then
        assert code == EXIT_OK
        assert body['parameters']['count'] == 2
        assert [entry['ratio'] for entry in body['instances']] == ['2', '2']
        assert body['histogram']['Occurrence, %'] == [0, 0, 0, 0, 0, 100]

    def test_experiment_on_empty_corpus(self, capsys, tmp_path):
        """インスタンスの無いディレクトリでは 'no instances' になること"""
        code, body = run(capsys, 'experiment', '--corpus', str(tmp_path / 'missing'))

        assert code == EXIT_OK
        assert body['histogram'] == 'no instances'

    def test_missing_command(self):
        """サブコマンドが無い場合は argparse のエラーで終了すること"""
        with pytest.raises(SystemExit):
            cli.main([])
